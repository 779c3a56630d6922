#include "wirelift/pipeline.hpp"

#include "wirelift/interchange.hpp"
#include "wirelift/parallel.hpp"
#include "wirelift/scene_synth.hpp"

#include <chrono>
#include <set>

namespace wirelift {

namespace {

using nlohmann::json;

// One JSON object of the config with its dotted path, rejecting keys not
// listed in `allowed`.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw ConfigError(label() + "must be an object");
        }
        for (const auto& [key, value] : j_.items()) {
            if (!allowed.count(key)) {
                throw ConfigError("unknown key '" + qualified(key) + "'");
            }
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void get(const char* key, double& dst) const
    {
        if (has(key)) {
            expect(key, j_.at(key).is_number(), "a number");
            dst = j_.at(key).get<double>();
        }
    }
    void get(const char* key, int& dst) const
    {
        if (has(key)) {
            expect(key, j_.at(key).is_number_integer(), "an integer");
            dst = j_.at(key).get<int>();
        }
    }
    void get(const char* key, std::uint64_t& dst) const
    {
        if (has(key)) {
            const json& v = j_.at(key);
            expect(key, v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0),
                   "a non-negative integer");
            dst = j_.at(key).get<std::uint64_t>();
        }
    }
    void get(const char* key, bool& dst) const
    {
        if (has(key)) {
            expect(key, j_.at(key).is_boolean(), "a boolean");
            dst = j_.at(key).get<bool>();
        }
    }
    void get(const char* key, std::string& dst) const
    {
        if (has(key)) {
            expect(key, j_.at(key).is_string(), "a string");
            dst = j_.at(key).get<std::string>();
        }
    }
    template <typename T>
    void get_list(const char* key, std::vector<T>& dst) const
    {
        if (!has(key)) {
            return;
        }
        const json& arr = j_.at(key);
        expect(key, arr.is_array() && !arr.empty(), "a non-empty array");
        dst.clear();
        for (const auto& item : arr) {
            if constexpr (std::is_same_v<T, int>) {
                expect(key, item.is_number_integer(), "an array of integers");
            } else {
                expect(key, item.is_string(), "an array of strings");
            }
            dst.push_back(item.get<T>());
        }
    }

    void fail(const char* key, const std::string& what) const { throw ConfigError(qualified(key) + ": " + what); }

private:
    std::string label() const { return path_.empty() ? "config " : path_ + " "; }
    void expect(const char* key, bool ok, const char* what) const
    {
        if (!ok) {
            fail(key, std::string("expected ") + what);
        }
    }

    const json& j_;
    std::string path_;
};

} // namespace

PipelineConfig parse_pipeline_config(const json& j)
{
    PipelineConfig cfg;
    const Section root(j, "",
                       {"version", "seed", "jobs", "out", "corpus", "detector", "selector", "solver", "evaluation"});
    root.get("version", cfg.version);
    if (cfg.version != 1) {
        root.fail("version", "unsupported version " + std::to_string(cfg.version));
    }
    root.get("seed", cfg.seed);
    root.get("jobs", cfg.jobs);
    if (cfg.jobs < 1) {
        root.fail("jobs", "must be at least 1");
    }
    std::string out = cfg.out.string();
    root.get("out", out);
    cfg.out = out;

    if (root.has("corpus")) {
        const Section s(root.at("corpus"), "corpus", {"dir", "generate"});
        std::string dir;
        s.get("dir", dir);
        cfg.corpus_dir = dir;
        if (s.has("generate")) {
            const Section g(s.at("generate"), "corpus.generate", {"n", "seed", "families", "allow_disconnected"});
            GenerateConfig gen;
            gen.seed = cfg.seed;
            g.get("n", gen.n);
            if (gen.n < 1) {
                g.fail("n", "must be at least 1");
            }
            g.get("seed", gen.seed);
            g.get("families", gen.families);
            if (!gen.families.empty()) {
                try {
                    parse_family_mix(gen.families);
                } catch (const std::exception& e) {
                    g.fail("families", e.what());
                }
            }
            g.get("allow_disconnected", gen.allow_disconnected);
            cfg.generate = gen;
        }
    }

    DetectorConfig& det = cfg.eval.detector;
    if (root.has("detector")) {
        const Section s(root.at("detector"), "detector",
                        {"parallel_angle_max", "perpendicular_angle_min", "planarity_from_faces", "jlinkage",
                         "true2form"});
        s.get("parallel_angle_max", det.parallel_angle_max);
        s.get("perpendicular_angle_min", det.perpendicular_angle_min);
        s.get("planarity_from_faces", cfg.eval.detector_planarity);
        if (s.has("jlinkage")) {
            const Section jl(s.at("jlinkage"), "detector.jlinkage", {"num_hypotheses", "consistency_threshold", "seed"});
            jl.get("num_hypotheses", det.jlinkage.num_hypotheses);
            jl.get("consistency_threshold", det.jlinkage.consistency_threshold);
            jl.get("seed", det.jlinkage.seed);
        }
        if (s.has("true2form")) {
            const Section tf(s.at("true2form"), "detector.true2form", {"w_c", "sigma_alpha", "max_iters", "baseline_sigma"});
            tf.get("w_c", det.true2form.w_c);
            tf.get("sigma_alpha", det.true2form.sigma_alpha);
            tf.get("max_iters", det.true2form.max_iters);
            tf.get("baseline_sigma", cfg.eval.true2form_baseline_sigma);
        }
        try {
            det.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("detector: ") + e.what());
        }
    }

    SolveConfig& sol = cfg.eval.solver;
    if (root.has("selector")) {
        const Section s(root.at("selector"), "selector", {"eps_cons", "min_depth_ratio", "eps_qr", "qr_noise", "max_ls_iters"});
        s.get("eps_cons", sol.selector.eps_cons);
        s.get("min_depth_ratio", sol.selector.min_depth_ratio);
        s.get("eps_qr", sol.selector.eps_qr);
        s.get("qr_noise", sol.selector.qr_noise);
        s.get("max_ls_iters", sol.selector.max_ls_iters);
        if (!(sol.selector.eps_cons > 0.0) || !(sol.selector.eps_qr > 0.0) || !(sol.selector.qr_noise >= 0.0) ||
            !(sol.selector.min_depth_ratio >= 0.0 && sol.selector.min_depth_ratio < 1.0) ||
            sol.selector.max_ls_iters < 1) {
            throw ConfigError("selector: tolerances must be positive, qr_noise non-negative, min_depth_ratio in [0, 1) and max_ls_iters at least 1");
        }
    }
    if (root.has("solver")) {
        const Section s(root.at("solver"), "solver",
                        {"n_restarts", "init", "max_iters", "f_tol", "sat_tol", "root_tol", "method"});
        s.get("n_restarts", sol.n_restarts);
        if (sol.n_restarts < 1) {
            s.fail("n_restarts", "must be at least 1");
        }
        std::string init = sol.init.to_string();
        s.get("init", init);
        try {
            sol.init = InitStrategy::parse(init);
        } catch (const std::invalid_argument& e) {
            s.fail("init", e.what());
        }
        s.get("max_iters", sol.max_iters);
        s.get("f_tol", sol.f_tol);
        s.get("sat_tol", sol.sat_tol);
        s.get("root_tol", sol.root_tol);
        std::string method = sol.method == SolverMethod::Hybrid ? "hybrid" : "lm";
        s.get("method", method);
        if (method == "hybrid") {
            sol.method = SolverMethod::Hybrid;
        } else if (method == "lm") {
            sol.method = SolverMethod::LevenbergMarquardt;
        } else {
            s.fail("method", "expected 'hybrid' or 'lm'");
        }
        if (sol.max_iters < 1 || !(sol.f_tol > 0.0) || !(sol.sat_tol > 0.0) || !(sol.root_tol > 0.0)) {
            throw ConfigError("solver: max_iters must be at least 1 and tolerances positive");
        }
    }
    cfg.grid.inits = {sol.init};
    cfg.grid.restarts = {sol.n_restarts};

    if (root.has("evaluation")) {
        const Section s(root.at("evaluation"), "evaluation", {"sources", "inits", "restarts", "tau", "timing"});
        s.get_list("sources", cfg.grid.sources);
        for (const auto& src : cfg.grid.sources) {
            try {
                check_source(src);
            } catch (const std::invalid_argument& e) {
                s.fail("sources", e.what());
            }
        }
        std::vector<std::string> inits;
        s.get_list("inits", inits);
        if (!inits.empty()) {
            cfg.grid.inits.clear();
            for (const auto& text : inits) {
                try {
                    cfg.grid.inits.push_back(InitStrategy::parse(text));
                } catch (const std::invalid_argument& e) {
                    s.fail("inits", e.what());
                }
            }
        }
        s.get_list("restarts", cfg.grid.restarts);
        for (int n : cfg.grid.restarts) {
            if (n < 1) {
                s.fail("restarts", "every entry must be at least 1");
            }
        }
        s.get("tau", cfg.eval.tau);
        if (!(cfg.eval.tau > 0.0)) {
            s.fail("tau", "must be positive");
        }
        s.get("timing", cfg.timing);
    }
    cfg.eval.seed = cfg.seed;
    cfg.eval.jobs = cfg.jobs;
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path)
{
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    return parse_pipeline_config(j);
}

json pipeline_config_to_json(const PipelineConfig& cfg)
{
    const auto& det = cfg.eval.detector;
    const auto& sol = cfg.eval.solver;
    json j;
    j["version"] = cfg.version;
    j["seed"] = cfg.seed;
    j["jobs"] = cfg.jobs;
    j["out"] = cfg.out.string();
    j["corpus"]["dir"] = cfg.corpus_dir.string();
    if (cfg.generate) {
        j["corpus"]["generate"] = {{"n", cfg.generate->n},
                                   {"seed", cfg.generate->seed},
                                   {"families", cfg.generate->families},
                                   {"allow_disconnected", cfg.generate->allow_disconnected}};
    }
    j["detector"] = {{"parallel_angle_max", det.parallel_angle_max},
                     {"perpendicular_angle_min", det.perpendicular_angle_min},
                     {"planarity_from_faces", cfg.eval.detector_planarity},
                     {"jlinkage",
                      {{"num_hypotheses", det.jlinkage.num_hypotheses},
                       {"consistency_threshold", det.jlinkage.consistency_threshold},
                       {"seed", det.jlinkage.seed}}},
                     {"true2form",
                      {{"w_c", det.true2form.w_c},
                       {"sigma_alpha", det.true2form.sigma_alpha},
                       {"max_iters", det.true2form.max_iters},
                       {"baseline_sigma", cfg.eval.true2form_baseline_sigma}}}};
    j["selector"] = {{"eps_cons", sol.selector.eps_cons},
                     {"min_depth_ratio", sol.selector.min_depth_ratio},
                     {"eps_qr", sol.selector.eps_qr},
                     {"qr_noise", sol.selector.qr_noise},
                     {"max_ls_iters", sol.selector.max_ls_iters}};
    j["solver"] = {{"n_restarts", sol.n_restarts},
                   {"init", sol.init.to_string()},
                   {"max_iters", sol.max_iters},
                   {"f_tol", sol.f_tol},
                   {"sat_tol", sol.sat_tol},
                   {"root_tol", sol.root_tol},
                   {"method", sol.method == SolverMethod::Hybrid ? "hybrid" : "lm"}};
    std::vector<std::string> inits;
    for (const auto& i : cfg.grid.inits) {
        inits.push_back(i.to_string());
    }
    j["evaluation"] = {{"sources", cfg.grid.sources},
                       {"inits", inits},
                       {"restarts", cfg.grid.restarts},
                       {"tau", cfg.eval.tau},
                       {"timing", cfg.timing}};
    return j;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

} // namespace

AblationReport run_pipeline(const PipelineConfig& cfg)
{
    const auto start = std::chrono::steady_clock::now();
    const std::filesystem::path out = cfg.out;

    std::filesystem::path corpus_dir = cfg.corpus_dir;
    if (cfg.generate) {
        stage("generate", [&] {
            if (corpus_dir.empty()) {
                corpus_dir = out / "corpus";
            }
            CorpusOptions options;
            if (!cfg.generate->families.empty()) {
                options.families = parse_family_mix(cfg.generate->families);
            }
            options.allow_disconnected = cfg.generate->allow_disconnected;
            options.jobs = cfg.jobs;
            generate_corpus(cfg.generate->n, cfg.generate->seed, corpus_dir, options);
            return 0;
        });
    }
    if (corpus_dir.empty()) {
        throw StageError("load", "no corpus.dir and no corpus.generate section");
    }
    const std::vector<CorpusItem> corpus = stage("load", [&] { return load_corpus(corpus_dir); });

    // Detector output per drawing, written back as augmented documents.
    std::vector<Document> docs(corpus.size());
    stage("detect", [&] {
        parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
            docs[i].drawing = corpus[i].drawing;
            for (const auto& source : cfg.grid.sources) {
                if (source == "gt" || source == "file") {
                    continue;
                }
                for (const auto& c : candidate_pool(corpus[i].drawing, source, cfg.eval, drawing_seed(cfg.seed, i))) {
                    if (c.provenance != Provenance::System) {
                        docs[i].drawing.constraints.push_back(c);
                    }
                }
            }
        });
        return 0;
    });

    AblationReport report = stage("evaluate", [&] { return run_ablation(corpus, cfg.grid, cfg.eval); });
    if (cfg.timing) {
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    stage("write", [&] {
        std::filesystem::create_directories(out / "documents");
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            json cells = json::array();
            for (const auto& c : report.cells) {
                const DrawingResult& r = c.drawings[i];
                cells.push_back({{"source", c.source},
                                 {"init", c.init.to_string()},
                                 {"n_restarts", c.n_restarts},
                                 {"label", to_string(r.label)},
                                 {"status", r.status},
                                 {"max_error", r.max_error ? json(*r.max_error) : json(nullptr)}});
            }
            docs[i].solution = json{{"cells", cells}};
            write_document(out / "documents" / corpus[i].name, docs[i]);
        }
        write_file(out / "report.json", report_to_json(report).dump(2) + "\n");
        write_file(out / "report.csv", report_csv(report));
        write_file(out / "histogram.csv", histogram_csv(report));
        return 0;
    });
    return report;
}

} // namespace wirelift
