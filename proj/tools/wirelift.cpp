#include "wirelift/detectors.hpp"
#include "wirelift/error.hpp"
#include "wirelift/evaluation.hpp"
#include "wirelift/interchange.hpp"
#include "wirelift/pipeline.hpp"
#include "wirelift/scene_synth.hpp"
#include "wirelift/selector.hpp"
#include "wirelift/solver.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>

using namespace wirelift;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
};

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

// Stage settings from --config (when given) with --seed / --jobs applied.
PipelineConfig base_config(const Globals& g)
{
    PipelineConfig cfg;
    if (!g.config.empty()) {
        cfg = load_pipeline_config(g.config);
    }
    if (g.seed_opt->count() > 0) {
        cfg.seed = g.seed;
        cfg.eval.seed = g.seed;
    }
    if (g.jobs_opt->count() > 0) {
        if (g.jobs < 1) {
            throw UsageError("--jobs must be at least 1");
        }
        cfg.jobs = g.jobs;
        cfg.eval.jobs = g.jobs;
    }
    return cfg;
}

InitStrategy parse_init(const std::string& text)
{
    try {
        return InitStrategy::parse(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

void emit_document(const Globals& g, const Document& doc)
{
    if (g.out.empty()) {
        std::cout << save_document(doc);
    } else {
        write_document(g.out, doc);
    }
}

void remove_provenance(LineDrawing& d, Provenance p)
{
    std::erase_if(d.constraints, [p](const ConstraintCandidate& c) { return c.provenance == p; });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Line drawing to 3D reconstruction by geometric constraint solving"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Pipeline config document (JSON)");
    g.seed_opt = app.add_option("--seed", g.seed, "Run seed");
    g.jobs_opt = app.add_option("--jobs", g.jobs, "Worker threads");
    app.add_option("--out", g.out, "Output path (file or directory, per subcommand)");

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic corpus of line drawings");
    int gen_n = 0;
    std::string gen_families;
    bool gen_disconnected = false;
    gen->add_option("--n", gen_n, "Number of drawings")->required()->check(CLI::PositiveNumber);
    gen->add_option("--families", gen_families, "Family mix, e.g. cuboid:0.5,nprism:0.5");
    gen->add_flag("--allow-disconnected", gen_disconnected, "Include two-part scenes");

    // detect
    auto* det = app.add_subcommand("detect", "Add detected constraint candidates to a document");
    std::string det_in, det_method = "heuristic", det_pred;
    det->add_option("input", det_in, "Interchange document")->required();
    det->add_option("--method", det_method, "Detector")
        ->check(CLI::IsMember({"heuristic", "jlinkage", "true2form", "file"}));
    det->add_option("--pred", det_pred, "Document with predicted constraints and/or depths (for --method file)");

    // select
    auto* sel = app.add_subcommand("select", "Select a consistent, non-redundant constraint subset");
    std::string sel_in, sel_source = "gt", sel_init = "gtnoise:0.05";
    sel->add_option("input", sel_in, "Interchange document")->required();
    sel->add_option("--source", sel_source, "Candidate source")->check(CLI::IsMember(known_sources()));
    sel->add_option("--init", sel_init, "identity | random | predicted | gtnoise:<sigma>");

    // solve
    auto* sol = app.add_subcommand("solve", "Select and solve for vertex depths");
    std::string sol_in, sol_source = "gt", sol_init, sol_method;
    int sol_restarts = 0;
    sol->add_option("input", sol_in, "Interchange document")->required();
    sol->add_option("--source", sol_source, "Candidate source")->check(CLI::IsMember(known_sources()));
    sol->add_option("--n-restarts", sol_restarts, "Restarts N")->check(CLI::PositiveNumber);
    sol->add_option("--init", sol_init, "identity | random | predicted | gtnoise:<sigma>");
    sol->add_option("--method", sol_method, "hybrid | lm")->check(CLI::IsMember({"hybrid", "lm"}));

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Run the ablation grid over a corpus");
    std::string ev_corpus, ev_sources, ev_inits, ev_restarts;
    bool ev_timing = false, ev_detection = false;
    ev->add_option("--corpus", ev_corpus, "Corpus directory")->required();
    ev->add_option("--sources", ev_sources, "Comma-separated constraint sources");
    ev->add_option("--inits", ev_inits, "Comma-separated init strategies");
    ev->add_option("--restarts", ev_restarts, "Comma-separated restart counts");
    ev->add_flag("--timing", ev_timing, "Record wall time in the report");
    ev->add_flag("--detection", ev_detection, "Also write pooled detector precision/recall");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "generate/detect/solve/evaluate from a config document");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const PipelineConfig cfg = base_config(g);
            if (g.out.empty()) {
                throw UsageError("generate needs --out");
            }
            CorpusOptions options;
            try {
                if (!gen_families.empty()) {
                    options.families = parse_family_mix(gen_families);
                }
            } catch (const std::exception& e) {
                throw UsageError(e.what());
            }
            options.allow_disconnected = gen_disconnected;
            options.jobs = cfg.jobs;
            const Manifest m = generate_corpus(gen_n, cfg.seed, g.out, options);
            std::cerr << "wrote " << m.entries.size() << " drawings to " << g.out << "\n";
            return 0;
        }

        if (det->parsed()) {
            const PipelineConfig cfg = base_config(g);
            if (det_method == "file" && det_pred.empty()) {
                throw UsageError("--method file needs --pred");
            }
            Document doc = read_document(det_in);
            LineDrawing& d = doc.drawing;
            std::vector<std::string> warnings;
            if (det_method == "file") {
                const Document pred = read_document(det_pred);
                if (pred.drawing.vertices.size() != d.vertices.size() || pred.drawing.edges.size() != d.edges.size()) {
                    throw FormatError("--pred document does not match the input drawing's vertices and edges");
                }
                remove_provenance(d, Provenance::Predicted);
                for (auto c : pred.drawing.constraints) {
                    if (c.kind == ConstraintKind::Anchor) {
                        continue;
                    }
                    c.provenance = Provenance::Predicted;
                    d.constraints.push_back(c);
                }
                if (pred.drawing.predicted_depths) {
                    d.predicted_depths = pred.drawing.predicted_depths;
                }
            } else {
                DetectionResult r;
                Provenance p = Provenance::Heuristic;
                if (det_method == "heuristic") {
                    r = detect_heuristic(d, cfg.eval.detector);
                } else if (det_method == "jlinkage") {
                    p = Provenance::JLinkage;
                    r = detect_jlinkage(d, cfg.eval.detector);
                } else {
                    p = Provenance::True2Form;
                    r = detect_true2form(d, true2form_baseline(d, cfg.eval, cfg.seed), cfg.eval.detector);
                }
                remove_provenance(d, p);
                d.constraints.insert(d.constraints.end(), r.candidates.begin(), r.candidates.end());
                warnings = r.warnings;
            }
            validate(d);
            for (const auto& w : warnings) {
                std::cerr << "warning: " << w << "\n";
            }
            emit_document(g, doc);
            return 0;
        }

        if (sel->parsed()) {
            const PipelineConfig cfg = base_config(g);
            const InitStrategy init = parse_init(sel_init);
            Document doc = read_document(sel_in);
            const LineDrawing& d = doc.drawing;
            const auto pool = candidate_pool(d, sel_source, cfg.eval, cfg.seed);
            const DepthVector z0 = make_initial(d, init, attempt_init_seed(cfg.seed, 0));
            const SelectionResult r = select_constraints(pool, d, z0, attempt_seed(cfg.seed, 0), cfg.eval.solver.selector);
            std::vector<ConstraintCandidate> chosen;
            for (int i : r.selected_candidates) {
                chosen.push_back(pool[static_cast<std::size_t>(i)]);
            }
            doc.selected_constraints = chosen;
            std::cerr << (r.solvable ? "solvable" : "unsolvable") << ": " << r.system.equations.size() << " of "
                      << d.vertices.size() << " equations from " << chosen.size() << " candidates\n";
            emit_document(g, doc);
            return r.solvable ? 0 : kExitRuntime;
        }

        if (sol->parsed()) {
            const PipelineConfig cfg = base_config(g);
            SolveConfig sc = cfg.eval.solver;
            sc.seed = cfg.seed;
            if (sol_restarts > 0) {
                sc.n_restarts = sol_restarts;
            }
            if (!sol_init.empty()) {
                sc.init = parse_init(sol_init);
            }
            if (!sol_method.empty()) {
                sc.method = sol_method == "lm" ? SolverMethod::LevenbergMarquardt : SolverMethod::Hybrid;
            }
            Document doc = read_document(sol_in);
            const LineDrawing& d = doc.drawing;
            const auto pool = candidate_pool(d, sol_source, cfg.eval, cfg.seed);
            const SolveOutcome outcome = reconstruct(d, pool, sc);
            nlohmann::json j = outcome_to_json(outcome);
            j["source"] = sol_source;
            j["init"] = sc.init.to_string();
            j["n_restarts"] = sc.n_restarts;
            j["seed"] = sc.seed;
            if (d.gt_depths) {
                j["label"] = to_string(classify(outcome, d, pool, cfg.eval.tau));
            }
            doc.solution = j;
            std::vector<ConstraintCandidate> chosen;
            if (outcome.chosen_attempt >= 0) {
                for (int i : outcome.attempts[static_cast<std::size_t>(outcome.chosen_attempt)].selected) {
                    chosen.push_back(pool[static_cast<std::size_t>(i)]);
                }
                doc.selected_constraints = chosen;
            }
            std::cerr << to_string(outcome.status);
            if (j.contains("label")) {
                std::cerr << " (" << j["label"].get<std::string>() << ")";
            }
            std::cerr << "\n";
            emit_document(g, doc);
            return outcome.status == SolveStatus::Solved ? 0 : kExitRuntime;
        }

        if (ev->parsed()) {
            PipelineConfig cfg = base_config(g);
            if (g.out.empty()) {
                throw UsageError("evaluate needs --out");
            }
            if (!ev_sources.empty()) {
                cfg.grid.sources = split_list(ev_sources);
                for (const auto& s : cfg.grid.sources) {
                    try {
                        check_source(s);
                    } catch (const std::invalid_argument& e) {
                        throw UsageError(e.what());
                    }
                }
            }
            if (!ev_inits.empty()) {
                cfg.grid.inits.clear();
                for (const auto& s : split_list(ev_inits)) {
                    cfg.grid.inits.push_back(parse_init(s));
                }
            }
            if (!ev_restarts.empty()) {
                cfg.grid.restarts.clear();
                for (const auto& s : split_list(ev_restarts)) {
                    int n = 0;
                    try {
                        std::size_t used = 0;
                        n = std::stoi(s, &used);
                        if (used != s.size()) {
                            n = 0;
                        }
                    } catch (const std::exception&) {
                        n = 0;
                    }
                    if (n < 1) {
                        throw UsageError("bad restart count '" + s + "'");
                    }
                    cfg.grid.restarts.push_back(n);
                }
            }
            const auto start = std::chrono::steady_clock::now();
            const auto corpus = load_corpus(ev_corpus);
            AblationReport report = run_ablation(corpus, cfg.grid, cfg.eval);
            if (ev_timing || cfg.timing) {
                report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
            const std::filesystem::path out = g.out;
            std::filesystem::create_directories(out);
            write_file(out / "report.json", report_to_json(report).dump(2) + "\n");
            write_file(out / "report.csv", report_csv(report));
            write_file(out / "histogram.csv", histogram_csv(report));
            if (ev_detection) {
                nlohmann::json dj = nlohmann::json::array();
                for (const auto& t : tally_detection(corpus, {"heuristic", "jlinkage", "true2form"}, cfg.eval)) {
                    const DetectionScore s = t.score();
                    dj.push_back({{"method", t.method},
                                  {"kind", std::string(to_string(t.kind))},
                                  {"true_positives", t.true_positives},
                                  {"predicted", t.predicted},
                                  {"ground_truth", t.ground_truth},
                                  {"precision", s.precision},
                                  {"recall", s.recall},
                                  {"f1", s.f1}});
                }
                write_file(out / "detection.json", dj.dump(2) + "\n");
            }
            std::cout << report_csv(report);
            return 0;
        }

        if (pipe->parsed()) {
            if (g.config.empty()) {
                throw UsageError("pipeline needs --config");
            }
            PipelineConfig cfg = base_config(g);
            if (!g.out.empty()) {
                cfg.out = g.out;
            }
            const AblationReport report = run_pipeline(cfg);
            std::cout << report_csv(report);
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const StageError& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
