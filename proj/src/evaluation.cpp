#include "wirelift/evaluation.hpp"

#include "wirelift/interchange.hpp"
#include "wirelift/parallel.hpp"
#include "wirelift/random.hpp"
#include "wirelift/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wirelift {

const std::array<TaxonomyLabel, kNumLabels>& all_labels()
{
    static const std::array<TaxonomyLabel, kNumLabels> labels{TaxonomyLabel::Success, TaxonomyLabel::Unsolvable,
                                                              TaxonomyLabel::Fail,    TaxonomyLabel::WrongI,
                                                              TaxonomyLabel::WrongII, TaxonomyLabel::WrongIII};
    return labels;
}

std::string to_string(TaxonomyLabel label)
{
    switch (label) {
    case TaxonomyLabel::Success:
        return "success";
    case TaxonomyLabel::Unsolvable:
        return "unsolvable";
    case TaxonomyLabel::Fail:
        return "fail";
    case TaxonomyLabel::WrongI:
        return "wrong_i";
    case TaxonomyLabel::WrongII:
        return "wrong_ii";
    case TaxonomyLabel::WrongIII:
        return "wrong_iii";
    }
    return "?";
}

bool is_success(const DepthVector& z, const DepthVector& gt, double tau)
{
    if (z.size() != gt.size()) {
        throw std::invalid_argument("is_success: length mismatch");
    }
    return z.size() == 0 || (z - gt).cwiseAbs().maxCoeff() < tau;
}

TaxonomyLabel classify(const SolveOutcome& outcome, const LineDrawing& d, const std::vector<ConstraintCandidate>& pool,
                       double tau)
{
    const auto gt = d.gt_depth_vector();
    if (!gt) {
        throw std::invalid_argument("classify: drawing has no gt_depths");
    }
    if (outcome.status == SolveStatus::Solved && outcome.z && is_success(*outcome.z, *gt, tau)) {
        return TaxonomyLabel::Success;
    }
    if (outcome.status == SolveStatus::Unsolvable) {
        return TaxonomyLabel::Unsolvable;
    }
    if (outcome.status == SolveStatus::SolverFail) {
        return TaxonomyLabel::Fail;
    }
    for (const auto& a : outcome.attempts) {
        if (a.index != outcome.chosen_attempt && a.converged && a.z && is_success(*a.z, *gt, tau)) {
            return TaxonomyLabel::WrongIII;
        }
    }
    auto truth = d.gt_constraints();
    std::sort(truth.begin(), truth.end(), candidate_less);
    auto is_true = [&](const ConstraintCandidate& c) {
        return c.kind == ConstraintKind::Anchor || std::binary_search(truth.begin(), truth.end(), c, candidate_less);
    };
    for (const auto& a : outcome.attempts) {
        if (a.selection_solvable &&
            std::all_of(a.selected.begin(), a.selected.end(), [&](int i) { return is_true(pool.at(i)); })) {
            return TaxonomyLabel::WrongII;
        }
    }
    return TaxonomyLabel::WrongI;
}

std::vector<CorpusItem> load_corpus(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("corpus directory not found: " + dir.string());
    }
    std::vector<CorpusItem> out;
    if (std::filesystem::exists(dir / "manifest.json")) {
        for (const auto& e : read_manifest(dir).entries) {
            out.push_back({e.file, to_string(e.family), load_drawing(read_file(dir / e.file))});
        }
        return out;
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        out.push_back({f.filename().string(), "", load_drawing(read_file(f))});
    }
    return out;
}

const std::vector<std::string>& known_sources()
{
    static const std::vector<std::string> sources{"gt", "heuristic", "jlinkage", "true2form", "file"};
    return sources;
}

void check_source(const std::string& source)
{
    const auto& s = known_sources();
    if (std::find(s.begin(), s.end(), source) == s.end()) {
        throw std::invalid_argument("unknown constraint source '" + source + "'");
    }
}

std::uint64_t drawing_seed(std::uint64_t seed, std::size_t index)
{
    return mix_seed(seed, 0x5CE0000ULL + index);
}

DepthVector true2form_baseline(const LineDrawing& d, const EvalConfig& cfg, std::uint64_t seed)
{
    if (d.predicted_depths) {
        return make_initial(d, {InitKind::Predicted, 0.0}, seed);
    }
    if (!d.gt_depths) {
        throw std::invalid_argument("true2form needs predicted_depths or gt_depths for its baseline");
    }
    return make_initial(d, {InitKind::GTNoise, cfg.true2form_baseline_sigma}, mix_seed(seed, 0x72F));
}

std::vector<ConstraintCandidate> candidate_pool(const LineDrawing& d, const std::string& source, const EvalConfig& cfg,
                                                std::uint64_t seed)
{
    check_source(source);
    std::vector<ConstraintCandidate> pool;
    bool detector = true;
    if (source == "gt") {
        pool = d.gt_constraints();
        detector = false;
    } else if (source == "heuristic") {
        pool = detect_heuristic(d, cfg.detector).candidates;
    } else if (source == "jlinkage") {
        pool = detect_jlinkage(d, cfg.detector).candidates;
    } else if (source == "true2form") {
        pool = detect_true2form(d, true2form_baseline(d, cfg, seed), cfg.detector).candidates;
    } else {
        pool = d.constraints_from(Provenance::Predicted);
    }
    if (detector && cfg.detector_planarity && d.faces) {
        for (std::size_t k = 0; k < d.faces->size(); ++k) {
            if ((*d.faces)[k].size() >= 4) {
                pool.push_back({ConstraintKind::FacePlanarity, {static_cast<int>(k)}, Provenance::System, std::nullopt});
            }
        }
    }
    return with_anchor(std::move(pool), d);
}

AblationReport run_ablation(const std::vector<CorpusItem>& corpus, const AblationGrid& grid, const EvalConfig& cfg)
{
    for (const auto& s : grid.sources) {
        check_source(s);
    }
    for (int n : grid.restarts) {
        if (n < 1) {
            throw std::invalid_argument("restart counts must be at least 1");
        }
    }
    AblationReport report;
    report.seed = cfg.seed;
    report.tau = cfg.tau;
    report.corpus_size = corpus.size();

    for (const auto& source : grid.sources) {
        std::vector<std::vector<ConstraintCandidate>> pools(corpus.size());
        parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
            pools[i] = candidate_pool(corpus[i].drawing, source, cfg, drawing_seed(cfg.seed, i));
        });
        for (const auto& init : grid.inits) {
            for (int n : grid.restarts) {
                CellResult cell;
                cell.source = source;
                cell.init = init;
                cell.n_restarts = n;
                cell.drawings.resize(corpus.size());
                parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
                    const LineDrawing& d = corpus[i].drawing;
                    SolveConfig sc = cfg.solver;
                    sc.n_restarts = n;
                    sc.init = init;
                    sc.seed = drawing_seed(cfg.seed, i);
                    const SolveOutcome outcome = reconstruct(d, pools[i], sc);
                    DrawingResult r;
                    r.name = corpus[i].name;
                    r.label = classify(outcome, d, pools[i], cfg.tau);
                    r.status = to_string(outcome.status);
                    r.satisfied_count = outcome.satisfied_count;
                    r.chosen_attempt = outcome.chosen_attempt;
                    const DepthVector gt = *d.gt_depth_vector();
                    if (outcome.z) {
                        r.max_error = (*outcome.z - gt).cwiseAbs().maxCoeff();
                    }
                    const DepthVector z0 = make_initial(d, init, attempt_init_seed(sc.seed, 0));
                    r.init_error = gt.size() > 0 ? (z0 - gt).cwiseAbs().mean() : 0.0;
                    cell.drawings[i] = std::move(r);
                });
                double init_sum = 0.0;
                for (const auto& r : cell.drawings) {
                    ++cell.counts[static_cast<std::size_t>(r.label)];
                    init_sum += r.init_error;
                }
                if (!corpus.empty()) {
                    cell.success_rate =
                        static_cast<double>(cell.counts[static_cast<std::size_t>(TaxonomyLabel::Success)]) /
                        static_cast<double>(corpus.size());
                    cell.mean_init_error = init_sum / static_cast<double>(corpus.size());
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

const CellResult* find_cell(const AblationReport& report, const std::string& source, const std::string& init,
                            int n_restarts)
{
    for (const auto& c : report.cells) {
        if (c.source == source && c.init.to_string() == init && c.n_restarts == n_restarts) {
            return &c;
        }
    }
    return nullptr;
}

nlohmann::json report_to_json(const AblationReport& report)
{
    using nlohmann::json;
    json j;
    j["version"] = 1;
    j["seed"] = report.seed;
    j["tau"] = report.tau;
    j["corpus_size"] = report.corpus_size;
    if (report.seconds) {
        j["seconds"] = *report.seconds;
    }
    json cells = json::array();
    for (const auto& c : report.cells) {
        json jc;
        jc["source"] = c.source;
        jc["init"] = c.init.to_string();
        jc["n_restarts"] = c.n_restarts;
        json counts = json::object();
        for (auto label : all_labels()) {
            counts[to_string(label)] = c.counts[static_cast<std::size_t>(label)];
        }
        jc["counts"] = counts;
        jc["success_rate"] = c.success_rate;
        jc["mean_init_error"] = c.mean_init_error;
        json drawings = json::array();
        for (const auto& r : c.drawings) {
            json jd;
            jd["name"] = r.name;
            jd["label"] = to_string(r.label);
            jd["status"] = r.status;
            jd["max_error"] = r.max_error ? json(*r.max_error) : json(nullptr);
            jd["satisfied_count"] = r.satisfied_count;
            jd["chosen_attempt"] = r.chosen_attempt;
            drawings.push_back(jd);
        }
        jc["drawings"] = drawings;
        cells.push_back(jc);
    }
    j["cells"] = cells;
    return j;
}

namespace {

std::string num(double x)
{
    return nlohmann::json(x).dump();
}

} // namespace

std::string report_csv(const AblationReport& report)
{
    std::ostringstream out;
    out << "source,init,n_restarts,total";
    for (auto label : all_labels()) {
        out << ',' << to_string(label);
    }
    out << ",success_rate,mean_init_error\n";
    for (const auto& c : report.cells) {
        out << c.source << ',' << c.init.to_string() << ',' << c.n_restarts << ',' << c.drawings.size();
        for (int n : c.counts) {
            out << ',' << n;
        }
        out << ',' << num(c.success_rate) << ',' << num(c.mean_init_error) << '\n';
    }
    return out.str();
}

std::string histogram_csv(const AblationReport& report)
{
    constexpr int lo_exp = -16, hi_exp = 2;
    std::ostringstream out;
    out << "source,init,n_restarts,bin_lo,bin_hi,count\n";
    for (const auto& c : report.cells) {
        std::vector<int> bins(hi_exp - lo_exp + 2, 0);
        int none = 0;
        for (const auto& r : c.drawings) {
            if (!r.max_error) {
                ++none;
                continue;
            }
            const double e = *r.max_error;
            int b = 0;
            if (e >= std::pow(10.0, lo_exp)) {
                b = std::min(static_cast<int>(std::floor(std::log10(e))) - lo_exp + 1, hi_exp - lo_exp + 1);
            }
            ++bins[static_cast<std::size_t>(b)];
        }
        const std::string prefix = c.source + ',' + c.init.to_string() + ',' + std::to_string(c.n_restarts) + ',';
        for (std::size_t b = 0; b < bins.size(); ++b) {
            const int e = lo_exp + static_cast<int>(b) - 1;
            const std::string lo = b == 0 ? "0" : "1e" + std::to_string(e);
            const std::string hi = b + 1 == bins.size() ? "inf" : "1e" + std::to_string(e + 1);
            out << prefix << lo << ',' << hi << ',' << bins[b] << '\n';
        }
        out << prefix << "none,none," << none << '\n';
    }
    return out.str();
}

double expected_random_init_error(double g)
{
    if (g <= 5.0) {
        return 6.0 - g;
    }
    if (g >= 7.0) {
        return g - 6.0;
    }
    return ((g - 5.0) * (g - 5.0) + (7.0 - g) * (7.0 - g)) / 4.0;
}

std::vector<DetectionTally> tally_detection(const std::vector<CorpusItem>& corpus, const std::vector<std::string>& methods,
                                            const EvalConfig& cfg)
{
    const std::array<ConstraintKind, 2> kinds{ConstraintKind::Parallel, ConstraintKind::Perpendicular};
    std::vector<DetectionTally> out;
    for (const auto& m : methods) {
        check_source(m);
        for (auto k : kinds) {
            out.push_back({m, k, 0, 0, 0});
        }
    }
    std::vector<std::vector<DetectionTally>> per(corpus.size(), out);
    parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
        const LineDrawing& d = corpus[i].drawing;
        const auto gt = d.gt_constraints();
        std::size_t slot = 0;
        for (const auto& m : methods) {
            const auto pool = candidate_pool(d, m, cfg, drawing_seed(cfg.seed, i));
            for (auto k : kinds) {
                const DetectionScore s = score_detection(pool, gt, k);
                per[i][slot].true_positives = s.true_positives;
                per[i][slot].predicted = s.predicted;
                per[i][slot].ground_truth = s.ground_truth;
                ++slot;
            }
        }
    });
    for (const auto& row : per) {
        for (std::size_t s = 0; s < out.size(); ++s) {
            out[s].true_positives += row[s].true_positives;
            out[s].predicted += row[s].predicted;
            out[s].ground_truth += row[s].ground_truth;
        }
    }
    return out;
}

} // namespace wirelift
