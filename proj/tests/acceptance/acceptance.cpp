// Acceptance checks P1-P7. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include "fixtures.hpp"

#include "wirelift/detectors.hpp"
#include "wirelift/evaluation.hpp"
#include "wirelift/interchange.hpp"
#include "wirelift/pipeline.hpp"
#include "wirelift/selector.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

using namespace wirelift;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* id, bool pass, const std::string& detail)
{
    std::cout << id << ' ' << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
    failures += pass ? 0 : 1;
}

std::string fmt(double v, int digits = 3)
{
    std::ostringstream s;
    s.precision(digits);
    s << std::fixed << v;
    return s.str();
}

int jobs()
{
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Rerun width for the determinism check; never 1 so the workers interleave.
int rerun_jobs()
{
    return std::max(4, jobs());
}

// --- P1 ---------------------------------------------------------------------

bool accept_if_valid(SelectionState& st, const ResidualEquation& eq)
{
    auto m = augment_matching(st, eq);
    if (!m) {
        return false;
    }
    const auto cons = check_consistent(st, eq);
    if (!cons.consistent || !check_not_redundant(st, eq, cons.z)) {
        return false;
    }
    st.accept(eq, *m, cons.z);
    return true;
}

void p1()
{
    using fixtures::linear_equation;
    const auto t0 = Clock::now();

    SelectionState a(2, DepthVector::Constant(2, 0.3));
    const bool a_first = accept_if_valid(a, linear_equation({1, 1}, -1));
    const auto neg = linear_equation({1, 1}, 1);
    const bool inconsistent = a_first && check_structural(a, neg) && !check_consistent(a, neg).consistent;

    SelectionState b(2, DepthVector::Constant(2, 0.3));
    const bool b_first = accept_if_valid(b, linear_equation({1, 1}, -1));
    const auto dbl = linear_equation({2, 2}, -2);
    const auto cons = check_consistent(b, dbl);
    const double r = b_first && cons.consistent ? redundancy_measure(b, dbl, cons.z) : 1.0;
    const bool redundant = r < 1e-8 && !check_not_redundant(b, dbl, cons.z);

    SelectionState c(3, DepthVector::Constant(3, 0.3));
    const bool c_two = accept_if_valid(c, linear_equation({1, 1, 0}, -1)) && accept_if_valid(c, linear_equation({1, -1, 0}, 0));
    const bool structural = c_two && !check_structural(c, linear_equation({3, 1, 0}, -2));

    const double t = seconds_since(t0);
    report("P1", inconsistent && redundant && structural && t < 1.0,
           std::string("inconsistent=") + (inconsistent ? "yes" : "no") + " |R|=" + std::to_string(r) +
               " structural_reject=" + (structural ? "yes" : "no") + " time=" + fmt(t) + "s");
}

// --- P2 ---------------------------------------------------------------------

void p2()
{
    const auto t0 = Clock::now();
    long residuals = 0, jac_entries = 0, bad_res = 0, bad_jac = 0;
    double worst_res = 0.0, worst_jac = 0.0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto rc = fixtures::random_config(mix_seed(2024, s));
        for (const auto& cand : rc.candidates) {
            const auto eqs = candidate_equations(cand, rc.drawing);
            const auto expect = fixtures::oracle_residual(cand, rc.drawing, rc.z);
            const double mag = fixtures::oracle_magnitude(cand, rc.drawing, rc.z);
            if (eqs.size() != expect.size()) {
                ++bad_res;
                continue;
            }
            for (std::size_t k = 0; k < eqs.size(); ++k) {
                ++residuals;
                const double rel = std::abs(eqs[k].value(rc.z) - expect[k]) / mag;
                worst_res = std::max(worst_res, rel);
                bad_res += rel > 1e-10;

                const auto grad = eqs[k].gradient(rc.z);
                for (std::size_t g = 0; g < grad.size(); ++g) {
                    const int i = eqs[k].vars()[g];
                    const double h = 1e-6 * std::max(1.0, std::abs(rc.z[i]));
                    DepthVector zp = rc.z, zm = rc.z;
                    zp[i] += h;
                    zm[i] -= h;
                    const double fd = (eqs[k].value(zp) - eqs[k].value(zm)) / (2 * h);
                    const double relj = std::abs(grad[g] - fd) / std::max(1.0, std::abs(grad[g]));
                    worst_jac = std::max(worst_jac, relj);
                    bad_jac += relj > 1e-6;
                    ++jac_entries;
                }
            }
        }
    }
    const double t = seconds_since(t0);
    std::ostringstream d;
    d << residuals << " residuals (worst rel " << worst_res << "), " << jac_entries << " jacobian entries (worst rel "
      << worst_jac << "), time=" << fmt(t) << "s";
    report("P2", bad_res == 0 && bad_jac == 0 && t < 30.0, d.str());
}

// --- P3, P4, P6 ---------------------------------------------------------------

struct CorpusRun {
    std::vector<CorpusItem> corpus;
    std::vector<bool> solvable_by_design;
};

CorpusRun make_corpus(const fs::path& dir)
{
    CorpusOptions opts;
    opts.allow_disconnected = true;
    opts.jobs = jobs();
    const Manifest m = generate_corpus(200, 20240601, dir, opts);
    CorpusRun run;
    run.corpus = load_corpus(dir);
    for (const auto& e : m.entries) {
        run.solvable_by_design.push_back(e.parts == 1);
    }
    return run;
}

void p3(const CorpusRun& run, std::vector<AblationReport>& reports)
{
    AblationGrid grid;
    grid.sources = {"gt"};
    grid.inits = {InitStrategy{InitKind::GTNoise, 0.05}};
    grid.restarts = {10};
    EvalConfig cfg;
    cfg.seed = 1;
    cfg.jobs = 1;
    const auto t0 = Clock::now();
    const AblationReport rep = run_ablation(run.corpus, grid, cfg);
    const double t = seconds_since(t0);
    int solvable = 0, success = 0, excluded = 0;
    std::string misses;
    for (std::size_t i = 0; i < run.corpus.size(); ++i) {
        if (!run.solvable_by_design[i]) {
            ++excluded;
            continue;
        }
        ++solvable;
        const auto& dr = rep.cells[0].drawings[i];
        if (dr.label == TaxonomyLabel::Success) {
            ++success;
        } else if (misses.size() < 200) {
            misses += " " + dr.name + ":" + to_string(dr.label);
        }
    }
    reports.push_back(rep);
    report("P3", success == solvable && t < 300.0,
           std::to_string(success) + "/" + std::to_string(solvable) + " solvable drawings recovered (" +
               std::to_string(excluded) + " two-part scenes excluded), time=" + fmt(t, 1) + "s single-threaded" + misses);
}

void p4(const CorpusRun& run, std::vector<AblationReport>& reports)
{
    EvalConfig cfg;
    cfg.seed = 1;
    cfg.jobs = jobs();

    AblationGrid by_source;
    by_source.sources = {"gt", "heuristic", "jlinkage", "true2form"};
    by_source.inits = {InitStrategy{InitKind::GTNoise, 0.05}};
    by_source.restarts = {1, 10};
    const AblationReport rs = run_ablation(run.corpus, by_source, cfg);

    AblationGrid by_init;
    by_init.sources = {"gt"};
    by_init.inits = {InitStrategy{InitKind::GTNoise, 0.03}, InitStrategy{InitKind::Identity, 0}, InitStrategy{InitKind::Random, 0}};
    by_init.restarts = {1, 10};
    const AblationReport ri = run_ablation(run.corpus, by_init, cfg);

    bool a_ok = true;
    std::ostringstream da;
    for (const auto& s : by_source.sources) {
        const double r1 = find_cell(rs, s, "gtnoise:0.05", 1)->success_rate;
        const double r10 = find_cell(rs, s, "gtnoise:0.05", 10)->success_rate;
        a_ok = a_ok && r10 >= r1;
        da << ' ' << s << ' ' << fmt(r1) << "->" << fmt(r10);
    }

    bool b_ok = true;
    std::ostringstream db;
    for (int n : {1, 10}) {
        const double noise = find_cell(ri, "gt", "gtnoise:0.03", n)->success_rate;
        const double ident = find_cell(ri, "gt", "identity", n)->success_rate;
        const double rnd = find_cell(ri, "gt", "random", n)->success_rate;
        const bool ok = noise >= ident && ident >= rnd && noise - rnd >= 0.10;
        b_ok = b_ok && ok;
        db << " N=" << n << " gtnoise(0.03)=" << fmt(noise) << " identity=" << fmt(ident) << " random=" << fmt(rnd)
           << (ok ? "" : " [order violated]");
        if (noise < ident) {
            db << " [gtnoise<identity]";
        }
        if (ident < rnd) {
            db << " [identity<random]";
        }
        if (noise - rnd < 0.10) {
            db << " [gap<10pt]";
        }
    }
    reports.push_back(rs);
    reports.push_back(ri);
    report("P4", a_ok && b_ok,
           std::string("(a) ") + (a_ok ? "ok" : "violated") + da.str() + "; (b) " + (b_ok ? "ok" : "violated") + db.str());
}

// --- P5 ---------------------------------------------------------------------

void p5()
{
    std::vector<CorpusItem> manhattan, oblique;
    const std::vector<SceneFamily> m_fams{SceneFamily::Cuboid, SceneFamily::LBlock, SceneFamily::ExtrudedPolygonWithHole};
    for (std::uint64_t s = 0; s < 90; ++s) {
        const auto fam = m_fams[s % m_fams.size()];
        manhattan.push_back({"m" + std::to_string(s), to_string(fam), generate_scene(random_spec(fam, mix_seed(55, s))).drawing});
    }
    for (std::uint64_t s = 0; oblique.size() < 90; ++s) {
        const auto fam = s % 2 == 0 ? SceneFamily::NPrism : SceneFamily::FilletedBlock;
        SceneSpec spec = random_spec(fam, mix_seed(66, s));
        if (fam == SceneFamily::NPrism && spec.size_params[0] == 4) {
            continue;
        }
        oblique.push_back({"o" + std::to_string(s), to_string(fam), generate_scene(spec).drawing});
    }
    EvalConfig cfg;
    auto score = [](const std::vector<DetectionTally>& ts, const std::string& method, ConstraintKind kind) {
        for (const auto& t : ts) {
            if (t.method == method && t.kind == kind) {
                return t.score();
            }
        }
        return DetectionScore{};
    };
    const auto tm = tally_detection(manhattan, {"heuristic", "jlinkage"}, cfg);
    const auto to = tally_detection(oblique, {"heuristic", "jlinkage"}, cfg);
    const double h_recall = score(tm, "heuristic", ConstraintKind::Parallel).recall;
    const double j_f1 = score(tm, "jlinkage", ConstraintKind::Parallel).f1;
    const double h_prec = score(to, "heuristic", ConstraintKind::Perpendicular).precision;
    const double j_prec = score(to, "jlinkage", ConstraintKind::Perpendicular).precision;
    report("P5", h_recall >= 0.99 && j_f1 >= 0.95 && h_prec < j_prec,
           "manhattan: heuristic parallel recall=" + fmt(h_recall, 4) + " jlinkage parallel F1=" + fmt(j_f1, 4) +
               "; oblique: perpendicular precision heuristic=" + fmt(h_prec, 4) + " jlinkage=" + fmt(j_prec, 4));
}

// --- P6 ---------------------------------------------------------------------

void p6(const std::vector<AblationReport>& reports)
{
    bool partition = true;
    int cells = 0;
    for (const auto& rep : reports) {
        for (const auto& c : rep.cells) {
            ++cells;
            const int sum = std::accumulate(c.counts.begin(), c.counts.end(), 0);
            partition = partition && sum == static_cast<int>(rep.corpus_size) && c.drawings.size() == rep.corpus_size;
        }
    }

    SolveConfig ten;
    ten.n_restarts = 10;

    const Scene cub = fixtures::oblique_cuboid();
    const auto false_pool = fixtures::false_length_pool(cub);
    const auto l_false = classify(reconstruct(cub.drawing, false_pool, ten), cub.drawing, false_pool);

    const Scene two = fixtures::disjoint_scene();
    const auto two_pool = with_anchor(two.gt_constraints, two.drawing);
    const auto l_two = classify(reconstruct(two.drawing, two_pool, ten), two.drawing, two_pool);

    const Scene tet = fixtures::tetrahedron_scene();
    const auto tet_pool = with_anchor(tet.gt_constraints, tet.drawing);
    const auto l_tet = classify(reconstruct(tet.drawing, tet_pool, ten), tet.drawing, tet_pool);

    const auto wide = fixtures::wide_noise_case();
    const auto wide_pool = with_anchor(wide.scene.gt_constraints, wide.scene.drawing);
    const auto l_wide = classify(reconstruct(wide.scene.drawing, wide_pool, wide.cfg), wide.scene.drawing, wide_pool);

    const bool ok = partition && (l_false == TaxonomyLabel::WrongI || l_false == TaxonomyLabel::WrongII) &&
                    l_two == TaxonomyLabel::Unsolvable && l_tet == TaxonomyLabel::Unsolvable &&
                    l_wide == TaxonomyLabel::WrongII;
    report("P6", ok,
           std::string("partition over ") + std::to_string(cells) + " cells " + (partition ? "exact" : "broken") +
               "; false-constraint pool=" + to_string(l_false) + " disjoint parts=" + to_string(l_two) +
               " tetrahedron=" + to_string(l_tet) + " wide init=" + to_string(l_wide));
}

// --- P7 ---------------------------------------------------------------------

void p7(const fs::path& root)
{
    auto config = [&](const std::string& name, int n_jobs) {
        PipelineConfig cfg;
        cfg.seed = 77;
        cfg.jobs = n_jobs;
        cfg.eval.jobs = n_jobs;
        cfg.out = root / name;
        cfg.generate = GenerateConfig{20, 5, "", true};
        cfg.grid.sources = {"gt", "heuristic", "jlinkage", "true2form"};
        cfg.grid.inits = {InitStrategy{InitKind::GTNoise, 0.05}, InitStrategy{InitKind::Random, 0}};
        cfg.grid.restarts = {1, 3};
        fs::remove_all(cfg.out);
        return cfg;
    };
    const PipelineConfig a = config("p7_a", 1);
    const PipelineConfig b = config("p7_b", rerun_jobs());
    run_pipeline(a);
    run_pipeline(b);
    int compared = 0, differ = 0;
    for (const char* f : {"report.json", "report.csv", "histogram.csv"}) {
        ++compared;
        differ += read_file(a.out / f) != read_file(b.out / f);
    }
    for (const auto& e : fs::directory_iterator(a.out / "documents")) {
        ++compared;
        differ += read_file(e.path()) != read_file(b.out / "documents" / e.path().filename());
    }
    report("P7", differ == 0 && compared > 3,
           std::to_string(compared) + " artifacts compared across reruns (1 vs " + std::to_string(rerun_jobs()) +
               " threads), " + std::to_string(differ) + " differ");
}

} // namespace

int main()
{
    const fs::path root = fs::temp_directory_path() / "wirelift_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    p1();
    p2();
    const CorpusRun run = make_corpus(root / "corpus");
    std::vector<AblationReport> reports;
    p3(run, reports);
    p4(run, reports);
    p5();
    p6(reports);
    p7(root);

    fs::remove_all(root);
    return failures == 0 ? 0 : 1;
}
