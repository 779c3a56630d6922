#include "wirelift/detectors.hpp"

#include "wirelift/constraint_catalog.hpp"
#include "wirelift/least_squares.hpp"
#include "wirelift/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

namespace wirelift {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

Eigen::Vector2d image_point(const LineDrawing& d, int v)
{
    return {d.vertices[v].x, d.vertices[v].y};
}

Eigen::Vector2d chord_direction(const LineDrawing& d, const Edge& e)
{
    return image_point(d, e.endpoints[1]) - image_point(d, e.endpoints[0]);
}

bool same_endpoints(const Edge& a, const Edge& b)
{
    return (a.endpoints[0] == b.endpoints[0] && a.endpoints[1] == b.endpoints[1]) ||
           (a.endpoints[0] == b.endpoints[1] && a.endpoints[1] == b.endpoints[0]);
}

bool share_vertex(const Edge& a, const Edge& b)
{
    return a.endpoints[0] == b.endpoints[0] || a.endpoints[0] == b.endpoints[1] || a.endpoints[1] == b.endpoints[0] ||
           a.endpoints[1] == b.endpoints[1];
}

double acute_angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b)
{
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        return 90.0;
    }
    return std::acos(std::clamp(std::abs(a.dot(b)) / (na * nb), 0.0, 1.0)) * kRadToDeg;
}

// Edges whose chords have nonzero image length; the rest are reported.
std::vector<int> usable_edges(const LineDrawing& d, const std::vector<Edge>& chords, std::vector<std::string>& warnings)
{
    std::vector<int> out;
    for (std::size_t j = 0; j < chords.size(); ++j) {
        if (chord_direction(d, chords[j]).norm() == 0.0) {
            warnings.push_back("edge " + std::to_string(j) + " projects to zero length; skipped");
        } else {
            out.push_back(static_cast<int>(j));
        }
    }
    return out;
}

} // namespace

void DetectorConfig::validate() const
{
    if (!(0.0 < parallel_angle_max && parallel_angle_max < perpendicular_angle_min && perpendicular_angle_min < 90.0)) {
        throw std::invalid_argument("detector angles must satisfy 0 < parallel_angle_max < perpendicular_angle_min < 90");
    }
    if (jlinkage.num_hypotheses < 1 || !(jlinkage.consistency_threshold > 0.0)) {
        throw std::invalid_argument("jlinkage: num_hypotheses >= 1 and consistency_threshold > 0 required");
    }
    if (!(true2form.w_c >= 0.0) || !(true2form.sigma_alpha > 0.0) || true2form.max_iters < 1) {
        throw std::invalid_argument("true2form: w_c >= 0, sigma_alpha > 0 and max_iters >= 1 required");
    }
}

double image_angle_deg(const LineDrawing& d, const Edge& a, const Edge& b)
{
    const Eigen::Vector2d u = chord_direction(d, a);
    const Eigen::Vector2d w = chord_direction(d, b);
    return acute_angle_deg(Eigen::Vector3d(u.x(), u.y(), 0.0), Eigen::Vector3d(w.x(), w.y(), 0.0));
}

DetectionResult detect_heuristic(const LineDrawing& d, const DetectorConfig& cfg)
{
    cfg.validate();
    DetectionResult out;
    const auto chords = chord_edges(d);
    const auto edges = usable_edges(d, chords, out.warnings);
    for (std::size_t a = 0; a < edges.size(); ++a) {
        for (std::size_t b = a + 1; b < edges.size(); ++b) {
            const Edge& ea = chords[edges[a]];
            const Edge& eb = chords[edges[b]];
            if (same_endpoints(ea, eb)) {
                continue;
            }
            const double theta = image_angle_deg(d, ea, eb);
            if (theta <= cfg.parallel_angle_max) {
                out.candidates.push_back(
                    make_pair_candidate(ConstraintKind::Parallel, edges[a], edges[b], Provenance::Heuristic));
            } else if (theta > cfg.perpendicular_angle_min) {
                out.candidates.push_back(
                    make_pair_candidate(ConstraintKind::Perpendicular, edges[a], edges[b], Provenance::Heuristic));
            }
        }
    }
    return out;
}

namespace {

using Bits = std::vector<std::uint64_t>;

double jaccard_distance(const Bits& a, const Bits& b)
{
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += static_cast<std::size_t>(__builtin_popcountll(a[i] & b[i]));
        uni += static_cast<std::size_t>(__builtin_popcountll(a[i] | b[i]));
    }
    return uni == 0 ? 1.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

struct ImageLine {
    int edge;
    Eigen::Vector3d homogeneous; // (a, b, c) with a^2 + b^2 = 1
    Eigen::Vector2d midpoint;
    Eigen::Vector2d direction; // unit
};

} // namespace

DetectionResult detect_jlinkage(const LineDrawing& d, const DetectorConfig& cfg)
{
    cfg.validate();
    DetectionResult out;
    const auto chords = chord_edges(d);
    std::vector<int> edges = usable_edges(d, chords, out.warnings);

    // Canonical geometric order keeps sampling independent of edge numbering.
    auto key = [&](int j) {
        Eigen::Vector2d p = image_point(d, chords[j].endpoints[0]);
        Eigen::Vector2d q = image_point(d, chords[j].endpoints[1]);
        if (std::tie(q.x(), q.y()) < std::tie(p.x(), p.y())) {
            std::swap(p, q);
        }
        return std::array<double, 4>{p.x(), p.y(), q.x(), q.y()};
    };
    std::stable_sort(edges.begin(), edges.end(), [&](int a, int b) { return key(a) < key(b); });

    // Identical chords (an arc and a segment on the same endpoints) are one line.
    std::vector<ImageLine> lines;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const int j = edges[k];
        const Eigen::Vector2d p = image_point(d, chords[j].endpoints[0]);
        const Eigen::Vector2d q = image_point(d, chords[j].endpoints[1]);
        Eigen::Vector3d l = Eigen::Vector3d(p.x(), p.y(), 1.0).cross(Eigen::Vector3d(q.x(), q.y(), 1.0));
        l /= l.head<2>().norm();
        lines.push_back(ImageLine{j, l, 0.5 * (p + q), (q - p).normalized()});
    }
    const std::size_t n = lines.size();
    if (n < 2) {
        return out;
    }

    // Hypotheses: intersections of line pairs that do not share a drawing
    // vertex (those meet at the vertex, not at a vanishing point).
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (!share_vertex(chords[lines[a].edge], chords[lines[b].edge])) {
                pairs.emplace_back(a, b);
            }
        }
    }
    if (pairs.size() > static_cast<std::size_t>(cfg.jlinkage.num_hypotheses)) {
        Rng rng(cfg.jlinkage.seed);
        rng.shuffle(pairs);
        pairs.resize(static_cast<std::size_t>(cfg.jlinkage.num_hypotheses));
    }
    std::vector<Eigen::Vector3d> hypotheses;
    for (const auto& [a, b] : pairs) {
        const Eigen::Vector3d h = lines[a].homogeneous.cross(lines[b].homogeneous);
        if (h.norm() > 1e-12) {
            hypotheses.push_back(h.normalized());
        }
    }

    const std::size_t words = (hypotheses.size() + 63) / 64;
    const double cos_threshold = std::cos(cfg.jlinkage.consistency_threshold / kRadToDeg);
    std::vector<Bits> prefs(n, Bits(words, 0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ln = lines[i];
        for (std::size_t h = 0; h < hypotheses.size(); ++h) {
            const Eigen::Vector3d& vp = hypotheses[h];
            const Eigen::Vector2d towards(vp.x() - vp.z() * ln.midpoint.x(), vp.y() - vp.z() * ln.midpoint.y());
            const double norm = towards.norm();
            if (norm < 1e-12) {
                continue;
            }
            if (std::abs(ln.direction.dot(towards)) / norm > cos_threshold) {
                prefs[i][h / 64] |= (1ULL << (h % 64));
            }
        }
    }

    // Agglomerative merge by minimum Jaccard distance until all distances are 1.
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<Bits> cluster_prefs;
    for (std::size_t i = 0; i < n; ++i) {
        clusters.push_back({i});
        cluster_prefs.push_back(prefs[i]);
    }
    while (true) {
        double best = 1.0;
        std::size_t ba = 0, bb = 0;
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double dist = jaccard_distance(cluster_prefs[a], cluster_prefs[b]);
                if (dist < best) {
                    best = dist;
                    ba = a;
                    bb = b;
                }
            }
        }
        if (best >= 1.0) {
            break;
        }
        clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
        for (std::size_t w = 0; w < words; ++w) {
            cluster_prefs[ba][w] &= cluster_prefs[bb][w];
        }
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
        cluster_prefs.erase(cluster_prefs.begin() + static_cast<std::ptrdiff_t>(bb));
    }

    std::vector<std::vector<std::size_t>> groups;
    for (const auto& c : clusters) {
        if (c.size() >= 2) {
            groups.push_back(c);
        }
    }
    std::set<std::pair<int, int>> emitted;
    auto emit = [&](ConstraintKind kind, int a, int b) {
        const auto c = make_pair_candidate(kind, a, b, Provenance::JLinkage);
        if (emitted.emplace(static_cast<int>(kind) * 100000 + c.entities[0], c.entities[1]).second) {
            out.candidates.push_back(c);
        }
    };
    for (const auto& g : groups) {
        for (std::size_t a = 0; a < g.size(); ++a) {
            for (std::size_t b = a + 1; b < g.size(); ++b) {
                if (!same_endpoints(chords[lines[g[a]].edge], chords[lines[g[b]].edge])) {
                    emit(ConstraintKind::Parallel, lines[g[a]].edge, lines[g[b]].edge);
                }
            }
        }
    }

    if (groups.size() < 3) {
        return out;
    }
    std::vector<Eigen::Vector3d> directions;
    for (const auto& g : groups) {
        Eigen::MatrixXd stacked(static_cast<Eigen::Index>(g.size()), 3);
        for (std::size_t k = 0; k < g.size(); ++k) {
            stacked.row(static_cast<Eigen::Index>(k)) = lines[g[k]].homogeneous.transpose();
        }
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
        const Eigen::Vector3d vp = svd.matrixV().col(2);
        directions.push_back(Eigen::Vector3d(vp.x(), vp.y(), d.camera.focal_length * vp.z()).normalized());
    }
    double best = INFINITY;
    std::array<std::size_t, 3> triple{};
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            for (std::size_t c = b + 1; c < groups.size(); ++c) {
                const double worst = std::max({std::abs(directions[a].dot(directions[b])),
                                               std::abs(directions[a].dot(directions[c])),
                                               std::abs(directions[b].dot(directions[c]))});
                if (worst < best) {
                    best = worst;
                    triple = {a, b, c};
                }
            }
        }
    }
    if (best > 0.3) {
        out.warnings.push_back("no near-orthogonal vanishing point triple; perpendicular pairs skipped");
        return out;
    }
    for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t y = x + 1; y < 3; ++y) {
            for (std::size_t la : groups[triple[x]]) {
                for (std::size_t lb : groups[triple[y]]) {
                    if (!same_endpoints(chords[lines[la].edge], chords[lines[lb].edge])) {
                        emit(ConstraintKind::Perpendicular, lines[la].edge, lines[lb].edge);
                    }
                }
            }
        }
    }
    return out;
}

DetectionResult detect_true2form(const LineDrawing& d, const DepthVector& z0, const DetectorConfig& cfg)
{
    cfg.validate();
    if (z0.size() != static_cast<Eigen::Index>(d.vertices.size()) || !(z0.array() > 0.0).all()) {
        throw std::invalid_argument("detect_true2form: baseline depths must be positive, one per vertex");
    }
    DetectionResult out;
    const auto chords = chord_edges(d);
    const auto edges = usable_edges(d, chords, out.warnings);
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t a = 0; a < edges.size(); ++a) {
        for (std::size_t b = a + 1; b < edges.size(); ++b) {
            if (!same_endpoints(chords[edges[a]], chords[edges[b]])) {
                pairs.emplace_back(edges[a], edges[b]);
            }
        }
    }
    const double sigma = cfg.true2form.sigma_alpha;
    const auto m = static_cast<Eigen::Index>(d.vertices.size());

    auto deviation = [&](ConstraintKind kind, const std::vector<Eigen::Vector3d>& pts, const std::pair<int, int>& p) {
        const Eigen::Vector3d u = pts[chords[p.first].endpoints[1]] - pts[chords[p.first].endpoints[0]];
        const Eigen::Vector3d w = pts[chords[p.second].endpoints[1]] - pts[chords[p.second].endpoints[0]];
        if (u.norm() == 0.0 || w.norm() == 0.0) {
            return 90.0;
        }
        const double angle = acute_angle_deg(u, w);
        return kind == ConstraintKind::Parallel ? angle : 90.0 - angle;
    };

    DepthVector z = z0;
    for (ConstraintKind kind : {ConstraintKind::Parallel, ConstraintKind::Perpendicular}) {
        std::vector<std::vector<ResidualEquation>> eqs;
        for (const auto& p : pairs) {
            auto e = candidate_equations(make_pair_candidate(kind, p.first, p.second, Provenance::True2Form), d);
            assign_scales(e, z0);
            eqs.push_back(std::move(e));
        }
        Eigen::Index rows = m;
        for (const auto& e : eqs) {
            rows += static_cast<Eigen::Index>(e.size());
        }

        std::vector<char> accepted(pairs.size(), 0);
        bool diverged = false;
        for (int round = 0; round < cfg.true2form.max_iters; ++round) {
            const auto pts = lift(d, z);
            std::vector<double> weight(pairs.size());
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                const double alpha = deviation(kind, pts, pairs[k]);
                weight[k] = std::sqrt(cfg.true2form.w_c * std::exp(-alpha * alpha / (2.0 * sigma * sigma)));
            }
            auto residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
                jac.setZero();
                r.head(m) = x - z0;
                jac.topLeftCorner(m, m).setIdentity();
                Eigen::Index row = m;
                for (std::size_t k = 0; k < eqs.size(); ++k) {
                    for (const auto& e : eqs[k]) {
                        r[row] = weight[k] * e.value(x) / e.scale;
                        e.add_gradient(x, jac.row(row), weight[k] / e.scale);
                        ++row;
                    }
                }
            };
            LeastSquaresOptions opts;
            opts.max_iters = 100;
            const LeastSquaresResult ls = minimize_least_squares(residuals, z, rows, opts);
            if (ls.failed || !ls.x.allFinite()) {
                diverged = true;
                break;
            }
            z = ls.x;
            const auto lifted = lift(d, z);
            std::vector<char> now(pairs.size(), 0);
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                now[k] = deviation(kind, lifted, pairs[k]) < sigma ? 1 : 0;
            }
            const bool stable = now == accepted && round > 0;
            accepted = std::move(now);
            if (stable) {
                break;
            }
        }
        if (diverged) {
            out.diverged = true;
            out.warnings.push_back(std::string("true2form: optimizer diverged during ") + std::string(to_string(kind)) +
                                   " stage; returning pairs accepted so far");
        }
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (accepted[k]) {
                out.candidates.push_back(make_pair_candidate(kind, pairs[k].first, pairs[k].second, Provenance::True2Form));
            }
        }
        if (diverged) {
            break;
        }
    }
    return out;
}

std::vector<ConstraintCandidate> symmetry_filter(const std::map<int, std::vector<int>>& pred, ConstraintKind kind,
                                                 Provenance provenance)
{
    auto predicts = [&](int query, int target) {
        const auto it = pred.find(query);
        return it != pred.end() && std::find(it->second.begin(), it->second.end(), target) != it->second.end();
    };
    std::set<std::pair<int, int>> pairs;
    for (const auto& [query, related] : pred) {
        for (int j : related) {
            if (j != query && predicts(j, query)) {
                pairs.emplace(std::min(query, j), std::max(query, j));
            }
        }
    }
    std::vector<ConstraintCandidate> out;
    for (const auto& [a, b] : pairs) {
        out.push_back(make_pair_candidate(kind, a, b, provenance));
    }
    return out;
}

DetectionScore score_from_counts(int tp, int predicted, int ground_truth)
{
    DetectionScore s;
    s.true_positives = tp;
    s.predicted = predicted;
    s.ground_truth = ground_truth;
    s.precision = predicted == 0 ? (ground_truth == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / predicted;
    s.recall = ground_truth == 0 ? 1.0 : static_cast<double>(tp) / ground_truth;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

DetectionScore score_detection(const std::vector<ConstraintCandidate>& pred, const std::vector<ConstraintCandidate>& gt,
                               ConstraintKind kind)
{
    auto as_set = [kind](const std::vector<ConstraintCandidate>& cands) {
        std::set<std::vector<int>> s;
        for (const auto& c : cands) {
            if (c.kind == kind) {
                s.insert(canonicalize(c).entities);
            }
        }
        return s;
    };
    const auto p = as_set(pred);
    const auto g = as_set(gt);
    int tp = 0;
    for (const auto& e : p) {
        tp += g.count(e) ? 1 : 0;
    }
    return score_from_counts(tp, static_cast<int>(p.size()), static_cast<int>(g.size()));
}

} // namespace wirelift
