#include "wirelift/scene_synth.hpp"

#include "wirelift/error.hpp"
#include "wirelift/interchange.hpp"
#include "wirelift/parallel.hpp"
#include "wirelift/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace wirelift {

namespace {

constexpr double kViewEpsilon = 1e-4;
constexpr double kLabelTolerance = 1e-9;
constexpr int kMaxPoseRetries = 100;

struct ProfileVertex {
    Eigen::Vector2d p;
    bool arc_to_next = false;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
};

using Loop = std::vector<ProfileVertex>;

Loop polygon(const std::vector<Eigen::Vector2d>& pts)
{
    Loop loop;
    for (const auto& p : pts) {
        loop.push_back(ProfileVertex{p});
    }
    return loop;
}

Loop rectangle(double cx, double cy, double w, double h)
{
    return polygon({{cx - w / 2, cy - h / 2}, {cx + w / 2, cy - h / 2}, {cx + w / 2, cy + h / 2}, {cx - w / 2, cy + h / 2}});
}

// Extrudes the loops along +z. Bottom vertices of every loop come first, then
// the top vertices in the same order.
Solid extrude(const std::vector<Loop>& loops, double height)
{
    Solid s;
    std::vector<int> loop_start;
    int total = 0;
    for (const auto& loop : loops) {
        loop_start.push_back(total);
        total += static_cast<int>(loop.size());
    }
    for (double z : {0.0, height}) {
        for (const auto& loop : loops) {
            for (const auto& v : loop) {
                s.vertices.emplace_back(v.p.x(), v.p.y(), z);
            }
        }
    }

    auto profile_edge = [&](const Loop& loop, int base, int i, int level) {
        const int n = static_cast<int>(loop.size());
        const int j = (i + 1) % n;
        Solid::SolidEdge e;
        e.endpoints = {base + i + level * total, base + j + level * total};
        if (loop[i].arc_to_next) {
            const double z = level == 0 ? 0.0 : height;
            const Eigen::Vector2d a = loop[i].p - loop[i].center;
            const Eigen::Vector2d b = loop[j].p - loop[j].center;
            const Eigen::Vector2d mid = loop[i].center + (a.normalized() + b.normalized()).normalized() * a.norm();
            e.kind = EdgeKind::Arc;
            e.arc_center = Eigen::Vector3d(loop[i].center.x(), loop[i].center.y(), z);
            e.arc_mid = Eigen::Vector3d(mid.x(), mid.y(), z);
        }
        return e;
    };

    for (int level = 0; level < 2; ++level) {
        for (std::size_t l = 0; l < loops.size(); ++l) {
            for (int i = 0; i < static_cast<int>(loops[l].size()); ++i) {
                s.edges.push_back(profile_edge(loops[l], loop_start[l], i, level));
            }
        }
    }
    for (std::size_t l = 0; l < loops.size(); ++l) {
        for (int i = 0; i < static_cast<int>(loops[l].size()); ++i) {
            Solid::SolidEdge e;
            e.endpoints = {loop_start[l] + i, loop_start[l] + i + total};
            s.edges.push_back(e);
        }
    }

    for (int level = 0; level < 2; ++level) {
        std::vector<int> cap;
        for (std::size_t l = 0; l < loops.size(); ++l) {
            for (int i = 0; i < static_cast<int>(loops[l].size()); ++i) {
                cap.push_back(loop_start[l] + i + level * total);
            }
        }
        s.faces.push_back(cap);
    }
    for (std::size_t l = 0; l < loops.size(); ++l) {
        const int n = static_cast<int>(loops[l].size());
        for (int i = 0; i < n; ++i) {
            if (loops[l][i].arc_to_next) {
                continue;
            }
            const int a = loop_start[l] + i;
            const int b = loop_start[l] + (i + 1) % n;
            s.faces.push_back({a, b, b + total, a + total});
        }
    }
    return s;
}

void require_params(const SceneSpec& spec, std::size_t count)
{
    if (spec.size_params.size() != count) {
        throw std::invalid_argument(to_string(spec.family) + ": expected " + std::to_string(count) + " size parameters");
    }
}

Solid build_single(const SceneSpec& spec)
{
    const auto& p = spec.size_params;
    switch (spec.family) {
    case SceneFamily::Cuboid:
        require_params(spec, 3);
        return extrude({rectangle(0, 0, p[0], p[1])}, p[2]);
    case SceneFamily::LBlock: {
        require_params(spec, 5);
        const double w = p[0], h = p[1], cw = p[3], ch = p[4];
        return extrude({polygon({{0, 0}, {w, 0}, {w, h - ch}, {w - cw, h - ch}, {w - cw, h}, {0, h}})}, p[2]);
    }
    case SceneFamily::NPrism: {
        require_params(spec, 3);
        const int n = static_cast<int>(p[0]);
        if (n < 3) {
            throw std::invalid_argument("NPrism needs n >= 3");
        }
        std::vector<Eigen::Vector2d> pts;
        for (int k = 0; k < n; ++k) {
            const double a = 2.0 * M_PI * k / n;
            pts.emplace_back(p[1] * std::cos(a), p[1] * std::sin(a));
        }
        return extrude({polygon(pts)}, p[2]);
    }
    case SceneFamily::ExtrudedPolygonWithHole:
        require_params(spec, 7);
        return extrude({rectangle(0, 0, p[0], p[1]), rectangle(p[5], p[6], p[3], p[4])}, p[2]);
    case SceneFamily::FilletedBlock: {
        require_params(spec, 4);
        const double w = p[0], h = p[1], r = p[3];
        Loop loop = polygon({{0, 0}, {w, 0}, {w, h - r}, {w - r, h}, {0, h}});
        loop[2].arc_to_next = true;
        loop[2].center = {w - r, h - r};
        loop[3].center = {w - r, h - r};
        return extrude({loop}, p[2]);
    }
    }
    throw std::invalid_argument("unknown family");
}

void append(Solid& a, const Solid& b, const Eigen::Vector3d& offset)
{
    const int base = static_cast<int>(a.vertices.size());
    for (const auto& v : b.vertices) {
        a.vertices.push_back(v + offset);
    }
    for (auto e : b.edges) {
        e.endpoints[0] += base;
        e.endpoints[1] += base;
        e.arc_center += offset;
        e.arc_mid += offset;
        a.edges.push_back(e);
    }
    for (auto f : b.faces) {
        for (int& v : f) {
            v += base;
        }
        a.faces.push_back(f);
    }
}

void normalize(Solid& s)
{
    Eigen::Vector3d lo = s.vertices.front(), hi = s.vertices.front();
    auto grow = [&](const Eigen::Vector3d& v) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    };
    for (const auto& v : s.vertices) {
        grow(v);
    }
    for (const auto& e : s.edges) {
        if (e.kind == EdgeKind::Arc) {
            grow(e.arc_mid);
        }
    }
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double scale = 1.0 / (0.5 * (hi - lo).norm());
    for (auto& v : s.vertices) {
        v = (v - center) * scale;
    }
    for (auto& e : s.edges) {
        e.arc_center = (e.arc_center - center) * scale;
        e.arc_mid = (e.arc_mid - center) * scale;
    }
}

Eigen::Matrix3d rotation(const Pose& pose)
{
    return (Eigen::AngleAxisd(pose.euler[2], Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(pose.euler[1], Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(pose.euler[0], Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

struct Placed {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<Eigen::Vector3d> arc_centers;
    std::vector<Eigen::Vector3d> arc_mids;
};

Placed place(const Solid& s, const Pose& pose, const Camera& camera)
{
    const Eigen::Matrix3d r = rotation(pose);
    const Eigen::Vector3d t(pose.translation[0], pose.translation[1], pose.translation[2] + camera.center_distance);
    Placed out;
    for (const auto& v : s.vertices) {
        out.vertices.push_back(r * v + t);
    }
    for (const auto& e : s.edges) {
        out.arc_centers.push_back(r * e.arc_center + t);
        out.arc_mids.push_back(r * e.arc_mid + t);
    }
    return out;
}

bool degenerate_view(const Solid& s, const Placed& placed, const Camera& camera)
{
    std::vector<Eigen::Vector2d> image;
    for (const auto& v : placed.vertices) {
        if (v.z() < 0.1) {
            return true;
        }
        image.push_back(project(v, camera));
    }
    for (std::size_t i = 0; i < image.size(); ++i) {
        for (std::size_t j = i + 1; j < image.size(); ++j) {
            if ((image[i] - image[j]).norm() < kViewEpsilon) {
                return true;
            }
        }
    }
    for (std::size_t k = 0; k < s.edges.size(); ++k) {
        const auto& e = s.edges[k];
        if (e.kind != EdgeKind::Arc) {
            continue;
        }
        if (placed.arc_mids[k].z() < 0.1) {
            return true;
        }
        const Eigen::Vector2d a = image[e.endpoints[0]];
        const Eigen::Vector2d u = image[e.endpoints[1]] - a;
        const Eigen::Vector2d w = project(placed.arc_mids[k], camera) - a;
        if (std::abs(u.x() * w.y() - u.y() * w.x()) < 1e-6 * u.norm() * w.norm()) {
            return true;
        }
    }
    // A planar face seen edge-on collapses to a line in the image.
    for (const auto& face : s.faces) {
        Eigen::Vector3d normal = Eigen::Vector3d::Zero();
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < face.size(); ++i) {
            const Eigen::Vector3d& p = placed.vertices[face[i]];
            const Eigen::Vector3d& q = placed.vertices[face[(i + 1) % face.size()]];
            normal += p.cross(q);
            centroid += p;
        }
        centroid /= static_cast<double>(face.size());
        if (std::abs(normal.dot(centroid)) < 0.02 * normal.norm() * centroid.norm()) {
            return true;
        }
    }
    return false;
}

} // namespace

std::string to_string(SceneFamily family)
{
    switch (family) {
    case SceneFamily::Cuboid:
        return "cuboid";
    case SceneFamily::LBlock:
        return "lblock";
    case SceneFamily::NPrism:
        return "nprism";
    case SceneFamily::ExtrudedPolygonWithHole:
        return "holed";
    case SceneFamily::FilletedBlock:
        return "filleted";
    }
    return "?";
}

const std::vector<SceneFamily>& all_scene_families()
{
    static const std::vector<SceneFamily> families{SceneFamily::Cuboid, SceneFamily::LBlock, SceneFamily::NPrism,
                                                   SceneFamily::ExtrudedPolygonWithHole, SceneFamily::FilletedBlock};
    return families;
}

SceneFamily parse_scene_family(const std::string& text)
{
    for (auto f : all_scene_families()) {
        if (to_string(f) == text) {
            return f;
        }
    }
    throw std::invalid_argument("unknown scene family '" + text + "'");
}

Solid build_solid(const SceneSpec& spec)
{
    Solid s = build_single(spec);
    if (spec.parts == 2) {
        const auto& d = spec.second_part;
        Solid b = extrude({rectangle(0, 0, d[0], d[1])}, d[2]);
        double a_max = -INFINITY, b_min = INFINITY;
        for (const auto& v : s.vertices) {
            a_max = std::max(a_max, v.x());
        }
        for (const auto& v : b.vertices) {
            b_min = std::min(b_min, v.x());
        }
        append(s, b, Eigen::Vector3d(a_max - b_min + 0.4, 0.15, 0.1));
    } else if (spec.parts != 1) {
        throw std::invalid_argument("parts must be 1 or 2");
    }
    normalize(s);
    return s;
}

std::vector<ConstraintCandidate> label_constraints(const std::vector<Eigen::Vector3d>& verts,
                                                   const std::vector<Edge>& edges,
                                                   const std::vector<std::vector<int>>& faces)
{
    std::vector<ConstraintCandidate> out;
    std::vector<Eigen::Vector3d> dirs;
    for (const auto& e : edges) {
        dirs.push_back(verts[e.endpoints[1]] - verts[e.endpoints[0]]);
    }
    const int n = static_cast<int>(edges.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double li = dirs[i].norm(), lj = dirs[j].norm();
            if (dirs[i].cross(dirs[j]).norm() < kLabelTolerance * li * lj) {
                out.push_back(make_pair_candidate(ConstraintKind::Parallel, i, j, Provenance::GroundTruth));
            }
            const auto& a = edges[i].endpoints;
            const auto& b = edges[j].endpoints;
            const bool same_ends = (a[0] == b[0] && a[1] == b[1]) || (a[0] == b[1] && a[1] == b[0]);
            if (!same_ends && std::abs(dirs[i].dot(dirs[j])) < kLabelTolerance * li * lj) {
                out.push_back(make_pair_candidate(ConstraintKind::Perpendicular, i, j, Provenance::GroundTruth));
            }
            if (std::abs(li - lj) < kLabelTolerance * std::max(li, lj)) {
                out.push_back(make_pair_candidate(ConstraintKind::EqualLength, i, j, Provenance::GroundTruth));
            }
        }
    }
    for (std::size_t f = 0; f < faces.size(); ++f) {
        if (faces[f].size() >= 4) {
            out.push_back(ConstraintCandidate{ConstraintKind::FacePlanarity, {static_cast<int>(f)},
                                              Provenance::GroundTruth, std::nullopt});
        }
    }
    return out;
}

Scene generate_scene(const SceneSpec& spec)
{
    const Solid solid = build_solid(spec);
    const Camera camera;
    Pose pose = spec.pose;
    Rng rng(mix_seed(spec.seed, 0x5EED));

    int retries = 0;
    Placed placed = place(solid, pose, camera);
    while (degenerate_view(solid, placed, camera)) {
        if (++retries >= kMaxPoseRetries) {
            throw GenerationError("generate_scene: " + std::to_string(kMaxPoseRetries) +
                                  " consecutive degenerate poses (seed " + std::to_string(spec.seed) + ")");
        }
        for (double& a : pose.euler) {
            a += rng.uniform(-0.5, 0.5);
        }
        placed = place(solid, pose, camera);
    }

    Scene scene;
    scene.pose = pose;
    scene.retries = retries;
    LineDrawing& d = scene.drawing;
    d.camera = camera;
    std::vector<double> depths;
    for (const auto& v : placed.vertices) {
        const Eigen::Vector2d p = project(v, camera);
        d.vertices.push_back(Vertex2D{p.x(), p.y()});
        depths.push_back(v.z());
    }
    for (std::size_t k = 0; k < solid.edges.size(); ++k) {
        const auto& se = solid.edges[k];
        Edge e{se.kind, se.endpoints, std::nullopt};
        if (se.kind == EdgeKind::Arc) {
            const Eigen::Vector2d c = project(placed.arc_centers[k], camera);
            const Eigen::Vector2d m = project(placed.arc_mids[k], camera);
            e.arc = ArcParams{{c.x(), c.y()}, {m.x(), m.y()}};
        }
        d.edges.push_back(e);
    }
    d.faces = solid.faces;
    d.gt_depths = depths;

    scene.gt_constraints = label_constraints(placed.vertices, d.edges, solid.faces);
    scene.gt_constraints.push_back(make_anchor(0, depths.front(), Provenance::GroundTruth));
    d.constraints = scene.gt_constraints;
    scene.gt = *d.gt_depth_vector();
    validate(d);
    return scene;
}

SceneSpec random_spec(SceneFamily family, std::uint64_t seed)
{
    Rng rng(seed);
    SceneSpec spec;
    spec.family = family;
    spec.seed = seed;
    switch (family) {
    case SceneFamily::Cuboid:
        spec.size_params = {rng.uniform(0.6, 1.6), rng.uniform(0.6, 1.6), rng.uniform(0.6, 1.6)};
        break;
    case SceneFamily::LBlock: {
        const double w = rng.uniform(1.0, 2.0), h = rng.uniform(1.0, 2.0);
        spec.size_params = {w, h, rng.uniform(0.6, 1.5), w * rng.uniform(0.3, 0.7), h * rng.uniform(0.3, 0.7)};
        break;
    }
    case SceneFamily::NPrism:
        spec.size_params = {static_cast<double>(3 + rng.below(6)), 1.0, rng.uniform(0.6, 2.0)};
        break;
    case SceneFamily::ExtrudedPolygonWithHole: {
        const double w = rng.uniform(1.0, 2.0), h = rng.uniform(1.0, 2.0);
        const double hw = w * rng.uniform(0.3, 0.55), hh = h * rng.uniform(0.3, 0.55);
        const double dx = rng.uniform(-1.0, 1.0) * (w - hw) * 0.25;
        const double dy = rng.uniform(-1.0, 1.0) * (h - hh) * 0.25;
        spec.size_params = {w, h, rng.uniform(0.4, 1.2), hw, hh, dx, dy};
        break;
    }
    case SceneFamily::FilletedBlock: {
        const double w = rng.uniform(1.0, 2.0), h = rng.uniform(1.0, 2.0);
        spec.size_params = {w, h, rng.uniform(0.6, 1.5), std::min(w, h) * rng.uniform(0.2, 0.45)};
        break;
    }
    }
    // Oblique view from one of the eight octants, as a fixed camera sees an
    // axis-aligned part, with jitter and a free roll about the optical axis.
    const double jitter = 10.0 * M_PI / 180.0;
    const double elevation = std::atan(1.0 / std::sqrt(2.0));
    spec.pose.euler[0] = M_PI / 4.0 + M_PI / 2.0 * static_cast<double>(rng.below(4)) + rng.uniform(-jitter, jitter);
    spec.pose.euler[1] = (rng.below(2) == 0 ? elevation : -elevation) + rng.uniform(-jitter, jitter);
    spec.pose.euler[2] = rng.uniform(0.0, 2.0 * M_PI);
    spec.pose.translation = {0.0, 0.0, 0.0};
    spec.second_part = {rng.uniform(0.4, 0.8), rng.uniform(0.4, 0.8), rng.uniform(0.4, 0.8)};
    return spec;
}

std::vector<FamilyWeight> default_family_mix()
{
    return {{SceneFamily::Cuboid, 0.25},
            {SceneFamily::LBlock, 0.20},
            {SceneFamily::NPrism, 0.25},
            {SceneFamily::ExtrudedPolygonWithHole, 0.15},
            {SceneFamily::FilletedBlock, 0.15}};
}

std::vector<FamilyWeight> parse_family_mix(const std::string& text)
{
    std::vector<FamilyWeight> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto colon = item.find(':');
        FamilyWeight fw{parse_scene_family(item.substr(0, colon)), 1.0};
        if (colon != std::string::npos) {
            fw.weight = std::stod(item.substr(colon + 1));
        }
        if (!(fw.weight > 0.0)) {
            throw std::invalid_argument("family weight must be positive in '" + item + "'");
        }
        out.push_back(fw);
    }
    if (out.empty()) {
        throw std::invalid_argument("empty family mix");
    }
    return out;
}

std::vector<int> apportion(int n, const std::vector<double>& weights)
{
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<int> counts(weights.size());
    std::vector<double> remainder(weights.size());
    int assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = n * weights[i] / total;
        counts[i] = static_cast<int>(std::floor(quota));
        remainder[i] = quota - counts[i];
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k) {
        ++counts[order[k % order.size()]];
        ++assigned;
    }
    return counts;
}

Manifest generate_corpus(int n, std::uint64_t seed, const std::filesystem::path& out_dir, const CorpusOptions& options)
{
    if (n < 1) {
        throw std::invalid_argument("generate_corpus: n must be at least 1");
    }
    std::vector<double> weights;
    for (const auto& fw : options.families) {
        weights.push_back(fw.weight);
    }
    const std::vector<int> counts = apportion(n, weights);
    std::vector<SceneFamily> sequence;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        sequence.insert(sequence.end(), static_cast<std::size_t>(counts[i]), options.families[i].family);
    }
    Rng order_rng(mix_seed(seed, 0xFA11));
    order_rng.shuffle(sequence);

    std::vector<int> parts(static_cast<std::size_t>(n), 1);
    if (options.allow_disconnected) {
        const int multi = static_cast<int>(std::lround(n * options.disconnected_fraction));
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        Rng part_rng(mix_seed(seed, 0xD15C));
        part_rng.shuffle(idx);
        for (int k = 0; k < multi; ++k) {
            parts[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = 2;
        }
    }

    Manifest manifest;
    manifest.seed = seed;
    manifest.entries.resize(static_cast<std::size_t>(n));
    std::filesystem::create_directories(out_dir);
    parallel_for(static_cast<std::size_t>(n), options.jobs, [&](std::size_t i) {
        SceneSpec spec = random_spec(sequence[i], seed + i);
        spec.parts = parts[i];
        const Scene scene = generate_scene(spec);
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04zu.json", i);
        write_file(out_dir / name, save_drawing(scene.drawing));
        manifest.entries[i] = ManifestEntry{name,
                                            spec.family,
                                            spec.parts,
                                            static_cast<int>(scene.drawing.vertices.size()),
                                            static_cast<int>(scene.drawing.edges.size()),
                                            static_cast<int>(scene.gt_constraints.size())};
    });

    nlohmann::json j;
    j["seed"] = seed;
    j["n"] = n;
    nlohmann::json family_counts = nlohmann::json::object();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        family_counts[to_string(options.families[i].family)] = counts[i];
    }
    j["family_counts"] = family_counts;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        files.push_back({{"file", e.file},
                         {"family", to_string(e.family)},
                         {"parts", e.parts},
                         {"vertices", e.vertices},
                         {"edges", e.edges},
                         {"constraints", e.constraints}});
    }
    j["files"] = files;
    write_file(out_dir / "manifest.json", j.dump(2) + "\n");
    return manifest;
}

Manifest read_manifest(const std::filesystem::path& corpus_dir)
{
    const auto j = nlohmann::json::parse(read_file(corpus_dir / "manifest.json"));
    Manifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& f : j.at("files")) {
        m.entries.push_back(ManifestEntry{f.at("file").get<std::string>(),
                                          parse_scene_family(f.at("family").get<std::string>()),
                                          f.at("parts").get<int>(), f.at("vertices").get<int>(),
                                          f.at("edges").get<int>(), f.at("constraints").get<int>()});
    }
    return m;
}

} // namespace wirelift
