#pragma once

#include "wirelift/drawing.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wirelift {

enum class SceneFamily { Cuboid, LBlock, NPrism, ExtrudedPolygonWithHole, FilletedBlock };

std::string to_string(SceneFamily family);
SceneFamily parse_scene_family(const std::string& text);
const std::vector<SceneFamily>& all_scene_families();

struct Pose {
    // Rotation R = Rz(euler[2]) * Ry(euler[1]) * Rx(euler[0]), radians.
    std::array<double, 3> euler{0.0, 0.0, 0.0};
    std::array<double, 3> translation{0.0, 0.0, 0.0};
};

// size_params per family:
//   Cuboid                   [a, b, c]
//   LBlock                   [width, height, depth, cut_width, cut_height]
//   NPrism                   [n, radius, height]
//   ExtrudedPolygonWithHole  [width, height, depth, hole_width, hole_height, hole_dx, hole_dy]
//   FilletedBlock            [width, height, depth, fillet_radius]
// With parts == 2 a second, smaller cuboid (second_part dimensions) is
// placed beside the first with no connecting edge.
struct SceneSpec {
    SceneFamily family = SceneFamily::Cuboid;
    std::vector<double> size_params;
    Pose pose;
    std::uint64_t seed = 0;
    int parts = 1;
    std::array<double, 3> second_part{0.5, 0.6, 0.7};
};

// Object-frame solid before placement: vertices, chord/arc edges and
// planar faces (outer loop then inner loops).
struct Solid {
    struct SolidEdge {
        EdgeKind kind = EdgeKind::Segment;
        std::array<int, 2> endpoints{0, 0};
        Eigen::Vector3d arc_center = Eigen::Vector3d::Zero();
        Eigen::Vector3d arc_mid = Eigen::Vector3d::Zero();
    };
    std::vector<Eigen::Vector3d> vertices;
    std::vector<SolidEdge> edges;
    std::vector<std::vector<int>> faces;
};

Solid build_solid(const SceneSpec& spec);

struct Scene {
    LineDrawing drawing;
    DepthVector gt;
    std::vector<ConstraintCandidate> gt_constraints;
    // Pose actually used (after degenerate-view retries).
    Pose pose;
    int retries = 0;
};

// Projects the normalised, posed solid through the default camera (f = 5,
// center distance 6) and labels ground truth from the 3D geometry.
// Throws GenerationError after 100 consecutive degenerate views.
Scene generate_scene(const SceneSpec& spec);

// Ground-truth constraints of a posed solid given camera-frame vertices.
std::vector<ConstraintCandidate> label_constraints(const std::vector<Eigen::Vector3d>& camera_vertices,
                                                   const std::vector<Edge>& edges,
                                                   const std::vector<std::vector<int>>& faces);

// Random size parameters and pose for a family.
SceneSpec random_spec(SceneFamily family, std::uint64_t seed);

struct FamilyWeight {
    SceneFamily family;
    double weight;
};

std::vector<FamilyWeight> default_family_mix();

// "cuboid:0.5,nprism:0.5" or "cuboid,lblock" (equal weights).
std::vector<FamilyWeight> parse_family_mix(const std::string& text);

// Largest-remainder apportionment of n items over the weights.
std::vector<int> apportion(int n, const std::vector<double>& weights);

struct CorpusOptions {
    std::vector<FamilyWeight> families = default_family_mix();
    bool allow_disconnected = false;
    double disconnected_fraction = 0.05;
    int jobs = 1;
};

struct ManifestEntry {
    std::string file;
    SceneFamily family;
    int parts = 1;
    int vertices = 0;
    int edges = 0;
    int constraints = 0;
};

struct Manifest {
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;
};

// Writes n interchange documents (scene_0000.json, ...) and manifest.json.
Manifest generate_corpus(int n, std::uint64_t seed, const std::filesystem::path& out_dir,
                         const CorpusOptions& options = {});

Manifest read_manifest(const std::filesystem::path& corpus_dir);

} // namespace wirelift
