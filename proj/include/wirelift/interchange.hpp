#pragma once

#include "wirelift/drawing.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wirelift {

// A line drawing plus the optional stage outputs that travel with it between
// subcommands. Top-level keys:
//   camera {focal_length, center_distance}, vertices [[x,y],...],
//   edges [{kind, endpoints, arc?: {center, mid}}], faces?, gt_depths?,
//   constraints?, predicted_depths?, selected_constraints?, solution?
// A face lists its boundary vertices; a face with holes lists the outer loop
// followed by each inner loop. Unknown keys are rejected.
struct Document {
    LineDrawing drawing;
    std::optional<std::vector<ConstraintCandidate>> selected_constraints;
    std::optional<nlohmann::json> solution;
};

Document load_document(std::string_view bytes);
std::string save_document(const Document& doc);

LineDrawing load_drawing(std::string_view bytes);
std::string save_drawing(const LineDrawing& d);

Document read_document(const std::filesystem::path& path);
void write_document(const std::filesystem::path& path, const Document& doc);

nlohmann::json candidate_to_json(const ConstraintCandidate& c);
ConstraintCandidate candidate_from_json(const nlohmann::json& j);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace wirelift
