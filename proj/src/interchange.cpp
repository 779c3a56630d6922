#include "wirelift/interchange.hpp"

#include "wirelift/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace wirelift {

using nlohmann::json;

namespace {

const std::set<std::string> kTopLevelKeys = {
    "camera",          "vertices", "edges", "faces", "gt_depths", "constraints", "predicted_depths",
    "selected_constraints", "solution"};

Point2 point_from_json(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) {
        throw FormatError(where + ": expected [x, y]");
    }
    return Point2{j[0].get<double>(), j[1].get<double>()};
}

json point_to_json(double x, double y)
{
    return json::array({x, y});
}

std::vector<double> depths_from_json(const json& j, const char* key)
{
    if (!j.is_array()) {
        throw FormatError(std::string(key) + ": expected an array");
    }
    return j.get<std::vector<double>>();
}

std::vector<ConstraintCandidate> candidates_from_json(const json& j, const char* key)
{
    if (!j.is_array()) {
        throw FormatError(std::string(key) + ": expected an array");
    }
    std::vector<ConstraintCandidate> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        try {
            out.push_back(candidate_from_json(j[k]));
        } catch (const FormatError& e) {
            throw FormatError(std::string(key) + " " + std::to_string(k) + ": " + e.what());
        }
    }
    return out;
}

json candidates_to_json(const std::vector<ConstraintCandidate>& cands)
{
    json arr = json::array();
    for (const auto& c : cands) {
        arr.push_back(candidate_to_json(c));
    }
    return arr;
}

Document parse(const json& root)
{
    if (!root.is_object()) {
        throw FormatError("document root must be an object");
    }
    for (const auto& [key, value] : root.items()) {
        if (!kTopLevelKeys.count(key)) {
            throw FormatError("unknown key '" + key + "'");
        }
    }
    for (const char* key : {"camera", "vertices", "edges"}) {
        if (!root.contains(key)) {
            throw FormatError(std::string("missing key '") + key + "'");
        }
    }

    Document doc;
    LineDrawing& d = doc.drawing;
    const json& cam = root.at("camera");
    d.camera.focal_length = cam.at("focal_length").get<double>();
    d.camera.center_distance = cam.at("center_distance").get<double>();

    const json& verts = root.at("vertices");
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Point2 p = point_from_json(verts[i], "vertex " + std::to_string(i));
        d.vertices.push_back(Vertex2D{p.x, p.y});
    }

    const json& edges = root.at("edges");
    for (std::size_t j = 0; j < edges.size(); ++j) {
        const json& je = edges[j];
        const std::string where = "edge " + std::to_string(j);
        Edge e;
        e.kind = parse_edge_kind(je.at("kind").get<std::string>());
        const auto ends = je.at("endpoints").get<std::vector<int>>();
        if (ends.size() != 2) {
            throw FormatError(where + ": expected two endpoints");
        }
        e.endpoints = {ends[0], ends[1]};
        if (je.contains("arc")) {
            e.arc = ArcParams{point_from_json(je.at("arc").at("center"), where + " center"),
                              point_from_json(je.at("arc").at("mid"), where + " mid")};
        }
        d.edges.push_back(e);
    }

    if (root.contains("faces")) {
        d.faces = root.at("faces").get<std::vector<std::vector<int>>>();
    }
    if (root.contains("gt_depths")) {
        d.gt_depths = depths_from_json(root.at("gt_depths"), "gt_depths");
    }
    if (root.contains("predicted_depths")) {
        d.predicted_depths = depths_from_json(root.at("predicted_depths"), "predicted_depths");
    }
    if (root.contains("constraints")) {
        d.constraints = candidates_from_json(root.at("constraints"), "constraints");
    }
    if (root.contains("selected_constraints")) {
        doc.selected_constraints = candidates_from_json(root.at("selected_constraints"), "selected_constraints");
    }
    if (root.contains("solution")) {
        doc.solution = root.at("solution");
    }
    validate(d);
    return doc;
}

} // namespace

json candidate_to_json(const ConstraintCandidate& c)
{
    json j;
    j["kind"] = std::string(to_string(c.kind));
    j["entities"] = canonicalize(c).entities;
    j["provenance"] = std::string(to_string(c.provenance));
    if (c.anchor_value) {
        j["anchor_value"] = *c.anchor_value;
    }
    return j;
}

ConstraintCandidate candidate_from_json(const json& j)
{
    if (!j.is_object()) {
        throw FormatError("constraint must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "kind" && key != "entities" && key != "provenance" && key != "anchor_value") {
            throw FormatError("unknown constraint key '" + key + "'");
        }
    }
    ConstraintCandidate c;
    c.kind = parse_constraint_kind(j.at("kind").get<std::string>());
    c.entities = j.at("entities").get<std::vector<int>>();
    c.provenance = parse_provenance(j.at("provenance").get<std::string>());
    if (j.contains("anchor_value")) {
        c.anchor_value = j.at("anchor_value").get<double>();
    }
    return canonicalize(std::move(c));
}

Document load_document(std::string_view bytes)
{
    json root;
    try {
        root = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("parse error: ") + e.what());
    }
    try {
        return parse(root);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed document: ") + e.what());
    }
}

std::string save_document(const Document& doc)
{
    const LineDrawing& d = doc.drawing;
    json root;
    root["camera"] = {{"focal_length", d.camera.focal_length}, {"center_distance", d.camera.center_distance}};
    json verts = json::array();
    for (const auto& v : d.vertices) {
        verts.push_back(point_to_json(v.x, v.y));
    }
    root["vertices"] = verts;
    json edges = json::array();
    for (const auto& e : d.edges) {
        json je;
        je["kind"] = std::string(to_string(e.kind));
        je["endpoints"] = json::array({e.endpoints[0], e.endpoints[1]});
        if (e.arc) {
            je["arc"] = {{"center", point_to_json(e.arc->center.x, e.arc->center.y)},
                         {"mid", point_to_json(e.arc->mid.x, e.arc->mid.y)}};
        }
        edges.push_back(je);
    }
    root["edges"] = edges;
    if (d.faces) {
        root["faces"] = *d.faces;
    }
    if (d.gt_depths) {
        root["gt_depths"] = *d.gt_depths;
    }
    if (d.predicted_depths) {
        root["predicted_depths"] = *d.predicted_depths;
    }
    if (!d.constraints.empty()) {
        root["constraints"] = candidates_to_json(d.constraints);
    }
    if (doc.selected_constraints) {
        root["selected_constraints"] = candidates_to_json(*doc.selected_constraints);
    }
    if (doc.solution) {
        root["solution"] = *doc.solution;
    }
    return root.dump(2) + "\n";
}

LineDrawing load_drawing(std::string_view bytes)
{
    return load_document(bytes).drawing;
}

std::string save_drawing(const LineDrawing& d)
{
    return save_document(Document{d, std::nullopt, std::nullopt});
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << contents;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

Document read_document(const std::filesystem::path& path)
{
    try {
        return load_document(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_document(const std::filesystem::path& path, const Document& doc)
{
    write_file(path, save_document(doc));
}

} // namespace wirelift
