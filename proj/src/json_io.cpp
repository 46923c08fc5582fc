#include "pandora/json_io.hpp"

#include <fstream>

namespace pandora {

using nlohmann::json;

namespace {

double require_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw PandoraError("BadInput", where + " must be a number");
  return j.get<double>();
}

std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw PandoraError("BadInput", where + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(require_number(v, where));
  return out;
}

}  // namespace

Instance instance_from_json(const json& doc) {
  if (!doc.is_object()) throw PandoraError("BadInput", "instance document must be a JSON object");
  for (const char* field : {"values", "boxes", "edges", "transitions"}) {
    if (!doc.contains(field)) throw PandoraError("BadInput", std::string("missing field '") + field + "'");
  }

  Instance raw;
  raw.grid.values = number_array(doc["values"], "values");

  for (const auto& b : doc["boxes"]) {
    BoxSpec box;
    if (!b.contains("id") || !b["id"].is_string()) throw PandoraError("BadInput", "box id must be a string");
    box.id = b["id"].get<std::string>();
    box.cost = require_number(b.at("cost"), "box '" + box.id + "' cost");
    if (b.contains("root_dist") && !b["root_dist"].is_null()) {
      box.root_dist = RewardDistribution{number_array(b["root_dist"], "root_dist of '" + box.id + "'")};
    }
    raw.boxes.push_back(std::move(box));
  }

  for (const auto& e : doc["edges"]) {
    EdgeSpec edge;
    edge.from = e.at("from").get<std::string>();
    edge.to = e.at("to").get<std::string>();
    edge.transition = e.at("transition").get<std::string>();
    raw.edges.push_back(std::move(edge));
  }

  if (!doc["transitions"].is_object()) throw PandoraError("BadInput", "transitions must be an object");
  for (const auto& [tid, rows] : doc["transitions"].items()) {
    TransitionMatrix tm;
    tm.id = tid;
    if (!rows.is_array()) throw PandoraError("BadInput", "transition '" + tid + "' must be an array of rows");
    for (const auto& row : rows) tm.rows.push_back(number_array(row, "transition '" + tid + "'"));
    raw.transitions[tid] = std::move(tm);
  }

  return validate_instance(std::move(raw));
}

Instance instance_from_string(const std::string& text) {
  json doc = json::parse(text, nullptr, true);
  return instance_from_json(doc);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PandoraError("IoError", "cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw PandoraError("BadInput", std::string("JSON parse failure: ") + e.what());
  }
  return instance_from_json(doc);
}

json instance_to_json(const Instance& inst) {
  json doc;
  doc["values"] = inst.grid.values;
  doc["boxes"] = json::array();
  for (const BoxSpec& b : inst.boxes) {
    json jb;
    jb["id"] = b.id;
    jb["cost"] = b.cost;
    jb["root_dist"] = b.root_dist ? json(b.root_dist->probs) : json(nullptr);
    doc["boxes"].push_back(std::move(jb));
  }
  doc["edges"] = json::array();
  for (const EdgeSpec& e : inst.edges) {
    doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"transition", e.transition}});
  }
  doc["transitions"] = json::object();
  for (const auto& [tid, tm] : inst.transitions) {
    doc["transitions"][tid] = tm.rows;
  }
  return doc;
}

}  // namespace pandora
