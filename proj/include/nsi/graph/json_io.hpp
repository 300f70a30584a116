#pragma once

// .skill.json: the canonical, schema-versioned storage format. Expressions
// are stored as canonical DSL text, so loading requires the vocabulary.

#include <fstream>
#include <string>

#include <json.hpp>

#include "nsi/graph/graph.hpp"
#include "nsi/graph/validate.hpp"
#include "nsi/logic/parser.hpp"

namespace nsi {

inline constexpr int kSkillSchemaVersion = 1;

namespace json_detail {

using nlohmann::json;

inline json node_to_json(const Node& n) {
  json j;
  j["id"] = n.id;
  switch (n.kind) {
    case NodeKind::Start: j["kind"] = "start"; break;
    case NodeKind::Success: j["kind"] = "success"; break;
    case NodeKind::Failure: j["kind"] = "failure"; break;
    case NodeKind::DataOp: j["kind"] = "data_op"; break;
    case NodeKind::Check: j["kind"] = "check"; break;
    case NodeKind::LoopControl: j["kind"] = "loop_control"; break;
    case NodeKind::PrimitiveAction: j["kind"] = "primitive_action"; break;
    case NodeKind::Spec: j["kind"] = "spec"; break;
  }
  if (!n.local_in.empty()) {
    json locals = json::array();
    for (const auto& [name, b] : n.local_in)
      locals.push_back({{"name", name}, {"type", b.type_tag}, {"binding", serialize(b.binding)}});
    j["local_in"] = locals;
  }
  if (!n.writes_global.empty()) {
    json writes = json::array();
    for (const auto& [name, w] : n.writes_global)
      writes.push_back({{"name", name}, {"type", w.type_tag}, {"expr", serialize(w.expr)}});
    j["writes_global"] = writes;
  }
  if (!n.action_template.empty()) j["action"] = n.action_template;
  if (n.condition) j["condition"] = serialize(n.condition);
  if (!n.loop_var.empty()) j["loop_var"] = n.loop_var;
  if (n.loop_source) j["loop_source"] = serialize(n.loop_source);
  if (!n.diagnosis_template.empty()) j["diagnosis"] = n.diagnosis_template;
  if (!n.spec_text.empty()) j["spec_text"] = n.spec_text;
  return j;
}

inline Node node_from_json(const json& j, const Vocabulary& vocab) {
  Node n;
  n.id = j.at("id").get<std::string>();
  std::string k = j.at("kind").get<std::string>();
  if (k == "start") n.kind = NodeKind::Start;
  else if (k == "success") n.kind = NodeKind::Success;
  else if (k == "failure") n.kind = NodeKind::Failure;
  else if (k == "data_op") n.kind = NodeKind::DataOp;
  else if (k == "check") n.kind = NodeKind::Check;
  else if (k == "loop_control") n.kind = NodeKind::LoopControl;
  else if (k == "primitive_action") n.kind = NodeKind::PrimitiveAction;
  else if (k == "spec") n.kind = NodeKind::Spec;
  else throw Error("unknown node kind in skill json: " + k);
  for (const auto& l : j.value("local_in", json::array())) {
    std::string tag = l.at("type").get<std::string>();
    n.local_in[l.at("name").get<std::string>()] = {
        tag, coerce_expr_to_tag(parse_expression(l.at("binding").get<std::string>(), vocab), tag)};
  }
  for (const auto& w : j.value("writes_global", json::array())) {
    std::string tag = w.at("type").get<std::string>();
    n.writes_global[w.at("name").get<std::string>()] = {
        tag, coerce_expr_to_tag(parse_expression(w.at("expr").get<std::string>(), vocab), tag)};
  }
  n.action_template = j.value("action", "");
  if (j.contains("condition")) n.condition = parse_expression(j["condition"].get<std::string>(), vocab);
  n.loop_var = j.value("loop_var", "");
  if (j.contains("loop_source"))
    n.loop_source = coerce_expr_to_tag(
        parse_expression(j["loop_source"].get<std::string>(), vocab), "List_ObjectName");
  n.diagnosis_template = j.value("diagnosis", "");
  n.spec_text = j.value("spec_text", "");
  return n;
}

}  // namespace json_detail

inline nlohmann::json graph_to_json(const SkillGraph& g) {
  using nlohmann::json;
  json j;
  j["schema_version"] = kSkillSchemaVersion;
  j["start"] = g.start;
  json params = json::array();
  for (const auto& p : g.params) params.push_back({{"name", p.name}, {"type", p.type_tag}});
  j["params"] = params;
  json globals = json::array();
  for (const auto& [name, t] : g.declared_globals) globals.push_back({{"name", name}, {"type", t}});
  j["globals"] = globals;
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes) nodes.push_back(json_detail::node_to_json(n));
  j["nodes"] = nodes;
  json edges = json::array();
  for (const auto& e : g.edges) {
    json je = {{"from", e.from}, {"to", e.to}};
    std::string lbl = e.label();
    if (!lbl.empty()) je["label"] = lbl;
    if (e.spec_link) je["spec_link"] = true;
    edges.push_back(je);
  }
  j["edges"] = edges;
  return j;
}

inline SkillGraph graph_from_json(const nlohmann::json& j, const Vocabulary& vocab) {
  SkillGraph g;
  int version = j.value("schema_version", 0);
  if (version != kSkillSchemaVersion)
    throw Error("unsupported skill schema version " + std::to_string(version));
  g.start = j.value("start", "");
  for (const auto& p : j.value("params", nlohmann::json::array()))
    g.params.push_back({p.at("name").get<std::string>(), p.at("type").get<std::string>()});
  for (const auto& gl : j.value("globals", nlohmann::json::array()))
    g.declared_globals[gl.at("name").get<std::string>()] = gl.at("type").get<std::string>();
  for (const auto& jn : j.at("nodes")) {
    Node n = json_detail::node_from_json(jn, vocab);
    g.nodes.emplace(n.id, std::move(n));
  }
  for (const auto& je : j.at("edges")) {
    Edge e;
    e.from = je.at("from").get<std::string>();
    e.to = je.at("to").get<std::string>();
    e.spec_link = je.value("spec_link", false);
    std::string lbl = je.value("label", "");
    std::size_t p = 0;
    while (p < lbl.size()) {
      std::size_t c = lbl.find(',', p);
      std::string part = lbl.substr(p, c == std::string::npos ? std::string::npos : c - p);
      while (!part.empty() && part.front() == ' ') part.erase(part.begin());
      while (!part.empty() && part.back() == ' ') part.pop_back();
      if (part == "Yes") e.branch = BranchLabel::Yes;
      else if (part == "No") e.branch = BranchLabel::No;
      else if (part == "body") e.branch = BranchLabel::Body;
      else if (part == "done") e.branch = BranchLabel::Done;
      else if (part == "Start_Loop") e.loop_entry = LoopEntry::Start;
      else if (part == "Continue_Loop") e.loop_entry = LoopEntry::Continue;
      if (c == std::string::npos) break;
      p = c + 1;
    }
    g.edges.push_back(e);
  }
  return g;
}

inline nlohmann::json schema_to_json(const SkillSchema& s) {
  using nlohmann::json;
  json j = graph_to_json(s.graph);
  j["name"] = s.name;
  j["sub_goal"] = s.sub_goal;
  json doc;
  doc["description"] = s.docstring.description;
  auto exprs = [](const std::vector<Expr>& es) {
    json a = json::array();
    for (const auto& e : es) a.push_back(serialize(e));
    return a;
  };
  doc["start_conditions"] = exprs(s.docstring.start_conditions);
  doc["success_conditions"] = exprs(s.docstring.success_conditions);
  doc["feasibility_exclusions"] = exprs(s.docstring.feasibility_exclusions);
  json binders = json::object();
  for (const auto& [p, e] : s.docstring.param_binders) binders[p] = serialize(e);
  doc["param_binders"] = binders;
  j["docstring"] = doc;
  j["tentative_nodes"] = s.tentative_nodes;
  return j;
}

inline SkillSchema schema_from_json(const nlohmann::json& j, const Vocabulary& vocab) {
  SkillSchema s;
  s.graph = graph_from_json(j, vocab);
  s.name = j.value("name", "");
  s.sub_goal = j.value("sub_goal", "");
  if (j.contains("docstring")) {
    const auto& doc = j["docstring"];
    s.docstring.description = doc.value("description", "");
    auto exprs = [&](const char* key) {
      std::vector<Expr> out;
      for (const auto& t : doc.value(key, nlohmann::json::array()))
        out.push_back(parse_expression(t.get<std::string>(), vocab));
      return out;
    };
    s.docstring.start_conditions = exprs("start_conditions");
    s.docstring.success_conditions = exprs("success_conditions");
    s.docstring.feasibility_exclusions = exprs("feasibility_exclusions");
    nlohmann::json binders = doc.value("param_binders", nlohmann::json::object());
    for (const auto& [p, t] : binders.items())
      s.docstring.param_binders[p] = parse_expression(t.get<std::string>(), vocab);
  }
  for (const auto& t : j.value("tentative_nodes", nlohmann::json::array()))
    s.tentative_nodes.insert(t.get<std::string>());
  return s;
}

inline void save_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return nlohmann::json::parse(in);
}

}  // namespace nsi
