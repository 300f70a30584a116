#pragma once

// Recorded demonstration episodes and the .trace.jsonl format: a header
// record with the universe and initial facts, one record per step, and a
// trailer with sub-goal segments.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsi/logic/parser.hpp"
#include "nsi/logic/state.hpp"

namespace nsi {

struct TraceStep {
  std::string action;
  std::string observation;
  FactDelta delta;
};

struct Segment {
  std::string sub_goal;
  std::map<std::string, Value> bindings;
  std::size_t start = 0;  // first action index of the segment
  std::size_t end = 0;    // one past the last action index
};

struct Trace {
  std::string id;
  std::string domain;  // household | craft
  std::string task;
  SymbolicState initial;
  std::vector<TraceStep> steps;
  std::vector<Segment> segments;
};

// Z_h: the symbolic state before action index h.
inline SymbolicState trace_state_at(const Trace& t, const Vocabulary& vocab, std::size_t h) {
  SymbolicState z = t.initial;
  for (std::size_t i = 0; i < h && i < t.steps.size(); ++i)
    z = apply_fact_delta(vocab, z, t.steps[i].delta);
  return z;
}

inline void validate_segments(const Trace& t) {
  std::size_t prev_end = 0;
  for (const auto& s : t.segments) {
    if (s.start >= s.end || s.end > t.steps.size())
      throw Error("segment out of bounds in trace " + t.id);
    if (s.start < prev_end) throw Error("overlapping segments in trace " + t.id);
    prev_end = s.end;
  }
}

namespace trace_detail {

inline GroundAtom atom_from_string(const std::string& text, const Vocabulary& vocab) {
  Expr e = parse_expression(text, vocab);
  if (e->op != ExprOp::Pred && e->op != ExprOp::Attr)
    throw Error("not a ground atom: " + text);
  GroundAtom a;
  a.predicate = e->name;
  for (const auto& k : e->kids) {
    // Atom arguments are ground by definition; a bare name without a
    // numeric suffix (craft items like "stick") parses as a Var.
    if (k->op == ExprOp::Var) a.args.push_back(Value::object(k->name));
    else if (k->op == ExprOp::Const) a.args.push_back(k->value);
    else throw Error("atom argument not ground: " + text);
  }
  return a;
}

inline nlohmann::json atoms_to_json(const std::vector<GroundAtom>& atoms) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : atoms) out.push_back(a.str());
  return out;
}

inline nlohmann::json value_to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Object: return v.as_object();
    case ValueKind::Bool: return v.as_bool();
    case ValueKind::Num: return v.as_num().is_integer() ? nlohmann::json(v.as_num().num)
                                                        : nlohmann::json(v.str());
    case ValueKind::List: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : v.as_list().items) arr.push_back(value_to_json(e));
      return arr;
    }
  }
  return {};
}

inline Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return Value::number(Rational(j.get<std::int64_t>()));
  if (j.is_string()) return Value::object(j.get<std::string>());
  if (j.is_array()) {
    std::vector<Value> items;
    for (const auto& e : j) items.push_back(value_from_json(e));
    return Value::list(items.empty() ? ValueKind::Object : items[0].kind(), std::move(items));
  }
  throw Error("unsupported binding value in trace json");
}

}  // namespace trace_detail

inline std::string trace_to_jsonl(const Trace& t) {
  using nlohmann::json;
  using namespace trace_detail;
  std::ostringstream out;

  json header;
  header["kind"] = "header";
  header["id"] = t.id;
  header["domain"] = t.domain;
  header["task"] = t.task;
  json universe = json::object();
  for (const auto& [tag, objs] : t.initial.universe) universe[tag] = objs;
  header["universe"] = universe;
  std::vector<GroundAtom> init(t.initial.atoms.begin(), t.initial.atoms.end());
  header["initial_facts"] = atoms_to_json(init);
  json attrs = json::array();
  for (const auto& [k, v] : t.initial.attributes)
    attrs.push_back({{"name", k.first}, {"object", k.second}, {"value", v.num}});
  header["initial_attributes"] = attrs;
  out << header.dump() << "\n";

  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    json rec;
    rec["kind"] = "step";
    rec["t"] = i;
    rec["action"] = s.action;
    rec["observation"] = s.observation;
    rec["add_facts"] = atoms_to_json(s.delta.add_facts);
    rec["remove_facts"] = atoms_to_json(s.delta.remove_facts);
    out << rec.dump() << "\n";
  }

  json trailer;
  trailer["kind"] = "segments";
  json segs = json::array();
  for (const auto& s : t.segments) {
    json js;
    js["sub_goal"] = s.sub_goal;
    js["start"] = s.start;
    js["end"] = s.end;
    json b = json::object();
    for (const auto& [k, v] : s.bindings) b[k] = value_to_json(v);
    js["bindings"] = b;
    segs.push_back(js);
  }
  trailer["segments"] = segs;
  out << trailer.dump() << "\n";
  return out.str();
}

inline Trace trace_from_jsonl(const std::string& text, const Vocabulary& vocab) {
  using nlohmann::json;
  using namespace trace_detail;
  Trace t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    std::string kind = j.value("kind", "");
    if (kind == "header") {
      have_header = true;
      t.id = j.value("id", "");
      t.domain = j.value("domain", "");
      t.task = j.value("task", "");
      json universe = j.value("universe", json::object());
      for (const auto& [tag, objs] : universe.items())
        for (const auto& o : objs) t.initial.register_object(tag, o.get<std::string>());
      for (const auto& a : j.value("initial_facts", json::array()))
        t.initial.atoms.insert(atom_from_string(a.get<std::string>(), vocab));
      for (const auto& a : j.value("initial_attributes", json::array()))
        t.initial.attributes[{a.at("name").get<std::string>(), a.at("object").get<std::string>()}] =
            Rational(a.at("value").get<std::int64_t>());
    } else if (kind == "step") {
      TraceStep s;
      s.action = j.value("action", "");
      s.observation = j.value("observation", "");
      for (const auto& a : j.value("add_facts", json::array()))
        s.delta.add_facts.push_back(atom_from_string(a.get<std::string>(), vocab));
      for (const auto& a : j.value("remove_facts", json::array()))
        s.delta.remove_facts.push_back(atom_from_string(a.get<std::string>(), vocab));
      t.steps.push_back(std::move(s));
    } else if (kind == "segments") {
      for (const auto& js : j.value("segments", json::array())) {
        Segment s;
        s.sub_goal = js.at("sub_goal").get<std::string>();
        s.start = js.at("start").get<std::size_t>();
        s.end = js.at("end").get<std::size_t>();
        json b = js.value("bindings", json::object());
        for (const auto& [k, v] : b.items()) s.bindings[k] = value_from_json(v);
        t.segments.push_back(std::move(s));
      }
    } else {
      throw Error("unknown trace record kind: " + kind);
    }
  }
  if (!have_header) throw Error("trace has no header record");
  validate_segments(t);
  return t;
}

inline void save_trace(const std::string& path, const Trace& t) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << trace_to_jsonl(t);
}

inline Trace load_trace(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return trace_from_jsonl(ss.str(), vocab);
}

}  // namespace nsi
