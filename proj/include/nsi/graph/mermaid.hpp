#pragma once

// Mermaid-scaffold import/export for skill graphs. The accepted input is
// the closed scaffold subset: flowchart TD, classDef kind declarations,
// quoted node labels of the form "Kind: ...<br>local in: (...)<br>...",
// and --> edges with optional |label| tags. Unknown directives are
// warnings, not errors. The canonical storage format is .skill.json; this
// surface exists for import/export.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nsi/graph/graph.hpp"
#include "nsi/graph/validate.hpp"
#include "nsi/logic/parser.hpp"

namespace nsi {

struct UnknownNodeKind : Error {
  explicit UnknownNodeKind(const std::string& what_) : Error("unknown node kind: " + what_) {}
};

struct PlaceholderUnresolved : Error {
  std::string name;
  explicit PlaceholderUnresolved(const std::string& n, const std::string& node)
      : Error("placeholder {{" + n + "}} in node " + node + " resolves to no local, global, or parameter"),
        name(n) {}
};

struct MissingStart : Error {
  MissingStart() : Error("flowchart has no start interface node") {}
};

namespace mermaid_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == '\'' || s[i + 1] == '\\')) {
      out += s[i + 1];
      ++i;
    } else {
      out += s[i];
    }
  }
  return out;
}

// Replace {{name}} with name; record the referenced names.
inline std::string strip_placeholders(const std::string& s, std::vector<std::string>* refs) {
  std::string out;
  std::size_t p = 0;
  while (p < s.size()) {
    if (s.compare(p, 2, "{{") == 0) {
      std::size_t e = s.find("}}", p + 2);
      if (e == std::string::npos) { out += s.substr(p); break; }
      std::string name = trim(s.substr(p + 2, e - p - 2));
      if (refs) refs->push_back(name);
      out += name;
      p = e + 2;
    } else {
      out += s[p++];
    }
  }
  return out;
}

inline std::vector<std::string> split_fields(const std::string& label) {
  std::vector<std::string> out;
  std::size_t p = 0;
  while (p <= label.size()) {
    std::size_t next = std::string::npos;
    std::size_t adv = 0;
    for (const char* br : {"<br/>", "<br />", "<br>"}) {
      std::size_t q = label.find(br, p);
      if (q != std::string::npos && (next == std::string::npos || q < next)) {
        next = q;
        adv = std::string(br).size();
      }
    }
    if (next == std::string::npos) {
      out.push_back(trim(label.substr(p)));
      break;
    }
    out.push_back(trim(label.substr(p, next - p)));
    p = next + adv;
  }
  return out;
}

// Split "(a, b, c)" items at top-level commas; parens/brackets/quotes nest.
inline std::vector<std::string> split_paren_list(const std::string& s, const std::string& where) {
  std::string body = trim(s);
  if (body.size() < 2 || body.front() != '(' || body.back() != ')')
    throw SyntaxError("expected parenthesized list in " + where, 0);
  body = body.substr(1, body.size() - 2);
  std::vector<std::string> items;
  int depth = 0;
  bool quote = false;
  std::string cur;
  for (char c : body) {
    if (c == '\'' ) quote = !quote;
    if (!quote) {
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
      if (c == ',' && depth == 0) {
        items.push_back(trim(cur));
        cur.clear();
        continue;
      }
    }
    cur += c;
  }
  if (!trim(cur).empty()) items.push_back(trim(cur));
  return items;
}

struct TypedItem {
  std::string name;
  std::string type_tag;
  std::string expr_text;  // empty for bare "name: Type" items
};

// "name: Type = expr" | "name: Type := expr" | "name: Type"
inline TypedItem parse_typed_item(const std::string& item, const std::string& where) {
  std::size_t colon = item.find(':');
  if (colon == std::string::npos) throw SyntaxError("expected name: Type in " + where, 0);
  TypedItem out;
  out.name = trim(item.substr(0, colon));
  std::string rest = trim(item.substr(colon + 1));
  std::size_t i = 0;
  while (i < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[i])) || rest[i] == '_')) ++i;
  out.type_tag = rest.substr(0, i);
  std::string tail = trim(rest.substr(i));
  if (tail.rfind(":=", 0) == 0)
    out.expr_text = trim(tail.substr(2));
  else if (!tail.empty() && tail[0] == '=')
    out.expr_text = trim(tail.substr(1));
  else if (!tail.empty())
    throw SyntaxError("unexpected text after type in " + where + ": " + tail, 0);
  if (out.name.empty() || out.type_tag.empty())
    throw SyntaxError("malformed typed item in " + where, 0);
  return out;
}

struct RawNode {
  std::string id;
  std::string klass;  // :::Kind annotation
  std::string label;  // unescaped
  std::size_t line = 0;
};

struct RawEdge {
  std::string from, to, label;
  bool dotted = false;
};

inline bool parse_node_line(const std::string& line, RawNode* out) {
  std::size_t i = 0;
  while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
  if (i == 0) return false;
  out->id = line.substr(0, i);
  std::string rest = trim(line.substr(i));
  std::string open, close;
  if (rest.rfind("([\"", 0) == 0) { open = "([\""; close = "\"])"; }
  else if (rest.rfind("[\"", 0) == 0) { open = "[\""; close = "\"]"; }
  else if (rest.rfind("{\"", 0) == 0) { open = "{\""; close = "\"}"; }
  else if (rest.rfind("(\"", 0) == 0) { open = "(\""; close = "\")"; }
  else return false;
  std::size_t end = rest.rfind(close);
  if (end == std::string::npos || end < open.size()) return false;
  out->label = unescape(rest.substr(open.size(), end - open.size()));
  std::string tail = trim(rest.substr(end + close.size()));
  if (tail.rfind(":::", 0) == 0) out->klass = trim(tail.substr(3));
  else if (!tail.empty()) return false;
  return true;
}

inline bool parse_edge_line(const std::string& line, RawEdge* out) {
  auto ident_at = [&](std::size_t p, std::string* id) {
    std::size_t i = p;
    while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
    if (i == p) return std::string::npos;
    *id = line.substr(p, i - p);
    return i;
  };
  std::string from;
  std::size_t p = ident_at(0, &from);
  if (p == std::string::npos) return false;
  std::size_t arrow = line.find("-->", p);
  std::size_t dotted = line.find("-.-", p);
  std::string between = arrow != std::string::npos ? trim(line.substr(p, arrow - p)) : "";
  if (arrow != std::string::npos && between.empty()) {
    out->dotted = false;
    p = arrow + 3;
  } else if (dotted != std::string::npos && trim(line.substr(p, dotted - p)).empty()) {
    out->dotted = true;
    p = dotted + 3;
    if (p < line.size() && line[p] == '>') ++p;  // -.->
    while (p < line.size() && (line[p] == '-' || line[p] == '.')) ++p;
  } else {
    return false;
  }
  out->from = from;
  std::string rest = trim(line.substr(p));
  if (!rest.empty() && rest[0] == '|') {
    std::size_t close = rest.find('|', 1);
    if (close == std::string::npos) return false;
    out->label = trim(rest.substr(1, close - 1));
    rest = trim(rest.substr(close + 1));
  }
  std::string to;
  std::size_t q = ident_at(0, &to);
  (void)q;
  std::size_t j = 0;
  while (j < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[j])) || rest[j] == '_')) ++j;
  if (j == 0 || j != rest.size()) return false;
  out->to = rest;
  return true;
}

}  // namespace mermaid_detail

struct MermaidParseResult {
  SkillGraph graph;
  std::vector<ValidationIssue> warnings;
};

// Parse the Mermaid scaffold into a validated SkillGraph. Raises
// error-severity validation issues as ValidationFailed.
inline MermaidParseResult parse_skill_text_checked(const std::string& text, const Vocabulary& vocab) {
  using namespace mermaid_detail;
  MermaidParseResult result;
  SkillGraph& g = result.graph;

  // Assemble logical lines: a statement continues while a quote is open.
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string phys, buf;
    auto quote_open = [](const std::string& s) {
      int q = 0;
      for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] == '"') ++q;
      return q % 2 == 1;
    };
    while (std::getline(in, phys)) {
      buf = buf.empty() ? phys : buf + " " + trim(phys);
      if (quote_open(buf)) continue;
      std::string t = trim(buf);
      buf.clear();
      if (!t.empty()) lines.push_back(t);
    }
    if (!trim(buf).empty()) lines.push_back(trim(buf));
  }

  static const std::set<std::string> known_kinds = {"Interface", "DataOp", "Check",
                                                    "LoopControl", "PrimitiveAction", "Spec"};
  std::vector<RawNode> raw_nodes;
  std::vector<RawEdge> raw_edges;
  bool saw_flowchart = false;

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    if (line.rfind("%%", 0) == 0) continue;
    if (line.rfind("flowchart", 0) == 0) { saw_flowchart = true; continue; }
    if (line.rfind("classDef", 0) == 0) {
      std::istringstream ss(line);
      std::string kw, name;
      ss >> kw >> name;
      if (!known_kinds.count(name))
        result.warnings.push_back({ValidationIssue::Severity::Warning, "R6", name,
                                   "unknown classDef kind ignored"});
      continue;
    }
    RawEdge e;
    if (parse_edge_line(line, &e)) { raw_edges.push_back(e); continue; }
    RawNode n;
    n.line = li;
    if (parse_node_line(line, &n)) { raw_nodes.push_back(n); continue; }
    result.warnings.push_back({ValidationIssue::Severity::Warning, "R6", "line " + std::to_string(li),
                               "unknown directive ignored: " + line.substr(0, 40)});
  }
  if (!saw_flowchart)
    result.warnings.push_back({ValidationIssue::Severity::Warning, "R6", "<header>",
                               "missing flowchart header"});

  // Placeholder references per node, resolved once all nodes are known.
  std::map<std::string, std::vector<std::string>> node_refs;

  for (const auto& raw : raw_nodes) {
    if (g.nodes.count(raw.id)) throw SyntaxError("duplicate node id " + raw.id, raw.line);
    std::vector<std::string> fields = split_fields(raw.label);
    if (fields.empty()) throw SyntaxError("empty node label for " + raw.id, raw.line);

    std::string head = fields[0];
    std::size_t colon = head.find(':');
    std::string kind_txt = colon == std::string::npos ? head : trim(head.substr(0, colon));
    std::string head_rest = colon == std::string::npos ? "" : trim(head.substr(colon + 1));

    Node node;
    node.id = raw.id;
    if (!known_kinds.count(kind_txt)) {
      // Fall back to the class annotation (LEGEND-style Spec nodes have
      // free-form labels).
      if (raw.klass == "Spec") {
        node.kind = NodeKind::Spec;
        node.spec_text = raw.label;
        g.nodes.emplace(node.id, std::move(node));
        continue;
      }
      throw UnknownNodeKind(kind_txt + " (node " + raw.id + ")");
    }
    if (!raw.klass.empty() && raw.klass != kind_txt &&
        !(known_kinds.count(kind_txt) && raw.klass == "Interface"))
      result.warnings.push_back({ValidationIssue::Severity::Warning, "R6", raw.id,
                                 "label kind " + kind_txt + " disagrees with class " + raw.klass});

    if (kind_txt == "Spec") {
      node.kind = NodeKind::Spec;
      node.spec_text = raw.label;
      g.nodes.emplace(node.id, std::move(node));
      continue;
    }

    auto& refs = node_refs[raw.id];
    auto parse_expr_field = [&](const std::string& txt) {
      return parse_expression(strip_placeholders(txt, &refs), vocab);
    };
    auto parse_typed_expr = [&](const std::string& txt, const std::string& tag) {
      return coerce_expr_to_tag(parse_expr_field(txt), tag);
    };

    // Kind-specific header content.
    if (kind_txt == "Interface") {
      std::string tag = head_rest;
      std::string lower;
      for (char c : tag) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (tag.find(":=True") != std::string::npos) node.kind = NodeKind::Success;
      else if (tag.find(":=False") != std::string::npos) node.kind = NodeKind::Failure;
      else if (lower.rfind("start", 0) == 0) node.kind = NodeKind::Start;
      else if (lower.rfind("success", 0) == 0) node.kind = NodeKind::Success;
      else if (lower.rfind("failure", 0) == 0) node.kind = NodeKind::Failure;
      else
        throw UnknownNodeKind("Interface role '" + tag + "' (node " + raw.id + ")");
    } else if (kind_txt == "PrimitiveAction") {
      // (action: 'go to {{goto_rec}}')
      std::size_t a = head_rest.find('\'');
      std::size_t b = head_rest.rfind('\'');
      if (a == std::string::npos || b <= a)
        throw SyntaxError("malformed action header in " + raw.id, raw.line);
      node.kind = NodeKind::PrimitiveAction;
      node.action_template = head_rest.substr(a + 1, b - a - 1);
    } else if (kind_txt == "Check") {
      node.kind = NodeKind::Check;
      node.condition = parse_expr_field(head_rest);
    } else if (kind_txt == "LoopControl") {
      node.kind = NodeKind::LoopControl;
      // "For receptacle_i in {{loop_receptacles}}"
      std::istringstream hs(head_rest);
      std::string kw_for, var, kw_in;
      hs >> kw_for >> var >> kw_in;
      std::string src;
      std::getline(hs, src);
      if (kw_for != "For" || kw_in != "in" || trim(src).empty())
        throw SyntaxError("malformed loop header in " + raw.id, raw.line);
      node.loop_var = var;
      node.loop_source = parse_typed_expr(trim(src), "List_ObjectName");
    } else if (kind_txt == "DataOp") {
      node.kind = NodeKind::DataOp;
      if (!head_rest.empty()) fields.insert(fields.begin() + 1, head_rest);
    }

    // Remaining key: value fields.
    for (std::size_t fi = 1; fi < fields.size(); ++fi) {
      const std::string& f = fields[fi];
      if (f.empty()) continue;
      auto starts = [&](const char* k) { return f.rfind(k, 0) == 0; };
      if (starts("local in:")) {
        for (const auto& item : split_paren_list(trim(f.substr(9)), raw.id)) {
          TypedItem ti = parse_typed_item(item, raw.id);
          if (ti.expr_text.empty())
            throw SyntaxError("local " + ti.name + " in " + raw.id + " needs a binding", raw.line);
          node.local_in[ti.name] = {ti.type_tag, parse_typed_expr(ti.expr_text, ti.type_tag)};
        }
      } else if (starts("writes GLOBAL:")) {
        if (is_interface(node.kind)) continue;  // cosmetic SUCCESS_FLAG write
        for (const auto& item : split_paren_list(trim(f.substr(14)), raw.id)) {
          TypedItem ti = parse_typed_item(item, raw.id);
          if (ti.expr_text.empty())
            throw SyntaxError("write " + ti.name + " in " + raw.id + " needs an expression", raw.line);
          node.writes_global[ti.name] = {ti.type_tag, parse_typed_expr(ti.expr_text, ti.type_tag)};
        }
      } else if (starts("params:")) {
        for (const auto& item : split_paren_list(trim(f.substr(7)), raw.id)) {
          TypedItem ti = parse_typed_item(item, raw.id);
          g.params.push_back({ti.name, ti.type_tag});
        }
      } else if (starts("diagnosis:")) {
        std::string d = trim(f.substr(10));
        if (d.size() >= 2 && d.front() == '\'' && d.back() == '\'') d = d.substr(1, d.size() - 2);
        node.diagnosis_template = d;
      } else if (starts("out:")) {
        // cosmetic in the scaffold
      } else if (is_interface(node.kind) && starts("SUCCESS_FLAG")) {
        // terminal marker remnants, already consumed
      } else {
        result.warnings.push_back({ValidationIssue::Severity::Warning, "R6", raw.id,
                                   "unknown label field ignored: " + f.substr(0, 30)});
      }
    }
    g.nodes.emplace(node.id, std::move(node));
  }

  // Edges.
  for (const auto& re : raw_edges) {
    Edge e;
    e.from = re.from;
    e.to = re.to;
    e.spec_link = re.dotted;
    if (!re.label.empty()) {
      std::istringstream ls(re.label);
      std::string part;
      while (std::getline(ls, part, ',')) {
        part = trim(part);
        if (part == "Yes") e.branch = BranchLabel::Yes;
        else if (part == "No") e.branch = BranchLabel::No;
        else if (part == "body") e.branch = BranchLabel::Body;
        else if (part == "done") e.branch = BranchLabel::Done;
        else if (part == "Start_Loop") e.loop_entry = LoopEntry::Start;
        else if (part == "Continue_Loop") e.loop_entry = LoopEntry::Continue;
        else
          result.warnings.push_back({ValidationIssue::Severity::Warning, "R6",
                                     re.from + "->" + re.to, "unknown edge label " + part});
      }
    }
    g.edges.push_back(e);
  }

  // Start node and declared globals.
  for (const auto& [id, n] : g.nodes) {
    if (n.kind == NodeKind::Start) g.start = id;
    for (const auto& [name, w] : n.writes_global)
      if (!g.declared_globals.count(name)) g.declared_globals[name] = w.type_tag;
  }
  if (g.start.empty()) throw MissingStart();

  // Resolve placeholders: lowercase -> node local or loop var; UPPERCASE ->
  // parameter or some node's written global.
  for (const auto& [id, refs] : node_refs) {
    const Node& n = g.nodes.at(id);
    for (const auto& r : refs) {
      if (is_upper_ident(r)) {
        if (!g.has_param(r) && !g.declared_globals.count(r)) throw PlaceholderUnresolved(r, id);
      } else {
        if (!n.local_in.count(r) && r != n.loop_var) throw PlaceholderUnresolved(r, id);
      }
    }
    for (const auto& slot : template_slots(n.action_template))
      if (!n.local_in.count(slot)) throw PlaceholderUnresolved(slot, id);
  }

  require_valid(g);
  return result;
}

inline SkillGraph parse_skill_text(const std::string& text, const Vocabulary& vocab) {
  return parse_skill_text_checked(text, vocab).graph;
}

namespace mermaid_detail {

// Topological-then-lexicographic order over control nodes. Continue_Loop
// edges are back-edges by construction and are excluded; any residual
// cycle is broken lexicographically.
inline std::vector<std::string> canonical_order(const SkillGraph& g) {
  // Subgraph reachable from start.
  std::set<std::string> reach;
  if (g.nodes.count(g.start)) {
    std::vector<std::string> stack{g.start};
    while (!stack.empty()) {
      std::string id = stack.back();
      stack.pop_back();
      if (!reach.insert(id).second) continue;
      for (const auto* e : g.out_edges(id)) stack.push_back(e->to);
    }
  }
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& id : reach) indegree[id] = 0;
  for (const auto& e : g.edges) {
    if (e.spec_link || e.loop_entry == LoopEntry::Continue) continue;
    if (!indegree.count(e.from) || !indegree.count(e.to)) continue;
    succ[e.from].push_back(e.to);
    indegree[e.to]++;
  }
  std::set<std::string> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.insert(id);
  std::vector<std::string> order;
  std::set<std::string> done;
  while (done.size() < indegree.size()) {
    std::string pick;
    if (!ready.empty()) {
      pick = *ready.begin();
      ready.erase(ready.begin());
    } else {
      for (const auto& [id, d] : indegree)
        if (!done.count(id)) { pick = id; break; }
    }
    if (done.count(pick)) continue;
    done.insert(pick);
    order.push_back(pick);
    for (const auto& s : succ[pick]) {
      if (--indegree[s] == 0 && !done.count(s)) ready.insert(s);
    }
  }
  // Nodes not reachable from start (runtime failure landing pads) go last.
  for (const auto& [id, n] : g.nodes)
    if (n.kind != NodeKind::Spec && !reach.count(id)) order.push_back(id);
  return order;
}

inline std::string emit_typed_list(const std::map<std::string, LocalBinding>& locals) {
  std::string out = "(";
  bool first = true;
  for (const auto& [name, b] : locals) {
    if (!first) out += ", ";
    first = false;
    out += name + ": " + b.type_tag + " = " + serialize_braced(b.binding);
  }
  return out + ")";
}

}  // namespace mermaid_detail

// Canonical scaffold emission; parse(serialize(g)) reproduces identical
// node ids and labels, and serialize∘parse is idempotent.
inline std::string serialize_skill_text(const SkillGraph& g) {
  using namespace mermaid_detail;
  require_valid(g);
  std::string out = "flowchart TD\n";
  out += "    classDef Spec fill:#f4f4ff,stroke:#6a6ab2,stroke-dasharray: 4 3,stroke-width:2px;\n";
  out += "    classDef Interface fill:#e2e2f2,stroke:#6a6ab2,stroke-width:2px;\n";
  out += "    classDef LoopControl fill:#f9e4b7,stroke:#b99b37,stroke-width:2px;\n";
  out += "    classDef PrimitiveAction fill:#f9c2c2,stroke:#c23737,stroke-width:2px;\n";
  out += "    classDef Check fill:#d0e1f9,stroke:#4378a2,stroke-width:2px;\n";
  out += "    classDef DataOp fill:#f0f0f0,stroke:#888888,stroke-width:2px;\n\n";

  for (const auto& [id, n] : g.nodes)
    if (n.kind == NodeKind::Spec)
      out += "    " + id + "[\"" + n.spec_text + "\"]:::Spec\n";

  for (const auto& id : canonical_order(g)) {
    const Node& n = g.nodes.at(id);
    std::string label;
    switch (n.kind) {
      case NodeKind::Start: {
        label = "Interface: start";
        if (!g.params.empty()) {
          label += "<br>params: (";
          for (std::size_t i = 0; i < g.params.size(); ++i) {
            if (i) label += ", ";
            label += g.params[i].name + ": " + g.params[i].type_tag;
          }
          label += ")";
        }
        break;
      }
      case NodeKind::Success:
        label = "Interface: SUCCESS_FLAG: Bool:=True";
        break;
      case NodeKind::Failure:
        label = "Interface: SUCCESS_FLAG: Bool:=False";
        if (!n.diagnosis_template.empty()) label += "<br>diagnosis: '" + n.diagnosis_template + "'";
        break;
      case NodeKind::DataOp: {
        label = "DataOp: writes GLOBAL: (";
        bool first = true;
        for (const auto& [name, w] : n.writes_global) {
          if (!first) label += ", ";
          first = false;
          label += name + ": " + w.type_tag + " = " + serialize_braced(w.expr);
        }
        label += ")";
        if (!n.local_in.empty()) label += "<br>local in: " + emit_typed_list(n.local_in);
        break;
      }
      case NodeKind::Check:
        label = "Check: " + serialize_braced(n.condition);
        if (!n.local_in.empty()) label += "<br>local in: " + emit_typed_list(n.local_in);
        break;
      case NodeKind::LoopControl: {
        label = "LoopControl: For " + n.loop_var + " in " + serialize_braced(n.loop_source);
        if (!n.writes_global.empty()) {
          label += "<br>writes GLOBAL: (";
          bool first = true;
          for (const auto& [name, w] : n.writes_global) {
            if (!first) label += ", ";
            first = false;
            label += name + ": " + w.type_tag + " := " + serialize_braced(w.expr);
          }
          label += ")";
        }
        if (!n.local_in.empty()) label += "<br>local in: " + emit_typed_list(n.local_in);
        break;
      }
      case NodeKind::PrimitiveAction:
        label = "PrimitiveAction: (action: '" + n.action_template + "')";
        if (!n.local_in.empty()) label += "<br>local in: " + emit_typed_list(n.local_in);
        label += "<br>out: (executed: Bool)";
        break;
      case NodeKind::Spec:
        continue;
    }
    bool stadium = is_interface(n.kind);
    out += "    " + id + (stadium ? "([\"" : "[\"") + label + (stadium ? "\"]):::" : "\"]:::") +
           node_kind_name(n.kind) + "\n";
  }

  out += "\n";
  // Spec links first, then control edges in canonical order.
  std::vector<const Edge*> spec_links, control;
  for (const auto& e : g.edges)
    (e.spec_link ? spec_links : control).push_back(&e);
  std::map<std::string, std::size_t> pos;
  auto order = canonical_order(g);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  std::stable_sort(control.begin(), control.end(), [&](const Edge* a, const Edge* b) {
    auto ka = std::tuple(pos.count(a->from) ? pos[a->from] : 1 << 20, a->label(), a->to);
    auto kb = std::tuple(pos.count(b->from) ? pos[b->from] : 1 << 20, b->label(), b->to);
    return ka < kb;
  });
  for (const auto* e : spec_links) out += "    " + e->from + " -.- " + e->to + "\n";
  for (const auto* e : control) {
    std::string lbl = e->label();
    out += "    " + e->from + " -->" + (lbl.empty() ? "" : "|" + lbl + "|") + " " + e->to + "\n";
  }
  return out;
}

}  // namespace nsi
