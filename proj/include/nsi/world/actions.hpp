#pragma once

// Action grammar shared by the worlds, the bootstrap transcriber, and the
// recovery planner: template text with {{slot}} holes plus slot types.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nsi/graph/graph.hpp"

namespace nsi {

struct ActionTemplateInfo {
  std::string template_text;
  std::vector<std::pair<std::string, std::string>> slots;  // name -> type tag
};

inline const std::vector<ActionTemplateInfo>& household_action_templates() {
  static const std::vector<ActionTemplateInfo> t = {
      {"go to {{goto_rec}}", {{"goto_rec", "ReceptacleName"}}},
      {"open {{open_rec}}", {{"open_rec", "ReceptacleName"}}},
      {"take {{take_item}} from {{from_rec}}",
       {{"take_item", "ItemName"}, {"from_rec", "ReceptacleName"}}},
      {"move {{move_item}} to {{to_rec}}",
       {{"move_item", "ItemName"}, {"to_rec", "ReceptacleName"}}},
      {"clean {{clean_item}} with {{clean_rec}}",
       {{"clean_item", "ItemName"}, {"clean_rec", "ReceptacleName"}}},
      {"heat {{heat_item}} with {{heat_rec}}",
       {{"heat_item", "ItemName"}, {"heat_rec", "ReceptacleName"}}},
      {"cool {{cool_item}} with {{cool_rec}}",
       {{"cool_item", "ItemName"}, {"cool_rec", "ReceptacleName"}}},
      {"use {{use_item}}", {{"use_item", "ItemName"}}},
  };
  return t;
}

inline const std::vector<ActionTemplateInfo>& craft_action_templates() {
  static const std::vector<ActionTemplateInfo> t = {
      {"get {{get_item}}", {{"get_item", "ItemName"}}},
      {"craft {{craft_item}}", {{"craft_item", "ItemName"}}},
  };
  return t;
}

inline const std::vector<ActionTemplateInfo>& action_templates_for(const std::string& domain) {
  if (domain == "household") return household_action_templates();
  if (domain == "craft") return craft_action_templates();
  throw Error("unknown domain: " + domain);
}

struct MatchedAction {
  const ActionTemplateInfo* info = nullptr;
  std::vector<std::string> values;  // one per slot, in slot order
};

// Match concrete action text against a template table.
inline std::optional<MatchedAction> match_action(const std::string& text,
                                                 const std::vector<ActionTemplateInfo>& table) {
  std::vector<std::string> words;
  {
    std::istringstream in(text);
    std::string w;
    while (in >> w) words.push_back(w);
  }
  for (const auto& info : table) {
    std::vector<std::string> pattern;
    std::istringstream in(info.template_text);
    std::string w;
    while (in >> w) pattern.push_back(w);
    if (pattern.size() != words.size()) continue;
    MatchedAction m;
    m.info = &info;
    bool ok = true;
    for (std::size_t i = 0; i < pattern.size() && ok; ++i) {
      if (pattern[i].rfind("{{", 0) == 0)
        m.values.push_back(words[i]);
      else
        ok = pattern[i] == words[i];
    }
    if (ok && m.values.size() == info.slots.size()) return m;
  }
  return std::nullopt;
}

}  // namespace nsi
