#pragma once

// Two-step synthesis protocol: prompt construction and strict validation of
// model responses. A response entry is either fully valid or rejected with a
// machine-readable reason; nothing partially populated escapes.

#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "uie2i/geometry.hpp"
#include "uie2i/prompt_templates.hpp"

namespace uie2i {

struct ReferringExpressionSet {
  std::string element_id;
  std::string short_description;
  std::string full_description;
  std::string explicit_refer;
  std::string implicit_refer_by_element_function;
  std::string implicit_refer_by_near_element;
  bool operator==(const ReferringExpressionSet&) const = default;
};

enum class ActionType { Click, Type, Select, Toggle, Other };

struct ActionParams {
  ActionType action_type = ActionType::Click;
  std::string other_type;  // raw model label when action_type == Other
  std::string action_content_description;
  std::string action_content;
  bool operator==(const ActionParams&) const = default;
};

/// Normalizes a model-supplied action label: known labels compare
/// case-insensitively, anything else is preserved as Other(raw).
inline ActionParams make_action(std::string_view raw_type) {
  std::string t;
  for (char c : raw_type)
    if (!std::isspace(static_cast<unsigned char>(c)))
      t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  ActionParams a;
  if (t == "CLICK") a.action_type = ActionType::Click;
  else if (t == "TYPE") a.action_type = ActionType::Type;
  else if (t == "SELECT") a.action_type = ActionType::Select;
  else if (t == "TOGGLE") a.action_type = ActionType::Toggle;
  else {
    a.action_type = ActionType::Other;
    a.other_type = std::string(raw_type);
  }
  return a;
}

inline std::string_view to_string(ActionType t) {
  switch (t) {
    case ActionType::Click: return "CLICK";
    case ActionType::Type: return "TYPE";
    case ActionType::Select: return "SELECT";
    case ActionType::Toggle: return "TOGGLE";
    case ActionType::Other: return "OTHER";
  }
  return "OTHER";
}

inline void to_json(Json& j, const ActionParams& a) {
  j = Json{{"action_type", to_string(a.action_type)}};
  if (a.action_type == ActionType::Other) j["action_type_raw"] = a.other_type;
  j["action_content_description"] = a.action_content_description;
  j["action_content"] = a.action_content;
}
inline void from_json(const Json& j, ActionParams& a) {
  const auto t = j.at("action_type").get<std::string>();
  if (t == "OTHER") {
    a.action_type = ActionType::Other;
    a.other_type = j.at("action_type_raw").get<std::string>();
  } else {
    a = make_action(t);
    if (a.action_type == ActionType::Other) throw DataError("unknown action_type '" + t + "'");
  }
  a.action_content_description = j.at("action_content_description").get<std::string>();
  a.action_content = j.at("action_content").get<std::string>();
  if (a.action_type == ActionType::Click && !a.action_content.empty())
    throw DataError("CLICK action must have empty action_content");
}

/// Wire form used inside prompts and model responses.
inline void to_json(Json& j, const ReferringExpressionSet& r) {
  j = Json{{"id", r.element_id},
           {"shortDescription", r.short_description},
           {"fullDescription", r.full_description},
           {"explicitRefer", r.explicit_refer},
           {"implicitReferByElementFunction", r.implicit_refer_by_element_function},
           {"implicitReferByNearElement", r.implicit_refer_by_near_element}};
}

struct Step1Prompt {
  std::string text;
  std::vector<std::string> mark_ids;  // ids drawn on the attached Set-of-Marks PNG
};

/// One "id: type, content" line per element, appended after the template.
inline Step1Prompt build_step1_prompt(const std::vector<UiElement>& elements) {
  if (elements.empty()) throw InvalidInput("build_step1_prompt: empty element list");
  Step1Prompt p;
  p.text = std::string(prompts::kStep1Template);
  p.text += '\n';
  for (const auto& e : elements) {
    p.text += e.id + ": " + std::string(to_string(e.element_type)) + ", " + e.content + "\n";
    p.mark_ids.push_back(e.id);
  }
  return p;
}

inline std::string build_step2_prompt(const std::vector<ReferringExpressionSet>& res) {
  if (res.empty()) throw InvalidInput("build_step2_prompt: empty referring expression list");
  Json payload = {{"elements", res}};
  return std::string(prompts::kStep2Template) + "\n" + payload.dump(4) + "\n";
}

// ---- response parsing ------------------------------------------------------

/// Strips Markdown code fences, or leading/trailing prose around the outermost
/// JSON value, then parses strictly. No bracket repair is attempted.
inline Json extract_response_json(const std::string& raw) {
  std::string body = raw;
  if (auto open = raw.find("```"); open != std::string::npos) {
    auto line_end = raw.find('\n', open);
    if (line_end != std::string::npos) {
      auto close = raw.find("```", line_end + 1);
      body = raw.substr(line_end + 1, close == std::string::npos ? std::string::npos : close - line_end - 1);
    }
  }
  const auto first = body.find_first_of("{[");
  const auto last = body.find_last_of("}]");
  if (first == std::string::npos || last == std::string::npos || last < first)
    throw ResponseInvalid("response contains no JSON value", raw);
  try {
    return Json::parse(body.substr(first, last - first + 1));
  } catch (const Json::parse_error& e) {
    throw ResponseInvalid(std::string("response is not valid JSON: ") + e.what(), raw);
  }
}

namespace detail {

inline const Json& response_entries(const Json& j, const std::string& raw) {
  if (j.is_array()) return j;
  if (j.is_object()) {
    auto it = j.find("elements");
    if (it != j.end() && it->is_array()) return *it;
  }
  throw ResponseInvalid("response has no \"elements\" array", raw);
}

inline bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

/// Reads a required non-empty string field; on failure records the reason.
inline std::optional<std::string> required_text(const Json& obj, const char* key, std::string& reason) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    reason = std::string("missing-field:") + key;
    return std::nullopt;
  }
  auto v = it->get<std::string>();
  if (blank(v)) {
    reason = std::string("empty-field:") + key;
    return std::nullopt;
  }
  return v;
}

/// Validates the id of every entry; returns the accepted id per entry index
/// (nullopt for rejected entries) and appends rejections.
inline std::vector<std::optional<std::string>> validate_ids(const Json& entries,
                                                            const std::function<bool(const std::string&)>& known,
                                                            std::vector<Rejection>& rejections) {
  std::map<std::string, int> seen;
  for (const auto& e : entries)
    if (e.is_object() && e.contains("id") && e["id"].is_string()) ++seen[e["id"].get<std::string>()];

  std::vector<std::optional<std::string>> ids;
  for (const auto& e : entries) {
    if (!e.is_object()) {
      rejections.push_back({"", "not-an-object"});
      ids.emplace_back();
      continue;
    }
    auto it = e.find("id");
    if (it == e.end() || !it->is_string() || blank(it->get<std::string>())) {
      rejections.push_back({"", "missing-field:id"});
      ids.emplace_back();
      continue;
    }
    const auto id = it->get<std::string>();
    if (!known(id)) {
      rejections.push_back({id, "unknown-id"});
      ids.emplace_back();
    } else if (seen[id] > 1) {
      rejections.push_back({id, "duplicate-id"});
      ids.emplace_back();
    } else {
      ids.emplace_back(id);
    }
  }
  return ids;
}

}  // namespace detail

struct Step1Result {
  std::vector<ReferringExpressionSet> sets;
  std::vector<Rejection> rejections;
};

inline Step1Result parse_step1_response(const std::string& raw, const std::set<std::string>& expected_ids) {
  const Json doc = extract_response_json(raw);
  const Json& entries = detail::response_entries(doc, raw);
  Step1Result result;
  const auto ids = detail::validate_ids(
      entries, [&](const std::string& id) { return expected_ids.count(id) > 0; }, result.rejections);

  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!ids[i]) continue;
    const Json& e = entries[i];
    std::string reason;
    ReferringExpressionSet r;
    r.element_id = *ids[i];
    const std::pair<const char*, std::string*> fields[] = {
        {"shortDescription", &r.short_description},
        {"fullDescription", &r.full_description},
        {"explicitRefer", &r.explicit_refer},
        {"implicitReferByElementFunction", &r.implicit_refer_by_element_function},
        {"implicitReferByNearElement", &r.implicit_refer_by_near_element}};
    bool ok = true;
    for (const auto& [key, dst] : fields) {
      auto v = detail::required_text(e, key, reason);
      if (!v) {
        ok = false;
        break;
      }
      *dst = *v;
    }
    if (ok) result.sets.push_back(std::move(r));
    else result.rejections.push_back({r.element_id, reason});
  }
  if (result.sets.empty()) throw EmptyResult("step 1 response has no valid entries", result.rejections);
  return result;
}

struct Step2Entry {
  std::string element_id;
  ActionParams action;
  std::string instruction_by_function;
  std::string instruction_by_near;
  bool operator==(const Step2Entry&) const = default;
};

struct Step2Result {
  std::vector<Step2Entry> entries;
  std::vector<Rejection> rejections;
  std::vector<Rejection> warnings;  // accepted entries that were normalized
};

inline Step2Result parse_step2_response(const std::string& raw,
                                        const std::map<std::string, ReferringExpressionSet>& res_by_id) {
  const Json doc = extract_response_json(raw);
  const Json& entries = detail::response_entries(doc, raw);
  Step2Result result;
  const auto ids = detail::validate_ids(
      entries, [&](const std::string& id) { return res_by_id.count(id) > 0; }, result.rejections);

  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!ids[i]) continue;
    const Json& e = entries[i];
    const std::string& id = *ids[i];
    auto args = e.find("instructionArgs");
    if (args == e.end() || !args->is_object()) {
      result.rejections.push_back({id, "missing-field:instructionArgs"});
      continue;
    }
    std::string reason;
    auto type = detail::required_text(*args, "actionType", reason);
    if (!type) {
      result.rejections.push_back({id, reason});
      continue;
    }
    Step2Entry out{id, make_action(*type), {}, {}};
    bool ok = true;
    for (auto [key, dst] : {std::pair{"actionContentDescription", &out.action.action_content_description},
                            std::pair{"actionContent", &out.action.action_content}}) {
      auto it = args->find(key);
      if (it == args->end() || it->is_null()) continue;
      if (!it->is_string()) {
        result.rejections.push_back({id, std::string("invalid-field:") + key});
        ok = false;
        break;
      }
      *dst = it->get<std::string>();
    }
    if (!ok) continue;
    auto by_function = detail::required_text(e, "convertedUserInstructionByElementFunction", reason);
    auto by_near = by_function ? detail::required_text(e, "convertedUserInstructionByNearElement", reason)
                               : std::nullopt;
    if (!by_function || !by_near) {
      result.rejections.push_back({id, reason});
      continue;
    }
    out.instruction_by_function = *by_function;
    out.instruction_by_near = *by_near;
    if (out.action.action_type == ActionType::Click && !out.action.action_content.empty()) {
      out.action.action_content.clear();
      result.warnings.push_back({id, "click-content-cleared"});
    }
    result.entries.push_back(std::move(out));
  }
  if (result.entries.empty()) throw EmptyResult("step 2 response has no valid entries", result.rejections);
  return result;
}

}  // namespace uie2i
