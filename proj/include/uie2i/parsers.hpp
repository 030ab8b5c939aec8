#pragma once

// Precision-first heuristic parsers for the three metadata sources: DOM
// snapshots (web), UI Automation trees (Windows) and Android view
// hierarchies. Each parser keeps only nodes with unambiguous interactive
// evidence, keeps the innermost match when interactive nodes nest, drops
// invisible / tiny / page-sized boxes, then removes near-duplicate boxes.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uie2i/geometry.hpp"

namespace uie2i {

/// Box as reported by a capture tool, before clipping; may be negative or empty.
struct PixelRect {
  long long x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool operator==(const PixelRect&) const = default;
};

inline std::optional<BoundingBox> clip_to_screen(const PixelRect& r, const ScreenDims& screen) {
  const long long x1 = std::clamp<long long>(r.x1, 0, screen.width());
  const long long y1 = std::clamp<long long>(r.y1, 0, screen.height());
  const long long x2 = std::clamp<long long>(r.x2, 0, screen.width());
  const long long y2 = std::clamp<long long>(r.y2, 0, screen.height());
  if (x1 >= x2 || y1 >= y2) return std::nullopt;
  return BoundingBox(static_cast<int>(x1), static_cast<int>(y1), static_cast<int>(x2),
                     static_cast<int>(y2));
}

struct DomSnapshotNode {
  std::string tag;
  std::map<std::string, std::string> attributes;
  std::string text;
  std::optional<PixelRect> bbox;
  bool visible = true;
  std::optional<std::string> cursor;
  std::vector<DomSnapshotNode> children;
};

enum class ToggleState { On, Off, Indeterminate };

struct UiaNode {
  std::string control_type;
  std::string name;
  std::optional<PixelRect> bounding_rectangle;
  bool is_offscreen = false;
  bool is_enabled = true;
  std::optional<ToggleState> toggle_state;
  // ValuePattern.IsReadOnly; only consulted for Document controls.
  std::optional<bool> is_read_only;
  std::vector<UiaNode> children;
};

struct VhNode {
  std::string class_name;
  std::string text;
  std::string content_desc;
  std::optional<PixelRect> bounds;
  bool clickable = false;
  bool checkable = false;
  bool checked = false;
  bool editable = false;
  bool visible_to_user = true;
  std::vector<VhNode> children;
};

struct ParseConfig {
  int min_box_side = 4;
  double max_ratio = 0.9;
  double dedup_iou_threshold = 0.9;

  void validate() const {
    if (min_box_side < 1) throw InvalidInput("min_box_side must be >= 1");
    if (!(max_ratio > 0.0 && max_ratio <= 1.0)) throw InvalidInput("max_ratio must be in (0, 1]");
    if (!(dedup_iou_threshold > 0.0 && dedup_iou_threshold <= 1.0))
      throw InvalidInput("dedup_iou_threshold must be in (0, 1]");
  }
  bool operator==(const ParseConfig&) const = default;
};

namespace detail {

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// Trims and collapses whitespace runs, as a browser renders text.
inline std::string normalize_text(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

inline std::string attr(const DomSnapshotNode& n, const std::string& key) {
  auto it = n.attributes.find(key);
  return it == n.attributes.end() ? std::string{} : it->second;
}

inline bool has_descendant_tag(const DomSnapshotNode& n, const std::set<std::string>& tags) {
  for (const auto& c : n.children)
    if (tags.count(lower(c.tag)) || has_descendant_tag(c, tags)) return true;
  return false;
}

inline std::string first_img_alt(const DomSnapshotNode& n) {
  if (lower(n.tag) == "img") {
    auto alt = normalize_text(attr(n, "alt"));
    if (!alt.empty()) return alt;
  }
  for (const auto& c : n.children) {
    auto alt = first_img_alt(c);
    if (!alt.empty()) return alt;
  }
  return {};
}

inline std::string simple_class(const std::string& cls) {
  auto pos = cls.rfind('.');
  return pos == std::string::npos ? cls : cls.substr(pos + 1);
}

inline bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

// ---- classification ------------------------------------------------------

/// Web rule table. Role-based evidence is checked before tag-based evidence
/// so that e.g. <input role="combobox"> is a Dropdown.
inline std::optional<ElementType> classify_element_type(const DomSnapshotNode& n) {
  static const std::set<std::string> kTextInputTypes = {"text", "search", "email", "url",
                                                        "password", "number", "tel"};
  const std::string tag = detail::lower(n.tag);
  const std::string role = detail::lower(detail::attr(n, "role"));
  const std::string type = detail::lower(detail::attr(n, "type"));
  const bool has_text = !detail::normalize_text(n.text).empty();

  if ((tag == "input" && (type == "checkbox" || type == "radio")) || role == "checkbox" ||
      role == "radio" || role == "switch")
    return ElementType::Toggle;
  if (tag == "select" || role == "combobox" || role == "listbox") return ElementType::Dropdown;
  if (tag == "input" && (type.empty() || kTextInputTypes.count(type))) return ElementType::Inputfield;
  if (tag == "textarea") return ElementType::Inputfield;
  if (n.attributes.count("contenteditable")) {
    const std::string ce = detail::lower(detail::attr(n, "contenteditable"));
    if (ce == "true" || ce.empty()) return ElementType::Inputfield;
  }
  const bool link_like = tag == "a" || tag == "button" || tag == "summary" || role == "button" ||
                         role == "link" || role == "tab" || role == "menuitem";
  if (link_like && has_text) return ElementType::Text;

  const bool clickable = tag == "button" || tag == "a" || role == "button" ||
                         (n.cursor && detail::lower(*n.cursor) == "pointer");
  if (clickable && !has_text &&
      (tag == "img" || tag == "svg" || detail::has_descendant_tag(n, {"img", "svg"})))
    return ElementType::Icon;
  return std::nullopt;
}

/// Desktop rule table keyed on UIA ControlType. `parent` is the node's parent
/// in the tree (null for the root) and is needed for the Image rule.
inline std::optional<ElementType> classify_element_type(const UiaNode& n, const UiaNode* parent) {
  static const std::set<std::string> kInvokable = {"Button",   "SplitButton", "Hyperlink", "MenuItem",
                                                   "ListItem", "TabItem",     "TreeItem"};
  const std::string& ct = n.control_type;
  const bool named = !detail::normalize_text(n.name).empty();
  if (ct == "Button") return named ? ElementType::Text : ElementType::Icon;
  if (ct == "Hyperlink" || ct == "MenuItem" || ct == "TabItem")
    return named ? std::optional(ElementType::Text) : std::nullopt;
  if (ct == "Edit") return ElementType::Inputfield;
  if (ct == "Document" && n.is_read_only == false) return ElementType::Inputfield;
  if (ct == "ComboBox") return ElementType::Dropdown;
  if (ct == "CheckBox" || ct == "RadioButton") return ElementType::Toggle;
  if (ct == "Image" && parent && kInvokable.count(parent->control_type)) return ElementType::Icon;
  return std::nullopt;
}

/// Mobile rule table keyed on class name and interaction flags.
inline std::optional<ElementType> classify_element_type(const VhNode& n) {
  const std::string cls = detail::simple_class(n.class_name);
  const bool has_text = !detail::normalize_text(n.text).empty();
  if (n.checkable) return ElementType::Toggle;
  if (detail::ends_with(cls, "EditText") || n.editable) return ElementType::Inputfield;
  if (detail::ends_with(cls, "Spinner")) return ElementType::Dropdown;
  if (n.clickable && has_text) return ElementType::Text;
  if (n.clickable && !has_text &&
      (!detail::normalize_text(n.content_desc).empty() || cls.find("Image") != std::string::npos))
    return ElementType::Icon;
  return std::nullopt;
}

// ---- content -------------------------------------------------------------

/// Visible text, else accessible name, else empty.
inline std::string element_content(const DomSnapshotNode& n) {
  if (auto t = detail::normalize_text(n.text); !t.empty()) return t;
  for (const char* key : {"aria-label", "placeholder"})
    if (auto v = detail::normalize_text(detail::attr(n, key)); !v.empty()) return v;
  if (auto alt = detail::first_img_alt(n); !alt.empty()) return alt;
  return detail::normalize_text(detail::attr(n, "title"));
}

inline std::string element_content(const UiaNode& n, const UiaNode* parent) {
  if (auto t = detail::normalize_text(n.name); !t.empty()) return t;
  if (n.control_type == "Image" && parent) return detail::normalize_text(parent->name);
  return {};
}

inline std::string element_content(const VhNode& n) {
  if (auto t = detail::normalize_text(n.text); !t.empty()) return t;
  return detail::normalize_text(n.content_desc);
}

// ---- tree walking ----------------------------------------------------------

/// Keeps the first element (document order) of every group whose boxes overlap
/// with IoU >= threshold; ids are reassigned "e0".."eN".
inline std::vector<UiElement> dedup_elements(const std::vector<UiElement>& elements,
                                             const ParseConfig& cfg) {
  std::vector<UiElement> kept;
  for (const auto& e : elements) {
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const UiElement& k) {
      return iou(k.bbox, e.bbox) >= cfg.dedup_iou_threshold;
    });
    if (!dup) kept.push_back(e);
  }
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i].id = "e" + std::to_string(i);
  return kept;
}

namespace detail {

inline constexpr int kMaxTreeDepth = 512;

struct NodeView {
  std::optional<ElementType> type;
  std::string content;
  bool visible = true;
  const std::optional<PixelRect>* box = nullptr;
};

inline NodeView view(const DomSnapshotNode& n, const DomSnapshotNode*) {
  NodeView v{classify_element_type(n), {}, n.visible, &n.bbox};
  if (v.type) v.content = element_content(n);
  return v;
}
inline NodeView view(const UiaNode& n, const UiaNode* parent) {
  NodeView v{classify_element_type(n, parent), {}, !n.is_offscreen && n.is_enabled,
             &n.bounding_rectangle};
  if (v.type) v.content = element_content(n, parent);
  return v;
}
inline NodeView view(const VhNode& n, const VhNode*) {
  NodeView v{classify_element_type(n), {}, n.visible_to_user, &n.bounds};
  if (v.type) v.content = element_content(n);
  return v;
}

/// Post-order walk; returns true when this subtree emitted anything, so an
/// interactive ancestor of an emitted node is skipped (innermost wins).
template <class Node>
bool collect(const Node& node, const Node* parent, const std::string& path, int depth,
             const ScreenDims& screen, const ParseConfig& cfg, std::vector<UiElement>& out) {
  if (depth > kMaxTreeDepth) throw ParseError(path, "metadata tree exceeds maximum depth");
  bool emitted = false;
  for (std::size_t i = 0; i < node.children.size(); ++i)
    emitted |= collect(node.children[i], &node, path + "/children/" + std::to_string(i), depth + 1,
                       screen, cfg, out);
  if (emitted) return true;

  NodeView v = view(node, parent);
  if (!v.type || !v.visible) return false;
  if (!v.box->has_value()) throw ParseError(path, "kept node has no bounding box");
  auto box = clip_to_screen(**v.box, screen);
  if (!box) return false;
  if (box->width() < cfg.min_box_side || box->height() < cfg.min_box_side) return false;
  const double ratio = element_to_screen_ratio(*box, screen);
  if (ratio > cfg.max_ratio) return false;
  if (*v.type == ElementType::Text && v.content.empty()) return false;
  out.push_back(UiElement{"", *v.type, std::move(v.content), *box, ratio});
  return true;
}

template <class Node>
std::vector<UiElement> parse_tree(const Node& root, const ScreenDims& screen, const ParseConfig& cfg) {
  cfg.validate();
  std::vector<UiElement> found;
  collect<Node>(root, nullptr, "", 0, screen, cfg, found);
  return dedup_elements(found, cfg);
}

}  // namespace detail

inline std::vector<UiElement> parse_dom(const DomSnapshotNode& root, const ScreenDims& screen,
                                        const ParseConfig& cfg = {}) {
  return detail::parse_tree(root, screen, cfg);
}

inline std::vector<UiElement> parse_uia(const UiaNode& root, const ScreenDims& screen,
                                        const ParseConfig& cfg = {}) {
  return detail::parse_tree(root, screen, cfg);
}

inline std::vector<UiElement> parse_view_hierarchy(const VhNode& root, const ScreenDims& screen,
                                                   const ParseConfig& cfg = {}) {
  return detail::parse_tree(root, screen, cfg);
}

// ---- JSON ----------------------------------------------------------------

inline void from_json(const Json& j, PixelRect& r) {
  r.x1 = j.at("x1").get<long long>();
  r.y1 = j.at("y1").get<long long>();
  r.x2 = j.at("x2").get<long long>();
  r.y2 = j.at("y2").get<long long>();
}
inline void to_json(Json& j, const PixelRect& r) {
  j = Json{{"x1", r.x1}, {"y1", r.y1}, {"x2", r.x2}, {"y2", r.y2}};
}

namespace detail {
template <class T>
T value_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->template get<T>();
}
template <class T>
std::optional<T> optional_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}
}  // namespace detail

inline void from_json(const Json& j, DomSnapshotNode& n) {
  n.tag = detail::lower(detail::value_or<std::string>(j, "tag", ""));
  n.attributes = detail::value_or<std::map<std::string, std::string>>(j, "attributes", {});
  n.text = detail::value_or<std::string>(j, "text", "");
  n.bbox = detail::optional_field<PixelRect>(j, "bbox");
  n.visible = detail::value_or(j, "visible", true);
  n.cursor = detail::optional_field<std::string>(j, "cursor");
  n.children = detail::value_or<std::vector<DomSnapshotNode>>(j, "children", {});
}

inline void from_json(const Json& j, ToggleState& s) {
  const auto v = j.get<std::string>();
  if (v == "on") s = ToggleState::On;
  else if (v == "off") s = ToggleState::Off;
  else if (v == "indeterminate") s = ToggleState::Indeterminate;
  else throw DataError("unknown toggle_state '" + v + "'");
}

inline void from_json(const Json& j, UiaNode& n) {
  n.control_type = detail::value_or<std::string>(j, "control_type", "");
  n.name = detail::value_or<std::string>(j, "name", "");
  n.bounding_rectangle = detail::optional_field<PixelRect>(j, "bounding_rectangle");
  n.is_offscreen = detail::value_or(j, "is_offscreen", false);
  n.is_enabled = detail::value_or(j, "is_enabled", true);
  n.toggle_state = detail::optional_field<ToggleState>(j, "toggle_state");
  n.is_read_only = detail::optional_field<bool>(j, "is_read_only");
  n.children = detail::value_or<std::vector<UiaNode>>(j, "children", {});
}

inline void from_json(const Json& j, VhNode& n) {
  n.class_name = detail::value_or<std::string>(j, "class_name", "");
  n.text = detail::value_or<std::string>(j, "text", "");
  n.content_desc = detail::value_or<std::string>(j, "content_desc", "");
  n.bounds = detail::optional_field<PixelRect>(j, "bounds");
  n.clickable = detail::value_or(j, "clickable", false);
  n.checkable = detail::value_or(j, "checkable", false);
  n.checked = detail::value_or(j, "checked", false);
  n.editable = detail::value_or(j, "editable", false);
  n.visible_to_user = detail::value_or(j, "visible_to_user", true);
  n.children = detail::value_or<std::vector<VhNode>>(j, "children", {});
}

inline void to_json(Json& j, const ParseConfig& c) {
  j = Json{{"min_box_side", c.min_box_side},
           {"max_ratio", c.max_ratio},
           {"dedup_iou_threshold", c.dedup_iou_threshold}};
}
inline void from_json(const Json& j, ParseConfig& c) {
  ParseConfig d;
  c.min_box_side = detail::value_or(j, "min_box_side", d.min_box_side);
  c.max_ratio = detail::value_or(j, "max_ratio", d.max_ratio);
  c.dedup_iou_threshold = detail::value_or(j, "dedup_iou_threshold", d.dedup_iou_threshold);
  c.validate();
}

}  // namespace uie2i
