#pragma once

// Unified element model shared by every pipeline stage: pixel geometry,
// the five-way element taxonomy, platforms and element-to-screen ratio.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "uie2i/error.hpp"

namespace uie2i {

using Json = nlohmann::ordered_json;

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

/// Integer pixel rectangle. (x1, y1) is inclusive, (x2, y2) is exclusive, so
/// a box covers columns [x1, x2) and rows [y1, y2).
class BoundingBox {
 public:
  BoundingBox() = default;  // 1x1 box at the origin
  BoundingBox(int x1, int y1, int x2, int y2) : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
    if (x1 < 0 || y1 < 0) throw InvalidInput("bounding box has negative coordinates");
    if (x1 >= x2 || y1 >= y2) throw InvalidInput("bounding box is degenerate (x1 >= x2 or y1 >= y2)");
  }

  int x1() const { return x1_; }
  int y1() const { return y1_; }
  int x2() const { return x2_; }
  int y2() const { return y2_; }
  int width() const { return x2_ - x1_; }
  int height() const { return y2_ - y1_; }
  std::int64_t area() const { return std::int64_t{width()} * height(); }

  bool operator==(const BoundingBox&) const = default;

 private:
  int x1_ = 0;
  int y1_ = 0;
  int x2_ = 1;
  int y2_ = 1;
};

class ScreenDims {
 public:
  ScreenDims() = default;
  ScreenDims(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw InvalidInput("screen dimensions must be positive");
  }
  int width() const { return width_; }
  int height() const { return height_; }
  std::int64_t area() const { return std::int64_t{width_} * height_; }
  bool contains(const BoundingBox& b) const { return b.x2() <= width_ && b.y2() <= height_; }
  bool operator==(const ScreenDims&) const = default;

 private:
  int width_ = 1;
  int height_ = 1;
};

enum class ElementType { Text, Inputfield, Dropdown, Icon, Toggle };
inline constexpr std::array<ElementType, 5> kElementTypes = {
    ElementType::Text, ElementType::Inputfield, ElementType::Dropdown, ElementType::Icon,
    ElementType::Toggle};

enum class Platform { Web, Desktop, Mobile };
inline constexpr std::array<Platform, 3> kPlatforms = {Platform::Web, Platform::Desktop,
                                                       Platform::Mobile};

enum class RatioBucket { Small, Medium, Large };
inline constexpr std::array<RatioBucket, 3> kRatioBuckets = {RatioBucket::Small, RatioBucket::Medium,
                                                             RatioBucket::Large};

inline std::string_view to_string(ElementType t) {
  switch (t) {
    case ElementType::Text: return "text";
    case ElementType::Inputfield: return "inputfield";
    case ElementType::Dropdown: return "dropdown";
    case ElementType::Icon: return "icon";
    case ElementType::Toggle: return "toggle";
  }
  return "text";
}

inline std::string_view to_string(Platform p) {
  switch (p) {
    case Platform::Web: return "web";
    case Platform::Desktop: return "desktop";
    case Platform::Mobile: return "mobile";
  }
  return "web";
}

inline std::string_view to_string(RatioBucket b) {
  switch (b) {
    case RatioBucket::Small: return "[0,0.02)";
    case RatioBucket::Medium: return "[0.02,0.04)";
    case RatioBucket::Large: return "[0.04,1.0]";
  }
  return "[0,0.02)";
}

inline std::optional<ElementType> element_type_from_string(std::string_view s) {
  for (auto t : kElementTypes)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

inline std::optional<Platform> platform_from_string(std::string_view s) {
  for (auto p : kPlatforms)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline std::optional<RatioBucket> ratio_bucket_from_string(std::string_view s) {
  for (auto b : kRatioBuckets)
    if (to_string(b) == s) return b;
  return std::nullopt;
}

/// sqrt(box area) / sqrt(screen area).
inline double element_to_screen_ratio(const BoundingBox& bbox, const ScreenDims& screen) {
  if (bbox.area() <= 0) throw InvalidInput("element_to_screen_ratio: zero-area box");
  if (!screen.contains(bbox)) throw InvalidInput("element_to_screen_ratio: box exceeds screen");
  return std::sqrt(static_cast<double>(bbox.area())) / std::sqrt(static_cast<double>(screen.area()));
}

/// Center with exact halves rounded down; always lies inside the box.
inline Point bbox_center(const BoundingBox& b) {
  return {static_cast<int>((std::int64_t{b.x1()} + b.x2()) / 2),
          static_cast<int>((std::int64_t{b.y1()} + b.y2()) / 2)};
}

inline bool point_in_box(const Point& p, const BoundingBox& b) {
  return b.x1() <= p.x && p.x < b.x2() && b.y1() <= p.y && p.y < b.y2();
}

inline RatioBucket ratio_bucket(double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidInput("ratio_bucket: ratio outside (0, 1]");
  if (ratio < 0.02) return RatioBucket::Small;
  if (ratio < 0.04) return RatioBucket::Medium;
  return RatioBucket::Large;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t ix = std::max(0, std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1()));
  const std::int64_t iy = std::max(0, std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1()));
  const std::int64_t inter = ix * iy;
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct UiElement {
  std::string id;
  ElementType element_type = ElementType::Text;
  std::string content;
  BoundingBox bbox;
  double ratio = 1.0;

  bool operator==(const UiElement&) const = default;
};

/// Builds an element with its ratio derived from the screen, enforcing the
/// non-empty-content rule for Text.
inline UiElement make_element(std::string id, ElementType type, std::string content,
                              const BoundingBox& bbox, const ScreenDims& screen) {
  if (type == ElementType::Text && content.empty())
    throw InvalidInput("text element '" + id + "' has empty content");
  return UiElement{std::move(id), type, std::move(content), bbox,
                   element_to_screen_ratio(bbox, screen)};
}

// ---- JSON ----------------------------------------------------------------

namespace detail {
template <class T>
T require_enum(const Json& j, std::optional<T> (*parse)(std::string_view), const char* what) {
  if (!j.is_string()) throw DataError(std::string(what) + " must be a string");
  auto v = parse(j.get<std::string>());
  if (!v) throw DataError(std::string("unknown ") + what + " '" + j.get<std::string>() + "'");
  return *v;
}
}  // namespace detail

inline void to_json(Json& j, const Point& p) { j = Json{{"x", p.x}, {"y", p.y}}; }
inline void from_json(const Json& j, Point& p) {
  p.x = j.at("x").get<int>();
  p.y = j.at("y").get<int>();
}

inline void to_json(Json& j, const BoundingBox& b) {
  j = Json{{"x1", b.x1()}, {"y1", b.y1()}, {"x2", b.x2()}, {"y2", b.y2()}};
}
inline void from_json(const Json& j, BoundingBox& b) {
  b = BoundingBox(j.at("x1").get<int>(), j.at("y1").get<int>(), j.at("x2").get<int>(),
                  j.at("y2").get<int>());
}

inline void to_json(Json& j, const ScreenDims& s) {
  j = Json{{"width", s.width()}, {"height", s.height()}};
}
inline void from_json(const Json& j, ScreenDims& s) {
  s = ScreenDims(j.at("width").get<int>(), j.at("height").get<int>());
}

inline void to_json(Json& j, ElementType t) { j = std::string(to_string(t)); }
inline void from_json(const Json& j, ElementType& t) {
  t = detail::require_enum<ElementType>(j, element_type_from_string, "element_type");
}
inline void to_json(Json& j, Platform p) { j = std::string(to_string(p)); }
inline void from_json(const Json& j, Platform& p) {
  p = detail::require_enum<Platform>(j, platform_from_string, "platform");
}
inline void to_json(Json& j, RatioBucket b) { j = std::string(to_string(b)); }
inline void from_json(const Json& j, RatioBucket& b) {
  b = detail::require_enum<RatioBucket>(j, ratio_bucket_from_string, "ratio bucket");
}

inline void to_json(Json& j, const UiElement& e) {
  j = Json{{"id", e.id},
           {"element_type", e.element_type},
           {"content", e.content},
           {"bbox", e.bbox},
           {"ratio", e.ratio}};
}
inline void from_json(const Json& j, UiElement& e) {
  e.id = j.at("id").get<std::string>();
  e.element_type = j.at("element_type").get<ElementType>();
  e.content = j.at("content").get<std::string>();
  e.bbox = j.at("bbox").get<BoundingBox>();
  e.ratio = j.at("ratio").get<double>();
}

}  // namespace uie2i
