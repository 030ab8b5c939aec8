#pragma once

// Set-of-Marks rendering: element boxes outlined on the screenshot with an ID
// chip placed directly under each box (or above it when there is no room).

#include <vector>

#include "uie2i/font5x7.hpp"
#include "uie2i/image.hpp"

namespace uie2i {

struct MarkStyle {
  std::vector<Rgb> palette = {{230, 25, 75},  {60, 180, 75},  {0, 130, 200},  {245, 130, 48},
                              {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {128, 128, 0}};
  int stroke_width = 2;
  int label_font_px = 14;
  Rgb label_bg{0, 0, 0};
  Rgb label_fg{255, 255, 255};

  void validate() const {
    if (palette.empty()) throw InvalidInput("mark palette must not be empty");
    if (stroke_width < 1) throw InvalidInput("stroke_width must be >= 1");
    if (label_font_px < 1) throw InvalidInput("label_font_px must be >= 1");
  }
  bool operator==(const MarkStyle&) const = default;
};

/// Placement of one ID chip, [x, x+w) x [y, y+h) in image pixels.
struct LabelChip {
  std::string id;
  int x = 0, y = 0, w = 0, h = 0;
  bool above = false;  // flipped above the box because it would leave the image
  bool operator==(const LabelChip&) const = default;
};

namespace detail {
inline int glyph_scale(const MarkStyle& s) { return std::max(1, s.label_font_px / font::kGlyphHeight); }
}  // namespace detail

inline LabelChip layout_label(const UiElement& e, const ScreenDims& image, const MarkStyle& style) {
  const int scale = detail::glyph_scale(style);
  const int pad = scale;
  const int chars = std::max<int>(1, static_cast<int>(e.id.size()));
  LabelChip chip;
  chip.id = e.id;
  chip.w = std::min(image.width(), chars * (font::kGlyphWidth + 1) * scale - scale + 2 * pad);
  chip.h = std::min(image.height(), font::kGlyphHeight * scale + 2 * pad);

  chip.x = e.bbox.x1();
  if (chip.x + chip.w > image.width()) chip.x = image.width() - chip.w;

  chip.y = e.bbox.y2();
  if (chip.y + chip.h > image.height()) {
    chip.above = true;
    chip.y = e.bbox.y1() - chip.h;
    // Box spans the full height: fall back to the inside top edge.
    if (chip.y < 0) chip.y = std::min(e.bbox.y1(), image.height() - chip.h);
  }
  return chip;
}

namespace detail {

inline void draw_outline(RgbImage& img, const BoundingBox& b, int stroke, Rgb c) {
  const int t = std::max(1, std::min({stroke, b.width(), b.height()}));
  img.fill_rect(b.x1(), b.y1(), b.x2(), b.y1() + t, c);
  img.fill_rect(b.x1(), b.y2() - t, b.x2(), b.y2(), c);
  img.fill_rect(b.x1(), b.y1(), b.x1() + t, b.y2(), c);
  img.fill_rect(b.x2() - t, b.y1(), b.x2(), b.y2(), c);
}

inline void draw_chip(RgbImage& img, const LabelChip& chip, const MarkStyle& style) {
  img.fill_rect(chip.x, chip.y, chip.x + chip.w, chip.y + chip.h, style.label_bg);
  const int scale = glyph_scale(style);
  int pen_x = chip.x + scale;
  const int pen_y = chip.y + scale;
  for (char ch : chip.id) {
    const auto& g = font::glyph(ch);
    for (int col = 0; col < font::kGlyphWidth; ++col)
      for (int row = 0; row < font::kGlyphHeight; ++row) {
        if (!(g[static_cast<std::size_t>(col)] >> row & 1)) continue;
        const int px = pen_x + col * scale, py = pen_y + row * scale;
        // Glyph pixels are clipped to the chip so a truncated chip stays in bounds.
        img.fill_rect(std::max(px, chip.x), std::max(py, chip.y), std::min(px + scale, chip.x + chip.w),
                      std::min(py + scale, chip.y + chip.h), style.label_fg);
      }
    pen_x += (font::kGlyphWidth + 1) * scale;
  }
}

}  // namespace detail

/// Returns a marked copy of `screenshot`; element i is outlined in
/// palette[i % palette.size()]. All outlines are drawn before any chip so
/// chips stay legible.
inline RgbImage render_marks(const RgbImage& screenshot, const std::vector<UiElement>& elements,
                             const MarkStyle& style = {}) {
  style.validate();
  const ScreenDims dims = screenshot.dims();
  for (const auto& e : elements)
    if (!dims.contains(e.bbox)) throw InvalidInput("element '" + e.id + "' box lies outside the image");

  RgbImage out = screenshot;
  for (std::size_t i = 0; i < elements.size(); ++i)
    detail::draw_outline(out, elements[i].bbox, style.stroke_width, style.palette[i % style.palette.size()]);
  for (const auto& e : elements) detail::draw_chip(out, layout_label(e, dims, style), style);
  return out;
}

/// Consecutive groups of at most max_per_image element indices.
inline std::vector<std::vector<std::size_t>> batch_marks(std::size_t element_count,
                                                         std::size_t max_per_image = 40) {
  if (max_per_image < 1) throw InvalidInput("max_per_image must be >= 1");
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t start = 0; start < element_count; start += max_per_image) {
    std::vector<std::size_t> g;
    for (std::size_t i = start; i < std::min(element_count, start + max_per_image); ++i) g.push_back(i);
    groups.push_back(std::move(g));
  }
  return groups;
}

inline void to_json(Json& j, const Rgb& c) { j = Json::array({c.r, c.g, c.b}); }
inline void from_json(const Json& j, Rgb& c) {
  if (!j.is_array() || j.size() != 3) throw DataError("color must be [r, g, b]");
  c = {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

inline void to_json(Json& j, const MarkStyle& s) {
  j = Json{{"palette", s.palette},
           {"stroke_width", s.stroke_width},
           {"label_font_px", s.label_font_px},
           {"label_bg", s.label_bg},
           {"label_fg", s.label_fg}};
}
inline void from_json(const Json& j, MarkStyle& s) {
  s = MarkStyle{};
  if (j.contains("palette")) s.palette = j.at("palette").get<std::vector<Rgb>>();
  if (j.contains("stroke_width")) s.stroke_width = j.at("stroke_width").get<int>();
  if (j.contains("label_font_px")) s.label_font_px = j.at("label_font_px").get<int>();
  if (j.contains("label_bg")) s.label_bg = j.at("label_bg").get<Rgb>();
  if (j.contains("label_fg")) s.label_fg = j.at("label_fg").get<Rgb>();
  s.validate();
}

}  // namespace uie2i
