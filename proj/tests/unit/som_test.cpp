#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace uie2i;

namespace {

UiElement el(const std::string& id, const BoundingBox& b, const ScreenDims& s) {
  return make_element(id, ElementType::Icon, "", b, s);
}

std::vector<UiElement> forty_elements(const ScreenDims& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<UiElement> out;
  for (int i = 0; i < 40; ++i) out.push_back(el("e" + std::to_string(i), test::random_box(rng, s, 200), s));
  return out;
}

// Connected components of chip pixels (label background or glyph colour),
// neither of which appears elsewhere on the canvas.
int count_chips(const RgbImage& img, Rgb bg, Rgb fg) {
  auto chip_px = [&](int x, int y) { return img.at(x, y) == bg || img.at(x, y) == fg; };
  std::vector<char> seen(static_cast<std::size_t>(img.width()) * img.height(), 0);
  int comps = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const auto i = static_cast<std::size_t>(y) * img.width() + x;
      if (seen[i] || !chip_px(x, y)) continue;
      ++comps;
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen[i] = 1;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (nx < 0 || ny < 0 || nx >= img.width() || ny >= img.height()) continue;
          const auto j = static_cast<std::size_t>(ny) * img.width() + nx;
          if (seen[j] || !chip_px(nx, ny)) continue;
          seen[j] = 1;
          stack.push_back({nx, ny});
        }
      }
    }
  return comps;
}

}  // namespace

TEST(RenderMarks, EmptyListIsIdentity) {
  const RgbImage img(64, 48, {10, 20, 30});
  EXPECT_EQ(render_marks(img, {}), img);
}

TEST(RenderMarks, InputUntouchedAndOutputDeterministic) {
  const ScreenDims s(1920, 1080);
  const RgbImage img(1920, 1080, {200, 200, 200});
  const auto before = pixel_hash(img);
  const auto els = forty_elements(s, 1);
  const auto a = render_marks(img, els);
  const auto b = render_marks(img, els);
  EXPECT_EQ(pixel_hash(img), before);
  EXPECT_EQ(pixel_hash(a), pixel_hash(b));
  EXPECT_NE(pixel_hash(a), before);
}

TEST(RenderMarks, OutlineUsesPaletteByIndex) {
  const ScreenDims s(200, 200);
  MarkStyle style;
  const RgbImage img(200, 200, {255, 255, 255});
  std::vector<UiElement> els;
  for (int i = 0; i < 10; ++i) els.push_back(el("e" + std::to_string(i), BoundingBox(i * 18, 150, i * 18 + 16, 166), s));
  const auto out = render_marks(img, els, style);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(out.at(i * 18 + 15, 157), style.palette[static_cast<std::size_t>(i) % style.palette.size()]) << i;
}

TEST(LayoutLabel, ChipSitsBelowBoxAlignedToLeftEdge) {
  const ScreenDims s(400, 300);
  const auto chip = layout_label(el("e7", BoundingBox(50, 40, 120, 80), s), s, MarkStyle{});
  EXPECT_FALSE(chip.above);
  EXPECT_EQ(chip.x, 50);
  EXPECT_EQ(chip.y, 80);
  EXPECT_GT(chip.w, 0);
  EXPECT_GT(chip.h, 0);
}

TEST(LayoutLabel, BoxAtBottomEdgeFlipsChipAbove) {
  const ScreenDims s(400, 300);
  const auto chip = layout_label(el("e1", BoundingBox(10, 260, 90, 300), s), s, MarkStyle{});
  EXPECT_TRUE(chip.above);
  EXPECT_EQ(chip.y + chip.h, 260);
}

TEST(LayoutLabel, ChipsAlwaysInsideImage) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 3000; ++i) {
    const ScreenDims s(std::uniform_int_distribution<int>(8, 600)(rng), std::uniform_int_distribution<int>(8, 600)(rng));
    const auto e = el("e" + std::to_string(i), test::random_box(rng, s), s);
    const auto c = layout_label(e, s, MarkStyle{});
    ASSERT_GE(c.x, 0);
    ASSERT_GE(c.y, 0);
    ASSERT_LE(c.x + c.w, s.width());
    ASSERT_LE(c.y + c.h, s.height());
  }
}

TEST(RenderMarks, FlippedChipIsDrawnAboveTheBox) {
  const ScreenDims s(300, 200);
  MarkStyle style;
  style.label_bg = {1, 2, 3};
  const RgbImage img(300, 200, {255, 255, 255});
  const auto out = render_marks(img, {el("e0", BoundingBox(100, 150, 200, 200), s)}, style);
  EXPECT_EQ(out.at(100, 149), style.label_bg);
  EXPECT_EQ(out.at(100, 148), style.label_bg);
}

TEST(RenderMarks, OneChipPerElement) {
  const ScreenDims s(800, 600);
  MarkStyle style;
  style.label_bg = {3, 3, 3};
  style.label_fg = {4, 4, 4};
  style.palette = {{250, 0, 0}};
  std::vector<UiElement> els;
  for (int i = 0; i < 12; ++i) els.push_back(el("e" + std::to_string(i), BoundingBox(20 + (i % 4) * 190, 30 + (i / 4) * 190, 120 + (i % 4) * 190, 90 + (i / 4) * 190), s));
  const auto out = render_marks(RgbImage(800, 600, {255, 255, 255}), els, style);
  EXPECT_EQ(count_chips(out, style.label_bg, style.label_fg), 12);
}

TEST(RenderMarks, OutOfBoundsNamesTheElement) {
  const RgbImage img(100, 100);
  UiElement bad{"e42", ElementType::Icon, "", BoundingBox(50, 50, 120, 90), 0.5};
  try {
    render_marks(img, {bad});
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("e42"), std::string::npos);
  }
}

TEST(RenderMarks, StyleValidation) {
  MarkStyle style;
  style.palette.clear();
  EXPECT_THROW(render_marks(RgbImage(10, 10), {}, style), InvalidInput);
  style = MarkStyle{};
  style.stroke_width = 0;
  EXPECT_THROW(render_marks(RgbImage(10, 10), {}, style), InvalidInput);
  const Json j = MarkStyle{};
  EXPECT_EQ(j.get<MarkStyle>(), MarkStyle{});
}

TEST(RenderMarks, PngRoundTripKeepsPixels) {
  const ScreenDims s(320, 240);
  const auto out = render_marks(RgbImage(320, 240, {90, 90, 90}), {el("e0", BoundingBox(5, 5, 60, 40), s)});
  EXPECT_EQ(decode_png(encode_png(out)), out);
}

TEST(BatchMarks, Boundaries) {
  EXPECT_EQ(batch_marks(5, 40), (std::vector<std::vector<std::size_t>>{{0, 1, 2, 3, 4}}));
  const auto g = batch_marks(41, 40);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].size(), 40u);
  EXPECT_EQ(g[1], (std::vector<std::size_t>{40}));
  EXPECT_TRUE(batch_marks(0, 40).empty());
  EXPECT_THROW(batch_marks(3, 0), InvalidInput);
}
