#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace uie2i;

namespace {

Prediction at(const std::string& id, int x, int y) { return {id, Point{x, y}, std::nullopt}; }
Prediction boxed(const std::string& id, const BoundingBox& b) { return {id, b, std::nullopt}; }

void expect_slices_consistent(const EvalReport& r) {
  for (const auto& s : r.slices) {
    std::size_t n = 0, correct = 0;
    for (const auto& row : s.rows) {
      n += row.n;
      correct += row.correct;
      EXPECT_GT(row.n, 0u);
      EXPECT_DOUBLE_EQ(row.accuracy(), static_cast<double>(row.correct) / static_cast<double>(row.n));
    }
    EXPECT_EQ(n, r.scored) << s.name;
    EXPECT_EQ(correct, r.correct) << s.name;
  }
}

}  // namespace

TEST(Score, TwoHitsOutOfThree) {
  const auto bench = test::synthetic_benchmark(3, 1);
  const auto c0 = bbox_center(bench[0].bbox), c1 = bbox_center(bench[1].bbox);
  const auto r = score(bench, {at(bench[0].sample_id, c0.x, c0.y), at(bench[1].sample_id, c1.x, c1.y),
                               at(bench[2].sample_id, bench[2].bbox.x2(), bench[2].bbox.y2())});
  EXPECT_DOUBLE_EQ(r.overall_accuracy, 2.0 / 3.0);
  EXPECT_EQ(r.correct, 2u);
  EXPECT_EQ(r.scored, 3u);
}

TEST(Score, GroundTruthBoxPredictionIsCorrect) {
  const auto bench = test::synthetic_benchmark(50, 2);
  std::vector<Prediction> preds;
  for (const auto& s : bench) preds.push_back(boxed(s.sample_id, s.bbox));
  EXPECT_DOUBLE_EQ(score(bench, preds).overall_accuracy, 1.0);
}

TEST(Score, NoPredictionsMeansAllMissing) {
  const auto bench = test::synthetic_benchmark(20, 3);
  const auto r = score(bench, {});
  EXPECT_DOUBLE_EQ(r.overall_accuracy, 0.0);
  EXPECT_EQ(r.missing_predictions, 20u);
}

TEST(Score, UnmatchedPredictionsAreCountedAndIgnored) {
  const auto bench = test::synthetic_benchmark(5, 4);
  std::vector<Prediction> preds;
  for (const auto& s : bench) preds.push_back(boxed(s.sample_id, s.bbox));
  preds.push_back(at("ghost", 1, 1));
  const auto r = score(bench, preds);
  EXPECT_EQ(r.unmatched_predictions, 1u);
  EXPECT_DOUBLE_EQ(r.overall_accuracy, 1.0);
}

TEST(Score, DuplicateIdsAreErrors) {
  const auto bench = test::synthetic_benchmark(2, 5);
  EXPECT_THROW(score(bench, {at(bench[0].sample_id, 0, 0), at(bench[0].sample_id, 1, 1)}), DataError);
  auto dup = bench;
  dup.push_back(bench[0]);
  EXPECT_THROW(score(dup, {}), DataError);
}

TEST(OracleModel, ReportsExactHitFraction) {
  const auto bench = test::synthetic_benchmark(200, 6);
  for (double h : {0.0, 0.25, 0.5, 1.0, 0.333}) {
    const auto r = score(bench, oracle_model(bench, h, 11));
    EXPECT_EQ(r.correct, static_cast<std::size_t>(std::floor(h * 200))) << h;
    EXPECT_DOUBLE_EQ(r.overall_accuracy, std::floor(h * 200) / 200.0) << h;
    expect_slices_consistent(r);
  }
  const auto hundred = test::synthetic_benchmark(100, 7);
  EXPECT_DOUBLE_EQ(score(hundred, oracle_model(hundred, 0.5, 1)).overall_accuracy, 0.5);
  EXPECT_THROW(oracle_model(bench, 1.5, 1), InvalidInput);
  EXPECT_EQ(oracle_model(bench, 0.5, 3), oracle_model(bench, 0.5, 3));
}

TEST(Score, BoxAndCenterPointGetSameVerdict) {
  std::mt19937_64 rng(12);
  const auto bench = test::synthetic_benchmark(1000, 8);
  std::vector<Prediction> boxes, points;
  for (const auto& s : bench) {
    const auto b = test::random_box(rng, ScreenDims(1920, 1080), 400);
    boxes.push_back(boxed(s.sample_id, b));
    const auto c = bbox_center(b);
    points.push_back(at(s.sample_id, c.x, c.y));
  }
  const auto rb = score(bench, boxes), rp = score(bench, points);
  EXPECT_EQ(rb.correct, rp.correct);
  EXPECT_EQ(Json(rb).dump(), Json(rp).dump());
}

TEST(Score, AddingACorrectPredictionNeverLowersAccuracy) {
  const auto bench = test::synthetic_benchmark(60, 9);
  std::vector<Prediction> preds;
  double last = score(bench, preds).overall_accuracy;
  for (const auto& s : bench) {
    preds.push_back(boxed(s.sample_id, s.bbox));
    const double now = score(bench, preds).overall_accuracy;
    EXPECT_GE(now, last);
    last = now;
  }
}

TEST(Score, SlicesFollowTableOrder) {
  const auto r = score(test::synthetic_benchmark(60, 10), {});
  std::vector<std::string> names;
  for (const auto& s : r.slices) names.push_back(s.name);
  EXPECT_EQ(names, (std::vector<std::string>{"platform", "element_type", "implicitness", "ratio_bucket"}));
  std::vector<std::string> types;
  for (const auto& row : r.slicing("element_type").rows) types.push_back(row.slice);
  EXPECT_EQ(types, (std::vector<std::string>{"text", "icon", "dropdown", "inputfield", "toggle"}));
  EXPECT_EQ(r.slicing("ratio_bucket").rows.size(), 3u);
  EXPECT_THROW(r.slicing("nope"), InvalidInput);
}

TEST(RenderReport, MarkdownHasTableHeadersAndOmitsEmptyRows) {
  auto bench = test::synthetic_benchmark(100, 11);
  bench.erase(std::remove_if(bench.begin(), bench.end(),
                             [](const auto& s) { return s.element_type == ElementType::Toggle; }),
              bench.end());
  const auto md = render_report(score(bench, oracle_model(bench, 0.5, 2)), ReportFormat::Markdown);
  for (const char* needle : {"## Platform", "## Element Type", "## Implicitness", "## Element-to-Screen Ratio",
                             "| Web |", "| Desktop |", "| Mobile |", "| Text |", "| Icon |", "| Dropdown |",
                             "| Input |", "| Explicit |", "| Implicit |", "| [0,0.02) |", "| [0.04,1.0] |",
                             "| slice | n | accuracy% |"})
    EXPECT_NE(md.find(needle), std::string::npos) << needle;
  EXPECT_EQ(md.find("Toggle"), std::string::npos);
}

TEST(RenderReport, DeterministicAndJsonCanonical) {
  const auto bench = test::synthetic_benchmark(80, 12);
  const auto r = score(bench, oracle_model(bench, 0.25, 4));
  EXPECT_EQ(render_report(r, ReportFormat::Markdown), render_report(r, ReportFormat::Markdown));
  const auto j = Json::parse(render_report(r, ReportFormat::Json));
  EXPECT_EQ(j["correct"], r.correct);
  EXPECT_EQ(j["slices"]["platform"].size(), 3u);
  EXPECT_EQ(j.dump(), Json(r).dump());
}

TEST(Prediction, JsonNeedsExactlyOnePayload) {
  const auto p = Json::parse(R"({"sample_id": "s1", "point": {"x": 3, "y": 4}})");
  EXPECT_EQ(p.get<Prediction>(), at("s1", 3, 4));
  const auto b = Json::parse(R"({"sample_id": "s1", "bbox": {"x1": 0, "y1": 0, "x2": 10, "y2": 10}, "raw_model_output": "click"})").get<Prediction>();
  EXPECT_EQ(predicted_point(b), (Point{5, 5}));
  EXPECT_EQ(Json(b).get<Prediction>(), b);
  EXPECT_THROW(Json::parse(R"({"sample_id": "s1"})").get<Prediction>(), DataError);
  EXPECT_THROW(Json::parse(R"({"sample_id": "s1", "point": {"x": 1, "y": 1}, "bbox": {"x1": 0, "y1": 0, "x2": 2, "y2": 2}})").get<Prediction>(), DataError);
}
