#pragma once

// Grounding accuracy: a prediction is correct when its point (or the center
// of its predicted box) falls inside the ground-truth box. Reports are sliced
// by platform, element type, implicitness and ratio bucket.

#include <cstdio>
#include <variant>

#include "uie2i/dataset.hpp"
#include "uie2i/sampler.hpp"

namespace uie2i {

struct Prediction {
  std::string sample_id;
  std::variant<Point, BoundingBox> payload;
  std::optional<std::string> raw_model_output;
  bool operator==(const Prediction&) const = default;
};

inline Point predicted_point(const Prediction& p) {
  if (const auto* box = std::get_if<BoundingBox>(&p.payload)) return bbox_center(*box);
  return std::get<Point>(p.payload);
}

inline void to_json(Json& j, const Prediction& p) {
  j = Json{{"sample_id", p.sample_id}};
  if (const auto* box = std::get_if<BoundingBox>(&p.payload)) j["bbox"] = *box;
  else j["point"] = std::get<Point>(p.payload);
  if (p.raw_model_output) j["raw_model_output"] = *p.raw_model_output;
}
inline void from_json(const Json& j, Prediction& p) {
  p.sample_id = j.at("sample_id").get<std::string>();
  const bool has_point = j.contains("point"), has_box = j.contains("bbox");
  if (has_point == has_box) throw DataError("prediction needs exactly one of 'point' or 'bbox'");
  if (has_point) p.payload = j.at("point").get<Point>();
  else p.payload = j.at("bbox").get<BoundingBox>();
  p.raw_model_output = detail::optional_field<std::string>(j, "raw_model_output");
}

struct SliceRow {
  std::string slice;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
  bool operator==(const SliceRow&) const = default;
};

struct Slicing {
  std::string name;
  std::vector<SliceRow> rows;  // fixed order, empty rows omitted
  bool operator==(const Slicing&) const = default;
};

struct EvalReport {
  double overall_accuracy = 0.0;
  std::size_t scored = 0;
  std::size_t correct = 0;
  std::vector<Slicing> slices;  // platform, element_type, implicitness, ratio_bucket
  std::size_t unmatched_predictions = 0;
  std::size_t missing_predictions = 0;

  const Slicing& slicing(std::string_view name) const {
    for (const auto& s : slices)
      if (s.name == name) return s;
    throw InvalidInput("no slicing named '" + std::string(name) + "'");
  }
};

namespace detail {

template <class Key>
Slicing build_slicing(std::string name, const std::vector<Key>& order,
                      const std::vector<std::pair<Key, bool>>& outcomes) {
  Slicing s{std::move(name), {}};
  for (const auto& k : order) {
    SliceRow row{std::string(to_string(k)), 0, 0};
    for (const auto& [key, hit] : outcomes)
      if (key == k) {
        ++row.n;
        row.correct += hit ? 1 : 0;
      }
    if (row.n > 0) s.rows.push_back(row);
  }
  return s;
}

}  // namespace detail

inline EvalReport score(const std::vector<BenchmarkSample>& benchmark, const std::vector<Prediction>& predictions) {
  std::map<std::string, const Prediction*> pred_by_id;
  for (const auto& p : predictions)
    if (!pred_by_id.emplace(p.sample_id, &p).second)
      throw DataError("duplicate prediction for sample '" + p.sample_id + "'");
  std::set<std::string> bench_ids;
  for (const auto& s : benchmark)
    if (!bench_ids.insert(s.sample_id).second) throw DataError("duplicate benchmark sample '" + s.sample_id + "'");

  EvalReport r;
  for (const auto& p : predictions)
    if (!bench_ids.count(p.sample_id)) ++r.unmatched_predictions;

  std::vector<std::pair<Platform, bool>> by_platform;
  std::vector<std::pair<ElementType, bool>> by_type;
  std::vector<std::pair<InstructionKind, bool>> by_kind;
  std::vector<std::pair<RatioBucket, bool>> by_bucket;
  for (const auto& s : benchmark) {
    bool hit = false;
    if (auto it = pred_by_id.find(s.sample_id); it != pred_by_id.end())
      hit = point_in_box(predicted_point(*it->second), s.bbox);
    else
      ++r.missing_predictions;
    r.correct += hit ? 1 : 0;
    by_platform.emplace_back(s.platform, hit);
    by_type.emplace_back(s.element_type, hit);
    by_kind.emplace_back(s.implicitness, hit);
    by_bucket.emplace_back(ratio_bucket(s.ratio), hit);
  }
  r.scored = benchmark.size();
  r.overall_accuracy = r.scored == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.scored);
  r.slices.push_back(detail::build_slicing<Platform>("platform", {kPlatforms.begin(), kPlatforms.end()}, by_platform));
  // Column order of the usual grounding-benchmark tables: Text, Icon, Dropdown, Input, Toggle.
  r.slices.push_back(detail::build_slicing<ElementType>(
      "element_type",
      {ElementType::Text, ElementType::Icon, ElementType::Dropdown, ElementType::Inputfield, ElementType::Toggle},
      by_type));
  r.slices.push_back(detail::build_slicing<InstructionKind>(
      "implicitness", {InstructionKind::Explicit, InstructionKind::Implicit}, by_kind));
  r.slices.push_back(
      detail::build_slicing<RatioBucket>("ratio_bucket", {kRatioBuckets.begin(), kRatioBuckets.end()}, by_bucket));
  return r;
}

inline void to_json(Json& j, const EvalReport& r) {
  Json slices = Json::object();
  for (const auto& s : r.slices) {
    Json rows = Json::array();
    for (const auto& row : s.rows)
      rows.push_back({{"slice", row.slice}, {"n", row.n}, {"correct", row.correct}, {"accuracy", row.accuracy()}});
    slices[s.name] = rows;
  }
  j = Json{{"overall_accuracy", r.overall_accuracy},
           {"scored", r.scored},
           {"correct", r.correct},
           {"unmatched_predictions", r.unmatched_predictions},
           {"missing_predictions", r.missing_predictions},
           {"slices", slices}};
}

enum class ReportFormat { Json, Markdown };

namespace detail {

inline std::string display_label(const std::string& slicing, const std::string& key) {
  static const std::map<std::string, std::string> kLabels = {
      {"web", "Web"},           {"desktop", "Desktop"},   {"mobile", "Mobile"},     {"text", "Text"},
      {"icon", "Icon"},         {"dropdown", "Dropdown"}, {"inputfield", "Input"},  {"toggle", "Toggle"},
      {"explicit", "Explicit"}, {"implicit", "Implicit"}};
  if (slicing == "ratio_bucket") return key;
  auto it = kLabels.find(key);
  return it == kLabels.end() ? key : it->second;
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

}  // namespace detail

inline std::string render_report(const EvalReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return Json(r).dump(2) + "\n";
  static const std::map<std::string, std::string> kTitles = {{"platform", "Platform"},
                                                             {"element_type", "Element Type"},
                                                             {"implicitness", "Implicitness"},
                                                             {"ratio_bucket", "Element-to-Screen Ratio"}};
  std::string md = "# Grounding accuracy\n\n";
  md += "Overall: " + detail::percent(r.overall_accuracy) + "% (" + std::to_string(r.correct) + "/" +
        std::to_string(r.scored) + ")\n\n";
  md += "Missing predictions: " + std::to_string(r.missing_predictions) +
        "; unmatched predictions: " + std::to_string(r.unmatched_predictions) + "\n";
  for (const auto& s : r.slices) {
    auto title = kTitles.count(s.name) ? kTitles.at(s.name) : s.name;
    md += "\n## " + title + "\n\n| slice | n | accuracy% |\n|---|---:|---:|\n";
    for (const auto& row : s.rows)
      md += "| " + detail::display_label(s.name, row.slice) + " | " + std::to_string(row.n) + " | " +
            detail::percent(row.accuracy()) + " |\n";
  }
  return md;
}

/// Synthetic model that hits exactly floor(hit_fraction * n) samples (chosen
/// with a seeded draw) by answering their box centers; every other sample is
/// answered with the pixel just past the box's exclusive right edge.
inline std::vector<Prediction> oracle_model(const std::vector<BenchmarkSample>& benchmark, double hit_fraction,
                                            std::uint64_t seed) {
  if (!(hit_fraction >= 0.0 && hit_fraction <= 1.0)) throw InvalidInput("hit_fraction must be in [0, 1]");
  const auto hits = static_cast<std::size_t>(std::floor(hit_fraction * static_cast<double>(benchmark.size())));
  std::vector<std::size_t> all(benchmark.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  const auto chosen = detail::choose(all, hits, rng);
  std::vector<bool> is_hit(benchmark.size(), false);
  for (auto i : chosen) is_hit[i] = true;

  std::vector<Prediction> out;
  out.reserve(benchmark.size());
  for (std::size_t i = 0; i < benchmark.size(); ++i) {
    const auto& b = benchmark[i].bbox;
    const Point p = is_hit[i] ? bbox_center(b) : Point{b.x2(), b.y1()};
    out.push_back({benchmark[i].sample_id, p, std::nullopt});
  }
  return out;
}

}  // namespace uie2i
