#pragma once

// Review tasks, reviewer verdicts, benchmark assembly and dataset statistics.

#include <map>
#include <set>

#include "uie2i/synthesis.hpp"

namespace uie2i {

enum class TaskStatus { Pending, Done };
enum class Quality { Valid, Slight, Serious };
enum class InstructionKind { Explicit, Implicit };

inline std::string_view to_string(TaskStatus s) { return s == TaskStatus::Done ? "done" : "pending"; }
inline std::string_view to_string(Quality q) {
  switch (q) {
    case Quality::Valid: return "valid";
    case Quality::Slight: return "slight";
    case Quality::Serious: return "serious";
  }
  return "valid";
}
inline std::string_view to_string(InstructionKind k) {
  return k == InstructionKind::Implicit ? "implicit" : "explicit";
}

inline std::optional<TaskStatus> task_status_from_string(std::string_view s) {
  if (s == "pending") return TaskStatus::Pending;
  if (s == "done") return TaskStatus::Done;
  return std::nullopt;
}
inline std::optional<Quality> quality_from_string(std::string_view s) {
  for (auto q : {Quality::Valid, Quality::Slight, Quality::Serious})
    if (to_string(q) == s) return q;
  return std::nullopt;
}
inline std::optional<InstructionKind> instruction_kind_from_string(std::string_view s) {
  if (s == "explicit") return InstructionKind::Explicit;
  if (s == "implicit") return InstructionKind::Implicit;
  return std::nullopt;
}

inline void to_json(Json& j, TaskStatus s) { j = std::string(to_string(s)); }
inline void from_json(const Json& j, TaskStatus& s) {
  s = detail::require_enum<TaskStatus>(j, task_status_from_string, "status");
}
inline void to_json(Json& j, Quality q) { j = std::string(to_string(q)); }
inline void from_json(const Json& j, Quality& q) { q = detail::require_enum<Quality>(j, quality_from_string, "quality"); }
inline void to_json(Json& j, InstructionKind k) { j = std::string(to_string(k)); }
inline void from_json(const Json& j, InstructionKind& k) {
  k = detail::require_enum<InstructionKind>(j, instruction_kind_from_string, "instruction_kind");
}

struct ReviewTask {
  std::string task_id;
  std::string screenshot_path;
  BoundingBox bbox;
  std::string instruction;
  ElementType element_type = ElementType::Text;
  Platform platform = Platform::Web;
  TaskStatus status = TaskStatus::Pending;
  ScreenDims screen;
  bool operator==(const ReviewTask&) const = default;
};

struct ReviewVerdict {
  std::string task_id;
  Quality box_quality = Quality::Valid;
  Quality instruction_quality = Quality::Valid;
  InstructionKind instruction_kind = InstructionKind::Explicit;
  std::optional<BoundingBox> corrected_bbox;
  std::optional<std::string> corrected_instruction;
  std::string reviewer_tag;
  std::string timestamp;
  bool operator==(const ReviewVerdict&) const = default;
};

struct BenchmarkSample {
  std::string sample_id;
  std::string screenshot_path;
  std::string instruction;
  BoundingBox bbox;
  ElementType element_type = ElementType::Text;
  Platform platform = Platform::Web;
  InstructionKind implicitness = InstructionKind::Explicit;
  double ratio = 1.0;
  bool operator==(const BenchmarkSample&) const = default;
};

inline void to_json(Json& j, const ReviewTask& t) {
  j = Json{{"task_id", t.task_id},       {"screenshot_path", t.screenshot_path},
           {"bbox", t.bbox},             {"instruction", t.instruction},
           {"element_type", t.element_type}, {"platform", t.platform},
           {"status", t.status},         {"screen", t.screen}};
}
inline void from_json(const Json& j, ReviewTask& t) {
  t.task_id = j.at("task_id").get<std::string>();
  t.screenshot_path = j.at("screenshot_path").get<std::string>();
  t.bbox = j.at("bbox").get<BoundingBox>();
  t.instruction = j.at("instruction").get<std::string>();
  t.element_type = j.at("element_type").get<ElementType>();
  t.platform = j.at("platform").get<Platform>();
  t.status = j.at("status").get<TaskStatus>();
  t.screen = j.at("screen").get<ScreenDims>();
}

inline void to_json(Json& j, const ReviewVerdict& v) {
  j = Json{{"task_id", v.task_id},
           {"box_quality", v.box_quality},
           {"instruction_quality", v.instruction_quality},
           {"instruction_kind", v.instruction_kind}};
  j["corrected_bbox"] = v.corrected_bbox ? Json(*v.corrected_bbox) : Json(nullptr);
  j["corrected_instruction"] = v.corrected_instruction ? Json(*v.corrected_instruction) : Json(nullptr);
  j["reviewer_tag"] = v.reviewer_tag;
  j["timestamp"] = v.timestamp;
}
inline void from_json(const Json& j, ReviewVerdict& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.box_quality = j.at("box_quality").get<Quality>();
  v.instruction_quality = j.at("instruction_quality").get<Quality>();
  v.instruction_kind = j.at("instruction_kind").get<InstructionKind>();
  v.corrected_bbox = detail::optional_field<BoundingBox>(j, "corrected_bbox");
  v.corrected_instruction = detail::optional_field<std::string>(j, "corrected_instruction");
  v.reviewer_tag = j.value("reviewer_tag", "");
  v.timestamp = j.value("timestamp", "");
}

inline void to_json(Json& j, const BenchmarkSample& s) {
  j = Json{{"sample_id", s.sample_id},   {"screenshot_path", s.screenshot_path},
           {"instruction", s.instruction}, {"bbox", s.bbox},
           {"element_type", s.element_type}, {"platform", s.platform},
           {"implicitness", s.implicitness}, {"ratio", s.ratio}};
}
inline void from_json(const Json& j, BenchmarkSample& s) {
  s.sample_id = j.at("sample_id").get<std::string>();
  s.screenshot_path = j.at("screenshot_path").get<std::string>();
  s.instruction = j.at("instruction").get<std::string>();
  s.bbox = j.at("bbox").get<BoundingBox>();
  s.element_type = j.at("element_type").get<ElementType>();
  s.platform = j.at("platform").get<Platform>();
  s.implicitness = j.at("implicitness").get<InstructionKind>();
  s.ratio = j.at("ratio").get<double>();
}

struct FieldError {
  std::string field;
  std::string message;
  bool operator==(const FieldError&) const = default;
};

inline void to_json(Json& j, const FieldError& e) { j = Json{{"field", e.field}, {"message", e.message}}; }

/// Verdict invariants: a slight rating requires its correction. When the task
/// is known the corrected box must also fit its screenshot.
inline std::vector<FieldError> validate_verdict(const ReviewVerdict& v, const ReviewTask* task = nullptr) {
  std::vector<FieldError> errors;
  if (v.box_quality == Quality::Slight && !v.corrected_bbox)
    errors.push_back({"corrected_bbox", "required when box_quality is slight"});
  if (v.instruction_quality == Quality::Slight &&
      (!v.corrected_instruction || detail::blank(*v.corrected_instruction)))
    errors.push_back({"corrected_instruction", "required when instruction_quality is slight"});
  if (task && v.corrected_bbox && !task->screen.contains(*v.corrected_bbox))
    errors.push_back({"corrected_bbox", "lies outside the screenshot"});
  return errors;
}

/// Drops tasks with any serious rating or without a verdict, applies slight
/// corrections, and orders the survivors by task_id.
inline std::vector<BenchmarkSample> assemble_benchmark(const std::vector<ReviewTask>& tasks,
                                                       const std::vector<ReviewVerdict>& verdicts) {
  std::map<std::string, const ReviewTask*> by_id;
  for (const auto& t : tasks)
    if (!by_id.emplace(t.task_id, &t).second) throw DataError("duplicate task id '" + t.task_id + "'");
  std::map<std::string, const ReviewVerdict*> verdict_of;
  for (const auto& v : verdicts) {
    if (!by_id.count(v.task_id)) throw DataError("verdict references unknown task '" + v.task_id + "'");
    if (!verdict_of.emplace(v.task_id, &v).second) throw DataError("duplicate verdict for task '" + v.task_id + "'");
  }

  std::vector<BenchmarkSample> out;
  for (const auto& [id, task] : by_id) {
    auto it = verdict_of.find(id);
    if (it == verdict_of.end()) continue;
    const ReviewVerdict& v = *it->second;
    if (v.box_quality == Quality::Serious || v.instruction_quality == Quality::Serious) continue;
    if (auto errs = validate_verdict(v, task); !errs.empty())
      throw DataError("verdict for task '" + id + "': " + errs.front().field + " " + errs.front().message);
    BenchmarkSample s;
    s.sample_id = id;
    s.screenshot_path = task->screenshot_path;
    s.instruction = v.instruction_quality == Quality::Slight ? *v.corrected_instruction : task->instruction;
    s.bbox = v.box_quality == Quality::Slight ? *v.corrected_bbox : task->bbox;
    s.element_type = task->element_type;
    s.platform = task->platform;
    s.implicitness = v.instruction_kind;
    s.ratio = element_to_screen_ratio(s.bbox, task->screen);
    out.push_back(std::move(s));
  }
  return out;
}

// ---- statistics ------------------------------------------------------------

struct DatasetStats {
  std::size_t instructions = 0;
  std::size_t screenshots = 0;
  std::map<std::string, std::size_t> element_type;
  std::map<std::string, std::size_t> platform;
  std::map<std::string, std::size_t> implicitness;
  std::map<std::string, std::size_t> ratio_bucket;
  double non_text_fraction = 0.0;
  double implicit_fraction = 0.0;
};

namespace detail {
inline double record_ratio(const GroundingRecord& r) { return element_to_screen_ratio(r.bbox, r.screen); }
inline double record_ratio(const BenchmarkSample& s) { return s.ratio; }
inline std::string implicit_label(const GroundingRecord& r) { return std::string(to_string(r.implicitness)); }
inline std::string implicit_label(const BenchmarkSample& s) { return std::string(to_string(s.implicitness)); }
}  // namespace detail

/// Counts by type, platform, implicitness and ratio bucket; works on grounding
/// records and benchmark samples.
template <class R>
DatasetStats dataset_stats(const std::vector<R>& records) {
  if (records.empty()) throw InvalidInput("dataset_stats: empty record set");
  DatasetStats s;
  std::set<std::string> shots;
  for (auto t : kElementTypes) s.element_type[std::string(to_string(t))] = 0;
  for (auto p : kPlatforms) s.platform[std::string(to_string(p))] = 0;
  for (auto b : kRatioBuckets) s.ratio_bucket[std::string(to_string(b))] = 0;
  std::size_t explicit_count = 0;
  for (const auto& r : records) {
    ++s.element_type[std::string(to_string(r.element_type))];
    ++s.platform[std::string(to_string(r.platform))];
    const auto imp = detail::implicit_label(r);
    ++s.implicitness[imp];
    if (imp == "explicit") ++explicit_count;
    ++s.ratio_bucket[std::string(to_string(ratio_bucket(detail::record_ratio(r))))];
    shots.insert(r.screenshot_path);
  }
  s.instructions = records.size();
  s.screenshots = shots.size();
  const double n = static_cast<double>(records.size());
  s.non_text_fraction = 1.0 - static_cast<double>(s.element_type["text"]) / n;
  s.implicit_fraction = 1.0 - static_cast<double>(explicit_count) / n;
  return s;
}

inline void to_json(Json& j, const DatasetStats& s) {
  const double n = static_cast<double>(s.instructions);
  auto family = [&](const std::map<std::string, std::size_t>& m) {
    Json out = Json::object();
    for (const auto& [k, c] : m) out[k] = {{"count", c}, {"fraction", n > 0 ? static_cast<double>(c) / n : 0.0}};
    return out;
  };
  j = Json{{"instructions", s.instructions},
           {"screenshots", s.screenshots},
           {"non_text_fraction", s.non_text_fraction},
           {"implicit_fraction", s.implicit_fraction},
           {"element_type", family(s.element_type)},
           {"platform", family(s.platform)},
           {"implicitness", family(s.implicitness)},
           {"ratio_bucket", family(s.ratio_bucket)}};
}

}  // namespace uie2i
