#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace uie2i;

namespace {

ReviewVerdict valid_verdict(const std::string& id) {
  ReviewVerdict v;
  v.task_id = id;
  return v;
}

}  // namespace

TEST(AssembleBenchmark, SeriousVerdictsAreFilteredOut) {
  const auto f = test::assembly_fixture(1987, 510, 3);
  const auto bench = assemble_benchmark(f.tasks, f.verdicts);
  EXPECT_EQ(bench.size(), 1477u);
}

TEST(AssembleBenchmark, SlightCorrectionsAppearVerbatim) {
  const auto f = test::assembly_fixture(1987, 510, 3);
  const auto bench = assemble_benchmark(f.tasks, f.verdicts);
  std::map<std::string, const BenchmarkSample*> by_id;
  for (const auto& s : bench) by_id[s.sample_id] = &s;
  std::size_t boxes = 0, instructions = 0;
  for (std::size_t i = 0; i < f.tasks.size(); ++i) {
    const auto& v = f.verdicts[i];
    auto it = by_id.find(v.task_id);
    if (it == by_id.end()) continue;
    const auto& s = *it->second;
    if (v.box_quality == Quality::Slight) {
      EXPECT_EQ(s.bbox, *v.corrected_bbox);
      EXPECT_DOUBLE_EQ(s.ratio, element_to_screen_ratio(*v.corrected_bbox, f.tasks[i].screen));
      ++boxes;
    } else {
      EXPECT_EQ(s.bbox, f.tasks[i].bbox);
    }
    if (v.instruction_quality == Quality::Slight) {
      EXPECT_EQ(s.instruction, *v.corrected_instruction);
      ++instructions;
    } else {
      EXPECT_EQ(s.instruction, f.tasks[i].instruction);
    }
    EXPECT_EQ(s.implicitness, v.instruction_kind);
  }
  EXPECT_EQ(boxes, f.slight_boxes);
  EXPECT_EQ(instructions, f.slight_instructions);
}

TEST(AssembleBenchmark, SeriousInstructionDropsSample) {
  const auto tasks = test::synthetic_tasks(2, 1);
  auto v0 = valid_verdict(tasks[0].task_id);
  v0.instruction_quality = Quality::Serious;
  const auto bench = assemble_benchmark(tasks, {v0, valid_verdict(tasks[1].task_id)});
  ASSERT_EQ(bench.size(), 1u);
  EXPECT_EQ(bench[0].sample_id, tasks[1].task_id);
}

TEST(AssembleBenchmark, SizeEqualsTasksMinusSeriousMinusUnreviewed) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 120)(rng);
    auto tasks = test::synthetic_tasks(n, rng());
    std::shuffle(tasks.begin(), tasks.end(), rng);
    std::vector<ReviewVerdict> verdicts;
    std::size_t serious = 0, unreviewed = 0;
    for (const auto& t : tasks) {
      const int pick = std::uniform_int_distribution<int>(0, 9)(rng);
      if (pick == 0) {
        ++unreviewed;
        continue;
      }
      auto v = valid_verdict(t.task_id);
      const auto q = [&] { return static_cast<Quality>(std::uniform_int_distribution<int>(0, 2)(rng)); };
      v.box_quality = q();
      v.instruction_quality = q();
      if (v.box_quality == Quality::Slight) v.corrected_bbox = test::random_box(rng, t.screen, 200);
      if (v.instruction_quality == Quality::Slight) v.corrected_instruction = "fixed " + t.task_id;
      serious += v.box_quality == Quality::Serious || v.instruction_quality == Quality::Serious;
      verdicts.push_back(v);
    }
    std::shuffle(verdicts.begin(), verdicts.end(), rng);
    const auto bench = assemble_benchmark(tasks, verdicts);
    ASSERT_EQ(bench.size(), n - serious - unreviewed);
    EXPECT_TRUE(std::is_sorted(bench.begin(), bench.end(),
                               [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; }));
  }
}

TEST(AssembleBenchmark, RejectsInconsistentInputs) {
  const auto tasks = test::synthetic_tasks(3, 1);
  EXPECT_THROW(assemble_benchmark(tasks, {valid_verdict("t99999")}), DataError);
  EXPECT_THROW(assemble_benchmark(tasks, {valid_verdict(tasks[0].task_id), valid_verdict(tasks[0].task_id)}), DataError);
  auto dup = tasks;
  dup.push_back(tasks[0]);
  EXPECT_THROW(assemble_benchmark(dup, {}), DataError);
  auto slight = valid_verdict(tasks[0].task_id);
  slight.box_quality = Quality::Slight;
  EXPECT_THROW(assemble_benchmark(tasks, {slight}), DataError);
}

TEST(ValidateVerdict, SlightNeedsCorrection) {
  const auto task = test::synthetic_tasks(1, 1)[0];
  auto v = valid_verdict(task.task_id);
  EXPECT_TRUE(validate_verdict(v, &task).empty());
  v.box_quality = Quality::Slight;
  v.instruction_quality = Quality::Slight;
  v.corrected_instruction = "  ";
  const auto errs = validate_verdict(v, &task);
  ASSERT_EQ(errs.size(), 2u);
  EXPECT_EQ(errs[0].field, "corrected_bbox");
  EXPECT_EQ(errs[1].field, "corrected_instruction");
  v.corrected_bbox = BoundingBox(0, 0, 2000, 10);
  v.corrected_instruction = "ok";
  EXPECT_EQ(validate_verdict(v, &task), (std::vector<FieldError>{{"corrected_bbox", "lies outside the screenshot"}}));
  EXPECT_TRUE(validate_verdict(v).empty());
  v.box_quality = Quality::Serious;
  v.instruction_quality = Quality::Serious;
  v.corrected_bbox.reset();
  v.corrected_instruction.reset();
  EXPECT_TRUE(validate_verdict(v, &task).empty());
}

TEST(Records, JsonRoundTrips) {
  const auto f = test::assembly_fixture(40, 10, 2);
  for (const auto& t : f.tasks) EXPECT_EQ(Json(t).get<ReviewTask>(), t);
  for (const auto& v : f.verdicts) EXPECT_EQ(Json(v).get<ReviewVerdict>(), v);
  for (const auto& s : assemble_benchmark(f.tasks, f.verdicts)) EXPECT_EQ(Json(s).get<BenchmarkSample>(), s);
  Json bad = Json(f.verdicts[0]);
  bad["box_quality"] = "terrible";
  EXPECT_THROW(bad.get<ReviewVerdict>(), DataError);
}

TEST(Jsonl, StrictAbortsAndLenientSkips) {
  const auto tasks = test::synthetic_tasks(3, 4);
  std::string text = to_jsonl(tasks);
  text.insert(text.find('\n') + 1, "{broken\n");
  try {
    parse_jsonl<ReviewTask>(text, ReadMode::Strict, "tasks.jsonl");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("tasks.jsonl:2:"), std::string::npos);
  }
  const auto res = parse_jsonl<ReviewTask>(text, ReadMode::Lenient, "tasks.jsonl");
  EXPECT_EQ(res.records, tasks);
  EXPECT_EQ(res.skipped, 1u);
}

TEST(DatasetStats, CountsAndFractions) {
  const auto bench = test::synthetic_benchmark(100, 1);
  const auto s = dataset_stats(bench);
  EXPECT_EQ(s.instructions, 100u);
  EXPECT_EQ(s.screenshots, 17u);
  EXPECT_EQ(s.element_type.at("text"), 20u);
  EXPECT_DOUBLE_EQ(s.non_text_fraction, 0.8);
  EXPECT_DOUBLE_EQ(s.implicit_fraction, 0.5);
  std::size_t buckets = 0;
  for (const auto& [k, c] : s.ratio_bucket) buckets += c;
  EXPECT_EQ(buckets, 100u);
  const Json j = s;
  EXPECT_DOUBLE_EQ(j["element_type"]["icon"]["fraction"].get<double>(), 0.2);
  EXPECT_THROW(dataset_stats(std::vector<BenchmarkSample>{}), InvalidInput);
}
