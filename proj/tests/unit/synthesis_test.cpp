#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace uie2i;

namespace {

/// Bundle in a scratch directory with a plain screenshot; metadata is unused
/// because elements are passed explicitly.
CaptureBundle scratch_bundle(const test::ScratchDir& dir, const std::string& id, ScreenDims screen = {1280, 720}) {
  fs::create_directories(dir / id);
  write_png(dir / id / "screenshot.png", RgbImage(screen.width(), screen.height(), {240, 240, 240}));
  CaptureBundle b;
  b.dir = dir / id;
  b.source_id = id;
  b.platform = Platform::Desktop;
  b.viewport = screen;
  return b;
}

std::vector<UiElement> grid_elements(std::size_t n, const ScreenDims& s, const std::string& prefix = "item") {
  std::vector<UiElement> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int x = static_cast<int>(i % 10) * 120 + 10, y = static_cast<int>(i / 10) * 100 + 10;
    out.push_back(make_element("e" + std::to_string(i), kElementTypes[i % 5], prefix + " " + std::to_string(i),
                               BoundingBox(x, y, x + 90, y + 40), s));
  }
  return out;
}

SynthesisOptions options(SynthesisMode mode) {
  SynthesisOptions o;
  o.mode = mode;
  return o;
}

std::set<std::pair<std::string, std::string>> coverage(const std::vector<GroundingRecord>& records) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& r : records) out.insert({r.provenance.capture_id, r.provenance.element_id});
  return out;
}

/// Synthetic model that drops every entry whose id ends in the given digit
/// from its Step-2 answers.
class LossyLlm : public LlmClient {
 public:
  explicit LossyLlm(char digit) : digit_(digit) {}
  std::string submit(const ChatRequest& req) override {
    const auto& m = req.messages.at(0);
    if (m.image) return test::SyntheticLlm::step1(m.text);
    Json doc = extract_response_json(test::SyntheticLlm::step2(m.text));
    Json kept = Json::array();
    for (auto& e : doc["elements"])
      if (e["id"].get<std::string>().back() != digit_) kept.push_back(e);
    return Json{{"elements", kept}}.dump();
  }

 private:
  char digit_;
};

/// Fails every request whose prompt mentions the marker.
class PoisonedLlm : public LlmClient {
 public:
  explicit PoisonedLlm(std::string marker) : marker_(std::move(marker)) {}
  std::string submit(const ChatRequest& req) override {
    if (req.messages.at(0).text.find(marker_) != std::string::npos) throw LlmError("poisoned", false);
    return inner_.submit(req);
  }

 private:
  std::string marker_;
  test::SyntheticLlm inner_;
};

}  // namespace

TEST(SynthesizeCapture, NoLlmEmitsAttributeStrings) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  const std::vector<UiElement> els{make_element("e0", ElementType::Text, "Submit", BoundingBox(0, 0, 80, 30), b.viewport),
                                   make_element("e1", ElementType::Icon, "", BoundingBox(100, 0, 130, 30), b.viewport)};
  const auto out = synthesize_capture(b, els, nullptr, options(SynthesisMode::NoLlm));
  ASSERT_EQ(out.records.size(), 2u);
  EXPECT_EQ(out.records[0].instruction, "text: Submit");
  EXPECT_EQ(out.records[1].instruction, "icon");
  EXPECT_EQ(out.records[0].provenance.llm_model_tag, "none");
  EXPECT_EQ(out.records[0].implicitness, Implicitness::Explicit);
}

TEST(SynthesizeCapture, FullModeGivesThreeRecordsPerElement) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  const std::vector<UiElement> els{
      make_element("e0", ElementType::Inputfield, "Search songs", BoundingBox(40, 20, 400, 60), b.viewport)};
  test::SyntheticLlm llm;
  const auto out = synthesize_capture(b, els, &llm, options(SynthesisMode::Full));
  ASSERT_EQ(out.records.size(), 3u);
  EXPECT_EQ(llm.calls, 2);
  EXPECT_EQ(out.records[0].implicitness, Implicitness::Explicit);
  EXPECT_EQ(out.records[0].instruction, "the 'Search songs' input field");
  EXPECT_EQ(out.records[1].implicitness, Implicitness::ImplicitFunction);
  EXPECT_EQ(out.records[1].instruction, "Enter 'Gangsta-Groove' in the inputfield used for Search songs");
  EXPECT_EQ(out.records[2].implicitness, Implicitness::ImplicitNear);
  for (const auto& r : out.records) {
    EXPECT_EQ(r.bbox, els[0].bbox);
    EXPECT_EQ(r.action.action_type, ActionType::Type);
    EXPECT_EQ(r.action.action_content, "Gangsta-Groove");
    EXPECT_EQ(r.provenance.element_id, "e0");
    EXPECT_EQ(r.provenance.pipeline_version, kPipelineVersion);
  }
}

TEST(SynthesizeCapture, NoInstructionSynthesisUsesReferringExpressions) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  const auto els = grid_elements(5, b.viewport);
  test::SyntheticLlm llm;
  const auto out = synthesize_capture(b, els, &llm, options(SynthesisMode::NoInstructionSynthesis));
  EXPECT_EQ(llm.calls, 1);
  ASSERT_EQ(out.records.size(), 15u);
  const auto step1 = extract_response_json(test::SyntheticLlm::step1(build_step1_prompt(els).text));
  for (std::size_t i = 0; i < els.size(); ++i) {
    EXPECT_EQ(out.records[3 * i].instruction, step1[i]["explicitRefer"]);
    EXPECT_EQ(out.records[3 * i + 1].instruction, step1[i]["implicitReferByElementFunction"]);
    EXPECT_EQ(out.records[3 * i + 2].instruction, step1[i]["implicitReferByNearElement"]);
  }
}

TEST(SynthesizeCapture, BboxIsCopiedFromElement) {
  const auto bundles = list_bundles(test::captures_dir());
  test::SyntheticLlm llm;
  for (const auto& dir : bundles) {
    const auto b = load_bundle(dir);
    const auto els = parse_bundle(b);
    std::map<std::string, BoundingBox> by_id;
    for (const auto& e : els) by_id.emplace(e.id, e.bbox);
    const auto out = synthesize_capture(b, els, &llm, options(SynthesisMode::Full));
    EXPECT_EQ(out.records.size(), 3 * els.size());
    for (const auto& r : out.records) EXPECT_EQ(r.bbox, by_id.at(r.provenance.element_id));
  }
}

TEST(SynthesizeCapture, MoreThanFortyElementsAreBatched) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  const auto els = grid_elements(45, b.viewport);
  class Counting : public LlmClient {
   public:
    std::string submit(const ChatRequest& req) override {
      if (req.messages[0].image) step1_sizes.push_back(build_lines(req.messages[0].text));
      return inner.submit(req);
    }
    static std::size_t build_lines(const std::string& text) {
      const auto body = text.substr(prompts::kStep1Template.size() + 1);
      return static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n'));
    }
    std::vector<std::size_t> step1_sizes;
    test::SyntheticLlm inner;
  } llm;
  const auto out = synthesize_capture(b, els, &llm, options(SynthesisMode::Full));
  EXPECT_EQ(llm.step1_sizes, (std::vector<std::size_t>{40, 5}));
  EXPECT_EQ(out.records.size(), 135u);
}

TEST(SynthesizeCapture, LlmFailureMarksCaptureFailed) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  test::FailingLlm llm(false);
  const auto out = synthesize_capture(b, grid_elements(3, b.viewport), &llm, options(SynthesisMode::Full));
  EXPECT_TRUE(out.failed);
  EXPECT_TRUE(out.records.empty());
  EXPECT_EQ(out.errors.size(), 1u);
}

TEST(SynthesizeCapture, InvalidResponseSkipsBatchOnly) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  const auto els = grid_elements(41, b.viewport);
  const auto second_batch = std::vector<UiElement>(els.begin() + 40, els.end());
  test::ScriptedLlm llm({"not json at all", test::SyntheticLlm::step1(build_step1_prompt(second_batch).text)});
  const auto out = synthesize_capture(b, els, &llm, options(SynthesisMode::NoInstructionSynthesis));
  EXPECT_FALSE(out.failed);
  EXPECT_EQ(out.errors.size(), 1u);
  ASSERT_EQ(out.records.size(), 3u);
  EXPECT_EQ(out.records[0].provenance.element_id, "e40");
}

TEST(SynthesizeCapture, ModesNeedClientUnlessNoLlm) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  EXPECT_THROW(synthesize_capture(b, grid_elements(1, b.viewport), nullptr, options(SynthesisMode::Full)), InvalidInput);
}

TEST(SynthesizeCapture, ModeCoverageIsMonotone) {
  const auto bundles = list_bundles(test::captures_dir());
  std::vector<CaptureJob> jobs;
  for (const auto& dir : bundles) {
    auto b = load_bundle(dir);
    auto els = parse_bundle(b);
    jobs.push_back({std::move(b), std::move(els)});
  }
  LossyLlm llm('3');
  auto covered = [&](SynthesisMode m) {
    std::vector<GroundingRecord> all;
    for (const auto& o : run_synthesis(jobs, &llm, options(m), 2)) all.insert(all.end(), o.records.begin(), o.records.end());
    return coverage(all);
  };
  const auto no_llm = covered(SynthesisMode::NoLlm);
  const auto no_inst = covered(SynthesisMode::NoInstructionSynthesis);
  const auto full = covered(SynthesisMode::Full);
  EXPECT_TRUE(std::includes(no_llm.begin(), no_llm.end(), no_inst.begin(), no_inst.end()));
  EXPECT_TRUE(std::includes(no_inst.begin(), no_inst.end(), full.begin(), full.end()));
  EXPECT_LT(full.size(), no_inst.size());
}

TEST(RunSynthesis, FailedCaptureDoesNotStopOthers) {
  test::ScratchDir dir("synth");
  const auto a = scratch_bundle(dir, "a"), b = scratch_bundle(dir, "b"), c = scratch_bundle(dir, "c");
  std::vector<CaptureJob> jobs{{a, grid_elements(4, a.viewport)},
                               {b, grid_elements(4, b.viewport, "POISON")},
                               {c, grid_elements(2, c.viewport)}};
  PoisonedLlm llm("POISON");
  const auto out = run_synthesis(jobs, &llm, options(SynthesisMode::Full), 3);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].capture_id, "a");
  EXPECT_EQ(out[0].records.size(), 12u);
  EXPECT_TRUE(out[1].failed);
  EXPECT_TRUE(out[1].records.empty());
  EXPECT_EQ(out[2].records.size(), 6u);
}

TEST(RunSynthesis, ConcurrencyDoesNotChangeOutput) {
  test::ScratchDir dir("synth");
  std::vector<CaptureJob> jobs;
  for (int i = 0; i < 6; ++i) {
    auto b = scratch_bundle(dir, "cap" + std::to_string(i));
    jobs.push_back({b, grid_elements(static_cast<std::size_t>(3 + i), b.viewport)});
  }
  test::SyntheticLlm llm;
  const auto serial = run_synthesis(jobs, &llm, options(SynthesisMode::Full), 1);
  const auto parallel = run_synthesis(jobs, &llm, options(SynthesisMode::Full), 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i].records, parallel[i].records);
}

TEST(GroundingRecord, JsonRoundTrip) {
  test::ScratchDir dir("synth");
  const auto b = scratch_bundle(dir, "cap");
  test::SyntheticLlm llm;
  for (const auto& r : synthesize_capture(b, grid_elements(5, b.viewport), &llm, options(SynthesisMode::Full)).records) {
    const Json j = r;
    EXPECT_EQ(j.get<GroundingRecord>(), r);
  }
  Json bad = Json(synthesize_capture(b, grid_elements(1, b.viewport), nullptr, options(SynthesisMode::NoLlm)).records[0]);
  bad["instruction"] = "";
  EXPECT_THROW(bad.get<GroundingRecord>(), DataError);
}
