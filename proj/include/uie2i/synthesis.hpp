#pragma once

// Drives Set-of-Marks rendering and the two-step protocol for one capture and
// turns validated responses into grounding records. Geometry always comes
// from the parsed element; the model only contributes text.

#include <atomic>
#include <thread>

#include "uie2i/capture.hpp"
#include "uie2i/llm_client.hpp"
#include "uie2i/protocol.hpp"
#include "uie2i/som.hpp"

namespace uie2i {

inline constexpr std::string_view kPipelineVersion = "uie2i-1.0.0";

enum class Implicitness { Explicit, ImplicitFunction, ImplicitNear };

inline std::string_view to_string(Implicitness i) {
  switch (i) {
    case Implicitness::Explicit: return "explicit";
    case Implicitness::ImplicitFunction: return "implicit_function";
    case Implicitness::ImplicitNear: return "implicit_near";
  }
  return "explicit";
}

enum class SynthesisMode { Full, NoInstructionSynthesis, NoLlm };

inline std::string_view to_string(SynthesisMode m) {
  switch (m) {
    case SynthesisMode::Full: return "full";
    case SynthesisMode::NoInstructionSynthesis: return "no_instruction_synthesis";
    case SynthesisMode::NoLlm: return "no_llm";
  }
  return "full";
}

inline std::optional<SynthesisMode> synthesis_mode_from_string(std::string_view s) {
  for (auto m : {SynthesisMode::Full, SynthesisMode::NoInstructionSynthesis, SynthesisMode::NoLlm})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct Provenance {
  std::string capture_id;
  std::string element_id;
  std::string llm_model_tag;
  std::string pipeline_version;
  std::string config_hash;
  bool operator==(const Provenance&) const = default;
};

struct GroundingRecord {
  std::string screenshot_path;
  std::string instruction;
  BoundingBox bbox;
  ScreenDims screen;
  ElementType element_type = ElementType::Text;
  Platform platform = Platform::Web;
  Implicitness implicitness = Implicitness::Explicit;
  ActionParams action;
  Provenance provenance;
  bool operator==(const GroundingRecord&) const = default;
};

inline void to_json(Json& j, Implicitness i) { j = std::string(to_string(i)); }
inline void from_json(const Json& j, Implicitness& i) {
  const auto s = j.get<std::string>();
  for (auto v : {Implicitness::Explicit, Implicitness::ImplicitFunction, Implicitness::ImplicitNear})
    if (to_string(v) == s) {
      i = v;
      return;
    }
  throw DataError("unknown implicitness '" + s + "'");
}

inline void to_json(Json& j, const Provenance& p) {
  j = Json{{"capture_id", p.capture_id},
           {"element_id", p.element_id},
           {"llm_model_tag", p.llm_model_tag},
           {"pipeline_version", p.pipeline_version},
           {"config_hash", p.config_hash}};
}
inline void from_json(const Json& j, Provenance& p) {
  p.capture_id = j.at("capture_id").get<std::string>();
  p.element_id = j.at("element_id").get<std::string>();
  p.llm_model_tag = j.at("llm_model_tag").get<std::string>();
  p.pipeline_version = j.at("pipeline_version").get<std::string>();
  p.config_hash = j.value("config_hash", "");
}

inline void to_json(Json& j, const GroundingRecord& r) {
  j = Json{{"screenshot_path", r.screenshot_path},
           {"instruction", r.instruction},
           {"bbox", r.bbox},
           {"screen", r.screen},
           {"element_type", r.element_type},
           {"platform", r.platform},
           {"implicitness", r.implicitness},
           {"action", r.action},
           {"provenance", r.provenance}};
}
inline void from_json(const Json& j, GroundingRecord& r) {
  r.screenshot_path = j.at("screenshot_path").get<std::string>();
  r.instruction = j.at("instruction").get<std::string>();
  if (r.instruction.empty()) throw DataError("grounding record has empty instruction");
  r.bbox = j.at("bbox").get<BoundingBox>();
  r.screen = j.at("screen").get<ScreenDims>();
  r.element_type = j.at("element_type").get<ElementType>();
  r.platform = j.at("platform").get<Platform>();
  r.implicitness = j.at("implicitness").get<Implicitness>();
  r.action = j.at("action").get<ActionParams>();
  r.provenance = j.at("provenance").get<Provenance>();
}

struct SynthesisOptions {
  SynthesisMode mode = SynthesisMode::Full;
  MarkStyle style;
  std::size_t max_marks_per_image = 40;
  std::string model = "gpt-4o";
  double temperature = 0.2;
  std::string config_hash;
};

struct CaptureOutcome {
  std::string capture_id;
  std::vector<GroundingRecord> records;
  bool failed = false;                // an LLM request failed after retries
  std::vector<std::string> errors;    // per-batch failures (skipped batches)
  std::vector<Rejection> rejections;  // dropped response entries
  std::vector<Rejection> warnings;    // normalized response entries
};

/// Action used when no Step-2 parameters exist (ablation modes).
inline ActionParams default_action(ElementType t) {
  switch (t) {
    case ElementType::Inputfield: return make_action("TYPE");
    case ElementType::Dropdown: return make_action("SELECT");
    case ElementType::Toggle: return make_action("TOGGLE");
    default: return make_action("CLICK");
  }
}

/// "type: content", or just the type for content-less elements.
inline std::string attribute_instruction(const UiElement& e) {
  std::string s(to_string(e.element_type));
  if (!e.content.empty()) s += ": " + e.content;
  return s;
}

namespace detail {

struct RecordFactory {
  const CaptureBundle& bundle;
  std::string model_tag;
  std::string config_hash;

  GroundingRecord make(const UiElement& e, std::string instruction, Implicitness imp, ActionParams action) const {
    return GroundingRecord{bundle.screenshot_path().string(),
                           std::move(instruction),
                           e.bbox,
                           bundle.viewport,
                           e.element_type,
                           bundle.platform,
                           imp,
                           std::move(action),
                           {bundle.source_id, e.id, model_tag, std::string(kPipelineVersion), config_hash}};
  }
};

}  // namespace detail

inline CaptureOutcome synthesize_capture(const CaptureBundle& bundle, const std::vector<UiElement>& elements,
                                         LlmClient* client, const SynthesisOptions& opt) {
  CaptureOutcome out;
  out.capture_id = bundle.source_id;
  const bool uses_llm = opt.mode != SynthesisMode::NoLlm;
  detail::RecordFactory factory{bundle, uses_llm ? opt.model : "none", opt.config_hash};

  if (!uses_llm) {
    for (const auto& e : elements)
      out.records.push_back(factory.make(e, attribute_instruction(e), Implicitness::Explicit,
                                         default_action(e.element_type)));
    return out;
  }
  if (!client) throw InvalidInput("synthesis mode '" + std::string(to_string(opt.mode)) + "' needs an LLM client");
  if (elements.empty()) return out;

  const RgbImage screenshot = read_png(bundle.screenshot_path());
  for (const auto& group : batch_marks(elements.size(), opt.max_marks_per_image)) {
    std::vector<UiElement> batch;
    for (auto i : group) batch.push_back(elements[i]);
    try {
      const auto p1 = build_step1_prompt(batch);
      ChatRequest r1{opt.model, opt.temperature, {ChatMessage{"user", p1.text, render_marks(screenshot, batch, opt.style)}}};
      auto s1 = parse_step1_response(client->submit(r1), {p1.mark_ids.begin(), p1.mark_ids.end()});
      out.rejections.insert(out.rejections.end(), s1.rejections.begin(), s1.rejections.end());
      std::map<std::string, ReferringExpressionSet> res_by_id;
      for (const auto& r : s1.sets) res_by_id.emplace(r.element_id, r);

      if (opt.mode == SynthesisMode::NoInstructionSynthesis) {
        for (const auto& e : batch) {
          auto it = res_by_id.find(e.id);
          if (it == res_by_id.end()) continue;
          const auto& re = it->second;
          out.records.push_back(factory.make(e, re.explicit_refer, Implicitness::Explicit, default_action(e.element_type)));
          out.records.push_back(factory.make(e, re.implicit_refer_by_element_function, Implicitness::ImplicitFunction,
                                             default_action(e.element_type)));
          out.records.push_back(factory.make(e, re.implicit_refer_by_near_element, Implicitness::ImplicitNear,
                                             default_action(e.element_type)));
        }
        continue;
      }

      ChatRequest r2{opt.model, opt.temperature, {ChatMessage{"user", build_step2_prompt(s1.sets), std::nullopt}}};
      auto s2 = parse_step2_response(client->submit(r2), res_by_id);
      out.rejections.insert(out.rejections.end(), s2.rejections.begin(), s2.rejections.end());
      out.warnings.insert(out.warnings.end(), s2.warnings.begin(), s2.warnings.end());
      std::map<std::string, const Step2Entry*> step2_by_id;
      for (const auto& s : s2.entries) step2_by_id.emplace(s.element_id, &s);

      for (const auto& e : batch) {
        auto re = res_by_id.find(e.id);
        auto st = step2_by_id.find(e.id);
        if (re == res_by_id.end() || st == step2_by_id.end()) continue;
        const Step2Entry& s = *st->second;
        out.records.push_back(factory.make(e, re->second.explicit_refer, Implicitness::Explicit, s.action));
        out.records.push_back(factory.make(e, s.instruction_by_function, Implicitness::ImplicitFunction, s.action));
        out.records.push_back(factory.make(e, s.instruction_by_near, Implicitness::ImplicitNear, s.action));
      }
    } catch (const LlmError& e) {
      out.failed = true;
      out.errors.push_back(e.what());
    } catch (const ResponseInvalid& e) {
      out.errors.push_back(e.what());
    } catch (const EmptyResult& e) {
      out.errors.push_back(e.what());
      out.rejections.insert(out.rejections.end(), e.rejections.begin(), e.rejections.end());
    }
  }
  return out;
}

struct CaptureJob {
  CaptureBundle bundle;
  std::vector<UiElement> elements;
};

/// Runs captures on up to max_in_flight worker threads; outcomes come back in
/// job order so downstream writing is deterministic.
inline std::vector<CaptureOutcome> run_synthesis(const std::vector<CaptureJob>& jobs, LlmClient* client,
                                                 const SynthesisOptions& opt, std::size_t max_in_flight = 4) {
  std::vector<CaptureOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        outcomes[i] = synthesize_capture(jobs[i].bundle, jobs[i].elements, client, opt);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(max_in_flight, jobs.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return outcomes;
}

}  // namespace uie2i
