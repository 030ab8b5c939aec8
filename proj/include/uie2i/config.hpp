#pragma once

// Pipeline configuration file. Every key is optional; omitted sections keep
// their defaults. The config hash is stamped into pipeline outputs.

#include "uie2i/sampler.hpp"
#include "uie2i/synthesis.hpp"

namespace uie2i {

inline constexpr const char* kConfigEnv = "UIE2I_CONFIG";

struct PipelineConfig {
  ParseConfig parse;
  DistributionSpec distribution;
  MarkStyle marks;
  LlmSettings llm;
  SynthesisMode mode = SynthesisMode::Full;
  std::size_t max_in_flight = 4;
  std::size_t max_marks_per_image = 40;
  fs::path base_dir = ".";  // relative paths inside the file resolve against this

  /// LLM settings with fixture_dir resolved against the config location.
  LlmSettings resolved_llm() const {
    LlmSettings s = llm;
    if (!s.fixture_dir.empty() && fs::path(s.fixture_dir).is_relative())
      s.fixture_dir = (base_dir / s.fixture_dir).lexically_normal().string();
    return s;
  }
};

inline void to_json(Json& j, const PipelineConfig& c) {
  j = Json{{"parse", c.parse},
           {"distribution", c.distribution},
           {"marks", c.marks},
           {"llm", c.llm},
           {"mode", std::string(to_string(c.mode))},
           {"max_in_flight", c.max_in_flight},
           {"max_marks_per_image", c.max_marks_per_image}};
}

inline void from_json(const Json& j, PipelineConfig& c) {
  static const std::set<std::string> kKeys = {"parse", "distribution", "marks", "llm",
                                              "mode",  "max_in_flight", "max_marks_per_image"};
  if (!j.is_object()) throw DataError("config must be a JSON object");
  for (auto& [k, v] : j.items())
    if (!kKeys.count(k)) throw DataError("unknown config key '" + k + "'");
  c = PipelineConfig{};
  if (j.contains("parse")) c.parse = j.at("parse").get<ParseConfig>();
  if (j.contains("distribution")) c.distribution = j.at("distribution").get<DistributionSpec>();
  if (j.contains("marks")) c.marks = j.at("marks").get<MarkStyle>();
  if (j.contains("llm")) c.llm = j.at("llm").get<LlmSettings>();
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    auto mode = synthesis_mode_from_string(m);
    if (!mode) throw DataError("unknown synthesis mode '" + m + "'");
    c.mode = *mode;
  }
  c.max_in_flight = detail::value_or<std::size_t>(j, "max_in_flight", c.max_in_flight);
  c.max_marks_per_image = detail::value_or<std::size_t>(j, "max_marks_per_image", c.max_marks_per_image);
  if (c.max_in_flight < 1) throw DataError("max_in_flight must be >= 1");
  if (c.max_marks_per_image < 1) throw DataError("max_marks_per_image must be >= 1");
}

/// Hash of the canonical serialization. Where fixtures live does not change
/// what is synthesized, so fixture_dir is left out.
inline std::string config_hash(const PipelineConfig& c) {
  PipelineConfig h = c;
  h.llm.fixture_dir.clear();
  return json_hash(Json(h));
}

/// Reads the config named by `path`, else by $UIE2I_CONFIG, else defaults.
inline PipelineConfig load_config(const std::optional<fs::path>& path) {
  std::optional<fs::path> p = path;
  if (!p)
    if (const char* env = std::getenv(kConfigEnv); env && *env) p = fs::path(env);
  if (!p) return PipelineConfig{};
  PipelineConfig c;
  try {
    c = read_json_file(*p).get<PipelineConfig>();
  } catch (const DataError& e) {
    throw DataError(p->string() + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(p->string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw DataError(p->string() + ": " + e.what());
  }
  c.base_dir = p->parent_path().empty() ? fs::path(".") : p->parent_path();
  return c;
}

}  // namespace uie2i
