#pragma once

// Distribution measurement and seeded stratified resampling of element pools.

#include <array>
#include <cstdint>
#include <numeric>
#include <random>

#include "uie2i/capture.hpp"

namespace uie2i {

struct DistributionSpec {
  std::array<double, 5> type_weights{0.2, 0.2, 0.2, 0.2, 0.2};      // indexed by ElementType
  std::array<double, 3> ratio_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};  // indexed by RatioBucket
  std::uint64_t seed = 0;

  double type_weight(ElementType t) const { return type_weights[static_cast<std::size_t>(t)]; }
  double ratio_weight(RatioBucket b) const { return ratio_weights[static_cast<std::size_t>(b)]; }

  void validate() const {
    auto check = [](auto const& w, const char* family) {
      double sum = 0;
      for (double v : w) {
        if (!(v >= 0.0)) throw InvalidInput(std::string(family) + " weights must be nonnegative");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput(std::string(family) + " weights must sum to 1");
    };
    check(type_weights, "type");
    check(ratio_weights, "ratio");
  }
  bool operator==(const DistributionSpec&) const = default;
};

inline void to_json(Json& j, const DistributionSpec& s) {
  Json tw = Json::object(), rw = Json::object();
  for (auto t : kElementTypes) tw[std::string(to_string(t))] = s.type_weight(t);
  for (auto b : kRatioBuckets) rw[std::string(to_string(b))] = s.ratio_weight(b);
  j = Json{{"type_weights", tw}, {"ratio_weights", rw}, {"seed", s.seed}};
}

/// Missing keys in a weight family are zero; a missing family keeps the uniform default.
inline void from_json(const Json& j, DistributionSpec& s) {
  s = DistributionSpec{};
  if (auto it = j.find("type_weights"); it != j.end()) {
    s.type_weights.fill(0.0);
    for (auto& [k, v] : it->items()) {
      auto t = element_type_from_string(k);
      if (!t) throw DataError("unknown element type '" + k + "' in type_weights");
      s.type_weights[static_cast<std::size_t>(*t)] = v.get<double>();
    }
  }
  if (auto it = j.find("ratio_weights"); it != j.end()) {
    s.ratio_weights.fill(0.0);
    for (auto& [k, v] : it->items()) {
      auto b = ratio_bucket_from_string(k);
      if (!b) throw DataError("unknown ratio bucket '" + k + "' in ratio_weights");
      s.ratio_weights[static_cast<std::size_t>(*b)] = v.get<double>();
    }
  }
  if (auto it = j.find("seed"); it != j.end()) s.seed = it->get<std::uint64_t>();
  s.validate();
}

inline std::string spec_hash(const DistributionSpec& s) { return json_hash(Json(s)); }

struct PoolStats {
  std::array<std::size_t, 5> by_type{};
  std::array<std::size_t, 3> by_bucket{};
  std::array<std::size_t, 3> by_platform{};
  std::size_t total = 0;
  double non_text_fraction = 0.0;

  std::size_t count(ElementType t) const { return by_type[static_cast<std::size_t>(t)]; }
  std::size_t count(RatioBucket b) const { return by_bucket[static_cast<std::size_t>(b)]; }
  std::size_t count(Platform p) const { return by_platform[static_cast<std::size_t>(p)]; }
};

inline PoolStats measure_distribution(const std::vector<PoolEntry>& pool) {
  if (pool.empty()) throw InvalidInput("measure_distribution: empty pool");
  PoolStats s;
  for (const auto& e : pool) {
    ++s.by_type[static_cast<std::size_t>(e.element.element_type)];
    ++s.by_bucket[static_cast<std::size_t>(ratio_bucket(e.element.ratio))];
    ++s.by_platform[static_cast<std::size_t>(e.platform)];
  }
  s.total = pool.size();
  s.non_text_fraction = 1.0 - static_cast<double>(s.count(ElementType::Text)) / static_cast<double>(s.total);
  return s;
}

inline void to_json(Json& j, const PoolStats& s) {
  Json types = Json::object(), buckets = Json::object(), platforms = Json::object();
  for (auto t : kElementTypes) types[std::string(to_string(t))] = s.count(t);
  for (auto b : kRatioBuckets) buckets[std::string(to_string(b))] = s.count(b);
  for (auto p : kPlatforms) platforms[std::string(to_string(p))] = s.count(p);
  j = Json{{"total", s.total},
           {"element_type", types},
           {"ratio_bucket", buckets},
           {"platform", platforms},
           {"non_text_fraction", s.non_text_fraction}};
}

namespace detail {

/// Unbiased draw in [0, n) from the standardized mt19937_64 stream, so that
/// sampling is reproducible across standard library implementations.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do v = rng(); while (v >= limit);
  return v % n;
}

/// Picks k of the given indices uniformly without replacement (partial
/// Fisher-Yates); the returned subset is in ascending order.
inline std::vector<std::size_t> choose(std::vector<std::size_t> items, std::size_t k, std::mt19937_64& rng) {
  k = std::min(k, items.size());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(rng, items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  std::sort(items.begin(), items.end());
  return items;
}

/// Splits `total` over cells proportionally to `weights`, never exceeding a
/// cell's capacity. Cells whose quota exceeds capacity are fixed at capacity
/// and their residual mass is spread over the remaining cells; the final
/// integer split uses largest remainders, ties broken by cell index.
inline std::vector<std::size_t> allocate(const std::vector<double>& weights,
                                         const std::vector<std::size_t>& capacity, std::size_t total) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> alloc(n, 0);
  std::vector<bool> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = weights[i] > 0.0 && capacity[i] > 0;
  std::size_t remaining = total;

  while (remaining > 0) {
    double wsum = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (active[i]) wsum += weights[i];
    if (wsum <= 0) break;

    bool capped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && static_cast<double>(capacity[i]) < static_cast<double>(remaining) * weights[i] / wsum) {
        alloc[i] = capacity[i];
        remaining -= capacity[i];
        active[i] = false;
        capped = true;
      }
    }
    if (capped) continue;

    std::vector<std::pair<double, std::size_t>> fractions;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const double quota = static_cast<double>(remaining) * weights[i] / wsum;
      alloc[i] = std::min(static_cast<std::size_t>(std::floor(quota)), capacity[i]);
      assigned += alloc[i];
      fractions.emplace_back(quota - std::floor(quota), i);
    }
    std::stable_sort(fractions.begin(), fractions.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t left = remaining - std::min(assigned, remaining);
    bool progress = true;
    while (left > 0 && progress) {
      progress = false;
      for (const auto& f : fractions) {
        if (left == 0) break;
        if (alloc[f.second] < capacity[f.second]) {
          ++alloc[f.second];
          --left;
          progress = true;
        }
      }
    }
    break;
  }
  return alloc;
}

inline std::size_t cell_index(ElementType t, RatioBucket b) {
  return static_cast<std::size_t>(t) * kRatioBuckets.size() + static_cast<std::size_t>(b);
}

}  // namespace detail

struct ResampleResult {
  std::vector<PoolEntry> elements;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::string spec_hash;
};

/// Draws n pool entries without replacement, stratified over (type, ratio
/// bucket) cells. The draw count is first split over element types by
/// type_weights, then each type's share is split over ratio buckets by
/// ratio_weights; exhausted cells pass their residual mass to the remaining
/// cells. Output keeps pool order.
inline ResampleResult balanced_resample(const std::vector<PoolEntry>& pool, const DistributionSpec& spec,
                                        std::size_t n) {
  spec.validate();
  if (pool.empty()) throw InvalidInput("balanced_resample: empty pool");
  if (n < 1) throw InvalidInput("balanced_resample: n must be >= 1");
  if (n > pool.size())
    throw InvalidInput("balanced_resample: n=" + std::to_string(n) + " exceeds pool size " +
                       std::to_string(pool.size()));

  constexpr std::size_t kCells = kElementTypes.size() * kRatioBuckets.size();
  std::vector<std::vector<std::size_t>> members(kCells);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& e = pool[i].element;
    members[detail::cell_index(e.element_type, ratio_bucket(e.ratio))].push_back(i);
  }

  ResampleResult result;
  result.seed = spec.seed;
  result.spec_hash = spec_hash(spec);

  const std::vector<double> bucket_weights(spec.ratio_weights.begin(), spec.ratio_weights.end());
  std::vector<double> type_weights(spec.type_weights.begin(), spec.type_weights.end());
  std::vector<std::size_t> type_capacity(kElementTypes.size(), 0);
  for (auto t : kElementTypes)
    for (auto b : kRatioBuckets) {
      const auto c = detail::cell_index(t, b);
      if (spec.ratio_weight(b) > 0) type_capacity[static_cast<std::size_t>(t)] += members[c].size();
      if (spec.type_weight(t) > 0 && spec.ratio_weight(b) > 0 && members[c].empty())
        result.warnings.push_back("stratum " + std::string(to_string(t)) + " " +
                                  std::string(to_string(b)) + " has positive weight but no elements");
    }

  const auto per_type = detail::allocate(type_weights, type_capacity, n);
  std::vector<std::size_t> alloc(kCells, 0);
  for (auto t : kElementTypes) {
    std::vector<std::size_t> cap;
    for (auto b : kRatioBuckets) cap.push_back(members[detail::cell_index(t, b)].size());
    const auto split = detail::allocate(bucket_weights, cap, per_type[static_cast<std::size_t>(t)]);
    for (auto b : kRatioBuckets)
      alloc[detail::cell_index(t, b)] = split[static_cast<std::size_t>(b)];
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < kCells; ++c) {
    auto picked = detail::choose(members[c], alloc[c], rng);
    chosen.insert(chosen.end(), picked.begin(), picked.end());
  }
  std::sort(chosen.begin(), chosen.end());
  if (chosen.size() < n)
    result.warnings.push_back("positive-weight strata exhausted: drew " + std::to_string(chosen.size()) +
                              " of " + std::to_string(n));
  for (auto i : chosen) result.elements.push_back(pool[i]);
  return result;
}

/// Up to `per_type` items of each element type, seeded; pool order is kept.
template <class T, class TypeOf>
std::vector<T> stratified_bench_sample(const std::vector<T>& pool, std::size_t per_type, std::uint64_t seed,
                                       TypeOf type_of) {
  std::array<std::vector<std::size_t>, 5> by_type;
  for (std::size_t i = 0; i < pool.size(); ++i)
    by_type[static_cast<std::size_t>(type_of(pool[i]))].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  for (const auto& idx : by_type) {
    auto picked = detail::choose(idx, per_type, rng);
    chosen.insert(chosen.end(), picked.begin(), picked.end());
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<T> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(pool[i]);
  return out;
}

inline std::vector<PoolEntry> stratified_bench_sample(const std::vector<PoolEntry>& pool, std::size_t per_type,
                                                      std::uint64_t seed) {
  return stratified_bench_sample(pool, per_type, seed,
                                 [](const PoolEntry& e) { return e.element.element_type; });
}

// ---- pool files ----------------------------------------------------------

struct PoolFile {
  Json header;  // null when the file has no header line
  std::vector<PoolEntry> entries;
};

inline bool is_header_line(const Json& j) {
  auto it = j.find("header");
  return it != j.end() && it->is_boolean() && it->get<bool>();
}

inline void write_pool(const fs::path& path, const std::vector<PoolEntry>& entries, Json header = nullptr) {
  std::string out;
  if (!header.is_null()) {
    Json h = {{"header", true}};
    for (auto& [k, v] : header.items()) h[k] = v;
    out += h.dump() + "\n";
  }
  out += to_jsonl(entries);
  write_file(path, out);
}

inline PoolFile read_pool(const fs::path& path, ReadMode mode = ReadMode::Strict) {
  PoolFile pf;
  const std::string text = read_file(path);
  auto res = parse_jsonl<PoolEntry>(text, mode, path.string(), [&](const Json& j) {
    if (is_header_line(j)) {
      pf.header = j;
      return false;
    }
    return true;
  });
  pf.entries = std::move(res.records);
  return pf;
}

}  // namespace uie2i
