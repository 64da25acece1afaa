#include "racint/subsampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "racint/error.hpp"
#include "racint/rng.hpp"

namespace racint {

const char* to_string(SamplingScheme s) {
  switch (s) {
    case SamplingScheme::kFull: return "full";
    case SamplingScheme::kRandom: return "random";
    case SamplingScheme::kCcPooled: return "cc_pooled";
    case SamplingScheme::kCcWithinPropSize: return "cc_within_prop_size";
    case SamplingScheme::kCcWithinPropCases: return "cc_within_prop_cases";
  }
  return "unknown";
}

SamplingScheme scheme_from_string(const std::string& s) {
  for (auto v : {SamplingScheme::kFull, SamplingScheme::kRandom, SamplingScheme::kCcPooled,
                 SamplingScheme::kCcWithinPropSize, SamplingScheme::kCcWithinPropCases}) {
    if (s == to_string(v)) return v;
  }
  fail(ErrorKind::kInvalidInput, "unknown sampling scheme '" + s + "'");
}

std::optional<std::size_t> SubsampleMeta::index_of(const std::string& id) const {
  const auto it = std::find(cluster_ids.begin(), cluster_ids.end(), id);
  if (it == cluster_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - cluster_ids.begin());
}

double adjusted_probability(double p, double rho1, double rho0) {
  if (p == 0.0) return 0.0;
  return rho1 * p / (rho0 * (1.0 - p) + rho1 * p);
}

double offset_for(const SubsampleMeta& meta, const std::string& cluster_id) {
  const auto i = meta.index_of(cluster_id);
  if (!i) fail(ErrorKind::kLookup, "cluster '" + cluster_id + "' not in sampling metadata");
  return std::log(meta.rho1[*i] / meta.rho0[*i]);
}

std::vector<double> offsets(const SubsampleMeta& meta) {
  std::vector<double> out(meta.rho1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(meta.rho1[i] / meta.rho0[i]);
  return out;
}

std::vector<long> proportional_allocation(std::span<const double> weights, long total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<long> alloc(weights.size(), 0);
  if (sum <= 0.0 || total <= 0) return alloc;
  std::vector<double> remainder(weights.size());
  long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double q = total * weights[i] / sum;
    alloc[i] = static_cast<long>(std::floor(q));
    remainder[i] = q - std::floor(q);
    assigned += alloc[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total && k < order.size(); ++k, ++assigned) {
    ++alloc[order[k]];
  }
  return alloc;
}

namespace {

// First `k` entries of a uniformly shuffled copy of `pool`, sorted.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

ClusterSample keep(const ClusterSample& c, const std::vector<std::uint8_t>& mask) {
  ClusterSample out;
  out.id = c.id;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!mask[k]) continue;
    out.unit.push_back(c.unit[k]);
    out.y.push_back(c.y[k]);
  }
  return out;
}

}  // namespace

Subsample subsample(std::span<const ClusterSample> clusters, SamplingScheme scheme,
                    const SubsampleParams& params, std::uint64_t seed) {
  require(params.controls_per_cluster >= 0, "controls per cluster must be non-negative");
  Subsample out;
  auto& meta = out.meta;
  meta.scheme = scheme;
  meta.controls_per_cluster = params.controls_per_cluster;
  meta.seed = seed;

  const std::size_t m = clusters.size();
  std::vector<long> cases(m), controls(m);
  long total_cases = 0, total_controls = 0;
  for (std::size_t i = 0; i < m; ++i) {
    require(clusters[i].y.size() == clusters[i].unit.size(), "cluster outcome length mismatch");
    cases[i] = clusters[i].cases();
    controls[i] = static_cast<long>(clusters[i].size()) - cases[i];
    total_cases += cases[i];
    total_controls += controls[i];
  }
  const long budget = static_cast<long>(params.controls_per_cluster) * static_cast<long>(m);

  std::vector<std::vector<std::uint8_t>> masks(m);
  std::vector<long> kept_cases(m, 0), kept_controls(m, 0);
  auto mark_all_cases = [&](std::size_t i) {
    masks[i].assign(clusters[i].size(), 0);
    for (std::size_t k = 0; k < clusters[i].size(); ++k) {
      if (clusters[i].y[k]) masks[i][k] = 1;
    }
    kept_cases[i] = cases[i];
  };

  switch (scheme) {
    case SamplingScheme::kFull:
      for (std::size_t i = 0; i < m; ++i) {
        masks[i].assign(clusters[i].size(), 1);
        kept_cases[i] = cases[i];
        kept_controls[i] = controls[i];
      }
      break;

    case SamplingScheme::kRandom:
    case SamplingScheme::kCcPooled: {
      // Pooled draws index (cluster, unit) pairs in a flat enumeration.
      std::vector<std::pair<std::size_t, std::size_t>> flat;
      for (std::size_t i = 0; i < m; ++i) {
        if (scheme == SamplingScheme::kCcPooled) mark_all_cases(i);
        else masks[i].assign(clusters[i].size(), 0);
        for (std::size_t k = 0; k < clusters[i].size(); ++k) {
          if (scheme == SamplingScheme::kRandom || !clusters[i].y[k]) flat.emplace_back(i, k);
        }
      }
      long want = scheme == SamplingScheme::kRandom ? total_cases + budget : budget;
      if (want > static_cast<long>(flat.size())) {
        meta.warnings.push_back("requested sample exceeds the available units; keeping all");
        want = static_cast<long>(flat.size());
      }
      std::vector<std::size_t> idx(flat.size());
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng = split_rng(seed, 0xF00D);
      for (auto f : choose(std::move(idx), static_cast<std::size_t>(want), rng)) {
        const auto [i, k] = flat[f];
        masks[i][k] = 1;
        if (clusters[i].y[k]) ++kept_cases[i];
        else ++kept_controls[i];
      }
      break;
    }

    case SamplingScheme::kCcWithinPropSize:
    case SamplingScheme::kCcWithinPropCases: {
      std::vector<double> weights(m);
      for (std::size_t i = 0; i < m; ++i) {
        weights[i] = scheme == SamplingScheme::kCcWithinPropSize
                         ? static_cast<double>(clusters[i].size())
                         : static_cast<double>(cases[i]);
      }
      const auto alloc = proportional_allocation(weights, budget);
      bool short_pool = false;
      for (std::size_t i = 0; i < m; ++i) {
        mark_all_cases(i);
        std::vector<std::size_t> pool;
        for (std::size_t k = 0; k < clusters[i].size(); ++k) {
          if (!clusters[i].y[k]) pool.push_back(k);
        }
        if (alloc[i] > static_cast<long>(pool.size())) short_pool = true;
        Rng rng = split_rng(seed, i);
        for (auto k : choose(std::move(pool), static_cast<std::size_t>(alloc[i]), rng)) {
          masks[i][k] = 1;
          ++kept_controls[i];
        }
      }
      if (short_pool) {
        meta.warnings.push_back(
            "some clusters had fewer controls than allocated; all of their controls were kept");
      }
      break;
    }
  }

  const double pooled_fraction =
      (total_cases + total_controls) > 0
          ? static_cast<double>(std::accumulate(kept_cases.begin(), kept_cases.end(), 0L) +
                                std::accumulate(kept_controls.begin(), kept_controls.end(), 0L)) /
                static_cast<double>(total_cases + total_controls)
          : 1.0;

  for (std::size_t i = 0; i < m; ++i) {
    double rho1, rho0;
    if (scheme == SamplingScheme::kRandom) {
      // Cases and controls are indistinguishable to the sampler; the pooled
      // fraction is the selection probability of either.
      rho1 = rho0 = pooled_fraction;
    } else {
      rho1 = cases[i] > 0 ? static_cast<double>(kept_cases[i]) / cases[i] : 1.0;
      rho0 = controls[i] > 0 ? static_cast<double>(kept_controls[i]) / controls[i] : 1.0;
    }
    meta.cluster_ids.push_back(clusters[i].id);
    meta.rho1.push_back(rho1);
    meta.rho0.push_back(rho0);
    out.clusters.push_back(keep(clusters[i], masks[i]));
  }
  return out;
}

}  // namespace racint
