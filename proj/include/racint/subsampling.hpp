#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "racint/stratified.hpp"

namespace racint {

enum class SamplingScheme {
  kFull,               // every unit
  kRandom,             // uniform over the pooled data, cases not favoured
  kCcPooled,           // all cases, controls uniform over the pooled controls
  kCcWithinPropSize,   // all cases, per-cluster controls proportional to cluster size
  kCcWithinPropCases,  // all cases, per-cluster controls proportional to its cases
};

const char* to_string(SamplingScheme s);
SamplingScheme scheme_from_string(const std::string& s);

struct SubsampleParams {
  /// Average number of controls per cluster; the total control budget is
  /// controls_per_cluster * (number of clusters). The random scheme keeps
  /// (all cases + budget) units in total.
  int controls_per_cluster = 20;
};

/// Sampling provenance. rho1/rho0 are the realized retained fractions of cases
/// and controls per cluster.
struct SubsampleMeta {
  SamplingScheme scheme = SamplingScheme::kFull;
  int controls_per_cluster = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> cluster_ids;
  std::vector<double> rho1;
  std::vector<double> rho0;
  std::vector<std::string> warnings;

  std::optional<std::size_t> index_of(const std::string& id) const;
};

struct Subsample {
  std::vector<ClusterSample> clusters;
  SubsampleMeta meta;
};

/// Draws a sub-sample. Units within each retained cluster keep their original
/// order. Reproducible bit-for-bit from (seed, scheme, params).
Subsample subsample(std::span<const ClusterSample> clusters, SamplingScheme scheme,
                    const SubsampleParams& params, std::uint64_t seed);

/// P(case | sampled) = rho1 p / (rho0 (1 - p) + rho1 p).
double adjusted_probability(double p, double rho1, double rho0);

/// log(rho1 / rho0) for one cluster. Throws lookup if the id is unknown.
double offset_for(const SubsampleMeta& meta, const std::string& cluster_id);

/// Offsets in cluster order.
std::vector<double> offsets(const SubsampleMeta& meta);

/// Splits `total` units across clusters proportionally to `weights` with the
/// largest-remainder rule (ties to the lower index).
std::vector<long> proportional_allocation(std::span<const double> weights, long total);

}  // namespace racint
