#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nsplat/chain_io.hpp"
#include "nsplat/run_record.hpp"

namespace nsplat {

// Per-step shrinkage laws. For a step with n live points:
//   geometric_sum       log t = -1/n            (E[ln t])
//   arithmetic_product  t = n/(n+1)             (E[t])
//   unbiased_linear     t = (n-1)/n             (q steps from n give 1 - q/n)
//   naive_exponential   log t = -1/n            (same step law as geometric;
//                                                naive only at group level)
enum class CompressionMethod { naive_exponential, unbiased_linear, arithmetic_product, geometric_sum };

std::string_view to_string(CompressionMethod m);
CompressionMethod compression_method_from_string(std::string_view s);

// log t and log(1 - t) of a single step with `n` live points.
struct StepLog {
  double log_t;
  double log_one_minus_t;
};
StepLog step_log(std::size_t n, CompressionMethod method);

struct VolumeSequence {
  CompressionMethod method = CompressionMethod::geometric_sum;
  std::vector<std::size_t> n_live;
  std::vector<double> log_X;  // log X_i after step i; X_0 = 1 is implicit
  std::vector<double> log_w;  // log(X_{i-1} - X_i), the prior mass of step i

  std::size_t size() const { return n_live.size(); }
};

struct Diagnostics {
  std::size_t tie_group_count = 0;  // groups with more than one member
  std::size_t min_n_live = 0;
  double plateau_fraction_of_steps = 0.0;
};

struct EvidenceResult {
  double log_Z = 0.0;
  std::optional<double> log_Z_sd;  // filled in by the uncertainty estimators
  std::vector<double> weights;     // normalized posterior weight per step
  Diagnostics diagnostics;
};

// Level and multiplicity of live points remaining at termination.
struct FinalLive {
  double log_like;
  std::size_t count;
};

// Live count for every point: the k-th member (k = 1..q) of a group with
// base count n_base gets n_base - (k - 1).
std::vector<std::size_t> assign_nlive(std::span<const TieGroup> groups);

// Counts for ordinary constant-n NS on the same chain: every point gets
// n_live_target, except the trailing points, which run down to 1.
std::vector<std::size_t> naive_counts(std::size_t n_points, std::size_t n_live_target);

VolumeSequence volume_sequence(std::span<const std::size_t> counts,
                               CompressionMethod method = CompressionMethod::geometric_sum);

// Compression when q of n live points sit on one plateau:
//   naive e^{-q/n}, unbiased 1 - q/n, arithmetic 1 - q/(n+1),
//   geometric exp(-sum_{i=1..q} 1/(n-i+1)).
double compression_factor(std::size_t n, std::size_t q, CompressionMethod method);

// log Z = logsumexp_i(log_like_i + log_w_i). Remaining live points, when
// given, are evicted one by one without replacement (counts m, m-1, ..., 1)
// and continue the same quadrature.
EvidenceResult evidence_quadrature(std::span<const double> log_like, const VolumeSequence& volumes,
                                   std::span<const FinalLive> final_live = {});

// Everything resummation computes, kept for reports and weights tables.
struct Resummation {
  CanonicalRun ordered;
  std::vector<std::size_t> counts;
  VolumeSequence volumes;
  EvidenceResult evidence;
};

Resummation resum_detailed(const RunRecord& run, CompressionMethod method = CompressionMethod::geometric_sum,
                           const OrderOptions& order = {});
EvidenceResult resum(const RunRecord& run, CompressionMethod method = CompressionMethod::geometric_sum,
                     const OrderOptions& order = {});
EvidenceResult resum(const std::filesystem::path& chain, CompressionMethod method = CompressionMethod::geometric_sum,
                     const ReadOptions& read = {}, const OrderOptions& order = {});

// Ordinary constant-n resummation of the same chain (what unmodified NS
// reports), for comparison against the plateau-aware result.
EvidenceResult resum_naive(const RunRecord& run);

enum class PlateauPrior { flat, logarithmic };

struct CompressionMoments {
  double beta_mean;
  double beta_sd;
  double binom_mean;
  double binom_sd;
};

// Moments of the compression t after q of n live points are removed:
// beta branch Beta(n+1-q, q); binomial branch Beta(n+1-q, q+1) under a flat
// prior on t, Beta(n+1-q, q) under p(t) ~ 1/(1-t).
CompressionMoments binom_beta_moments(std::size_t n, std::size_t q, PlateauPrior prior);

}  // namespace nsplat
