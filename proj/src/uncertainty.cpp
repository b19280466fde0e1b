#include "nsplat/uncertainty.hpp"

#include <algorithm>
#include <boost/random/beta_distribution.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "nsplat/errors.hpp"
#include "nsplat/logsumexp.hpp"
#include "nsplat/rng.hpp"

namespace nsplat {

namespace {

// One simulated log Z with per-step draws. Mirrors evidence_quadrature's
// arithmetic so the point-mass seam is bit-identical to it.
double simulate_point_mass(std::span<const std::size_t> counts, std::span<const double> log_like) {
  LogSumExp acc;
  double log_x = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double log_t = -1.0 / static_cast<double>(counts[i]);
    const double log_w = log_x + log1mexp(log_t);
    acc.add(log_like[i] + log_w);
    log_x += log_t;
  }
  return acc.value();
}

// Beta(n, 1) draws, t = u^{1/n}. Accumulates in linear space relative to the
// largest likelihood, rescaling X before it underflows.
double simulate_beta_steps(std::span<const std::size_t> counts, std::span<const double> scaled_like,
                           double log_like_max, Rng& rng) {
  double x = 1.0;
  double log_offset = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double t = std::exp(std::log(rng.uniform_pos()) / static_cast<double>(counts[i]));
    acc += scaled_like[i] * x * (1.0 - t);
    x *= t;
    if (x < 1e-200) {
      // What is left is at most x * max(scaled_like) = x.
      if (acc > 1e100 * x) break;
      log_offset += std::log(x);
      acc /= x;
      x = 1.0;
    }
  }
  return log_like_max + log_offset + std::log(acc);
}

double simulate_blocks(std::span<const std::size_t> counts, std::span<const double> log_like, Rng& rng) {
  LogSumExp acc;
  double log_x = 0.0;
  std::size_t start = 0;
  while (start < counts.size()) {
    std::size_t end = start + 1;
    while (end < counts.size() && log_like[end] == log_like[start]) ++end;
    const double q = static_cast<double>(end - start);
    const double n_base = static_cast<double>(counts[start]);
    boost::random::beta_distribution<double> beta(n_base + 1.0 - q, q);
    const double t = beta(rng);
    const double log_t = std::log(t);
    acc.add(log_like[start] + log_x + std::log1p(-t));
    log_x += log_t;
    start = end;
  }
  return acc.value();
}

}  // namespace

ErrorEstimate simulate_logZ(std::span<const std::size_t> counts, std::span<const double> log_like,
                            std::size_t n_sim, std::uint64_t seed, const SimulationOptions& options) {
  if (n_sim < 2) throw DomainError("simulate_logZ needs n_sim >= 2");
  if (counts.size() != log_like.size()) {
    throw StructuralError("simulate_logZ: " + std::to_string(counts.size()) + " counts for " +
                          std::to_string(log_like.size()) + " likelihoods");
  }
  for (std::size_t n : counts) {
    if (n < 1) throw StructuralError("simulate_logZ: live-point count must be >= 1");
  }

  double log_like_max = kNegInf;
  for (double l : log_like) log_like_max = std::max(log_like_max, l);
  std::vector<double> scaled_like;
  if (options.draw == ShrinkageDraw::beta && !options.block_groups && std::isfinite(log_like_max)) {
    scaled_like.reserve(log_like.size());
    for (double l : log_like) scaled_like.push_back(std::exp(l - log_like_max));
  }

  ErrorEstimate est;
  est.samples.reserve(n_sim);
  for (std::size_t k = 0; k < n_sim; ++k) {
    Rng rng(seed, Stream::simulation, k);
    if (options.block_groups) {
      est.samples.push_back(simulate_blocks(counts, log_like, rng));
    } else if (options.draw == ShrinkageDraw::point_mass) {
      est.samples.push_back(simulate_point_mass(counts, log_like));
    } else if (!scaled_like.empty()) {
      est.samples.push_back(simulate_beta_steps(counts, scaled_like, log_like_max, rng));
    } else {
      est.samples.push_back(kNegInf);
    }
  }

  const double n = static_cast<double>(n_sim);
  est.log_Z_mean = std::accumulate(est.samples.begin(), est.samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : est.samples) ss += (s - est.log_Z_mean) * (s - est.log_Z_mean);
  est.log_Z_sd = std::isfinite(est.log_Z_mean) ? std::sqrt(ss / (n - 1.0)) : 0.0;

  const EvidenceResult point = evidence_quadrature(log_like, volume_sequence(counts));
  est.H = std::isfinite(point.log_Z) ? shannon_entropy(point.weights, log_like, point.log_Z) : 0.0;
  return est;
}

double shannon_entropy(std::span<const double> weights, std::span<const double> log_like, double log_Z) {
  if (weights.size() != log_like.size()) throw StructuralError("shannon_entropy: length mismatch");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("shannon_entropy: weights sum to " + std::to_string(total) + ", not 1");
  }
  double h = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw DomainError("shannon_entropy: negative weight");
    if (weights[i] > 0.0) h += weights[i] * (log_like[i] - log_Z);
  }
  return h;
}

double classic_error(double H, std::size_t n_live) {
  if (H < 0.0) throw DomainError("classic_error: negative entropy");
  if (n_live < 1) throw DomainError("classic_error: n_live must be >= 1");
  return std::sqrt(H / static_cast<double>(n_live));
}

}  // namespace nsplat
