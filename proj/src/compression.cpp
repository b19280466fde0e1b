#include "nsplat/compression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsplat/errors.hpp"
#include "nsplat/logsumexp.hpp"

namespace nsplat {

std::string_view to_string(CompressionMethod m) {
  switch (m) {
    case CompressionMethod::naive_exponential: return "naive";
    case CompressionMethod::unbiased_linear: return "unbiased";
    case CompressionMethod::arithmetic_product: return "arithmetic";
    case CompressionMethod::geometric_sum: return "geometric";
  }
  return "unknown";
}

CompressionMethod compression_method_from_string(std::string_view s) {
  if (s == "naive") return CompressionMethod::naive_exponential;
  if (s == "unbiased") return CompressionMethod::unbiased_linear;
  if (s == "arithmetic") return CompressionMethod::arithmetic_product;
  if (s == "geometric") return CompressionMethod::geometric_sum;
  throw DomainError("unknown compression method '" + std::string(s) + "'");
}

StepLog step_log(std::size_t n, CompressionMethod method) {
  if (n < 1) throw StructuralError("live-point count must be >= 1");
  const double nd = static_cast<double>(n);
  switch (method) {
    case CompressionMethod::naive_exponential:
    case CompressionMethod::geometric_sum: {
      const double log_t = -1.0 / nd;
      return {log_t, log1mexp(log_t)};
    }
    case CompressionMethod::arithmetic_product:
      return {-std::log1p(1.0 / nd), -std::log(nd + 1.0)};
    case CompressionMethod::unbiased_linear:
      return {n == 1 ? kNegInf : std::log1p(-1.0 / nd), -std::log(nd)};
  }
  return {0.0, kNegInf};
}

std::vector<std::size_t> assign_nlive(std::span<const TieGroup> groups) {
  std::size_t total = 0;
  for (const TieGroup& g : groups) total += g.size();
  std::vector<std::size_t> counts(total);
  for (const TieGroup& g : groups) {
    if (g.size() > g.n_base) {
      throw StructuralError("tie group of " + std::to_string(g.size()) + " points at a contour with only " +
                            std::to_string(g.n_base) + " live points");
    }
    for (std::size_t k = 0; k < g.size(); ++k) counts.at(g.members[k]) = g.n_base - k;
  }
  return counts;
}

std::vector<std::size_t> naive_counts(std::size_t n_points, std::size_t n_live_target) {
  std::vector<std::size_t> counts(n_points);
  for (std::size_t i = 0; i < n_points; ++i) counts[i] = std::min(n_live_target, n_points - i);
  return counts;
}

VolumeSequence volume_sequence(std::span<const std::size_t> counts, CompressionMethod method) {
  VolumeSequence v;
  v.method = method;
  v.n_live.assign(counts.begin(), counts.end());
  v.log_X.reserve(counts.size());
  v.log_w.reserve(counts.size());
  double log_x = 0.0;
  for (std::size_t n : counts) {
    const StepLog s = step_log(n, method);
    v.log_w.push_back(log_x + s.log_one_minus_t);
    log_x += s.log_t;
    v.log_X.push_back(log_x);
  }
  return v;
}

double compression_factor(std::size_t n, std::size_t q, CompressionMethod method) {
  if (q < 1 || q > n) {
    throw DomainError("compression_factor needs 1 <= q <= n (q=" + std::to_string(q) + ", n=" +
                      std::to_string(n) + ")");
  }
  const double nd = static_cast<double>(n);
  const double qd = static_cast<double>(q);
  switch (method) {
    case CompressionMethod::naive_exponential: return std::exp(-qd / nd);
    case CompressionMethod::unbiased_linear: return 1.0 - qd / nd;
    case CompressionMethod::arithmetic_product: return 1.0 - qd / (nd + 1.0);
    case CompressionMethod::geometric_sum: {
      double s = 0.0;
      for (std::size_t i = 1; i <= q; ++i) s += 1.0 / static_cast<double>(n - i + 1);
      return std::exp(-s);
    }
  }
  return 0.0;
}

namespace {

Diagnostics diagnose(std::span<const double> log_like, std::span<const std::size_t> counts) {
  Diagnostics d;
  if (counts.empty()) return d;
  d.min_n_live = *std::min_element(counts.begin(), counts.end());
  std::size_t plateau_steps = 0;
  std::size_t start = 0;
  while (start < log_like.size()) {
    std::size_t end = start + 1;
    while (end < log_like.size() && log_like[end] == log_like[start]) ++end;
    if (end - start > 1) {
      ++d.tie_group_count;
      plateau_steps += end - start;
    }
    start = end;
  }
  d.plateau_fraction_of_steps = static_cast<double>(plateau_steps) / static_cast<double>(log_like.size());
  return d;
}

EvidenceResult quadrature(std::span<const double> log_like, const VolumeSequence& v) {
  LogSumExp acc;
  for (std::size_t i = 0; i < log_like.size(); ++i) acc.add(log_like[i] + v.log_w[i]);

  EvidenceResult r;
  r.log_Z = acc.value();
  r.weights.assign(log_like.size(), 0.0);
  if (std::isfinite(r.log_Z)) {
    for (std::size_t i = 0; i < log_like.size(); ++i) r.weights[i] = std::exp(log_like[i] + v.log_w[i] - r.log_Z);
  }
  r.diagnostics = diagnose(log_like, v.n_live);
  return r;
}

}  // namespace

EvidenceResult evidence_quadrature(std::span<const double> log_like, const VolumeSequence& volumes,
                                   std::span<const FinalLive> final_live) {
  if (log_like.size() != volumes.size() || volumes.log_X.size() != volumes.size() ||
      volumes.log_w.size() != volumes.size()) {
    throw StructuralError("evidence_quadrature: " + std::to_string(log_like.size()) + " likelihoods for " +
                          std::to_string(volumes.size()) + " volume steps");
  }
  for (std::size_t i = 1; i < log_like.size(); ++i) {
    if (log_like[i] < log_like[i - 1]) throw StructuralError("evidence_quadrature: log_like must be non-decreasing");
  }
  if (final_live.empty()) return quadrature(log_like, volumes);

  std::vector<FinalLive> remaining(final_live.begin(), final_live.end());
  std::stable_sort(remaining.begin(), remaining.end(),
                   [](const FinalLive& a, const FinalLive& b) { return a.log_like < b.log_like; });
  std::size_t m = 0;
  for (const FinalLive& f : remaining) m += f.count;
  if (!remaining.empty() && !log_like.empty() && remaining.front().log_like < log_like.back()) {
    throw StructuralError("evidence_quadrature: final live point below the last dead contour");
  }

  std::vector<double> all_like(log_like.begin(), log_like.end());
  VolumeSequence ext = volumes;
  double log_x = ext.log_X.empty() ? 0.0 : ext.log_X.back();
  for (const FinalLive& f : remaining) {
    for (std::size_t k = 0; k < f.count; ++k, --m) {
      const StepLog s = step_log(m, ext.method);
      all_like.push_back(f.log_like);
      ext.n_live.push_back(m);
      ext.log_w.push_back(log_x + s.log_one_minus_t);
      log_x += s.log_t;
      ext.log_X.push_back(log_x);
    }
  }
  return quadrature(all_like, ext);
}

Resummation resum_detailed(const RunRecord& run, CompressionMethod method, const OrderOptions& order) {
  Resummation r;
  r.ordered = canonical_order(run, order);
  r.counts = assign_nlive(r.ordered.groups);
  r.volumes = volume_sequence(r.counts, method);
  std::vector<double> log_like;
  log_like.reserve(r.ordered.run.points.size());
  for (const DeadPoint& p : r.ordered.run.points) log_like.push_back(p.log_like);
  r.evidence = evidence_quadrature(log_like, r.volumes);
  return r;
}

EvidenceResult resum(const RunRecord& run, CompressionMethod method, const OrderOptions& order) {
  return resum_detailed(run, method, order).evidence;
}

EvidenceResult resum(const std::filesystem::path& chain, CompressionMethod method, const ReadOptions& read,
                     const OrderOptions& order) {
  return resum(load_run(chain, read), method, order);
}

EvidenceResult resum_naive(const RunRecord& run) {
  const CanonicalRun ordered = canonical_order(run);
  const auto counts = naive_counts(ordered.run.points.size(), run.meta.n_live_target);
  const VolumeSequence v = volume_sequence(counts, CompressionMethod::naive_exponential);
  std::vector<double> log_like;
  log_like.reserve(counts.size());
  for (const DeadPoint& p : ordered.run.points) log_like.push_back(p.log_like);
  return evidence_quadrature(log_like, v);
}

namespace {

std::pair<double, double> beta_moments(double a, double b) {
  const double s = a + b;
  return {a / s, std::sqrt(a * b / (s * s * (s + 1.0)))};
}

}  // namespace

CompressionMoments binom_beta_moments(std::size_t n, std::size_t q, PlateauPrior prior) {
  if (q < 1 || q > n) {
    throw DomainError("binom_beta_moments needs 1 <= q <= n (q=" + std::to_string(q) + ", n=" +
                      std::to_string(n) + ")");
  }
  const double a = static_cast<double>(n + 1 - q);
  const double qd = static_cast<double>(q);
  const auto [bm, bs] = beta_moments(a, qd);
  const auto [nm, ns] = prior == PlateauPrior::flat ? beta_moments(a, qd + 1.0) : beta_moments(a, qd);
  return {bm, bs, nm, ns};
}

}  // namespace nsplat
