#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "nsplat/compression.hpp"
#include "nsplat/likelihood.hpp"
#include "nsplat/rng.hpp"
#include "nsplat/run_record.hpp"

namespace nsplat {

// Zero likelihood is stored as the lowest finite double, the usual logZero
// convention. A -inf birth then always means "drawn from the full prior",
// while points drawn above a zero-likelihood plateau carry a finite birth
// that matches the plateau's death contour.
inline constexpr double kLogZero = std::numeric_limits<double>::lowest();

struct StopCondition {
  enum class Kind { fixed_iterations, remainder_fraction, all_live_equal };

  Kind kind = Kind::remainder_fraction;
  std::size_t iterations = 0;  // fixed_iterations: number of evictions
  double epsilon = 1e-3;       // remainder_fraction: stop when max L * X < eps * Z

  static StopCondition fixed(std::size_t n) { return {Kind::fixed_iterations, n, 0.0}; }
  static StopCondition remainder(double eps = 1e-3) { return {Kind::remainder_fraction, 0, eps}; }
  static StopCondition all_equal() { return {Kind::all_live_equal, 0, 0.0}; }
};

struct SamplerConfig {
  std::size_t n_live = 500;
  std::uint64_t seed = 0;
  StopCondition stop = StopCondition::remainder();
  std::uint64_t max_rejections_per_draw = 10'000'000;
};

// Throws DomainError for n_live < 2, eps outside (0,1) or a zero rejection cap.
void validate(const SamplerConfig& config);

struct LivePoint {
  std::vector<double> coords;
  double log_like = 0.0;
  double log_like_birth = 0.0;
};

// Live set and bookkeeping of a run in progress.
struct SamplerState {
  std::vector<LivePoint> live;  // insertion order
  std::vector<std::size_t> tie_set;  // indices into `live` sharing the minimum
  double log_like_star = -std::numeric_limits<double>::infinity();
  std::size_t iteration = 0;  // evictions so far
  double log_X = 0.0;
  double log_Z = -std::numeric_limits<double>::infinity();  // running estimate
};

// Line-oriented progress hook, called once per outer iteration.
using ProgressFn = std::function<void(const SamplerState&)>;

// Uniform draw over the unit cube with log_like > threshold (strict), by
// rejection from the full prior. Throws ContourExhausted after
// `max_rejections` failed proposals.
LivePoint sample_constrained(const LikelihoodModel& model, double threshold, Rng& rng,
                             std::uint64_t max_rejections);

struct SamplerRun {
  RunRecord record;                   // dead points, then final live points
  std::vector<std::size_t> n_live;    // size(P) at each eviction
  std::size_t n_final_live = 0;       // trailing points that were live at the end
  EvidenceResult evidence;            // geometric estimate from n_live
  std::uint64_t likelihood_calls = 0;
};

// One live point evicted per iteration (ties by insertion order), replaced
// immediately.
SamplerRun run_original(const LikelihoodModel& model, const SamplerConfig& config,
                        const ProgressFn& progress = {});

// All live points at the minimum contour evicted one by one without
// replacement, then replenished together above that contour.
SamplerRun run_modified(const LikelihoodModel& model, const SamplerConfig& config,
                        const ProgressFn& progress = {});

// L -> L + eps * l with a label l in (0,1) hashed from the coordinates and a
// salt drawn from `rng`, so equal coordinates always get equal labels.
std::shared_ptr<const LikelihoodModel> tie_break_wrap(std::shared_ptr<const LikelihoodModel> model,
                                                      double epsilon, Rng& rng);

}  // namespace nsplat
