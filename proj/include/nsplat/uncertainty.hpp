#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nsplat/compression.hpp"

namespace nsplat {

struct ErrorEstimate {
  double log_Z_mean = 0.0;
  double log_Z_sd = 0.0;
  std::vector<double> samples;
  double H = 0.0;  // posterior-to-prior relative entropy, nats
};

enum class ShrinkageDraw {
  beta,        // t ~ Beta(n, 1) per step
  point_mass,  // t = exp(-1/n); reproduces the geometric estimate
};

struct SimulationOptions {
  ShrinkageDraw draw = ShrinkageDraw::beta;
  // Draw one Beta(n_base + 1 - q, q) compression per tie group instead of q
  // single-step draws. Same group-level law; kept for per-group studies.
  bool block_groups = false;
};

// Simulated log-evidence spread. Simulation k uses
// Rng(seed, Stream::simulation, k), so the ensemble does not depend on
// evaluation order.
ErrorEstimate simulate_logZ(std::span<const std::size_t> counts, std::span<const double> log_like,
                            std::size_t n_sim, std::uint64_t seed, const SimulationOptions& options = {});

// H = sum_i w_i (log_like_i - log_Z). Weights must sum to 1 within 1e-9.
double shannon_entropy(std::span<const double> weights, std::span<const double> log_like, double log_Z);

// sqrt(H / n_live). Only meaningful for constant live-point counts.
double classic_error(double H, std::size_t n_live);

}  // namespace nsplat
