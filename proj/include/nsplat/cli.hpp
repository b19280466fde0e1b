#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsplat/likelihood.hpp"
#include "nsplat/samplers.hpp"

namespace nsplat {

enum class Algorithm { original, modified };

// Ensemble of independent runs. Member k uses seed `seed + k`, from which the
// prior and simulation streams are derived as for any single run.
struct RepeatConfig {
  Algorithm algorithm = Algorithm::modified;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::size_t n_live = 500;
  StopCondition stop = StopCondition::remainder();
  std::size_t n_sim = 1000;                      // 0 skips the simulated sd
  std::optional<std::filesystem::path> out_dir;  // one chain + sidecar per member
};

struct RepeatMember {
  std::uint64_t seed = 0;
  double log_Z = 0.0;        // sampler estimate (geometric, dynamic counts)
  double log_Z_sd = 0.0;     // simulated, 0 when n_sim = 0
  double log_Z_naive = 0.0;  // constant-n resummation of the same chain
  std::size_t n_points = 0;
  std::size_t min_n_live = 0;
};

struct RepeatSummary {
  std::vector<RepeatMember> members;
  double mean = 0.0;
  double sd = 0.0;  // ensemble standard deviation, n - 1
  double mean_reported_sd = 0.0;
  double mean_naive_delta = 0.0;  // mean(log_Z_naive - log_Z)
};

using MemberFn = std::function<void(std::size_t index, const SamplerRun&)>;

RepeatSummary repeat_runs(const LikelihoodModel& model, const RepeatConfig& config, const MemberFn& on_member = {});

// Entry point of the `nsplat` executable. Data goes to `out`, diagnostics and
// errors to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nsplat
