#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nsplat {

// Enclosed prior volume at a log-likelihood level. `right` is X(level) =
// P(logL > level); `left` is the limit from below, P(logL >= level). The two
// differ exactly at plateau levels.
struct VolumeLimits {
  double left;
  double right;
};

// A log-likelihood over the unit hypercube with a uniform prior. Models must
// be deterministic and safe to call concurrently.
class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual double log_like(std::span<const double> x) const = 0;

  // Registry identifier including parameters, e.g. "wedding-cake:alpha=0.7,...".
  virtual std::string id() const = 0;

  virtual std::optional<double> exact_log_z() const { return std::nullopt; }

  // Analytic X(lambda); lambda is a log-likelihood level.
  virtual std::optional<VolumeLimits> x_of_lambda(double /*log_level*/) const { return std::nullopt; }

  // log of sup{lambda : X(lambda) > x}, for x in (0, 1).
  virtual std::optional<double> generalized_inverse(double /*x*/) const { return std::nullopt; }

  // Volumes where the generalized inverse jumps or has a kink. Quadrature
  // splits the unit interval there.
  virtual std::vector<double> inverse_breakpoints() const { return {}; }
};

}  // namespace nsplat
