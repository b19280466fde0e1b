#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "nsplat/likelihood.hpp"

namespace nsplat {

// ---------------------------------------------------------------------------
// Gaussian with optional plateau in the tails (1-D)
// ---------------------------------------------------------------------------

struct PlateauGaussianParams {
  double mu = 0.5;
  double sigma = 0.25;
  double plateau = 0.5;  // L_P, in likelihood (not log) units
};

// log max(g(x), L_P) with g the normal density; `with_plateau = false`
// gives log g(x).
double plateau_gaussian_log_like(double x, const PlateauGaussianParams& params, bool with_plateau = true);

// Product of normal densities over D coordinates.
class GaussianModel final : public LikelihoodModel {
 public:
  GaussianModel(std::size_t dimension, double mu, double sigma);

  std::size_t dimension() const override { return dim_; }
  double log_like(std::span<const double> x) const override;
  std::string id() const override;
  std::optional<double> exact_log_z() const override;
  // Analytic volumes are available for D = 1 only.
  std::optional<VolumeLimits> x_of_lambda(double log_level) const override;
  std::optional<double> generalized_inverse(double x) const override;
  std::vector<double> inverse_breakpoints() const override;

 private:
  std::size_t dim_;
  double mu_;
  double sigma_;
  double log_norm_;
};

class PlateauGaussianModel final : public LikelihoodModel {
 public:
  explicit PlateauGaussianModel(const PlateauGaussianParams& params = {});

  std::size_t dimension() const override { return 1; }
  double log_like(std::span<const double> x) const override;
  std::string id() const override;
  std::optional<double> exact_log_z() const override;
  std::optional<VolumeLimits> x_of_lambda(double log_level) const override;
  std::optional<double> generalized_inverse(double x) const override;
  std::vector<double> inverse_breakpoints() const override;

  // Prior volume strictly above the plateau, X(L_P).
  double plateau_edge_volume() const;

  const PlateauGaussianParams& params() const { return params_; }

 private:
  PlateauGaussianParams params_;
  GaussianModel profile_;
};

// ---------------------------------------------------------------------------
// Wedding cake
// ---------------------------------------------------------------------------

struct WeddingCakeParams {
  double alpha = 0.7;
  double sigma = 0.2;
  std::size_t dimension = 2;
};

// Tier index floor(D log_alpha(2r)) for r = |x - 1/2|_inf > 0.
long wedding_cake_tier(double r, const WeddingCakeParams& params);

// Log-likelihood of tier i: -alpha^{2i/D} / (8 sigma^2).
double wedding_cake_level(long tier, const WeddingCakeParams& params);

// Throws DomainError if x leaves the unit cube. Returns 0 at the centre.
double wedding_cake_log_like(std::span<const double> x, const WeddingCakeParams& params);

// log sum_i exp(-alpha^{2i/D}/(8 sigma^2)) alpha^i (1 - alpha), summed until
// the remainder bound drops below rel_tol of the partial sum. With
// `laplace_window`, only terms around the peak index are summed, widening
// the window until the bounds on both omitted tails meet rel_tol.
double wedding_cake_log_Z(const WeddingCakeParams& params, double rel_tol = 1e-15, bool laplace_window = false);

class WeddingCakeModel final : public LikelihoodModel {
 public:
  explicit WeddingCakeModel(const WeddingCakeParams& params = {});

  std::size_t dimension() const override { return params_.dimension; }
  double log_like(std::span<const double> x) const override;
  std::string id() const override;
  std::optional<double> exact_log_z() const override;
  std::optional<VolumeLimits> x_of_lambda(double log_level) const override;
  std::optional<double> generalized_inverse(double x) const override;
  std::vector<double> inverse_breakpoints() const override;

  const WeddingCakeParams& params() const { return params_; }

 private:
  WeddingCakeParams params_;
  double log_z_;
};

// ---------------------------------------------------------------------------
// Plateau scenarios
// ---------------------------------------------------------------------------

struct ScenarioSpec {
  enum class Kind { base_plateau, peak_plateau };

  Kind kind = Kind::base_plateau;
  double f = 2.0 / 3.0;        // prior fraction of the plateau
  double width = 0.1;          // profile width s
  double cap_log_level = -2.21;  // peak kind only: log L on the plateau

  static ScenarioSpec base(double f = 2.0 / 3.0, double width = 0.1) {
    return {Kind::base_plateau, f, width, 0.0};
  }
  static ScenarioSpec peak(double f = 0.161, double cap_log_level = -2.21, double width = 0.075) {
    return {Kind::peak_plateau, f, width, cap_log_level};
  }
};

// base:  L = exp(-x^2 / 2s^2) on [0, 1-f), zero on [1-f, 1].
// peak:  L = min(A exp(-(x-1/2)^2 / 2s^2), L_cap), A chosen so the capped
//        region has prior mass f.
// Throws DomainError for f outside (0,1), non-positive width or a
// non-finite cap.
std::unique_ptr<LikelihoodModel> scenario_model(const ScenarioSpec& spec);

// Likelihood c everywhere.
class ConstantModel final : public LikelihoodModel {
 public:
  explicit ConstantModel(double log_c, std::size_t dimension = 1) : log_c_(log_c), dim_(dimension) {}

  std::size_t dimension() const override { return dim_; }
  double log_like(std::span<const double>) const override { return log_c_; }
  std::string id() const override;
  std::optional<double> exact_log_z() const override { return log_c_; }
  std::optional<VolumeLimits> x_of_lambda(double log_level) const override;
  std::optional<double> generalized_inverse(double) const override { return log_c_; }

 private:
  double log_c_;
  std::size_t dim_;
};

// ---------------------------------------------------------------------------
// Analytic results
// ---------------------------------------------------------------------------

// Throw CapabilityError when the model has no analytic form.
VolumeLimits x_of_lambda(const LikelihoodModel& model, double log_level);
double generalized_inverse(const LikelihoodModel& model, double x);

// Z = integral_0^1 exp(generalized_inverse(X)) dX by adaptive Gauss-Kronrod,
// split at the model's breakpoints. Returns Z (not log Z). Throws
// ConvergenceError when the error estimate exceeds abs_tol.
double quadrature_evidence_oracle(const LikelihoodModel& model, double abs_tol = 1e-10);

// Overestimate of log Z by constant-n NS when a zero-likelihood plateau
// fills a fraction f of the prior: -log(1-f) - f.
double base_plateau_bias(double f);

// log(Z + f max L) - log Z for a run that drops a peak plateau of prior
// mass f, with Z the evidence it did account for.
double peak_plateau_deficit(double f, double max_log_like, double deficient_log_Z);

// ---------------------------------------------------------------------------
// Registry: "name[:key=value[,key=value...]]"
//
//   gauss           D=1, mu=0.5, sigma=0.1
//   plateau-gauss   mu=0.5, sigma=0.25, LP=0.5
//   wedding-cake    alpha=0.7, sigma=0.2, D=2
//   scenario-base   f=0.666..., s=0.1
//   scenario-peak   f=0.161, s=0.075, cap=-2.21
//   constant        logc=0, D=1
// ---------------------------------------------------------------------------

std::unique_ptr<LikelihoodModel> make_model(std::string_view id);

}  // namespace nsplat
