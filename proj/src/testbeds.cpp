#include "nsplat/testbeds.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "nsplat/chain_io.hpp"
#include "nsplat/errors.hpp"
#include "nsplat/logsumexp.hpp"

namespace nsplat {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double log_normal_peak(double sigma) { return -std::log(sigma * std::sqrt(2.0 * std::numbers::pi)); }

// Length of [mu - d, mu + d] intersected with [0, 1].
double clipped_width(double d, double mu) { return std::min(mu + d, 1.0) - std::max(mu - d, 0.0); }

// Inverse of clipped_width in d for width in (0, 1).
double clipped_half_width(double width, double mu) {
  const double near = std::min(mu, 1.0 - mu);
  return width <= 2.0 * near ? width / 2.0 : width - near;
}

// Mass of N(mu, sigma) on [lo, hi].
double normal_mass(double lo, double hi, double mu, double sigma) {
  return 0.5 * (std::erfc((lo - mu) / (sigma * kSqrt2)) - std::erfc((hi - mu) / (sigma * kSqrt2)));
}

std::string param_id(std::string_view name, std::initializer_list<std::pair<const char*, double>> params) {
  std::string id(name);
  char sep = ':';
  for (const auto& [k, v] : params) {
    id += sep;
    id += k;
    id += '=';
    id += format_real(v);
    sep = ',';
  }
  return id;
}

}  // namespace

// ---------------------------------------------------------------------------

double plateau_gaussian_log_like(double x, const PlateauGaussianParams& params, bool with_plateau) {
  const double z = (x - params.mu) / params.sigma;
  const double log_g = -0.5 * z * z + log_normal_peak(params.sigma);
  return with_plateau ? std::max(log_g, std::log(params.plateau)) : log_g;
}

GaussianModel::GaussianModel(std::size_t dimension, double mu, double sigma)
    : dim_(dimension), mu_(mu), sigma_(sigma), log_norm_(log_normal_peak(sigma)) {
  if (dimension < 1) throw DomainError("gauss: dimension must be >= 1");
  if (!(sigma > 0.0)) throw DomainError("gauss: sigma must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("gauss: mu must lie in [0,1]");
}

double GaussianModel::log_like(std::span<const double> x) const {
  double s = 0.0;
  for (double xi : x) {
    const double z = (xi - mu_) / sigma_;
    s += z * z;
  }
  return -0.5 * s + static_cast<double>(dim_) * log_norm_;
}

std::string GaussianModel::id() const {
  return param_id("gauss", {{"D", static_cast<double>(dim_)}, {"mu", mu_}, {"sigma", sigma_}});
}

std::optional<double> GaussianModel::exact_log_z() const {
  return static_cast<double>(dim_) * std::log(normal_mass(0.0, 1.0, mu_, sigma_));
}

std::optional<VolumeLimits> GaussianModel::x_of_lambda(double log_level) const {
  if (dim_ != 1) return std::nullopt;
  if (log_level == kNegInf) return VolumeLimits{1.0, 1.0};
  if (log_level >= log_norm_) return VolumeLimits{0.0, 0.0};
  const double d = sigma_ * std::sqrt(2.0 * (log_norm_ - log_level));
  const double w = clipped_width(d, mu_);
  return VolumeLimits{w, w};
}

std::optional<double> GaussianModel::generalized_inverse(double x) const {
  if (dim_ != 1) return std::nullopt;
  const double d = clipped_half_width(x, mu_);
  return log_norm_ - d * d / (2.0 * sigma_ * sigma_);
}

std::vector<double> GaussianModel::inverse_breakpoints() const {
  const double kink = 2.0 * std::min(mu_, 1.0 - mu_);
  if (dim_ == 1 && kink > 0.0 && kink < 1.0) return {kink};
  return {};
}

// ---------------------------------------------------------------------------

PlateauGaussianModel::PlateauGaussianModel(const PlateauGaussianParams& params)
    : params_(params), profile_(1, params.mu, params.sigma) {
  if (!(params.plateau > 0.0) || !(std::log(params.plateau) < log_normal_peak(params.sigma))) {
    throw DomainError("plateau-gauss: plateau level must lie in (0, peak density)");
  }
}

double PlateauGaussianModel::log_like(std::span<const double> x) const {
  return plateau_gaussian_log_like(x[0], params_, true);
}

std::string PlateauGaussianModel::id() const {
  return param_id("plateau-gauss", {{"mu", params_.mu}, {"sigma", params_.sigma}, {"LP", params_.plateau}});
}

double PlateauGaussianModel::plateau_edge_volume() const {
  return profile_.x_of_lambda(std::log(params_.plateau))->right;
}

std::optional<double> PlateauGaussianModel::exact_log_z() const {
  const double log_p = std::log(params_.plateau);
  const double d = params_.sigma * std::sqrt(2.0 * (log_normal_peak(params_.sigma) - log_p));
  const double lo = std::max(params_.mu - d, 0.0);
  const double hi = std::min(params_.mu + d, 1.0);
  const double x_p = hi - lo;
  return std::log(normal_mass(lo, hi, params_.mu, params_.sigma) + params_.plateau * (1.0 - x_p));
}

std::optional<VolumeLimits> PlateauGaussianModel::x_of_lambda(double log_level) const {
  const double log_p = std::log(params_.plateau);
  if (log_level < log_p) return VolumeLimits{1.0, 1.0};
  if (log_level == log_p) return VolumeLimits{1.0, plateau_edge_volume()};
  return profile_.x_of_lambda(log_level);
}

std::optional<double> PlateauGaussianModel::generalized_inverse(double x) const {
  if (x >= plateau_edge_volume()) return std::log(params_.plateau);
  return profile_.generalized_inverse(x);
}

std::vector<double> PlateauGaussianModel::inverse_breakpoints() const {
  const double edge = plateau_edge_volume();
  std::vector<double> out;
  for (double b : profile_.inverse_breakpoints()) {
    if (b < edge) out.push_back(b);
  }
  out.push_back(edge);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check(const WeddingCakeParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw DomainError("wedding-cake: alpha must lie in (0,1)");
  if (!(p.sigma > 0.0)) throw DomainError("wedding-cake: sigma must be positive");
  if (p.dimension < 1) throw DomainError("wedding-cake: dimension must be >= 1");
}

double wedding_cake_log_term(long i, const WeddingCakeParams& p) {
  return wedding_cake_level(i, p) + static_cast<double>(i) * std::log(p.alpha) + std::log1p(-p.alpha);
}

}  // namespace

long wedding_cake_tier(double r, const WeddingCakeParams& params) {
  const double d = static_cast<double>(params.dimension);
  return static_cast<long>(std::floor(d * std::log(2.0 * r) / std::log(params.alpha)));
}

double wedding_cake_level(long tier, const WeddingCakeParams& params) {
  const double d = static_cast<double>(params.dimension);
  return -std::pow(params.alpha, 2.0 * static_cast<double>(tier) / d) / (8.0 * params.sigma * params.sigma);
}

double wedding_cake_log_like(std::span<const double> x, const WeddingCakeParams& params) {
  double r = 0.0;
  for (double xi : x) {
    if (!(xi >= 0.0 && xi <= 1.0)) throw DomainError("wedding-cake: coordinate outside the unit cube");
    r = std::max(r, std::abs(xi - 0.5));
  }
  if (r == 0.0) return 0.0;
  return wedding_cake_level(wedding_cake_tier(r, params), params);
}

double wedding_cake_log_Z(const WeddingCakeParams& params, double rel_tol, bool laplace_window) {
  check(params);
  if (!(rel_tol > 0.0)) throw DomainError("wedding_cake_log_Z: rel_tol must be positive");
  const double log_alpha = std::log(params.alpha);
  const double log_tol = std::log(rel_tol);
  constexpr long kMaxTerms = 10'000'000;

  if (!laplace_window) {
    LogSumExp acc;
    for (long k = 0; k < kMaxTerms; ++k) {
      acc.add(wedding_cake_log_term(k, params));
      // Every exponential factor is <= 1, so terms k+1.. sum to at most alpha^{k+1}.
      if (static_cast<double>(k + 1) * log_alpha <= log_tol + acc.value()) return acc.value();
    }
    throw ConvergenceError("wedding_cake_log_Z: series did not converge", 0.0);
  }

  // The log-term is concave in i with its maximum where alpha^{2i/D} = 4 D sigma^2,
  // and curvature of order (2/D) log^2 alpha.
  const double d = static_cast<double>(params.dimension);
  const double centre =
      std::max(0.0, 0.5 * d * std::log(4.0 * d * params.sigma * params.sigma) / log_alpha);
  double half = 3.0 * std::sqrt(d / 2.0) / -log_alpha;
  const double step_factor = -std::expm1(2.0 * log_alpha / d) / (8.0 * params.sigma * params.sigma);

  for (int widen = 0; widen < 64; ++widen, half *= 2.0) {
    const long lo = static_cast<long>(std::max(0.0, std::floor(centre - half)));
    const long hi = static_cast<long>(std::ceil(centre + half));
    LogSumExp acc;
    for (long i = lo; i <= hi; ++i) acc.add(wedding_cake_log_term(i, params));

    // Terms below the window increase towards it: at most lo * term(lo-1).
    const double left = lo > 0 ? std::log(static_cast<double>(lo)) + wedding_cake_log_term(lo - 1, params) : kNegInf;
    // Past the window the ratio term(i+1)/term(i) decreases in i.
    const double log_ratio =
        log_alpha + std::pow(params.alpha, 2.0 * static_cast<double>(hi + 1) / d) * step_factor;
    if (log_ratio >= 0.0) continue;
    const double right = wedding_cake_log_term(hi + 1, params) - log1mexp(log_ratio);
    if (logaddexp(left, right) <= log_tol + acc.value()) return acc.value();
  }
  throw ConvergenceError("wedding_cake_log_Z: Laplace window did not meet the tolerance", 0.0);
}

WeddingCakeModel::WeddingCakeModel(const WeddingCakeParams& params) : params_(params) {
  check(params);
  log_z_ = wedding_cake_log_Z(params, 1e-15);
}

double WeddingCakeModel::log_like(std::span<const double> x) const { return wedding_cake_log_like(x, params_); }

std::string WeddingCakeModel::id() const {
  return param_id("wedding-cake", {{"alpha", params_.alpha},
                                   {"sigma", params_.sigma},
                                   {"D", static_cast<double>(params_.dimension)}});
}

std::optional<double> WeddingCakeModel::exact_log_z() const { return log_z_; }

std::optional<VolumeLimits> WeddingCakeModel::x_of_lambda(double log_level) const {
  if (log_level >= 0.0) return VolumeLimits{0.0, 0.0};
  if (log_level < wedding_cake_level(0, params_)) return VolumeLimits{1.0, 1.0};

  // Smallest tier whose level exceeds log_level.
  const double d = static_cast<double>(params_.dimension);
  const double guess =
      0.5 * d * std::log(-8.0 * params_.sigma * params_.sigma * log_level) / std::log(params_.alpha);
  long k = static_cast<long>(std::clamp(std::ceil(guess), 0.0, 1e7));
  while (k > 0 && wedding_cake_level(k - 1, params_) > log_level) --k;
  while (wedding_cake_level(k, params_) <= log_level) ++k;

  const double right = std::pow(params_.alpha, static_cast<double>(k));
  const bool on_level = k > 0 && wedding_cake_level(k - 1, params_) == log_level;
  const double left = on_level ? std::pow(params_.alpha, static_cast<double>(k - 1)) : right;
  return VolumeLimits{left, right};
}

std::optional<double> WeddingCakeModel::generalized_inverse(double x) const {
  // Largest tier k with alpha^k > x.
  long k = static_cast<long>(std::max(0.0, std::floor(std::log(x) / std::log(params_.alpha))));
  while (std::pow(params_.alpha, static_cast<double>(k + 1)) > x) ++k;
  while (k > 0 && std::pow(params_.alpha, static_cast<double>(k)) <= x) --k;
  return wedding_cake_level(k, params_);
}

std::vector<double> WeddingCakeModel::inverse_breakpoints() const {
  std::vector<double> out;
  for (long i = 1;; ++i) {
    const double v = std::pow(params_.alpha, static_cast<double>(i));
    if (v < 1e-18) break;
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

class BaseScenarioModel final : public LikelihoodModel {
 public:
  BaseScenarioModel(double f, double s) : f_(f), s_(s) {}

  std::size_t dimension() const override { return 1; }

  double log_like(std::span<const double> x) const override {
    if (x[0] >= 1.0 - f_) return kNegInf;
    const double z = x[0] / s_;
    return -0.5 * z * z;
  }

  std::string id() const override { return param_id("scenario-base", {{"f", f_}, {"s", s_}}); }

  std::optional<double> exact_log_z() const override {
    return std::log(s_ * std::sqrt(std::numbers::pi / 2.0) * std::erf((1.0 - f_) / (s_ * kSqrt2)));
  }

  std::optional<VolumeLimits> x_of_lambda(double log_level) const override {
    if (log_level == kNegInf) return VolumeLimits{1.0, 1.0 - f_};
    if (log_level >= 0.0) return VolumeLimits{0.0, 0.0};
    const double w = std::min(s_ * std::sqrt(-2.0 * log_level), 1.0 - f_);
    return VolumeLimits{w, w};
  }

  std::optional<double> generalized_inverse(double x) const override {
    if (x >= 1.0 - f_) return kNegInf;
    return -0.5 * (x / s_) * (x / s_);
  }

  std::vector<double> inverse_breakpoints() const override { return {1.0 - f_}; }

 private:
  double f_;
  double s_;
};

class PeakScenarioModel final : public LikelihoodModel {
 public:
  PeakScenarioModel(double f, double s, double cap)
      : f_(f), s_(s), cap_(cap), log_a_(cap + 0.5 * (f / (2.0 * s)) * (f / (2.0 * s))) {}

  std::size_t dimension() const override { return 1; }

  double log_like(std::span<const double> x) const override {
    const double z = (x[0] - 0.5) / s_;
    return std::min(log_a_ - 0.5 * z * z, cap_);
  }

  std::string id() const override { return param_id("scenario-peak", {{"f", f_}, {"s", s_}, {"cap", cap_}}); }

  std::optional<double> exact_log_z() const override {
    const double c = s_ * kSqrt2;
    const double outside =
        2.0 * std::exp(log_a_) * s_ * std::sqrt(std::numbers::pi / 2.0) * (std::erfc(0.5 * f_ / c) - std::erfc(0.5 / c));
    return std::log(f_ * std::exp(cap_) + outside);
  }

  std::optional<VolumeLimits> x_of_lambda(double log_level) const override {
    if (log_level > cap_) return VolumeLimits{0.0, 0.0};
    if (log_level == cap_) return VolumeLimits{f_, 0.0};
    if (log_level == kNegInf) return VolumeLimits{1.0, 1.0};
    const double w = std::min(2.0 * s_ * std::sqrt(2.0 * (log_a_ - log_level)), 1.0);
    return VolumeLimits{w, w};
  }

  std::optional<double> generalized_inverse(double x) const override {
    if (x < f_) return cap_;
    const double z = 0.5 * x / s_;
    return log_a_ - 0.5 * z * z;
  }

  std::vector<double> inverse_breakpoints() const override { return {f_}; }

 private:
  double f_;
  double s_;
  double cap_;
  double log_a_;
};

}  // namespace

std::unique_ptr<LikelihoodModel> scenario_model(const ScenarioSpec& spec) {
  if (!(spec.f > 0.0 && spec.f < 1.0)) throw DomainError("scenario: plateau fraction f must lie in (0,1)");
  if (!(spec.width > 0.0) || !std::isfinite(spec.width)) throw DomainError("scenario: width must be positive");
  if (spec.kind == ScenarioSpec::Kind::base_plateau) return std::make_unique<BaseScenarioModel>(spec.f, spec.width);
  if (!std::isfinite(spec.cap_log_level)) throw DomainError("scenario: cap level must be finite");
  return std::make_unique<PeakScenarioModel>(spec.f, spec.width, spec.cap_log_level);
}

std::string ConstantModel::id() const {
  return param_id("constant", {{"logc", log_c_}, {"D", static_cast<double>(dim_)}});
}

std::optional<VolumeLimits> ConstantModel::x_of_lambda(double log_level) const {
  if (log_level < log_c_) return VolumeLimits{1.0, 1.0};
  if (log_level == log_c_) return VolumeLimits{1.0, 0.0};
  return VolumeLimits{0.0, 0.0};
}

// ---------------------------------------------------------------------------

VolumeLimits x_of_lambda(const LikelihoodModel& model, double log_level) {
  const auto v = model.x_of_lambda(log_level);
  if (!v) throw CapabilityError("model '" + model.id() + "' has no analytic X(lambda)");
  return *v;
}

double generalized_inverse(const LikelihoodModel& model, double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("generalized_inverse: X must lie in (0,1)");
  const auto v = model.generalized_inverse(x);
  if (!v) throw CapabilityError("model '" + model.id() + "' has no analytic generalized inverse");
  return *v;
}

double quadrature_evidence_oracle(const LikelihoodModel& model, double abs_tol) {
  if (!model.generalized_inverse(0.5)) {
    throw CapabilityError("model '" + model.id() + "' has no analytic generalized inverse");
  }
  std::vector<double> cuts{0.0};
  for (double b : model.inverse_breakpoints()) {
    if (b > 0.0 && b < 1.0) cuts.push_back(b);
  }
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double width = cuts[i + 1] - cuts[i];
    // Integrate over the unit interval: Boost compares an unscaled error
    // estimate against a scaled tolerance, which never settles on tiny pieces.
    auto piece = [&](double u) { return width * std::exp(*model.generalized_inverse(a + width * u)); };
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(piece, 0.0, 1.0, 15, 1e-13, &err);
    error += err;
  }
  if (error > abs_tol) throw ConvergenceError("quadrature_evidence_oracle: tolerance not reached", error);
  return total;
}

double base_plateau_bias(double f) {
  if (!(f >= 0.0 && f < 1.0)) throw DomainError("base_plateau_bias: f must lie in [0,1)");
  return -std::log1p(-f) - f;
}

double peak_plateau_deficit(double f, double max_log_like, double deficient_log_Z) {
  if (!(f >= 0.0 && f < 1.0)) throw DomainError("peak_plateau_deficit: f must lie in [0,1)");
  if (!std::isfinite(deficient_log_Z)) throw DomainError("peak_plateau_deficit: deficient log Z must be finite");
  if (f == 0.0) return 0.0;
  return logaddexp(deficient_log_Z, std::log(f) + max_log_like) - deficient_log_Z;
}

// ---------------------------------------------------------------------------

namespace {

class ParamSet {
 public:
  ParamSet(std::string_view name, std::string_view body) : name_(name) {
    while (!body.empty()) {
      const std::size_t comma = body.find(',');
      const std::string_view item = body.substr(0, comma);
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) throw DomainError("model '" + name_ + "': expected key=value, got '" + std::string(item) + "'");
      const std::string key(item.substr(0, eq));
      try {
        values_[key] = parse_real(item.substr(eq + 1), 0);
      } catch (const ParseError&) {
        throw DomainError("model '" + name_ + "': " + key + " is not a number");
      }
      body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    }
  }

  double take(const std::string& key, double fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const double v = it->second;
    values_.erase(it);
    return v;
  }

  std::size_t take_count(const std::string& key, std::size_t fallback) {
    const double v = take(key, static_cast<double>(fallback));
    if (!(v >= 1.0) || v != std::floor(v)) throw DomainError("model '" + name_ + "': " + key + " must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  void finish() const {
    if (!values_.empty()) throw DomainError("model '" + name_ + "': unknown parameter '" + values_.begin()->first + "'");
  }

 private:
  std::string name_;
  std::map<std::string, double> values_;
};

}  // namespace

std::unique_ptr<LikelihoodModel> make_model(std::string_view id) {
  const std::size_t colon = id.find(':');
  const std::string name(id.substr(0, colon));
  ParamSet p(name, colon == std::string_view::npos ? std::string_view{} : id.substr(colon + 1));
  std::unique_ptr<LikelihoodModel> model;

  if (name == "gauss") {
    const std::size_t d = p.take_count("D", 1);
    const double mu = p.take("mu", 0.5);
    model = std::make_unique<GaussianModel>(d, mu, p.take("sigma", 0.1));
  } else if (name == "plateau-gauss") {
    PlateauGaussianParams pg;
    pg.mu = p.take("mu", pg.mu);
    pg.sigma = p.take("sigma", pg.sigma);
    pg.plateau = p.take("LP", pg.plateau);
    model = std::make_unique<PlateauGaussianModel>(pg);
  } else if (name == "wedding-cake") {
    WeddingCakeParams wc;
    wc.alpha = p.take("alpha", wc.alpha);
    wc.sigma = p.take("sigma", wc.sigma);
    wc.dimension = p.take_count("D", wc.dimension);
    model = std::make_unique<WeddingCakeModel>(wc);
  } else if (name == "scenario-base") {
    const double f = p.take("f", 2.0 / 3.0);
    model = scenario_model(ScenarioSpec::base(f, p.take("s", 0.1)));
  } else if (name == "scenario-peak") {
    const double f = p.take("f", 0.161);
    const double s = p.take("s", 0.075);
    model = scenario_model(ScenarioSpec::peak(f, p.take("cap", -2.21), s));
  } else if (name == "constant") {
    const double log_c = p.take("logc", 0.0);
    model = std::make_unique<ConstantModel>(log_c, p.take_count("D", 1));
  } else {
    throw DomainError("unknown model '" + name + "'");
  }
  p.finish();
  return model;
}

}  // namespace nsplat
