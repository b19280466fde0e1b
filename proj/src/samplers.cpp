#include "nsplat/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "nsplat/chain_io.hpp"
#include "nsplat/errors.hpp"
#include "nsplat/logsumexp.hpp"

namespace nsplat {

ContourExhausted::ContourExhausted(double level)
    : std::runtime_error("contour exhausted: no prior draw found with logL > " + format_real(level)),
      level_(level) {}

void validate(const SamplerConfig& config) {
  if (config.n_live < 2) throw DomainError("n_live must be >= 2");
  if (config.max_rejections_per_draw < 1) throw DomainError("max_rejections_per_draw must be >= 1");
  if (config.stop.kind == StopCondition::Kind::remainder_fraction &&
      !(config.stop.epsilon > 0.0 && config.stop.epsilon < 1.0)) {
    throw DomainError("remainder fraction must lie in (0, 1)");
  }
}

namespace {

double floored(double log_like) {
  if (std::isnan(log_like)) throw DomainError("likelihood returned NaN");
  return log_like == kNegInf ? kLogZero : log_like;
}

LivePoint draw_above(const LikelihoodModel& model, double threshold, Rng& rng, std::uint64_t max_rejections,
                     std::uint64_t& calls) {
  const std::size_t dim = model.dimension();
  LivePoint p;
  p.coords.resize(dim);
  p.log_like_birth = threshold;
  for (std::uint64_t attempt = 0; attempt < max_rejections; ++attempt) {
    for (double& x : p.coords) x = rng.uniform();
    ++calls;
    const double l = floored(model.log_like(p.coords));
    if (l > threshold) {
      p.log_like = l;
      return p;
    }
  }
  throw ContourExhausted(threshold);
}

Termination termination_of(StopCondition::Kind k) {
  switch (k) {
    case StopCondition::Kind::fixed_iterations: return Termination::max_iterations;
    case StopCondition::Kind::remainder_fraction: return Termination::evidence_remainder;
    case StopCondition::Kind::all_live_equal: return Termination::all_live_equal;
  }
  return Termination::evidence_remainder;
}

bool should_stop(const SamplerState& st, const StopCondition& stop) {
  switch (stop.kind) {
    case StopCondition::Kind::fixed_iterations:
      return st.iteration >= stop.iterations;
    case StopCondition::Kind::remainder_fraction: {
      double max_like = kNegInf;
      for (const LivePoint& p : st.live) max_like = std::max(max_like, p.log_like);
      return max_like + st.log_X < std::log(stop.epsilon) + st.log_Z;
    }
    case StopCondition::Kind::all_live_equal:
      return std::all_of(st.live.begin(), st.live.end(),
                         [&](const LivePoint& p) { return p.log_like == st.live.front().log_like; });
  }
  return true;
}

void evict(SamplerState& st, std::size_t index, SamplerRun& out) {
  const std::size_t size_p = st.live.size();
  LivePoint& p = st.live[index];
  const double log_w = st.log_X + log1mexp(-1.0 / static_cast<double>(size_p));
  st.log_Z = logaddexp(st.log_Z, p.log_like + log_w);
  st.log_X -= 1.0 / static_cast<double>(size_p);
  ++st.iteration;
  out.n_live.push_back(size_p);
  out.record.points.push_back({std::move(p.coords), p.log_like, p.log_like_birth});
  st.live.erase(st.live.begin() + static_cast<std::ptrdiff_t>(index));
}

SamplerRun run_sampler(const LikelihoodModel& model, const SamplerConfig& config, const ProgressFn& progress,
                       bool modified) {
  validate(config);
  Rng rng(config.seed, Stream::prior);
  SamplerRun out;
  out.record.meta = {config.n_live, config.seed, model.id(), termination_of(config.stop.kind), model.dimension()};

  SamplerState st;
  st.live.reserve(config.n_live);
  for (std::size_t k = 0; k < config.n_live; ++k) {
    st.live.push_back(draw_above(model, kNegInf, rng, config.max_rejections_per_draw, out.likelihood_calls));
  }

  while (!should_stop(st, config.stop)) {
    st.log_like_star = st.live.front().log_like;
    for (const LivePoint& p : st.live) st.log_like_star = std::min(st.log_like_star, p.log_like);
    st.tie_set.clear();
    for (std::size_t i = 0; i < st.live.size(); ++i) {
      if (st.live[i].log_like == st.log_like_star) {
        st.tie_set.push_back(i);
        if (!modified) break;
      }
    }
    if (progress) progress(st);

    const std::size_t q = st.tie_set.size();
    const bool whole_set = q == st.live.size();
    // Each erase shifts the later tie-set indices down by one.
    for (std::size_t k = 0; k < q; ++k) evict(st, st.tie_set[k] - k, out);

    bool exhausted = false;
    for (std::size_t k = 0; k < q; ++k) {
      try {
        st.live.push_back(
            draw_above(model, st.log_like_star, rng, config.max_rejections_per_draw, out.likelihood_calls));
      } catch (const ContourExhausted&) {
        if (!(modified && whole_set && k == 0)) throw;
        exhausted = true;
        break;
      }
    }
    if (exhausted) {
      out.record.meta.termination = Termination::all_live_equal;
      break;
    }
  }

  std::stable_sort(st.live.begin(), st.live.end(),
                   [](const LivePoint& a, const LivePoint& b) { return a.log_like < b.log_like; });
  out.n_final_live = st.live.size();
  while (!st.live.empty()) evict(st, 0, out);

  std::vector<double> log_like;
  log_like.reserve(out.record.points.size());
  for (const DeadPoint& p : out.record.points) log_like.push_back(p.log_like);
  out.evidence = evidence_quadrature(log_like, volume_sequence(out.n_live, CompressionMethod::geometric_sum));
  return out;
}

class TieBreakModel final : public LikelihoodModel {
 public:
  TieBreakModel(std::shared_ptr<const LikelihoodModel> base, double epsilon, std::uint64_t salt)
      : base_(std::move(base)), log_eps_(std::log(epsilon)), epsilon_(epsilon), salt_(salt) {}

  std::size_t dimension() const override { return base_->dimension(); }

  double log_like(std::span<const double> x) const override {
    std::uint64_t h = salt_;
    for (double xi : x) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(xi));
    const double label = static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
    return logaddexp(base_->log_like(x), log_eps_ + std::log(label));
  }

  std::string id() const override { return base_->id() + ";tiebreak=" + format_real(epsilon_); }

  // The labels add eps * E[l] = eps/2 to the evidence.
  std::optional<double> exact_log_z() const override {
    const auto z = base_->exact_log_z();
    if (!z) return std::nullopt;
    return logaddexp(*z, std::log(epsilon_ / 2.0));
  }

 private:
  std::shared_ptr<const LikelihoodModel> base_;
  double log_eps_;
  double epsilon_;
  std::uint64_t salt_;
};

}  // namespace

LivePoint sample_constrained(const LikelihoodModel& model, double threshold, Rng& rng,
                             std::uint64_t max_rejections) {
  std::uint64_t calls = 0;
  return draw_above(model, threshold, rng, max_rejections, calls);
}

SamplerRun run_original(const LikelihoodModel& model, const SamplerConfig& config, const ProgressFn& progress) {
  return run_sampler(model, config, progress, false);
}

SamplerRun run_modified(const LikelihoodModel& model, const SamplerConfig& config, const ProgressFn& progress) {
  return run_sampler(model, config, progress, true);
}

std::shared_ptr<const LikelihoodModel> tie_break_wrap(std::shared_ptr<const LikelihoodModel> model,
                                                      double epsilon, Rng& rng) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("tie-break epsilon must be positive");
  if (!model) throw DomainError("tie_break_wrap: null model");
  return std::make_shared<TieBreakModel>(std::move(model), epsilon, rng());
}

}  // namespace nsplat
