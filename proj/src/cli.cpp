#include "nsplat/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "nsplat/chain_io.hpp"
#include "nsplat/compression.hpp"
#include "nsplat/errors.hpp"
#include "nsplat/logsumexp.hpp"
#include "nsplat/testbeds.hpp"
#include "nsplat/uncertainty.hpp"

namespace nsplat {

namespace {

std::vector<double> deaths(const RunRecord& run) {
  std::vector<double> out;
  out.reserve(run.points.size());
  for (const DeadPoint& p : run.points) out.push_back(p.log_like);
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

RepeatSummary repeat_runs(const LikelihoodModel& model, const RepeatConfig& config, const MemberFn& on_member) {
  if (config.runs < 1) throw DomainError("repeat: runs must be >= 1");
  if (config.out_dir) std::filesystem::create_directories(*config.out_dir);

  RepeatSummary summary;
  summary.members.reserve(config.runs);
  for (std::size_t k = 0; k < config.runs; ++k) {
    SamplerConfig sc;
    sc.n_live = config.n_live;
    sc.seed = config.seed + k;
    sc.stop = config.stop;
    const SamplerRun run = config.algorithm == Algorithm::original ? run_original(model, sc) : run_modified(model, sc);

    RepeatMember m;
    m.seed = sc.seed;
    m.log_Z = run.evidence.log_Z;
    m.log_Z_naive = resum_naive(run.record).log_Z;
    m.n_points = run.record.points.size();
    m.min_n_live = run.evidence.diagnostics.min_n_live;
    if (config.n_sim > 0) m.log_Z_sd = simulate_logZ(run.n_live, deaths(run.record), config.n_sim, sc.seed).log_Z_sd;
    if (config.out_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%05zu.csv", k);
      save_run(run.record, *config.out_dir / name);
    }
    if (on_member) on_member(k, run);
    summary.members.push_back(m);
  }

  std::vector<double> z, sd, delta;
  for (const RepeatMember& m : summary.members) {
    z.push_back(m.log_Z);
    sd.push_back(m.log_Z_sd);
    delta.push_back(m.log_Z_naive - m.log_Z);
  }
  summary.mean = mean_of(z);
  summary.sd = sd_of(z);
  summary.mean_reported_sd = mean_of(sd);
  summary.mean_naive_delta = mean_of(delta);
  return summary;
}

namespace {

struct Report {
  std::ostream& out;

  void operator()(const std::string& key, double v) const { out << key << '=' << format_real(v) << '\n'; }
  void operator()(const std::string& key, std::size_t v) const { out << key << '=' << v << '\n'; }
  void operator()(const std::string& key, std::uint64_t v, int) const { out << key << '=' << v << '\n'; }
  void operator()(const std::string& key, std::string_view v) const { out << key << '=' << v << '\n'; }

  void diagnostics(const Diagnostics& d) const {
    (*this)("tie_group_count", d.tie_group_count);
    (*this)("min_n_live", d.min_n_live);
    (*this)("plateau_fraction_of_steps", d.plateau_fraction_of_steps);
  }
};

// Model selection shared by `run`, `repeat` and `figdata`.
struct ModelFlags {
  std::string name = "gauss";
  std::map<std::string, double> params;

  void add(CLI::App& app) {
    app.add_option("--model", name, "Model name or full id (name:key=value,...)");
    for (const char* key : {"alpha", "sigma", "D", "mu", "f", "s", "cap", "LP", "logc"}) {
      app.add_option_function<double>(std::string("--") + key, [this, key](double v) { params[key] = v; },
                                      std::string("Model parameter ") + key);
    }
  }

  std::string id() const {
    std::string id = name;
    char sep = id.find(':') == std::string::npos ? ':' : ',';
    for (const auto& [k, v] : params) {
      id += sep;
      id += k + "=" + format_real(v);
      sep = ',';
    }
    return id;
  }
};

struct StopFlags {
  std::string kind = "remainder";
  double epsilon = 1e-3;
  std::size_t iterations = 0;

  void add(CLI::App& app) {
    app.add_option("--stop", kind, "remainder | fixed | all-equal")
        ->check(CLI::IsMember({"remainder", "fixed", "all-equal"}));
    app.add_option("--epsilon", epsilon, "Remainder fraction for --stop remainder");
    app.add_option("--iterations", iterations, "Evictions for --stop fixed");
  }

  StopCondition get() const {
    if (kind == "fixed") return StopCondition::fixed(iterations);
    if (kind == "all-equal") return StopCondition::all_equal();
    return StopCondition::remainder(epsilon);
  }
};

Algorithm algorithm_from(const std::string& s) { return s == "original" ? Algorithm::original : Algorithm::modified; }

void write_weights(const std::filesystem::path& path, const std::vector<double>& log_like, const VolumeSequence& v,
                   const EvidenceResult& e) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << "index,logL,n_live,logX,weight\n";
  for (std::size_t i = 0; i < log_like.size(); ++i) {
    f << i << ',' << format_real(log_like[i]) << ',' << v.n_live[i] << ',' << format_real(v.log_X[i]) << ','
      << format_real(e.weights[i]) << '\n';
  }
  if (!f) throw std::runtime_error("error writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------

struct RunCmd {
  ModelFlags model;
  StopFlags stop;
  std::string algorithm = "modified";
  std::size_t n_live = 500;
  std::uint64_t seed = 0;
  std::uint64_t max_rejections = 10'000'000;
  std::string out_path;
  std::string weights_path;
  double tie_break = 0.0;
  std::size_t n_sim = 1000;
  std::size_t progress_every = 0;
  bool no_trace = false;

  void add(CLI::App& app) {
    model.add(app);
    stop.add(app);
    app.add_option("--algorithm", algorithm, "original | modified")->check(CLI::IsMember({"original", "modified"}));
    app.add_option("--n-live", n_live, "Number of live points");
    app.add_option("--seed", seed, "Run seed");
    app.add_option("--max-rejections", max_rejections, "Rejection cap per constrained draw");
    app.add_option("--out", out_path, "Chain file to write (metadata goes to <out>.meta)");
    app.add_option("--weights", weights_path, "Per-point weights table to write");
    app.add_option("--tie-break", tie_break, "Perturb the likelihood by eps * label before sampling");
    app.add_option("--n-sim", n_sim, "Simulations for the reported sd (0 skips)");
    app.add_option("--progress", progress_every, "Progress line to stderr every N iterations");
    app.add_flag("--no-trace", no_trace, "Omit the live-count trace");
  }

  int exec(std::ostream& out, std::ostream& err) const {
    std::shared_ptr<const LikelihoodModel> m = make_model(model.id());
    if (tie_break != 0.0) {
      Rng label_rng(seed, Stream::tie_break);
      m = tie_break_wrap(m, tie_break, label_rng);
    }
    SamplerConfig cfg;
    cfg.n_live = n_live;
    cfg.seed = seed;
    cfg.stop = stop.get();
    cfg.max_rejections_per_draw = max_rejections;

    ProgressFn progress;
    if (progress_every > 0) {
      progress = [&err, every = progress_every, n = std::size_t{0}](const SamplerState& st) mutable {
        if (n++ % every == 0) {
          err << "iteration=" << st.iteration << " L*=" << format_real(st.log_like_star)
              << " size(P)=" << st.live.size() << " log_Z=" << format_real(st.log_Z) << '\n';
        }
      };
    }
    const Algorithm alg = algorithm_from(algorithm);
    const SamplerRun run = alg == Algorithm::original ? run_original(*m, cfg, progress) : run_modified(*m, cfg, progress);

    if (!out_path.empty()) save_run(run.record, out_path);
    const std::vector<double> log_like = deaths(run.record);
    if (!weights_path.empty()) {
      write_weights(weights_path, log_like, volume_sequence(run.n_live), run.evidence);
    }

    Report r{out};
    r("model", std::string_view(m->id()));
    r("algorithm", std::string_view(algorithm));
    r("seed", seed, 0);
    r("n_live", n_live);
    r("termination", to_string(run.record.meta.termination));
    r("n_points", run.record.points.size());
    r("likelihood_calls", run.likelihood_calls, 0);
    r("log_Z", run.evidence.log_Z);
    if (n_sim > 0) {
      const ErrorEstimate e = simulate_logZ(run.n_live, log_like, n_sim, seed);
      r("log_Z_sd", e.log_Z_sd);
      r("H", e.H);
      r("classic_error", classic_error(std::max(e.H, 0.0), n_live));
    }
    if (const auto exact = m->exact_log_z()) r("exact_log_Z", *exact);
    r.diagnostics(run.evidence.diagnostics);
    if (!out_path.empty()) r("chain", std::string_view(out_path));

    if (alg == Algorithm::modified && !no_trace) {
      out << "\n# live-count trace\niteration,n_live,logL\n";
      for (std::size_t i = 0; i < run.n_live.size(); ++i) {
        out << i << ',' << run.n_live[i] << ',' << format_real(log_like[i]) << '\n';
      }
    }
    return 0;
  }
};

struct ChainFlags {
  std::string chain;
  bool assume_prior = false;
  double merge_tol = 0.0;

  void add(CLI::App& app) {
    app.add_option("chain", chain, "Chain file (metadata read from <chain>.meta)")->required();
    app.add_flag("--assume-prior-births", assume_prior, "Accept death-only chains, taking every birth as -inf");
    app.add_option("--merge-tol", merge_tol, "Merge deaths closer than this into one tie group (default exact)");
  }

  RunRecord load() const {
    ReadOptions ro;
    ro.births = assume_prior ? BirthPolicy::assume_prior : BirthPolicy::required;
    RunRecord run = load_run(chain, ro);
    if (run.points.empty()) throw StructuralError("chain '" + chain + "' has no points");
    return run;
  }

  OrderOptions order() const { return OrderOptions{merge_tol}; }
};

struct ResumCmd {
  ChainFlags chain;
  std::string method = "geometric";
  bool compare_naive = false;
  std::string weights_path;
  std::size_t n_sim = 1000;
  std::optional<std::uint64_t> seed;

  void add(CLI::App& app) {
    chain.add(app);
    app.add_option("--method", method, "naive | unbiased | arithmetic | geometric")
        ->check(CLI::IsMember({"naive", "unbiased", "arithmetic", "geometric"}));
    app.add_flag("--compare-naive", compare_naive, "Also report the constant-n estimate and the difference");
    app.add_option("--weights", weights_path, "Per-point weights table to write");
    app.add_option("--n-sim", n_sim, "Simulations for the reported sd (0 skips)");
    app.add_option("--seed", seed, "Simulation seed (default: the run seed)");
  }

  int exec(std::ostream& out, std::ostream&) const {
    const RunRecord run = chain.load();
    const Resummation res = resum_detailed(run, compression_method_from_string(method), chain.order());
    const std::vector<double> log_like = deaths(res.ordered.run);
    if (!weights_path.empty()) write_weights(weights_path, log_like, res.volumes, res.evidence);

    Report r{out};
    r("chain", std::string_view(chain.chain));
    r("model", std::string_view(run.meta.likelihood_id));
    r("method", std::string_view(method));
    r("n_points", run.points.size());
    r("log_Z", res.evidence.log_Z);
    if (n_sim > 0) {
      const ErrorEstimate e = simulate_logZ(res.counts, log_like, n_sim, seed.value_or(run.meta.seed));
      r("log_Z_sd", e.log_Z_sd);
      r("H", e.H);
    }
    r.diagnostics(res.evidence.diagnostics);
    if (compare_naive) {
      const double naive = resum_naive(run).log_Z;
      r("log_Z_naive", naive);
      r("delta_naive", naive - res.evidence.log_Z);
    }
    return 0;
  }
};

struct ErrorSimCmd {
  ChainFlags chain;
  std::size_t n_sim = 1000;
  std::optional<std::uint64_t> seed;
  bool block_groups = false;
  bool point_mass = false;
  std::string samples_path;

  void add(CLI::App& app) {
    chain.add(app);
    app.add_option("--n-sim", n_sim, "Number of simulated compression sequences");
    app.add_option("--seed", seed, "Simulation seed (default: the run seed)");
    app.add_flag("--block-groups", block_groups, "One Beta(n+1-q, q) draw per tie group");
    app.add_flag("--point-mass", point_mass, "Replace each draw by exp(-1/n)");
    app.add_option("--samples", samples_path, "Write the simulated log Z values, one per line");
  }

  int exec(std::ostream& out, std::ostream&) const {
    const RunRecord run = chain.load();
    const Resummation res = resum_detailed(run, CompressionMethod::geometric_sum, chain.order());
    const std::vector<double> log_like = deaths(res.ordered.run);
    SimulationOptions opts;
    opts.block_groups = block_groups;
    opts.draw = point_mass ? ShrinkageDraw::point_mass : ShrinkageDraw::beta;
    const ErrorEstimate e = simulate_logZ(res.counts, log_like, n_sim, seed.value_or(run.meta.seed), opts);
    if (!samples_path.empty()) {
      std::ofstream f(samples_path);
      if (!f) throw std::runtime_error("cannot open '" + samples_path + "' for writing");
      for (double s : e.samples) f << format_real(s) << '\n';
    }

    Report r{out};
    r("chain", std::string_view(chain.chain));
    r("n_sim", n_sim);
    r("log_Z", res.evidence.log_Z);
    r("log_Z_mean", e.log_Z_mean);
    r("log_Z_sd", e.log_Z_sd);
    r("H", e.H);
    r("classic_error", classic_error(std::max(e.H, 0.0), run.meta.n_live_target));
    r("min_n_live", res.evidence.diagnostics.min_n_live);
    return 0;
  }
};

struct SeriesCmd {
  WeddingCakeParams params;
  double rel_tol = 1e-15;

  void add(CLI::App& app) {
    app.add_option("--alpha", params.alpha, "Tier volume ratio");
    app.add_option("--sigma", params.sigma, "Height profile width");
    app.add_option("--D", params.dimension, "Dimension");
    app.add_option("--rel-tol", rel_tol, "Relative tolerance of the truncated sum");
  }

  int exec(std::ostream& out, std::ostream&) const {
    const WeddingCakeModel model(params);
    Report r{out};
    r("model", std::string_view(model.id()));
    r("rel_tol", rel_tol);
    r("log_Z", wedding_cake_log_Z(params, rel_tol));
    r("log_Z_window", wedding_cake_log_Z(params, rel_tol, true));
    return 0;
  }
};

struct RepeatCmd {
  ModelFlags model;
  StopFlags stop;
  std::string algorithm = "modified";
  std::size_t runs = 100;
  std::size_t n_live = 500;
  std::uint64_t seed = 0;
  std::size_t n_sim = 1000;
  std::string out_dir;
  bool progress = false;

  void add(CLI::App& app) {
    model.add(app);
    stop.add(app);
    app.add_option("--algorithm", algorithm, "original | modified")->check(CLI::IsMember({"original", "modified"}));
    app.add_option("--runs", runs, "Ensemble size");
    app.add_option("--n-live", n_live, "Number of live points");
    app.add_option("--seed", seed, "Base seed; member k uses seed + k");
    app.add_option("--n-sim", n_sim, "Simulations per member for the reported sd (0 skips)");
    app.add_option("--out-dir", out_dir, "Directory for per-member chain files");
    app.add_flag("--progress", progress, "One line per finished member to stderr");
  }

  RepeatConfig config() const {
    RepeatConfig c;
    c.algorithm = algorithm_from(algorithm);
    c.runs = runs;
    c.seed = seed;
    c.n_live = n_live;
    c.stop = stop.get();
    c.n_sim = n_sim;
    if (!out_dir.empty()) c.out_dir = out_dir;
    return c;
  }

  int exec(std::ostream& out, std::ostream& err) const {
    const auto m = make_model(model.id());
    MemberFn on_member;
    if (progress) {
      on_member = [&](std::size_t k, const SamplerRun& run) {
        err << "member " << k + 1 << '/' << runs << " log_Z=" << format_real(run.evidence.log_Z) << '\n';
      };
    }
    const RepeatSummary s = repeat_runs(*m, config(), on_member);
    print(out, *m, s);
    return 0;
  }

  void print(std::ostream& out, const LikelihoodModel& m, const RepeatSummary& s) const {
    out << "run,seed,log_Z,log_Z_sd,log_Z_naive,n_points,min_n_live\n";
    for (std::size_t k = 0; k < s.members.size(); ++k) {
      const RepeatMember& mem = s.members[k];
      out << k << ',' << mem.seed << ',' << format_real(mem.log_Z) << ',' << format_real(mem.log_Z_sd) << ','
          << format_real(mem.log_Z_naive) << ',' << mem.n_points << ',' << mem.min_n_live << '\n';
    }
    out << '\n';
    Report r{out};
    r("model", std::string_view(m.id()));
    r("algorithm", std::string_view(algorithm));
    r("runs", s.members.size());
    r("mean_log_Z", s.mean);
    r("sd_log_Z", s.sd);
    r("stderr_mean", s.sd / std::sqrt(static_cast<double>(s.members.size())));
    if (n_sim > 0) r("mean_reported_sd", s.mean_reported_sd);
    r("mean_naive_delta", s.mean_naive_delta);
    if (const auto exact = m.exact_log_z()) {
      r("exact_log_Z", *exact);
      r("bias", s.mean - *exact);
      if (n_sim > 0) {
        std::size_t inside = 0;
        for (const RepeatMember& mem : s.members) inside += std::abs(mem.log_Z - *exact) <= mem.log_Z_sd;
        r("coverage_1sd", static_cast<double>(inside) / static_cast<double>(s.members.size()));
      }
    }
  }
};

// ---------------------------------------------------------------------------

struct FigdataCmd {
  int figure = 0;
  std::size_t n = 100;
  std::string prior = "flat";
  std::size_t runs = 1000;
  std::size_t n_live = 0;  // 0: the figure's default
  std::uint64_t seed = 0;
  std::size_t grid = 101;
  std::size_t n_sim = 1000;

  void add(CLI::App& app) {
    app.add_option("--figure", figure, "Figure number 1-5")->required();
    app.add_option("--n", n, "Live points for figures 2 and 3");
    app.add_option("--prior", prior, "Figure 3 binomial prior: flat | logarithmic")
        ->check(CLI::IsMember({"flat", "logarithmic"}));
    app.add_option("--runs", runs, "Figure 4 ensemble size");
    app.add_option("--n-live", n_live, "Live points for figures 4 (default 500) and 5 (default 100)");
    app.add_option("--seed", seed, "Seed for figures 4 and 5");
    app.add_option("--grid", grid, "Grid points per axis");
    app.add_option("--n-sim", n_sim, "Figure 4 simulations per member");
  }

  static void panel(std::ostream& out, int fig, const char* name, const char* header) {
    out << "# figure " << fig << " panel " << name << '\n' << header << '\n';
  }

  void figure1(std::ostream& out) const {
    const PlateauGaussianParams p;
    const PlateauGaussianModel model(p);
    const std::size_t g = std::max<std::size_t>(grid, 2);

    panel(out, 1, "likelihood", "x,L_gauss,L_plateau");
    for (std::size_t i = 0; i < g; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(g - 1);
      out << format_real(x) << ',' << format_real(std::exp(plateau_gaussian_log_like(x, p, false))) << ','
          << format_real(std::exp(plateau_gaussian_log_like(x, p, true))) << '\n';
    }

    const double l_max = std::exp(plateau_gaussian_log_like(p.mu, p, true));
    std::vector<double> levels;
    for (std::size_t i = 0; i < g; ++i) levels.push_back(l_max * static_cast<double>(i) / static_cast<double>(g - 1));
    levels.push_back(p.plateau);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    out << '\n';
    panel(out, 1, "likelihood_distribution", "L,P_below,P_at_or_below");
    for (double l : levels) {
      const VolumeLimits v = x_of_lambda(model, std::log(l));
      out << format_real(l) << ',' << format_real(1.0 - v.left) << ',' << format_real(1.0 - v.right) << '\n';
    }
    out << '\n';
    panel(out, 1, "x_of_lambda", "L,X_left,X_right");
    for (double l : levels) {
      const VolumeLimits v = x_of_lambda(model, std::log(l));
      out << format_real(l) << ',' << format_real(v.left) << ',' << format_real(v.right) << '\n';
    }
    out << '\n';
    panel(out, 1, "generalized_inverse", "X,L_bar");
    for (std::size_t i = 1; i + 1 < g + 1; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(g);
      out << format_real(x) << ',' << format_real(std::exp(generalized_inverse(model, x))) << '\n';
    }
  }

  void figure2(std::ostream& out) const {
    panel(out, 2, "compression", "q,naive,unbiased,geometric");
    for (std::size_t q = 1; q <= n; ++q) {
      out << q << ',' << format_real(compression_factor(n, q, CompressionMethod::naive_exponential)) << ','
          << format_real(compression_factor(n, q, CompressionMethod::unbiased_linear)) << ','
          << format_real(compression_factor(n, q, CompressionMethod::geometric_sum)) << '\n';
    }
  }

  void figure3(std::ostream& out) const {
    const PlateauPrior pr = prior == "logarithmic" ? PlateauPrior::logarithmic : PlateauPrior::flat;
    panel(out, 3, prior == "logarithmic" ? "moments_logarithmic" : "moments_flat",
          "q,beta_mean,beta_sd,binom_mean,binom_sd");
    for (std::size_t q = 1; q <= n; ++q) {
      const CompressionMoments m = binom_beta_moments(n, q, pr);
      out << q << ',' << format_real(m.beta_mean) << ',' << format_real(m.beta_sd) << ','
          << format_real(m.binom_mean) << ',' << format_real(m.binom_sd) << '\n';
    }
  }

  void figure4(std::ostream& out, std::ostream& err) const {
    const auto model = scenario_model(ScenarioSpec::base());
    RepeatConfig c;
    c.algorithm = Algorithm::modified;
    c.runs = runs;
    c.seed = seed;
    c.n_live = n_live == 0 ? 500 : n_live;
    c.n_sim = n_sim;
    const RepeatSummary s = repeat_runs(*model, c, [&](std::size_t k, const SamplerRun&) {
      if ((k + 1) % 100 == 0) err << "figure 4: " << k + 1 << '/' << runs << " runs\n";
    });
    panel(out, 4, "ensemble", "run,log_Z,log_Z_sd,log_Z_naive");
    for (std::size_t k = 0; k < s.members.size(); ++k) {
      const RepeatMember& m = s.members[k];
      out << k << ',' << format_real(m.log_Z) << ',' << format_real(m.log_Z_sd) << ',' << format_real(m.log_Z_naive)
          << '\n';
    }
    out << '\n';
    panel(out, 4, "summary", "key,value");
    out << "exact_log_Z," << format_real(*model->exact_log_z()) << '\n'
        << "mean_log_Z," << format_real(s.mean) << '\n'
        << "sd_log_Z," << format_real(s.sd) << '\n'
        << "mean_reported_sd," << format_real(s.mean_reported_sd) << '\n'
        << "mean_naive_delta," << format_real(s.mean_naive_delta) << '\n';
  }

  void figure5(std::ostream& out) const {
    const WeddingCakeParams p;
    const std::size_t g = std::max<std::size_t>(grid, 2);
    panel(out, 5, "surface", "x0,x1,logL");
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < g; ++j) {
        const double x[2] = {static_cast<double>(i) / static_cast<double>(g - 1),
                             static_cast<double>(j) / static_cast<double>(g - 1)};
        out << format_real(x[0]) << ',' << format_real(x[1]) << ',' << format_real(wedding_cake_log_like(x, p))
            << '\n';
      }
    }
    const WeddingCakeModel model(p);
    SamplerConfig cfg;
    cfg.n_live = n_live == 0 ? 100 : n_live;
    cfg.seed = seed;
    const SamplerRun run = run_modified(model, cfg);
    out << '\n';
    panel(out, 5, "live_trace", "iteration,n_live,logL");
    for (std::size_t i = 0; i < run.n_live.size(); ++i) {
      out << i << ',' << run.n_live[i] << ',' << format_real(run.record.points[i].log_like) << '\n';
    }
  }

  int exec(std::ostream& out, std::ostream& err) const {
    switch (figure) {
      case 1: figure1(out); break;
      case 2: figure2(out); break;
      case 3: figure3(out); break;
      case 4: figure4(out, err); break;
      case 5: figure5(out); break;
      default: throw DomainError("unknown figure " + std::to_string(figure) + " (expected 1-5)");
    }
    return 0;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nested sampling with plateau-aware compression", "nsplat"};
  app.require_subcommand(1);

  RunCmd run;
  ResumCmd resum_cmd;
  ErrorSimCmd error_sim;
  SeriesCmd series;
  FigdataCmd figdata;
  RepeatCmd repeat;
  CLI::App* run_app = app.add_subcommand("run", "Run original or modified nested sampling");
  CLI::App* resum_app = app.add_subcommand("resum", "Recompute the evidence of a chain file");
  CLI::App* error_app = app.add_subcommand("error-sim", "Simulate the log-evidence spread of a chain file");
  CLI::App* series_app = app.add_subcommand("series", "Wedding-cake evidence from its series");
  CLI::App* fig_app = app.add_subcommand("figdata", "Data tables for the figures");
  CLI::App* repeat_app = app.add_subcommand("repeat", "Ensemble of independent runs");
  run.add(*run_app);
  resum_cmd.add(*resum_app);
  error_sim.add(*error_app);
  series.add(*series_app);
  figdata.add(*fig_app);
  repeat.add(*repeat_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (run_app->parsed()) return run.exec(out, err);
    if (resum_app->parsed()) return resum_cmd.exec(out, err);
    if (error_app->parsed()) return error_sim.exec(out, err);
    if (series_app->parsed()) return series.exec(out, err);
    if (fig_app->parsed()) return figdata.exec(out, err);
    if (repeat_app->parsed()) return repeat.exec(out, err);
  } catch (const ContourExhausted& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace nsplat
