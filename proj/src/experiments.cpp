#include "mee/experiments.hpp"

#include "mee/errors.hpp"
#include "mee/format.hpp"
#include "mee/learner.hpp"
#include "mee/log.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace mee {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, n) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t n, int threads, Body body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

Draws oracle_draws_for(const ExperimentConfig& cfg, const DistributionModel& model) {
  return draw_observations(model, cfg.mc.n_mc, child_seed(cfg.master_seed, {2}));
}

// g_i = f(x_i) - f_rho(x_i) over the oracle draws.
Eigen::VectorXd gap_values(const Predictor& p, const HypothesisSpace& space, const Draws& d) {
  return evaluate_all(p, space, d.x) - d.f_rho;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string clean_note(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

std::vector<TrialRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const DistributionModel model = cfg.make_model();
  const Draws oracle = oracle_draws_for(cfg, model);
  const std::size_t per_m = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> out(cfg.m_list.size() * per_m);
  parallel_for(out.size(), cfg.threads, [&](std::size_t i) {
    out[i] = run_trial(cfg, cfg.m_list[i / per_m], static_cast<int>(i % per_m), oracle);
  });
  return out;  // already ordered by (m, trial)
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  return f;
}

std::string fmt(double v) { return format_double(v); }

} // namespace

double quantile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t m, int trial) {
  return child_seed(master, {1, m, static_cast<std::uint64_t>(trial)});
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t m, int trial, const Draws& oracle) {
  TrialRecord r;
  r.m = m;
  r.trial = trial;
  r.seed = trial_seed(cfg.master_seed, m, trial);
  try {
    r.h = cfg.h_for(m);
    const DistributionModel model = cfg.make_model();
    const HypothesisSpace space = cfg.make_space();
    const Sample sample = generate_sample(model, m, child_seed(r.seed, {0}));
    OptimizerSettings settings = cfg.optimizer;
    settings.seed = child_seed(r.seed, {1});

    const MEEProblem prob(sample, space, r.h, cfg.make_window());
    const FitResult fit = minimize_mee(prob, settings);
    r.objective = fit.objective;
    r.iterations = fit.iterations;
    r.evaluations = fit.evaluations;
    r.restart = fit.restart;
    r.converged = fit.converged;
    r.clipped = clipped_count(sample);
    r.adjustment = mean_adjustment(fit.predictor, space, sample);

    const Eigen::VectorXd g = gap_values(fit.predictor, space, oracle);
    const MCEstimate mean = mean_estimate(to_vector(g));
    r.mean_gap = mean.value;
    r.mean_gap_se = mean.std_error;
    r.adjustment_error = std::abs(r.adjustment - r.mean_gap);
    const MCEstimate var = mean_estimate(to_vector((g.array() - mean.value).square().matrix()));
    r.var_fz = var.value;
    r.var_fz_se = var.std_error;
    // f~_z - f_rho = g - adjustment.
    const MCEstimate l2sq = mean_estimate(to_vector((g.array() - r.adjustment).square().matrix()));
    r.l2_adjusted = std::sqrt(l2sq.value);
    r.l2_adjusted_se = r.l2_adjusted > 0.0 ? l2sq.std_error / (2.0 * r.l2_adjusted) : 0.0;
    r.triangle_ok = r.l2_adjusted <=
                    r.adjustment_error + std::sqrt(r.var_fz) + 3.0 * r.l2_adjusted_se + 1e-12;

    const Predictor ls = least_squares_baseline(sample, space, settings);
    const Eigen::VectorXd gl = gap_values(ls, space, oracle);
    const double ls_mean = gl.mean();
    r.var_ls = (gl.array() - ls_mean).square().mean();
    r.l2_ls = std::sqrt(gl.array().square().mean());
  } catch (const std::exception& e) {
    r.ok = false;
    r.note = clean_note(e.what());
    for (double* v : {&r.var_fz, &r.var_fz_se, &r.mean_gap, &r.mean_gap_se, &r.adjustment,
                      &r.adjustment_error, &r.l2_adjusted, &r.l2_adjusted_se, &r.var_ls, &r.l2_ls,
                      &r.objective}) {
      *v = kNaN;
    }
    log::warn("trial " + std::to_string(trial) + " at m = " + std::to_string(m) + " failed: " + r.note);
  }
  return r;
}

std::vector<TrialRecord> run_consistency_sweep(const ExperimentConfig& cfg) { return run_sweep(cfg); }

std::vector<TrialRecord> run_comparison(const ExperimentConfig& cfg) { return run_sweep(cfg); }

std::vector<TrialRecord> run_mean_adjustment_check(const ExperimentConfig& cfg) {
  if (cfg.m_list.size() < 3) throw ConfigError("the mean adjustment check needs at least 3 sample sizes");
  return run_sweep(cfg);
}

std::vector<MSummary> summarize(const std::vector<TrialRecord>& records) {
  std::map<std::size_t, std::vector<const TrialRecord*>> by_m;
  for (const auto& r : records) by_m[r.m].push_back(&r);
  std::vector<MSummary> out;
  std::map<std::size_t, double> median_adj;
  for (const auto& [m, rs] : by_m) {
    MSummary s;
    s.m = m;
    s.h = rs.front()->h;
    std::vector<double> var, l2, adj, vls, l2ls, clip;
    int ls_better = 0;
    for (const TrialRecord* r : rs) {
      ++s.trials;
      if (!r->ok) {
        ++s.failed;
        continue;
      }
      var.push_back(r->var_fz);
      l2.push_back(r->l2_adjusted);
      adj.push_back(r->adjustment_error);
      vls.push_back(r->var_ls);
      l2ls.push_back(r->l2_ls);
      clip.push_back(static_cast<double>(r->clipped));
      s.max_clipped = std::max(s.max_clipped, r->clipped);
      ls_better += r->var_ls <= r->var_fz ? 1 : 0;
      s.triangle_violations += r->triangle_ok ? 0 : 1;
    }
    s.median_var_fz = quantile(var, 0.5);
    s.q90_var_fz = quantile(var, 0.9);
    s.median_l2_adjusted = quantile(l2, 0.5);
    s.q90_l2_adjusted = quantile(l2, 0.9);
    s.median_adjustment_error = quantile(adj, 0.5);
    s.q90_adjustment_error = quantile(adj, 0.9);
    s.median_var_ls = quantile(vls, 0.5);
    s.median_l2_ls = quantile(l2ls, 0.5);
    s.median_clipped = quantile(clip, 0.5);
    const int good = s.trials - s.failed;
    s.ls_better_fraction = good > 0 ? static_cast<double>(ls_better) / good : kNaN;
    median_adj[m] = s.median_adjustment_error;
    s.shrink_vs_quarter = (m % 4 == 0 && median_adj.count(m / 4))
                              ? median_adj[m / 4] / s.median_adjustment_error
                              : kNaN;
    out.push_back(s);
  }
  return out;
}

std::vector<HDecayRecord> run_h_decay_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& hs = cfg.h_decay.h_list;
  if (hs.size() < 4) throw ConfigError("h_decay.h_list needs at least 4 values");
  const auto [lo, hi] = std::minmax_element(hs.begin(), hs.end());
  if (*hi < 8.0 * *lo) throw ConfigError("h_decay.h_list must span a factor of at least 8");

  const DistributionModel model = cfg.make_model();
  const HypothesisSpace space = cfg.make_space();
  const WindowingFunction w = cfg.make_window();
  // Common random numbers: one set of pairs for every probe and every h.
  const Draws draws = draw_observations(model, 2 * cfg.mc.n_pairs, child_seed(cfg.master_seed, {4}));

  std::vector<RealFunction> probes{model.regression_function()};
  for (int k = 1; k <= cfg.h_decay.probes; ++k) {
    Rng rng(child_seed(cfg.master_seed, {3, static_cast<std::uint64_t>(k)}));
    const Predictor p{uniform_in_ball(rng, space.dimension(), cfg.h_decay.probe_radius), 0.0};
    probes.push_back(as_function(p, space, false));
  }

  std::vector<HDecayRecord> out(probes.size() * hs.size());
  parallel_for(out.size(), cfg.threads, [&](std::size_t i) {
    HDecayRecord r;
    r.probe = static_cast<int>(i / hs.size());
    r.h = hs[i % hs.size()];
    const MCEstimate est = information_residual(probes[static_cast<std::size_t>(r.probe)], draws, r.h, w);
    r.residual = est.value;
    r.std_error = est.std_error;
    r.below_noise = !(std::abs(r.residual) > 3.0 * r.std_error);
    out[i] = r;
  });
  return out;
}

std::vector<HDecaySummary> summarize_h_decay(const std::vector<HDecayRecord>& records) {
  std::map<int, std::vector<const HDecayRecord*>> by_probe;
  for (const auto& r : records) by_probe[r.probe].push_back(&r);
  std::vector<HDecaySummary> out;
  for (const auto& [probe, rs] : by_probe) {
    HDecaySummary s;
    s.probe = probe;
    s.label = probe == 0 ? "f_rho" : "random";
    std::vector<double> lx, ly;
    for (const HDecayRecord* r : rs) {
      if (r->below_noise) {
        ++s.below_noise;
        continue;
      }
      lx.push_back(std::log(r->h));
      ly.push_back(std::log(std::abs(r->residual)));
    }
    s.points_used = static_cast<int>(lx.size());
    if (lx.size() >= 2) {
      const double n = static_cast<double>(lx.size());
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
      }
      mx /= n;
      my /= n;
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
      }
      s.slope = sxy / sxx;
      s.intercept = my - s.slope * mx;
    } else {
      s.slope = kNaN;
      s.intercept = kNaN;
    }
    s.reliable = s.below_noise == 0 && s.points_used >= 2;
    out.push_back(s);
  }
  return out;
}

void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records) {
  std::ofstream f = open_csv(path);
  f << "m,h,trial,seed,status,var_fz,var_fz_se,mean_gap,mean_gap_se,adjustment,adjustment_error,"
       "l2_adjusted,l2_adjusted_se,triangle_ok,var_ls,l2_ls,objective,iterations,evaluations,"
       "restart,converged,clipped,note\n";
  for (const auto& r : records) {
    f << r.m << ',' << fmt(r.h) << ',' << r.trial << ',' << r.seed << ',' << (r.ok ? "ok" : "failed")
      << ',' << fmt(r.var_fz) << ',' << fmt(r.var_fz_se) << ',' << fmt(r.mean_gap) << ','
      << fmt(r.mean_gap_se) << ',' << fmt(r.adjustment) << ',' << fmt(r.adjustment_error) << ','
      << fmt(r.l2_adjusted) << ',' << fmt(r.l2_adjusted_se) << ',' << (r.triangle_ok ? 1 : 0) << ','
      << fmt(r.var_ls) << ',' << fmt(r.l2_ls) << ',' << fmt(r.objective) << ',' << r.iterations << ','
      << r.evaluations << ',' << r.restart << ',' << (r.converged ? 1 : 0) << ',' << r.clipped << ','
      << r.note << '\n';
  }
}

void write_summary_csv(const std::string& path, SweepKind kind, const std::vector<MSummary>& rows) {
  std::ofstream f = open_csv(path);
  f << "m,h,trials,failed";
  switch (kind) {
  case SweepKind::Consistency:
    f << ",median_var_fz,q90_var_fz,median_l2_adjusted,q90_l2_adjusted,median_adjustment_error,"
         "q90_adjustment_error,triangle_violations\n";
    break;
  case SweepKind::Comparison:
    f << ",median_var_fz,median_var_ls,median_l2_adjusted,median_l2_ls,ls_better_fraction\n";
    break;
  case SweepKind::MeanAdjustment:
    f << ",median_adjustment_error,q90_adjustment_error,shrink_vs_quarter,median_clipped,max_clipped\n";
    break;
  }
  for (const auto& s : rows) {
    f << s.m << ',' << fmt(s.h) << ',' << s.trials << ',' << s.failed;
    switch (kind) {
    case SweepKind::Consistency:
      f << ',' << fmt(s.median_var_fz) << ',' << fmt(s.q90_var_fz) << ',' << fmt(s.median_l2_adjusted)
        << ',' << fmt(s.q90_l2_adjusted) << ',' << fmt(s.median_adjustment_error) << ','
        << fmt(s.q90_adjustment_error) << ',' << s.triangle_violations;
      break;
    case SweepKind::Comparison:
      f << ',' << fmt(s.median_var_fz) << ',' << fmt(s.median_var_ls) << ','
        << fmt(s.median_l2_adjusted) << ',' << fmt(s.median_l2_ls) << ',' << fmt(s.ls_better_fraction);
      break;
    case SweepKind::MeanAdjustment:
      f << ',' << fmt(s.median_adjustment_error) << ',' << fmt(s.q90_adjustment_error) << ','
        << fmt(s.shrink_vs_quarter) << ',' << fmt(s.median_clipped) << ',' << s.max_clipped;
      break;
    }
    f << '\n';
  }
}

void write_h_decay_csv(const std::string& path, const std::vector<HDecayRecord>& records) {
  std::ofstream f = open_csv(path);
  f << "probe,h,residual,std_error,below_noise\n";
  for (const auto& r : records) {
    f << r.probe << ',' << fmt(r.h) << ',' << fmt(r.residual) << ',' << fmt(r.std_error) << ','
      << (r.below_noise ? 1 : 0) << '\n';
  }
}

void write_h_decay_summary_csv(const std::string& path, const std::vector<HDecaySummary>& rows) {
  std::ofstream f = open_csv(path);
  f << "probe,label,slope,intercept,points_used,below_noise,reliable\n";
  for (const auto& s : rows) {
    f << s.probe << ',' << s.label << ',' << fmt(s.slope) << ',' << fmt(s.intercept) << ','
      << s.points_used << ',' << s.below_noise << ',' << (s.reliable ? 1 : 0) << '\n';
  }
}

} // namespace mee
