#pragma once

#include "mee/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mee {

/// One fitted trial. Distances are oracle Monte-Carlo estimates on a shared
/// set of X draws; `_se` columns are their standard errors.
struct TrialRecord {
  std::size_t m = 0;
  double h = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string note;

  double var_fz = 0.0;           // Var[f_z - f_rho]
  double var_fz_se = 0.0;
  double mean_gap = 0.0;         // E[f_z - f_rho]
  double mean_gap_se = 0.0;
  double adjustment = 0.0;       // (1/m) sum f_z(x_i) - pi(y_i)
  double adjustment_error = 0.0; // |adjustment - mean_gap|
  double l2_adjusted = 0.0;      // ||f~_z - f_rho|| in L2(rho_X)
  double l2_adjusted_se = 0.0;
  bool triangle_ok = true;
  double var_ls = 0.0;
  double l2_ls = 0.0;
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restart = 0;
  bool converged = false;
  std::size_t clipped = 0;
};

/// Per-m aggregates over trials (failed trials excluded).
struct MSummary {
  std::size_t m = 0;
  double h = 0.0;
  int trials = 0;
  int failed = 0;
  double median_var_fz = 0.0;
  double q90_var_fz = 0.0;
  double median_l2_adjusted = 0.0;
  double q90_l2_adjusted = 0.0;
  double median_adjustment_error = 0.0;
  double q90_adjustment_error = 0.0;
  double median_var_ls = 0.0;
  double median_l2_ls = 0.0;
  double ls_better_fraction = 0.0;  // trials with var_ls <= var_fz
  int triangle_violations = 0;
  double median_clipped = 0.0;
  std::size_t max_clipped = 0;
  double shrink_vs_quarter = 0.0;   // median adjustment error at m/4 over that at m; NaN if m/4 absent
};

struct HDecayRecord {
  int probe = 0;
  double h = 0.0;
  double residual = 0.0;
  double std_error = 0.0;
  bool below_noise = false;  // |R| <= 3 std errors
};

struct HDecaySummary {
  int probe = 0;
  std::string label;       // "f_rho" or "random"
  double slope = 0.0;      // least squares slope of log|R| on log h; NaN with < 2 usable points
  double intercept = 0.0;
  int points_used = 0;
  int below_noise = 0;
  bool reliable = false;
};

enum class SweepKind { Consistency, Comparison, MeanAdjustment };

/// Linear-interpolation quantile (type 7) of finite values; NaN when empty.
double quantile(std::vector<double> values, double q);

/// Seed of trial `trial` at sample size m.
std::uint64_t trial_seed(std::uint64_t master, std::size_t m, int trial);

/// Fits f_z and the least-squares baseline on one generated sample and
/// evaluates them against the oracle draws. Failures are caught and recorded.
TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t m, int trial, const Draws& oracle_draws);

std::vector<TrialRecord> run_consistency_sweep(const ExperimentConfig& cfg);
std::vector<TrialRecord> run_comparison(const ExperimentConfig& cfg);
/// Requires at least 3 sample sizes.
std::vector<TrialRecord> run_mean_adjustment_check(const ExperimentConfig& cfg);

std::vector<MSummary> summarize(const std::vector<TrialRecord>& records);

/// Requires at least 4 h values spanning a factor of 8 or more.
std::vector<HDecayRecord> run_h_decay_sweep(const ExperimentConfig& cfg);
std::vector<HDecaySummary> summarize_h_decay(const std::vector<HDecayRecord>& records);

void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records);
void write_summary_csv(const std::string& path, SweepKind kind, const std::vector<MSummary>& rows);
void write_h_decay_csv(const std::string& path, const std::vector<HDecayRecord>& records);
void write_h_decay_summary_csv(const std::string& path, const std::vector<HDecaySummary>& rows);

} // namespace mee
