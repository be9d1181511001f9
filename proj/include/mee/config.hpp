#pragma once

#include "mee/hypothesis.hpp"
#include "mee/optimize.hpp"
#include "mee/oracle.hpp"
#include "mee/windowing.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mee {

struct ModelConfig {
  XLaw x;
  RegressionSpec regression;
  std::string noise = "gaussian";
  double noise_scale = 0.5;
};

struct HypothesisConfig {
  std::string dictionary = "polynomial";
  int degree = 1;
  int size = 0;
  bool include_constant = true;
  double radius = 5.0;
};

/// h as a function of m. Presets with capacity exponent p:
///   "bounded": m^(1 / (2 (1 + p)))
///   "moment":  m^(1 / ((1 + p) min(q - 1, 3)))
/// "list" takes `values`, one per entry of m_list (or a single value for all).
struct ScheduleConfig {
  std::string preset = "moment";
  double p = 0.5;
  std::vector<double> values;
};

struct McConfig {
  std::size_t n_mc = 100000;     // X draws for oracle distances
  std::size_t n_pairs = 1000000; // pairs for the residual sweep
};

struct HDecayConfig {
  std::vector<double> h_list{2.0, 4.0, 8.0, 16.0, 32.0};
  int probes = 3;              // random predictors besides f_rho
  double probe_radius = 1.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelConfig model;
  HypothesisConfig hypothesis;
  std::string window = "gaussian";
  ScheduleConfig h_schedule;
  std::vector<std::size_t> m_list{100, 400, 1600};
  int trials = 10;
  std::uint64_t master_seed = 1;
  OptimizerSettings optimizer;
  McConfig mc;
  HDecayConfig h_decay;
  int threads = 1;

  /// Throws ConfigError on any invariant violation.
  void validate() const;

  DistributionModel make_model() const;
  HypothesisSpace make_space() const;
  WindowingFunction make_window() const;
  double h_for(std::size_t m) const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Parses a config file over the defaults. Unknown keys are errors.
nlohmann::json read_config_json(const std::string& path);

/// Applies "a.b.c=value" to `j`. The value is read as JSON when it parses,
/// otherwise as a string. The key must already exist.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// defaults <- file (if any) <- overrides, then validated.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

} // namespace mee
