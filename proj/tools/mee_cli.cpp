#include "mee/config.hpp"
#include "mee/errors.hpp"
#include "mee/experiments.hpp"
#include "mee/learner.hpp"
#include "mee/log.hpp"
#include "mee/sample.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
  std::string window = "gaussian";
  std::string sample;
  std::size_t m = 0;
};

// Runtime failures that are not config problems.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

mee::ExperimentConfig effective_config(const Options& o) {
  std::vector<std::string> overrides = o.sets;
  if (o.seed) overrides.push_back("master_seed=" + std::to_string(*o.seed));
  if (o.threads) overrides.push_back("threads=" + std::to_string(*o.threads));
  return mee::load_config(o.config, overrides);
}

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw RuntimeFailure("cannot create output directory '" + dir + "'");
  const fs::path probe = fs::path(dir) / ".write_test";
  std::ofstream f(probe);
  if (!f) throw RuntimeFailure("output directory '" + dir + "' is not writable");
  f.close();
  fs::remove(probe, ec);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
}

void write_run_files(const Options& o, const std::string& command, const mee::ExperimentConfig& cfg,
                     double seconds, const std::vector<std::string>& outputs) {
  write_json(fs::path(o.out) / "config.json", mee::to_json(cfg));
  json manifest;
  manifest["command"] = command;
  manifest["master_seed"] = cfg.master_seed;
  manifest["threads"] = cfg.threads;
  manifest["version"] = kVersion;
  manifest["compiler"] = __VERSION__;
  manifest["boost"] = BOOST_LIB_VERSION;
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION);
  manifest["wall_seconds"] = seconds;
  manifest["outputs"] = outputs;
  write_json(fs::path(o.out) / "manifest.json", manifest);
}

std::string out_file(const Options& o, const char* name) { return (fs::path(o.out) / name).string(); }

int cmd_validate_window(const Options& o) {
  const mee::WindowingFunction w = mee::window_by_name(o.window);
  std::cout << mee::format_report(mee::validate_window(w));
  return 0;
}

int cmd_gen(const Options& o, const mee::ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  prepare_out(o.out);
  const std::size_t m = o.m > 0 ? o.m : cfg.m_list.front();
  const mee::Sample s = mee::generate_sample(cfg.make_model(), m, mee::child_seed(cfg.master_seed, {0}));
  mee::write_sample_csv(s, out_file(o, "sample.csv"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_files(o, "gen", cfg, secs, {"sample.csv"});
  mee::log::info("wrote " + std::to_string(m) + " observations to " + out_file(o, "sample.csv"));
  return 0;
}

int cmd_fit(const Options& o, const mee::ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  prepare_out(o.out);
  const mee::Sample s = mee::read_sample_csv(o.sample);
  const mee::HypothesisSpace space = cfg.make_space();
  if (cfg.h_schedule.preset == "list" && cfg.h_schedule.values.size() != 1) {
    throw mee::ConfigError("fit needs a single listed h");
  }
  const double h = cfg.h_schedule.preset == "list" ? cfg.h_schedule.values[0] : cfg.h_for(s.size());
  const mee::MEEProblem prob(s, space, h, cfg.make_window());
  mee::OptimizerSettings settings = cfg.optimizer;
  settings.seed = mee::child_seed(cfg.master_seed, {1});
  const mee::FitResult fit = mee::minimize_mee(prob, settings);
  const mee::Predictor adjusted = mee::adjusted_estimator(fit.predictor, space, s);
  const mee::Predictor ls = mee::least_squares_baseline(s, space, settings);

  auto coeffs = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j;
  j["m"] = s.size();
  j["h"] = h;
  j["dictionary"] = space.dictionary().name();
  j["coefficients"] = coeffs(fit.predictor.coefficients);
  j["objective"] = fit.objective;
  // Entropy of constant residuals, the smallest value the objective can take.
  j["objective_floor"] = std::log(h) - std::log(prob.window().value_at_zero());
  j["iterations"] = fit.iterations;
  j["evaluations"] = fit.evaluations;
  j["restart"] = fit.restart;
  j["converged"] = fit.converged;
  j["adjusted_offset"] = adjusted.offset;
  j["clipped"] = mee::clipped_count(s);
  j["least_squares_coefficients"] = coeffs(ls.coefficients);
  write_json(fs::path(o.out) / "fit.json", j);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_files(o, "fit", cfg, secs, {"fit.json"});
  mee::log::info("objective " + std::to_string(fit.objective) + " after " + std::to_string(fit.iterations) +
                 " iterations");
  return 0;
}

int cmd_sweep(const Options& o, const mee::ExperimentConfig& cfg, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  prepare_out(o.out);
  if (command == "sweep-h") {
    const auto records = mee::run_h_decay_sweep(cfg);
    mee::write_h_decay_csv(out_file(o, "trials.csv"), records);
    mee::write_h_decay_summary_csv(out_file(o, "summary.csv"), mee::summarize_h_decay(records));
  } else {
    std::vector<mee::TrialRecord> records;
    mee::SweepKind kind = mee::SweepKind::Consistency;
    if (command == "sweep-m") {
      records = mee::run_consistency_sweep(cfg);
    } else if (command == "compare") {
      records = mee::run_comparison(cfg);
      kind = mee::SweepKind::Comparison;
    } else {
      records = mee::run_mean_adjustment_check(cfg);
      kind = mee::SweepKind::MeanAdjustment;
    }
    mee::write_trials_csv(out_file(o, "trials.csv"), records);
    mee::write_summary_csv(out_file(o, "summary.csv"), kind, mee::summarize(records));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_files(o, command, cfg, secs, {"trials.csv", "summary.csv"});
  mee::log::info(command + " finished in " + std::to_string(secs) + " s; results in " + o.out);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum error entropy regression experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", o.out, "output directory");
    if (needs_out) out->required();
    sub->add_option("--set", o.sets, "override key=value (repeatable)");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "suppress progress messages");
  };

  auto* gen = app.add_subcommand("gen", "generate a sample from the configured model");
  common(gen, true);
  gen->add_option("--m", o.m, "sample size (default: first entry of m_list)");
  auto* fit = app.add_subcommand("fit", "fit the MEE estimator to a sample file");
  common(fit, true);
  fit->add_option("--sample", o.sample, "sample CSV")->required()->check(CLI::ExistingFile);
  for (const char* name : {"sweep-m", "sweep-h", "compare", "adjust-check"}) {
    common(app.add_subcommand(name, std::string("run the ") + name + " experiment"), true);
  }
  auto* vw = app.add_subcommand("validate-window", "check a windowing function");
  vw->add_option("--window", o.window, "gaussian or rational");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  mee::log::set_quiet(o.quiet);

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  mee::ExperimentConfig cfg;
  try {
    if (command == "validate-window") return cmd_validate_window(o);
    cfg = effective_config(o);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  try {
    if (command == "gen") return cmd_gen(o, cfg);
    if (command == "fit") return cmd_fit(o, cfg);
    return cmd_sweep(o, cfg, command);
  } catch (const mee::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
