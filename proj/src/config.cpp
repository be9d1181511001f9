#include "mee/config.hpp"

#include "mee/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mee {
namespace {

using nlohmann::json;

// Overlays `patch` on `base`; every key in the patch must exist in the base.
void overlay(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError("expected an object at '" + where + "'");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), path);
    } else {
      slot = it.value();
    }
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad or missing value for '" + where + key + "'");
  }
}

} // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (m_list.empty()) fail("m_list must not be empty");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 2) fail("every m must be at least 2");
    if (i > 0 && m_list[i] <= m_list[i - 1]) fail("m_list must be strictly increasing");
  }
  if (trials < 1) fail("trials must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (!(h_schedule.p > 0.0)) fail("h_schedule.p must be positive");
  if (h_schedule.preset == "list") {
    if (h_schedule.values.size() != 1 && h_schedule.values.size() != m_list.size()) {
      fail("h_schedule.values needs one entry or one per m");
    }
    for (double h : h_schedule.values) {
      if (!(h > 0.0) || !std::isfinite(h)) fail("h_schedule.values must be positive");
    }
  } else if (h_schedule.preset != "bounded" && h_schedule.preset != "moment") {
    fail("h_schedule.preset must be bounded, moment or list");
  }
  if (!(hypothesis.radius > 0.0)) fail("hypothesis.radius must be positive");
  if (mc.n_mc < 1000) fail("mc.n_mc must be at least 1000");
  if (mc.n_pairs < 1000) fail("mc.n_pairs must be at least 1000");
  if (h_decay.probes < 0) fail("h_decay.probes must be >= 0");
  if (!(h_decay.probe_radius > 0.0)) fail("h_decay.probe_radius must be positive");
  for (double h : h_decay.h_list) {
    if (!(h > 0.0) || !std::isfinite(h)) fail("h_decay.h_list must be positive");
  }
  try {
    optimizer.validate();
    make_model();
    make_space();
    make_window();
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
}

DistributionModel ExperimentConfig::make_model() const {
  return DistributionModel(model.x, model.regression, parse_noise(model.noise, model.noise_scale));
}

HypothesisSpace ExperimentConfig::make_space() const {
  DictionarySpec spec;
  spec.name = hypothesis.dictionary;
  spec.degree = hypothesis.degree;
  spec.size = hypothesis.size;
  spec.include_constant = hypothesis.include_constant;
  spec.input_dim = model.x.dim;
  spec.domain_low = model.x.low;
  spec.domain_high = model.x.high;
  return HypothesisSpace(make_dictionary(spec), hypothesis.radius);
}

WindowingFunction ExperimentConfig::make_window() const { return window_by_name(window); }

double ExperimentConfig::h_for(std::size_t m) const {
  const double md = static_cast<double>(m);
  const double p = h_schedule.p;
  if (h_schedule.preset == "bounded") return std::pow(md, 1.0 / (2.0 * (1.0 + p)));
  if (h_schedule.preset == "moment") {
    const double q = make_model().moment_q();
    return std::pow(md, 1.0 / ((1.0 + p) * std::min(q - 1.0, 3.0)));
  }
  if (h_schedule.values.size() == 1) return h_schedule.values[0];
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] == m) return h_schedule.values[i];
  }
  throw ConfigError("no h listed for m = " + std::to_string(m));
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = {
      {"x", {{"dim", c.model.x.dim}, {"low", c.model.x.low}, {"high", c.model.x.high}}},
      {"regression",
       {{"name", c.model.regression.name},
        {"intercept", c.model.regression.intercept},
        {"slope", c.model.regression.slope},
        {"amplitude", c.model.regression.amplitude}}},
      {"noise", {{"kind", c.model.noise}, {"scale", c.model.noise_scale}}}};
  j["hypothesis"] = {{"dictionary", c.hypothesis.dictionary},
                     {"degree", c.hypothesis.degree},
                     {"size", c.hypothesis.size},
                     {"include_constant", c.hypothesis.include_constant},
                     {"radius", c.hypothesis.radius}};
  j["window"] = c.window;
  j["h_schedule"] = {{"preset", c.h_schedule.preset}, {"p", c.h_schedule.p}, {"values", c.h_schedule.values}};
  j["m_list"] = c.m_list;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["optimizer"] = {{"restarts", c.optimizer.restarts},
                    {"max_iterations", c.optimizer.max_iterations},
                    {"gradient_tolerance", c.optimizer.gradient_tolerance},
                    {"initial_step", c.optimizer.initial_step},
                    {"shrink", c.optimizer.shrink},
                    {"armijo", c.optimizer.armijo},
                    {"max_backtracks", c.optimizer.max_backtracks}};
  j["mc"] = {{"n_mc", c.mc.n_mc}, {"n_pairs", c.mc.n_pairs}};
  j["h_decay"] = {{"h_list", c.h_decay.h_list},
                  {"probes", c.h_decay.probes},
                  {"probe_radius", c.h_decay.probe_radius}};
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.name = get<std::string>(j, "name", "");
  const json& model = j.at("model");
  c.model.x.dim = get<std::size_t>(model.at("x"), "dim", "model.x.");
  c.model.x.low = get<double>(model.at("x"), "low", "model.x.");
  c.model.x.high = get<double>(model.at("x"), "high", "model.x.");
  const json& reg = model.at("regression");
  c.model.regression.name = get<std::string>(reg, "name", "model.regression.");
  c.model.regression.intercept = get<double>(reg, "intercept", "model.regression.");
  c.model.regression.slope = get<double>(reg, "slope", "model.regression.");
  c.model.regression.amplitude = get<double>(reg, "amplitude", "model.regression.");
  c.model.noise = get<std::string>(model.at("noise"), "kind", "model.noise.");
  c.model.noise_scale = get<double>(model.at("noise"), "scale", "model.noise.");
  const json& hyp = j.at("hypothesis");
  c.hypothesis.dictionary = get<std::string>(hyp, "dictionary", "hypothesis.");
  c.hypothesis.degree = get<int>(hyp, "degree", "hypothesis.");
  c.hypothesis.size = get<int>(hyp, "size", "hypothesis.");
  c.hypothesis.include_constant = get<bool>(hyp, "include_constant", "hypothesis.");
  c.hypothesis.radius = get<double>(hyp, "radius", "hypothesis.");
  c.window = get<std::string>(j, "window", "");
  const json& sched = j.at("h_schedule");
  c.h_schedule.preset = get<std::string>(sched, "preset", "h_schedule.");
  c.h_schedule.p = get<double>(sched, "p", "h_schedule.");
  c.h_schedule.values = get<std::vector<double>>(sched, "values", "h_schedule.");
  c.m_list = get<std::vector<std::size_t>>(j, "m_list", "");
  c.trials = get<int>(j, "trials", "");
  c.master_seed = get<std::uint64_t>(j, "master_seed", "");
  const json& opt = j.at("optimizer");
  c.optimizer.restarts = get<int>(opt, "restarts", "optimizer.");
  c.optimizer.max_iterations = get<int>(opt, "max_iterations", "optimizer.");
  c.optimizer.gradient_tolerance = get<double>(opt, "gradient_tolerance", "optimizer.");
  c.optimizer.initial_step = get<double>(opt, "initial_step", "optimizer.");
  c.optimizer.shrink = get<double>(opt, "shrink", "optimizer.");
  c.optimizer.armijo = get<double>(opt, "armijo", "optimizer.");
  c.optimizer.max_backtracks = get<int>(opt, "max_backtracks", "optimizer.");
  c.mc.n_mc = get<std::size_t>(j.at("mc"), "n_mc", "mc.");
  c.mc.n_pairs = get<std::size_t>(j.at("mc"), "n_pairs", "mc.");
  const json& hd = j.at("h_decay");
  c.h_decay.h_list = get<std::vector<double>>(hd, "h_list", "h_decay.");
  c.h_decay.probes = get<int>(hd, "probes", "h_decay.");
  c.h_decay.probe_radius = get<double>(hd, "probe_radius", "h_decay.");
  c.threads = get<int>(j, "threads", "");
  return c;
}

nlohmann::json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json file;
  try {
    file = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  json merged = to_json(ExperimentConfig{});
  overlay(merged, file, "");
  return merged;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json* slot = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!slot->is_object() || !slot->contains(part)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    slot = &(*slot)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  if (slot->is_object() && value.is_object()) {
    overlay(*slot, value, key);
  } else {
    *slot = value;
  }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = path.empty() ? to_json(ExperimentConfig{}) : read_config_json(path);
  for (const auto& o : overrides) apply_override(j, o);
  ExperimentConfig cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

} // namespace mee
