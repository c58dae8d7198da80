#include "tndipw/config.hpp"

#include "tndipw/errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string_view>

namespace tndipw {

namespace {

void require_map(const YAML::Node& node, std::string_view where) {
  if (!node.IsMap()) throw ConfigError(fmt::format("'{}' must be a mapping", where));
}

void check_keys(const YAML::Node& node, std::string_view where, std::initializer_list<std::string_view> allowed) {
  require_map(node, where);
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    bool known = false;
    for (const auto a : allowed) known = known || a == key;
    if (!known) throw ConfigError(fmt::format("unknown key '{}' in '{}'", key, where));
  }
}

template <class T>
void read(const YAML::Node& parent, const char* key, T& target, std::string_view where) {
  const YAML::Node node = parent[key];
  if (!node) return;
  try {
    target = node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("'{}.{}' has an invalid value", where, key));
  }
}

void read_count(const YAML::Node& parent, const char* key, std::size_t& target, std::string_view where) {
  const YAML::Node node = parent[key];
  if (!node) return;
  long long v = 0;
  try {
    v = node.as<long long>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("'{}.{}' must be an integer", where, key));
  }
  if (v < 0) throw ConfigError(fmt::format("'{}.{}' must be nonnegative", where, key));
  target = static_cast<std::size_t>(v);
}

ScenarioSpec scenario_from_node(const YAML::Node& node) {
  check_keys(node, "scenario",
             {"id", "p_c", "p_x_given_c", "p_u", "p_h", "infection", "other_infection", "symptoms", "testing",
              "calibration"});
  int id = 1;
  read(node, "id", id, "scenario");
  ScenarioSpec s;
  try {
    s = scenario_preset(id);
  } catch (const InvalidSpecError& e) {
    throw ConfigError(e.what());
  }
  read(node, "p_c", s.p_c, "scenario");
  if (const auto px = node["p_x_given_c"]) {
    if (!px.IsSequence() || px.size() != 2) throw ConfigError("'scenario.p_x_given_c' must be a list of two values");
    s.p_x_given_c = {px[0].as<double>(), px[1].as<double>()};
  }
  read(node, "p_u", s.p_u, "scenario");
  read(node, "p_h", s.p_h, "scenario");
  if (const auto m = node["infection"]) {
    check_keys(m, "scenario.infection", {"intercept", "x", "c", "u", "h"});
    read(m, "intercept", s.infection.intercept, "scenario.infection");
    read(m, "x", s.infection.x, "scenario.infection");
    read(m, "c", s.infection.c, "scenario.infection");
    read(m, "u", s.infection.u, "scenario.infection");
    read(m, "h", s.infection.h, "scenario.infection");
  }
  if (const auto m = node["other_infection"]) {
    check_keys(m, "scenario.other_infection", {"intercept", "x", "c", "u"});
    read(m, "intercept", s.other_infection.intercept, "scenario.other_infection");
    read(m, "x", s.other_infection.x, "scenario.other_infection");
    read(m, "c", s.other_infection.c, "scenario.other_infection");
    read(m, "u", s.other_infection.u, "scenario.other_infection");
  }
  if (const auto m = node["symptoms"]) {
    check_keys(m, "scenario.symptoms", {"baseline", "given_infection", "given_other"});
    read(m, "baseline", s.symptoms.baseline, "scenario.symptoms");
    read(m, "given_infection", s.symptoms.given_infection, "scenario.symptoms");
    read(m, "given_other", s.symptoms.given_other, "scenario.symptoms");
  }
  if (const auto m = node["testing"]) {
    check_keys(m, "scenario.testing", {"intercept", "w", "x", "c", "wx", "h", "xh"});
    read(m, "intercept", s.testing.intercept, "scenario.testing");
    read(m, "w", s.testing.w, "scenario.testing");
    read(m, "x", s.testing.x, "scenario.testing");
    read(m, "c", s.testing.c, "scenario.testing");
    read(m, "wx", s.testing.wx, "scenario.testing");
    read(m, "h", s.testing.h, "scenario.testing");
    read(m, "xh", s.testing.xh, "scenario.testing");
  }
  if (const auto m = node["calibration"]) {
    if (m.IsScalar() && m.as<std::string>() == "none") {
      s.calibration.reset();
    } else {
      check_keys(m, "scenario.calibration",
                 {"infection_prevalence", "other_infection_prevalence", "testing_prevalence"});
      CalibrationTargets t = s.calibration.value_or(CalibrationTargets{});
      read(m, "infection_prevalence", t.infection_prevalence, "scenario.calibration");
      read(m, "other_infection_prevalence", t.other_infection_prevalence, "scenario.calibration");
      read(m, "testing_prevalence", t.testing_prevalence, "scenario.calibration");
      s.calibration = t;
    }
  }
  try {
    validate(s);
    if (s.calibration) s = calibrate(s, *s.calibration);
  } catch (const InvalidSpecError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

void apply_experiment(const YAML::Node& node, ExperimentConfig& cfg) {
  check_keys(node, "experiment",
             {"profile", "population_size", "n_tested", "n_controls", "replicates", "bootstrap_b", "ci_level",
              "methods", "base_seed", "threads", "fixed_population", "truth_population_size", "q0"});
  read_count(node, "population_size", cfg.population_size, "experiment");
  read_count(node, "n_tested", cfg.n_tested, "experiment");
  read_count(node, "n_controls", cfg.n_controls, "experiment");
  read_count(node, "replicates", cfg.replicates, "experiment");
  read_count(node, "bootstrap_b", cfg.bootstrap_b, "experiment");
  read(node, "ci_level", cfg.ci_level, "experiment");
  if (const auto m = node["methods"]) {
    if (!m.IsSequence()) throw ConfigError("'experiment.methods' must be a list");
    cfg.methods.clear();
    for (const auto& item : m) cfg.methods.push_back(parse_analysis_method(item.as<std::string>()));
  }
  read(node, "base_seed", cfg.base_seed, "experiment");
  read_count(node, "threads", cfg.threads, "experiment");
  read(node, "fixed_population", cfg.fixed_population, "experiment");
  read_count(node, "truth_population_size", cfg.truth_population_size, "experiment");
  if (const auto q = node["q0"]) {
    if (q.IsScalar() && q.as<std::string>() == "realized") {
      cfg.q0_override.reset();
    } else {
      double v = 0.0;
      read(node, "q0", v, "experiment");
      cfg.q0_override = v;
    }
  }
}

void emit_map(YAML::Emitter& out, std::initializer_list<std::pair<const char*, double>> entries) {
  out << YAML::BeginMap;
  for (const auto& [k, v] : entries) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap;
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text) {
  try {
    const YAML::Node root = YAML::Load(text);
    if (!root || root.IsNull()) return default_scenario(1);
    return scenario_from_node(root);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("malformed scenario: {}", e.what()));
  }
}

RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  }
  RunConfig rc;
  if (!root || root.IsNull()) {
    rc.experiment = profile_config(Profile::desk, 1);
    return rc;
  }
  try {
    check_keys(root, "<root>", {"scenario", "experiment", "output"});
    int id = 1;
    if (const auto s = root["scenario"]) {
      require_map(s, "scenario");
      read(s, "id", id, "scenario");
    }
    Profile profile = Profile::desk;
    if (const auto e = root["experiment"]; e && e.IsMap() && e["profile"]) {
      profile = parse_profile(e["profile"].as<std::string>());
    }
    try {
      rc.experiment = profile_config(profile, id);
    } catch (const InvalidSpecError& e) {
      throw ConfigError(e.what());
    }
    if (const auto s = root["scenario"]) rc.experiment.scenario = scenario_from_node(s);
    if (const auto e = root["experiment"]) apply_experiment(e, rc.experiment);
    if (const auto o = root["output"]) {
      check_keys(o, "output", {"out_dir"});
      if (o["out_dir"]) rc.out_dir = o["out_dir"].as<std::string>();
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("invalid config: {}", e.what()));
  }
  rc.experiment.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string emit_run_config(const RunConfig& config) {
  const ExperimentConfig& e = config.experiment;
  const ScenarioSpec& s = e.scenario;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << s.id;
  out << YAML::Key << "p_c" << YAML::Value << s.p_c;
  out << YAML::Key << "p_x_given_c" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.p_x_given_c[0]
      << s.p_x_given_c[1] << YAML::EndSeq;
  out << YAML::Key << "p_u" << YAML::Value << s.p_u;
  out << YAML::Key << "p_h" << YAML::Value << s.p_h;
  out << YAML::Key << "infection" << YAML::Value;
  emit_map(out, {{"intercept", s.infection.intercept},
                 {"x", s.infection.x},
                 {"c", s.infection.c},
                 {"u", s.infection.u},
                 {"h", s.infection.h}});
  out << YAML::Key << "other_infection" << YAML::Value;
  emit_map(out, {{"intercept", s.other_infection.intercept},
                 {"x", s.other_infection.x},
                 {"c", s.other_infection.c},
                 {"u", s.other_infection.u}});
  out << YAML::Key << "symptoms" << YAML::Value;
  emit_map(out, {{"baseline", s.symptoms.baseline},
                 {"given_infection", s.symptoms.given_infection},
                 {"given_other", s.symptoms.given_other}});
  out << YAML::Key << "testing" << YAML::Value;
  emit_map(out, {{"intercept", s.testing.intercept},
                 {"w", s.testing.w},
                 {"x", s.testing.x},
                 {"c", s.testing.c},
                 {"wx", s.testing.wx},
                 {"h", s.testing.h},
                 {"xh", s.testing.xh}});
  // Intercepts above are already solved; re-solving on load is a no-op.
  out << YAML::Key << "calibration" << YAML::Value;
  if (s.calibration) {
    emit_map(out, {{"infection_prevalence", s.calibration->infection_prevalence},
                   {"other_infection_prevalence", s.calibration->other_infection_prevalence},
                   {"testing_prevalence", s.calibration->testing_prevalence}});
  } else {
    out << "none";
  }
  out << YAML::EndMap;

  out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "profile" << YAML::Value << std::string(profile_name(e.profile));
  out << YAML::Key << "population_size" << YAML::Value << e.population_size;
  out << YAML::Key << "n_tested" << YAML::Value << e.n_tested;
  out << YAML::Key << "n_controls" << YAML::Value << e.n_controls;
  out << YAML::Key << "replicates" << YAML::Value << e.replicates;
  out << YAML::Key << "bootstrap_b" << YAML::Value << e.bootstrap_b;
  out << YAML::Key << "ci_level" << YAML::Value << e.ci_level;
  out << YAML::Key << "methods" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto m : e.methods) out << std::string(analysis_method_name(m));
  out << YAML::EndSeq;
  out << YAML::Key << "base_seed" << YAML::Value << e.base_seed;
  out << YAML::Key << "threads" << YAML::Value << e.threads;
  out << YAML::Key << "fixed_population" << YAML::Value << e.fixed_population;
  out << YAML::Key << "truth_population_size" << YAML::Value << e.truth_population_size;
  out << YAML::Key << "q0" << YAML::Value;
  if (e.q0_override) {
    out << *e.q0_override;
  } else {
    out << "realized";
  }
  out << YAML::EndMap;

  if (config.out_dir) {
    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "out_dir" << YAML::Value << config.out_dir->string();
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace tndipw
