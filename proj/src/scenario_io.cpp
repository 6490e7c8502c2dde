#include "mtdc/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mtdc/errors.hpp"

namespace mtdc {

namespace {

constexpr const char* kWhitespace = " \t\r\f\v";

[[noreturn]] void fail(int line, const std::string& message) {
  throw ValidationError("line " + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& token, int line) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size()) fail(line, "'" + token + "' is not a number");
  return value;
}

int parse_positive_int(const std::string& token, int line, const char* what) {
  std::size_t pos = 0;
  long value = 0;
  try {
    value = std::stol(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size() || value <= 0 || value > 1000000) {
    fail(line, "'" + token + "' is not a valid " + what);
  }
  return static_cast<int>(value);
}

Eigen::VectorXd parse_vector(const std::vector<std::string>& tokens,
                             std::size_t first, int line) {
  Eigen::VectorXd values(tokens.size() - first);
  for (std::size_t i = first; i < tokens.size(); ++i) {
    values(static_cast<Eigen::Index>(i - first)) =
        parse_double(tokens[i], line);
  }
  return values;
}

struct RawVector {
  Eigen::VectorXd values;
  int line = 0;
  bool set = false;
};

struct RawScalar {
  double value = 0.0;
  int line = 0;
  bool set = false;
};

struct RawStep {
  double time = 0.0;
  Eigen::VectorXd pm;
  int line = 0;
};

struct Parser {
  bool strict = true;
  std::vector<std::string>* notices = nullptr;

  RawScalar nodes;
  std::vector<Line> lines;
  int first_reactance_line = 0;

  RawVector inertia, capacitance, k_omega, k_droop, k_v, v_ref, p_nom,
      p_inj_nom;
  RawScalar omega_ref, v_nom;

  RawVector initial;
  std::vector<RawStep> steps;

  RawScalar t_end_s, dt_max_s, output_grid_s, rtol, atol;
  RawScalar model;  // value unused; set flag + line
  std::string model_name;
  RawVector initial_omega, initial_v;

  void unknown_key(const std::string& key, const std::string& section,
                   int line) {
    std::string message =
        "unknown key '" + key + "' in [" + section + "]";
    if (strict) fail(line, message);
    notices->push_back("line " + std::to_string(line) + ": " + message +
                       ", ignored");
  }

  void set_scalar(RawScalar& slot, const std::string& key,
                  const std::vector<std::string>& tokens, int line) {
    if (slot.set) fail(line, "duplicate key '" + key + "'");
    if (tokens.size() != 2) fail(line, "'" + key + "' expects one value");
    slot.value = parse_double(tokens[1], line);
    slot.line = line;
    slot.set = true;
  }

  void set_vector(RawVector& slot, const std::string& key,
                  const std::vector<std::string>& tokens, int line) {
    if (slot.set) fail(line, "duplicate key '" + key + "'");
    if (tokens.size() < 2) fail(line, "'" + key + "' expects values");
    slot.values = parse_vector(tokens, 1, line);
    slot.line = line;
    slot.set = true;
  }

  void grid_key(const std::vector<std::string>& tokens, int line) {
    const std::string& key = tokens[0];
    if (key == "nodes") {
      if (nodes.set) fail(line, "duplicate key 'nodes'");
      if (tokens.size() != 2) fail(line, "'nodes' expects one value");
      nodes.value = parse_positive_int(tokens[1], line, "node count");
      nodes.line = line;
      nodes.set = true;
    } else if (key == "line") {
      if (tokens.size() != 4 && tokens.size() != 5) {
        fail(line, "'line' expects 'from to resistance_pu [reactance_pu]'");
      }
      Line entry;
      entry.from = parse_positive_int(tokens[1], line, "node index") - 1;
      entry.to = parse_positive_int(tokens[2], line, "node index") - 1;
      entry.resistance = parse_double(tokens[3], line);
      if (tokens.size() == 5) {
        entry.reactance = parse_double(tokens[4], line);
        if (first_reactance_line == 0) first_reactance_line = line;
      }
      lines.push_back(entry);
    } else {
      unknown_key(key, "grid", line);
    }
  }

  void params_key(const std::vector<std::string>& tokens, int line) {
    const std::string& key = tokens[0];
    RawVector* vec = key == "inertia"       ? &inertia
                     : key == "capacitance" ? &capacitance
                     : key == "k_omega"     ? &k_omega
                     : key == "k_droop"     ? &k_droop
                     : key == "k_v"         ? &k_v
                     : key == "v_ref"       ? &v_ref
                     : key == "p_nom"       ? &p_nom
                     : key == "p_inj_nom"   ? &p_inj_nom
                                            : nullptr;
    if (vec != nullptr) {
      set_vector(*vec, key, tokens, line);
    } else if (key == "omega_ref") {
      set_scalar(omega_ref, key, tokens, line);
    } else if (key == "v_nom") {
      set_scalar(v_nom, key, tokens, line);
    } else {
      unknown_key(key, "params", line);
    }
  }

  void disturbance_key(const std::vector<std::string>& tokens, int line) {
    const std::string& key = tokens[0];
    if (key == "initial") {
      set_vector(initial, key, tokens, line);
    } else if (key == "step") {
      if (tokens.size() < 3) {
        fail(line, "'step' expects 'time_s p_1 ... p_n'");
      }
      RawStep step;
      step.time = parse_double(tokens[1], line);
      step.pm = parse_vector(tokens, 2, line);
      step.line = line;
      steps.push_back(step);
    } else {
      unknown_key(key, "disturbance", line);
    }
  }

  void sim_key(const std::vector<std::string>& tokens, int line) {
    const std::string& key = tokens[0];
    if (key == "t_end_s") {
      set_scalar(t_end_s, key, tokens, line);
    } else if (key == "dt_max_s") {
      set_scalar(dt_max_s, key, tokens, line);
    } else if (key == "output_grid_s") {
      set_scalar(output_grid_s, key, tokens, line);
    } else if (key == "rtol") {
      set_scalar(rtol, key, tokens, line);
    } else if (key == "atol") {
      set_scalar(atol, key, tokens, line);
    } else if (key == "model") {
      if (model.set) fail(line, "duplicate key 'model'");
      if (tokens.size() != 2) fail(line, "'model' expects one value");
      if (tokens[1] != "linear" && tokens[1] != "nonlinear") {
        fail(line, "model must be 'linear' or 'nonlinear'");
      }
      model_name = tokens[1];
      model.line = line;
      model.set = true;
    } else if (key == "initial_omega") {
      set_vector(initial_omega, key, tokens, line);
    } else if (key == "initial_v") {
      set_vector(initial_v, key, tokens, line);
    } else {
      unknown_key(key, "sim", line);
    }
  }

  Eigen::VectorXd take_vector(const RawVector& slot, const char* key,
                              int n) const {
    if (slot.values.size() != n) {
      fail(slot.line, std::string("'") + key + "' has " +
                          std::to_string(slot.values.size()) +
                          " entries, expected " + std::to_string(n));
    }
    return slot.values;
  }

  Scenario build() const {
    std::vector<std::string> missing;
    if (!nodes.set) missing.push_back("nodes ([grid])");
    if (nodes.set && nodes.value >= 2 && lines.empty()) {
      missing.push_back("line ([grid])");
    }
    if (!inertia.set) missing.push_back("inertia ([params])");
    if (!capacitance.set) missing.push_back("capacitance ([params])");
    if (!k_omega.set) missing.push_back("k_omega ([params])");
    if (!k_droop.set) missing.push_back("k_droop ([params])");
    if (!t_end_s.set) missing.push_back("t_end_s ([sim])");
    if (!dt_max_s.set) missing.push_back("dt_max_s ([sim])");
    if (!missing.empty()) {
      std::string message = "missing required key(s): ";
      for (std::size_t i = 0; i < missing.size(); ++i) {
        if (i > 0) message += ", ";
        message += missing[i];
      }
      throw ValidationError(message);
    }

    const int n = static_cast<int>(nodes.value);
    Scenario scenario;
    scenario.topology.node_count = n;
    scenario.topology.lines = lines;

    SystemParams& p = scenario.params;
    p.inertia = take_vector(inertia, "inertia", n);
    p.capacitance = take_vector(capacitance, "capacitance", n);
    p.omega_gain = take_vector(k_omega, "k_omega", n);
    p.droop_gain = take_vector(k_droop, "k_droop", n);
    p.omega_ref = omega_ref.set ? omega_ref.value : 1.0;
    p.v_nom = v_nom.set ? v_nom.value : 1.0;
    if (k_v.set) {
      p.voltage_gain = take_vector(k_v, "k_v", n);
      scenario.k_v_explicit = true;
    } else {
      p.voltage_gain = Eigen::VectorXd::Constant(n, 10.0);
      scenario.k_v_explicit = false;
      notices->push_back(
          "k_v not given; defaulting the voltage gain to 10 on every node");
    }
    p.v_ref = v_ref.set ? take_vector(v_ref, "v_ref", n)
                        : Eigen::VectorXd::Constant(n, p.v_nom);
    p.p_nom = p_nom.set ? take_vector(p_nom, "p_nom", n)
                        : Eigen::VectorXd::Zero(n);
    p.p_inj_nom = p_inj_nom.set ? take_vector(p_inj_nom, "p_inj_nom", n)
                                : Eigen::VectorXd::Zero(n);

    if (initial.set) {
      scenario.disturbance.initial_pm = take_vector(initial, "initial", n);
    }
    for (const RawStep& step : steps) {
      if (step.pm.size() != n) {
        fail(step.line, "'step' has " + std::to_string(step.pm.size()) +
                            " power entries, expected " + std::to_string(n));
      }
      scenario.disturbance.steps.push_back({step.time, step.pm});
    }

    scenario.t_end = t_end_s.value;
    scenario.dt_max = dt_max_s.value;
    scenario.output_grid = output_grid_s.set ? output_grid_s.value : 0.01;
    scenario.rtol = rtol.set ? rtol.value : 1e-8;
    scenario.atol = atol.set ? atol.value : 1e-10;
    scenario.model =
        model.set && model_name == "nonlinear" ? ModelKind::nonlinear
                                               : ModelKind::linear;

    if (initial_omega.set != initial_v.set) {
      fail(initial_omega.set ? initial_omega.line : initial_v.line,
           "'initial_omega' and 'initial_v' must be given together");
    }
    if (initial_omega.set) {
      SystemState state;
      state.omega = take_vector(initial_omega, "initial_omega", n);
      state.voltage = take_vector(initial_v, "initial_v", n);
      scenario.initial_state = state;
    }

    if (first_reactance_line != 0) {
      notices->push_back(
          "line " + std::to_string(first_reactance_line) +
          ": reactances are carried as metadata and ignored by the DC model");
    }
    return scenario;
  }
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void append_vector_key(std::string& out, const char* key,
                       const Eigen::VectorXd& values) {
  out += key;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out += ' ';
    out += num(values(i));
  }
  out += '\n';
}

}  // namespace

ScenarioLoad load_scenario(std::istream& in, bool strict) {
  ScenarioLoad result;
  Parser parser;
  parser.strict = strict;
  parser.notices = &result.notices;

  std::string section;
  bool skip_section = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::size_t begin = raw.find_first_not_of(kWhitespace);
    if (begin == std::string::npos) continue;
    std::size_t end = raw.find_last_not_of(kWhitespace);
    std::string text = raw.substr(begin, end - begin + 1);

    if (text.front() == '[') {
      if (text.size() < 3 || text.back() != ']') {
        fail(lineno, "malformed section header '" + text + "'");
      }
      std::string name = text.substr(1, text.size() - 2);
      if (name == "grid" || name == "params" || name == "disturbance" ||
          name == "sim") {
        section = name;
        skip_section = false;
      } else {
        if (strict) fail(lineno, "unknown section '[" + name + "]'");
        result.notices.push_back("line " + std::to_string(lineno) +
                                 ": unknown section '[" + name +
                                 "]', ignored");
        skip_section = true;
      }
      continue;
    }
    if (skip_section) continue;
    if (section.empty()) {
      fail(lineno, "key before the first section header");
    }

    std::vector<std::string> tokens;
    std::istringstream splitter(text);
    std::string token;
    while (splitter >> token) tokens.push_back(token);

    if (section == "grid") {
      parser.grid_key(tokens, lineno);
    } else if (section == "params") {
      parser.params_key(tokens, lineno);
    } else if (section == "disturbance") {
      parser.disturbance_key(tokens, lineno);
    } else {
      parser.sim_key(tokens, lineno);
    }
  }

  result.scenario = parser.build();
  validate(result.scenario);
  return result;
}

ScenarioLoad load_scenario_file(const std::string& path, bool strict) {
  std::ifstream file(path);
  if (!file) {
    throw ValidationError("cannot open scenario file '" + path + "'");
  }
  try {
    return load_scenario(file, strict);
  } catch (const ValidationError& error) {
    throw ValidationError(path + ": " + error.what());
  }
}

std::string serialize_scenario(const Scenario& scenario) {
  std::string out;
  out += "[grid]\n";
  out += "nodes " + std::to_string(scenario.topology.node_count) + "\n";
  for (const Line& line : scenario.topology.lines) {
    out += "line " + std::to_string(line.from + 1) + ' ' +
           std::to_string(line.to + 1) + ' ' + num(line.resistance);
    if (line.reactance.has_value()) out += ' ' + num(*line.reactance);
    out += '\n';
  }

  const SystemParams& p = scenario.params;
  out += "\n[params]\n";
  append_vector_key(out, "inertia", p.inertia);
  append_vector_key(out, "capacitance", p.capacitance);
  append_vector_key(out, "k_omega", p.omega_gain);
  append_vector_key(out, "k_droop", p.droop_gain);
  if (scenario.k_v_explicit) append_vector_key(out, "k_v", p.voltage_gain);
  append_vector_key(out, "v_ref", p.v_ref);
  append_vector_key(out, "p_nom", p.p_nom);
  append_vector_key(out, "p_inj_nom", p.p_inj_nom);
  out += "omega_ref " + num(p.omega_ref) + "\n";
  out += "v_nom " + num(p.v_nom) + "\n";

  const Disturbance& dist = scenario.disturbance;
  if (dist.initial_pm.size() > 0 || !dist.steps.empty()) {
    out += "\n[disturbance]\n";
    if (dist.initial_pm.size() > 0) {
      append_vector_key(out, "initial", dist.initial_pm);
    }
    for (const Disturbance::Step& step : dist.steps) {
      out += "step " + num(step.time);
      for (Eigen::Index i = 0; i < step.pm.size(); ++i) {
        out += ' ' + num(step.pm(i));
      }
      out += '\n';
    }
  }

  out += "\n[sim]\n";
  out += "t_end_s " + num(scenario.t_end) + "\n";
  out += "dt_max_s " + num(scenario.dt_max) + "\n";
  out += "model ";
  out += scenario.model == ModelKind::nonlinear ? "nonlinear" : "linear";
  out += "\n";
  out += "output_grid_s " + num(scenario.output_grid) + "\n";
  out += "rtol " + num(scenario.rtol) + "\n";
  out += "atol " + num(scenario.atol) + "\n";
  if (scenario.initial_state.has_value()) {
    append_vector_key(out, "initial_omega", scenario.initial_state->omega);
    append_vector_key(out, "initial_v", scenario.initial_state->voltage);
  }
  return out;
}

}  // namespace mtdc
