#include "mtdc/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtdc/analysis.hpp"
#include "mtdc/errors.hpp"
#include "mtdc/scenario_io.hpp"
#include "mtdc/sim.hpp"

namespace mtdc {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

std::string fmt(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt(v(i));
  }
  return out;
}

Eigen::VectorXd parse_value_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::string token;
  std::istringstream stream(text);
  while (std::getline(stream, token, ',')) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != token.size()) {
      throw ValidationError(std::string(flag) + ": '" + token +
                            "' is not a number");
    }
    values.push_back(value);
  }
  if (values.empty()) {
    throw ValidationError(std::string(flag) + " expects at least one value");
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

void print_notices(const std::vector<std::string>& notices,
                   std::ostream& err) {
  for (const std::string& notice : notices) {
    err << "notice: " << notice << "\n";
  }
}

void require_explicit_k_v(const Scenario& scenario) {
  if (scenario.k_v_explicit) return;
  throw ValidationError(
      "the scenario leaves k_v at its default; steady-state bounds need an "
      "explicit voltage gain");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Primary frequency reserve sharing over an MTDC grid"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string pm_text;
  std::string param_name;
  std::string values_text;
  std::string traj_path;
  std::string figure;
  bool lax = false;

  CLI::App* cmd_simulate = app.add_subcommand(
      "simulate", "Integrate a scenario and emit the trajectory CSV");
  cmd_simulate->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  cmd_simulate->add_option("--out", out_path,
                           "Write the CSV here instead of stdout");
  cmd_simulate->add_flag("--lax", lax,
                         "Downgrade unknown scenario keys to notices");

  CLI::App* cmd_equilibrium = app.add_subcommand(
      "equilibrium", "Solve the steady state under a constant disturbance");
  cmd_equilibrium->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  cmd_equilibrium->add_option(
      "--pm", pm_text,
      "Comma-separated generation deviations (default: the scenario's final "
      "disturbance)");
  cmd_equilibrium->add_flag("--lax", lax,
                            "Downgrade unknown scenario keys to notices");

  CLI::App* cmd_certify = app.add_subcommand(
      "certify", "Evaluate the Lyapunov stability certificate");
  cmd_certify->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  cmd_certify->add_flag("--lax", lax,
                        "Downgrade unknown scenario keys to notices");

  CLI::App* cmd_bounds = app.add_subcommand(
      "bounds", "Check the steady-state error bounds");
  cmd_bounds->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  cmd_bounds->add_flag("--lax", lax,
                       "Downgrade unknown scenario keys to notices");

  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "Re-run certificate and bounds across one parameter");
  cmd_sweep->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  cmd_sweep
      ->add_option("--param", param_name,
                   "One of k_omega, k_droop, k_v, v_nom")
      ->required();
  cmd_sweep->add_option("--values", values_text, "Comma-separated values")
      ->required();
  cmd_sweep->add_flag("--lax", lax,
                      "Downgrade unknown scenario keys to notices");

  CLI::App* cmd_plotdata = app.add_subcommand(
      "plotdata", "Extract per-node plot series from a trajectory CSV");
  cmd_plotdata->add_option("trajectory", traj_path, "Trajectory CSV file")
      ->required();
  cmd_plotdata
      ->add_option("--figure", figure,
                   "Series to emit: freq, gen, inj, or volt")
      ->required()
      ->check(CLI::IsMember({"freq", "gen", "inj", "volt"}));

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("mtdc");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  argv.reserve(storage.size());
  for (std::string& arg : storage) argv.push_back(arg.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (*cmd_plotdata) {
    std::ifstream file(traj_path);
    if (!file) {
      throw ValidationError("cannot open trajectory file '" + traj_path +
                            "'");
    }
    TrajectoryTable table = read_trajectory_csv(file);
    const Eigen::MatrixXd& series = figure == "freq"  ? table.omega
                                    : figure == "gen" ? table.pdroop
                                    : figure == "inj" ? table.pinj
                                                      : table.v;
    for (int node = 0; node < table.n; ++node) {
      if (node > 0) out << "\n";
      out << "# " << figure << " node " << node + 1 << "\n";
      for (std::size_t row = 0; row < table.times.size(); ++row) {
        out << fmt(table.times[row]) << ' '
            << fmt(series(static_cast<Eigen::Index>(row), node)) << "\n";
      }
    }
    return 0;
  }

  ScenarioLoad load = load_scenario_file(scenario_path, !lax);
  print_notices(load.notices, err);
  const Scenario& scenario = load.scenario;
  const int n = scenario.params.n();

  if (*cmd_simulate) {
    Trajectory trajectory = simulate(scenario);
    if (!out_path.empty()) {
      std::ofstream file(out_path);
      if (!file) {
        throw ValidationError("cannot open output file '" + out_path + "'");
      }
      write_trajectory_csv(trajectory, file);
    } else {
      write_trajectory_csv(trajectory, out);
    }
    err << "integrator: " << trajectory.stats.accepted << " steps accepted, "
        << trajectory.stats.rejected << " rejected, "
        << trajectory.stats.rhs_evaluations << " rhs evaluations\n";
    return 0;
  }

  LaplacianBundle laplacian = build_laplacian(scenario.topology);

  if (*cmd_equilibrium) {
    Eigen::VectorXd pm = pm_text.empty()
                             ? scenario.disturbance.final_pm(n)
                             : parse_value_list(pm_text, "--pm");
    if (pm.size() != n) {
      throw ValidationError("--pm has " + std::to_string(pm.size()) +
                            " entries, expected " + std::to_string(n));
    }
    EquilibriumResult eq = solve_equilibrium(scenario.params, laplacian, pm);
    out << "pm: " << fmt(pm) << "\n" << to_text(eq);
    return 0;
  }

  if (*cmd_certify) {
    CertificateReport report = certify_stability(scenario.params, laplacian);
    out << to_text(report);
    out << "VERDICT: " << (report.q1_positive_definite ? "STABLE" : "UNSTABLE")
        << "\n";
    return 0;
  }

  if (*cmd_bounds) {
    require_explicit_k_v(scenario);
    Eigen::VectorXd pm = scenario.disturbance.final_pm(n);
    BoundsReport report = theorem2_bounds(scenario.params, laplacian, pm);
    bool ok = report.satisfied_droop && report.satisfied_v &&
              report.satisfied_omega;
    out << "pm: " << fmt(pm) << "\n" << to_text(report);
    out << "VERDICT: BOUNDS " << (ok ? "SATISFIED" : "VIOLATED") << "\n";
    return 0;
  }

  // sweep
  if (param_name != "k_omega" && param_name != "k_droop" &&
      param_name != "k_v" && param_name != "v_nom") {
    throw ValidationError(
        "--param must be one of k_omega, k_droop, k_v, v_nom");
  }
  if (param_name != "k_v") require_explicit_k_v(scenario);
  Eigen::VectorXd values = parse_value_list(values_text, "--values");
  Eigen::VectorXd pm = scenario.disturbance.final_pm(n);

  out << "param,value," << certificate_csv_header() << ','
      << bounds_csv_header() << "\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    SystemParams params = scenario.params;
    double value = values(i);
    if (param_name == "k_omega") {
      params.omega_gain.setConstant(value);
    } else if (param_name == "k_droop") {
      params.droop_gain.setConstant(value);
    } else if (param_name == "k_v") {
      params.voltage_gain.setConstant(value);
    } else {
      params.v_nom = value;
    }
    CertificateReport certificate = certify_stability(params, laplacian);
    BoundsReport bounds = theorem2_bounds(params, laplacian, pm);
    out << param_name << ',' << fmt(value) << ','
        << certificate_csv_row(certificate) << ',' << bounds_csv_row(bounds)
        << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ValidationError& error) {
    err << "error: " << error.what() << "\n";
    return 1;
  } catch (const NumericalError& error) {
    err << "numerical error: " << error.what() << "\n";
    return 2;
  } catch (const std::exception& error) {
    err << "internal error: " << error.what() << "\n";
    return 2;
  }
}

}  // namespace mtdc
