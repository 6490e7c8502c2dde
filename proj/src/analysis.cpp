#include "mtdc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "mtdc/errors.hpp"

namespace mtdc {

namespace {

std::string join_nodes(const std::vector<int>& nodes) {
  std::ostringstream out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) out << ", ";
    out << nodes[i];
  }
  return out.str();
}

void check_sizes(const SystemParams& params, const LaplacianBundle& laplacian,
                 const Eigen::VectorXd* pm) {
  validate(params);
  if (laplacian.laplacian.rows() != params.n()) {
    throw ValidationError("laplacian is " +
                          std::to_string(laplacian.laplacian.rows()) +
                          "x" + std::to_string(laplacian.laplacian.cols()) +
                          " but the system has " + std::to_string(params.n()) +
                          " nodes");
  }
  if (pm != nullptr && pm->size() != params.n()) {
    throw ValidationError("disturbance vector has " +
                          std::to_string(pm->size()) + " entries, expected " +
                          std::to_string(params.n()));
  }
}

void require_balanced(const SystemParams& params) {
  if (balanced_nominals(params)) return;
  throw ValidationError(
      "nominal generation and injection are unbalanced at node(s) " +
      join_nodes(unbalanced_nodes(params)) +
      "; equilibrium analysis requires p_nom = p_inj_nom");
}

void require_flow_consistent(const SystemParams& params,
                             const LaplacianBundle& laplacian) {
  Eigen::VectorXd flows = params.v_nom * (laplacian.laplacian * params.v_ref);
  Eigen::VectorXd residual = params.p_inj_nom - flows;
  double scale = std::max(1.0, flows.cwiseAbs().maxCoeff());
  int worst = 0;
  double worst_abs = residual.cwiseAbs().maxCoeff(&worst);
  if (worst_abs > 1e-6 * scale) {
    throw ValidationError(
        "nominal injections are inconsistent with the line flows induced by "
        "the voltage references (worst mismatch " +
        std::to_string(worst_abs) + " p.u. at node " +
        std::to_string(worst + 1) +
        "); equilibrium analysis requires p_inj_nom = v_nom * L * v_ref");
  }
}

void require_uniform(const SystemParams& params) {
  if (uniform_gains(params)) return;
  throw ValidationError("gains differ from node 1 at node(s) " +
                        join_nodes(nonuniform_gain_nodes(params)) +
                        "; spectral analysis requires uniform gains");
}

/// Coefficient matrix of the steady-state system in the header comment of
/// solve_equilibrium.
Eigen::MatrixXd steady_matrix(const SystemParams& params,
                              const LaplacianBundle& laplacian) {
  const int n = params.n();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n).diagonal() =
      -(params.omega_gain + params.droop_gain);
  g.topRightCorner(n, n).diagonal() = params.voltage_gain;
  g.bottomLeftCorner(n, n).diagonal() = params.omega_gain;
  g.bottomRightCorner(n, n) = -params.v_nom * laplacian.laplacian;
  g.bottomRightCorner(n, n).diagonal() -= params.voltage_gain;
  return g;
}

bool within_slack(double achieved, double bound) {
  return achieved <= bound * (1.0 + 1e-12) + 1e-15;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x + 0.0);  // +0.0 drops the sign of -0
  return buf;
}

std::string fmt(const Eigen::VectorXd& v) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out << ", ";
    out << fmt(v(i));
  }
  return out.str();
}

std::string fmt(const Eigen::VectorXcd& v) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out << ", ";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.9g%+.9gi", v(i).real(), v(i).imag());
    out << buf;
  }
  return out.str();
}

const char* yn(bool b) { return b ? "yes" : "no"; }

}  // namespace

EquilibriumResult solve_equilibrium(const SystemParams& params,
                                    const LaplacianBundle& laplacian,
                                    const Eigen::VectorXd& pm) {
  check_sizes(params, laplacian, &pm);
  require_balanced(params);
  require_flow_consistent(params, laplacian);

  const int n = params.n();
  Eigen::MatrixXd g = steady_matrix(params, laplacian);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
  rhs.head(n) = -pm;

  Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(g).solve(rhs);
  double residual = (g * x - rhs).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, pm.cwiseAbs().maxCoeff());
  if (!x.allFinite() || residual > 1e-9 * scale) {
    throw NumericalError(
        "steady-state solve failed (residual " + std::to_string(residual) +
        "); the closed loop appears singular or extremely ill-conditioned");
  }

  EquilibriumResult result;
  result.omega_hat = x.head(n);
  result.v_hat = x.tail(n);
  result.pdroop = -params.droop_gain.cwiseProduct(result.omega_hat);
  result.residual_norm = residual;
  return result;
}

SpectralEquilibriumResult spectral_equilibrium(const SystemParams& params,
                                               const LaplacianBundle& laplacian,
                                               const Eigen::VectorXd& pm) {
  check_sizes(params, laplacian, &pm);
  require_balanced(params);
  require_flow_consistent(params, laplacian);
  require_uniform(params);

  const int n = params.n();
  const double kw = params.omega_gain(0);
  const double kd = params.droop_gain(0);
  const double kv = params.voltage_gain(0);
  const double c1 = (kw + kd) * params.v_nom / kw;
  const double c2 = kd * kv / kw;

  Eigen::MatrixXd a1 = c1 * laplacian.laplacian;
  a1.diagonal().array() += c2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a1);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of A_1 did not converge");
  }

  SpectralEquilibriumResult result;
  result.a1_eigenvalues = eig.eigenvalues();
  result.a1_eigenvectors = eig.eigenvectors();
  result.coefficients =
      (result.a1_eigenvectors.transpose() * pm).cwiseQuotient(
          result.a1_eigenvalues);

  EquilibriumResult& eq = result.equilibrium;
  eq.v_hat = result.a1_eigenvectors * result.coefficients;
  eq.omega_hat = (kv * eq.v_hat + pm) / (kw + kd);
  eq.pdroop = -kd * eq.omega_hat;

  Eigen::MatrixXd g = steady_matrix(params, laplacian);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
  rhs.head(n) = -pm;
  Eigen::VectorXd x(2 * n);
  x << eq.omega_hat, eq.v_hat;
  eq.residual_norm = (g * x - rhs).cwiseAbs().maxCoeff();
  return result;
}

CertificateReport certify_stability(const SystemParams& params,
                                    const LaplacianBundle& laplacian) {
  check_sizes(params, laplacian, nullptr);
  const int n = params.n();

  Eigen::VectorXd ratio = params.omega_gain.cwiseQuotient(params.voltage_gain);
  Eigen::MatrixXd q1 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  q1.topLeftCorner(n, n).diagonal() =
      ratio.cwiseProduct(params.omega_gain + params.droop_gain);
  q1.topRightCorner(n, n).diagonal() = -params.omega_gain;
  q1.bottomLeftCorner(n, n).diagonal() = -params.omega_gain;
  q1.bottomRightCorner(n, n) = params.v_nom * laplacian.laplacian;
  q1.bottomRightCorner(n, n).diagonal() += params.voltage_gain;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> q1_eig(q1);
  if (q1_eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of Q_1 did not converge");
  }

  CertificateReport report;
  report.q1_eigenvalues = q1_eig.eigenvalues();

  // Judge definiteness on the Jacobi-scaled matrix: the raw spectrum of Q_1
  // is graded by up to ~15 decades across admissible gain ranges, which a
  // relative eigenvalue threshold cannot distinguish from indefiniteness.
  if ((q1.diagonal().array() <= 0.0).any()) {
    report.q1_positive_definite = false;
  } else {
    Eigen::VectorXd d = q1.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd scaled = d.asDiagonal() * q1 * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> scaled_eig(scaled);
    if (scaled_eig.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition of Q_1 did not converge");
    }
    double min_eig = scaled_eig.eigenvalues()(0);
    double max_eig = scaled_eig.eigenvalues()(2 * n - 1);
    report.q1_positive_definite = max_eig > 0.0 && min_eig > 1e-10 * max_eig;
  }
  report.schur_matrix_eigenvalues =
      ratio.cwiseProduct(params.droop_gain);

  Eigen::MatrixXd a = assemble_closed_loop(params, laplacian).a;
  Eigen::EigenSolver<Eigen::MatrixXd> a_eig(a);
  if (a_eig.info() != Eigen::Success) {
    throw NumericalError(
        "eigendecomposition of the closed-loop matrix did not converge");
  }
  report.a_eigenvalues = a_eig.eigenvalues();
  std::sort(report.a_eigenvalues.data(),
            report.a_eigenvalues.data() + report.a_eigenvalues.size(),
            [](const std::complex<double>& lhs,
               const std::complex<double>& rhs) {
              if (lhs.real() != rhs.real()) return lhs.real() < rhs.real();
              return lhs.imag() < rhs.imag();
            });
  report.spectral_abscissa = report.a_eigenvalues.real().maxCoeff();
  return report;
}

BoundsReport theorem2_bounds(const SystemParams& params,
                             const LaplacianBundle& laplacian,
                             const Eigen::VectorXd& pm) {
  SpectralEquilibriumResult spectral =
      spectral_equilibrium(params, laplacian, pm);
  const EquilibriumResult& eq = spectral.equilibrium;

  const int n = params.n();
  const double kw = params.omega_gain(0);
  const double kd = params.droop_gain(0);
  const double kv = params.voltage_gain(0);
  const double vnom = params.v_nom;
  const double inv_sum = laplacian.inverse_eigenvalue_sum;
  const double max_abs = n > 0 ? pm.cwiseAbs().maxCoeff() : 0.0;
  const double abs_sum = std::abs(pm.sum());
  const double share_term = (n - 1) + (kv / vnom) * inv_sum;

  BoundsReport report;
  report.e_droop = kd * max_abs / (kd + kw) * share_term;
  report.e_v = kw * abs_sum / (n * kd * kv) +
               kw * max_abs * inv_sum / ((kw + kd) * vnom);
  report.e_omega = abs_sum / (n * kd) + max_abs / (kd + kw) * share_term;

  Eigen::VectorXd fair_share =
      Eigen::VectorXd::Constant(n, pm.sum() / n);
  report.achieved_droop_error =
      (eq.pdroop + fair_share).cwiseAbs().maxCoeff();
  report.achieved_v_error = eq.v_hat.cwiseAbs().maxCoeff();
  report.achieved_omega_error = eq.omega_hat.cwiseAbs().maxCoeff();
  report.satisfied_droop =
      within_slack(report.achieved_droop_error, report.e_droop);
  report.satisfied_v = within_slack(report.achieved_v_error, report.e_v);
  report.satisfied_omega =
      within_slack(report.achieved_omega_error, report.e_omega);
  report.fairness_spread =
      eq.pdroop.maxCoeff() - eq.pdroop.minCoeff();
  return report;
}

ObjectiveReport check_objective(const EquilibriumResult& equilibrium,
                                const Eigen::VectorXd& pm,
                                const BoundsReport& bounds) {
  const Eigen::Index n = equilibrium.omega_hat.size();
  if (pm.size() != n || equilibrium.v_hat.size() != n ||
      equilibrium.pdroop.size() != n) {
    throw ValidationError(
        "equilibrium and disturbance vectors have mismatched sizes");
  }
  ObjectiveReport report;
  Eigen::VectorXd fair_share =
      Eigen::VectorXd::Constant(n, pm.sum() / static_cast<double>(n));
  report.worst_droop =
      (equilibrium.pdroop + fair_share).cwiseAbs().maxCoeff();
  report.worst_v = equilibrium.v_hat.cwiseAbs().maxCoeff();
  report.worst_omega = equilibrium.omega_hat.cwiseAbs().maxCoeff();
  report.droop_ok = within_slack(report.worst_droop, bounds.e_droop);
  report.v_ok = within_slack(report.worst_v, bounds.e_v);
  report.omega_ok = within_slack(report.worst_omega, bounds.e_omega);
  return report;
}

std::string to_text(const EquilibriumResult& result) {
  std::ostringstream out;
  out << "omega_hat: " << fmt(result.omega_hat) << "\n"
      << "v_hat: " << fmt(result.v_hat) << "\n"
      << "pdroop: " << fmt(result.pdroop) << "\n"
      << "residual_norm: " << fmt(result.residual_norm) << "\n";
  return out.str();
}

std::string to_text(const CertificateReport& report) {
  std::ostringstream out;
  out << "q1_eigenvalues: " << fmt(report.q1_eigenvalues) << "\n"
      << "q1_positive_definite: " << yn(report.q1_positive_definite) << "\n"
      << "schur_matrix_eigenvalues: " << fmt(report.schur_matrix_eigenvalues)
      << "\n"
      << "a_eigenvalues: " << fmt(report.a_eigenvalues) << "\n"
      << "spectral_abscissa: " << fmt(report.spectral_abscissa) << "\n";
  return out.str();
}

std::string to_text(const BoundsReport& report) {
  std::ostringstream out;
  out << "e_droop: " << fmt(report.e_droop) << "\n"
      << "achieved_droop_error: " << fmt(report.achieved_droop_error) << "\n"
      << "satisfied_droop: " << yn(report.satisfied_droop) << "\n"
      << "e_v: " << fmt(report.e_v) << "\n"
      << "achieved_v_error: " << fmt(report.achieved_v_error) << "\n"
      << "satisfied_v: " << yn(report.satisfied_v) << "\n"
      << "e_omega: " << fmt(report.e_omega) << "\n"
      << "achieved_omega_error: " << fmt(report.achieved_omega_error) << "\n"
      << "satisfied_omega: " << yn(report.satisfied_omega) << "\n"
      << "fairness_spread: " << fmt(report.fairness_spread) << "\n";
  return out.str();
}

std::string to_text(const ObjectiveReport& report) {
  std::ostringstream out;
  out << "worst_droop: " << fmt(report.worst_droop) << "\n"
      << "droop_ok: " << yn(report.droop_ok) << "\n"
      << "worst_v: " << fmt(report.worst_v) << "\n"
      << "v_ok: " << yn(report.v_ok) << "\n"
      << "worst_omega: " << fmt(report.worst_omega) << "\n"
      << "omega_ok: " << yn(report.omega_ok) << "\n";
  return out.str();
}

std::string certificate_csv_header() {
  return "q1_min_eigenvalue,q1_positive_definite,schur_min_eigenvalue,"
         "spectral_abscissa";
}

std::string certificate_csv_row(const CertificateReport& report) {
  std::ostringstream out;
  out << fmt(report.q1_eigenvalues(0)) << ','
      << (report.q1_positive_definite ? 1 : 0) << ','
      << fmt(report.schur_matrix_eigenvalues.minCoeff()) << ','
      << fmt(report.spectral_abscissa);
  return out.str();
}

std::string bounds_csv_header() {
  return "e_droop,e_v,e_omega,achieved_droop_error,achieved_v_error,"
         "achieved_omega_error,satisfied_droop,satisfied_v,satisfied_omega,"
         "fairness_spread";
}

std::string bounds_csv_row(const BoundsReport& report) {
  std::ostringstream out;
  out << fmt(report.e_droop) << ',' << fmt(report.e_v) << ','
      << fmt(report.e_omega) << ',' << fmt(report.achieved_droop_error) << ','
      << fmt(report.achieved_v_error) << ','
      << fmt(report.achieved_omega_error) << ','
      << (report.satisfied_droop ? 1 : 0) << ','
      << (report.satisfied_v ? 1 : 0) << ','
      << (report.satisfied_omega ? 1 : 0) << ','
      << fmt(report.fairness_spread);
  return out.str();
}

}  // namespace mtdc
