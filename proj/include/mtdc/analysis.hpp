#ifndef MTDC_ANALYSIS_HPP
#define MTDC_ANALYSIS_HPP

#include <Eigen/Dense>
#include <string>

#include "mtdc/grid.hpp"
#include "mtdc/plant.hpp"

namespace mtdc {

/// Steady-state deviations and droop response for a constant disturbance.
struct EquilibriumResult {
  Eigen::VectorXd omega_hat;  // frequency deviations
  Eigen::VectorXd v_hat;      // voltage deviations
  Eigen::VectorXd pdroop;     // droop powers at the equilibrium
  double residual_norm = 0.0;
};

/// Equilibrium computed through the eigendecomposition of
/// A_1 = ((k_omega + k_droop) v_nom / k_omega) L
///     + (k_droop k_v / k_omega) I, plus the decomposition itself.
struct SpectralEquilibriumResult {
  EquilibriumResult equilibrium;
  Eigen::VectorXd a1_eigenvalues;   // ascending
  Eigen::MatrixXd a1_eigenvectors;  // orthonormal columns
  Eigen::VectorXd coefficients;     // a_i = v_i' pm / lambda_i
};

/// Stability certificate: spectrum of the Lyapunov decrease matrix Q_1,
/// its Schur-complement diagonal, and the closed-loop spectrum.
struct CertificateReport {
  Eigen::VectorXd q1_eigenvalues;  // ascending
  bool q1_positive_definite = false;
  Eigen::VectorXd schur_matrix_eigenvalues;  // per node, k_omega k_droop / k_v
  Eigen::VectorXcd a_eigenvalues;
  double spectral_abscissa = 0.0;
};

/// Provable steady-state error bounds next to the errors the equilibrium
/// actually achieves.
struct BoundsReport {
  double e_droop = 0.0;
  double e_v = 0.0;
  double e_omega = 0.0;
  double achieved_droop_error = 0.0;
  double achieved_v_error = 0.0;
  double achieved_omega_error = 0.0;
  bool satisfied_droop = false;
  bool satisfied_v = false;
  bool satisfied_omega = false;
  double fairness_spread = 0.0;  // max pairwise droop-power gap
};

/// The three fair-sharing/deviation inequalities evaluated at an
/// equilibrium against caller-supplied bounds.
struct ObjectiveReport {
  bool droop_ok = false;
  bool v_ok = false;
  bool omega_ok = false;
  double worst_droop = 0.0;
  double worst_v = 0.0;
  double worst_omega = 0.0;
};

/// Direct solve of the steady-state system
///   [ -(K^omega + K^droop)   K^V                    ] [omega_hat]   [-P^m]
///   [  K^omega              -(K^V + v_nom L)        ] [v_hat    ] = [ 0  ]
/// Requires balanced nominals and a dispatch consistent with the line
/// flows; throws ValidationError naming the offending nodes otherwise.
EquilibriumResult solve_equilibrium(const SystemParams& params,
                                    const LaplacianBundle& laplacian,
                                    const Eigen::VectorXd& pm);

/// Equilibrium through the spectral decomposition of A_1. Additionally
/// requires uniform gains; throws ValidationError naming nonuniform nodes.
SpectralEquilibriumResult spectral_equilibrium(const SystemParams& params,
                                               const LaplacianBundle& laplacian,
                                               const Eigen::VectorXd& pm);

/// Builds Q_1 = [[K^omega (K^V)^-1 (K^omega + K^droop), -K^omega],
///               [-K^omega, v_nom L + K^V]] and reports its spectrum, the
/// Schur diagonal K^omega (K^V)^-1 K^droop, and the spectrum of the
/// closed-loop matrix. Positive definiteness is judged on the Jacobi-scaled
/// matrix D Q_1 D, D = diag(Q_1)^(-1/2): smallest eigenvalue above 1e-10
/// times the largest. The raw spectrum is too graded for a relative test
/// across wide gain ranges.
CertificateReport certify_stability(const SystemParams& params,
                                    const LaplacianBundle& laplacian);

/// Steady-state error bounds
///   e_droop = (k_droop max|pm|/(k_droop + k_omega))
///             ((n-1) + (k_v/v_nom) sum_{i>=2} 1/lambda_i(L))
///   e_v     = k_omega |sum pm| / (n k_droop k_v)
///           + k_omega max|pm| sum_{i>=2} 1/lambda_i(L)
///             / ((k_omega + k_droop) v_nom)
///   e_omega = |sum pm| / (n k_droop)
///           + (max|pm|/(k_droop + k_omega))
///             ((n-1) + (k_v/v_nom) sum_{i>=2} 1/lambda_i(L))
/// and the achieved errors from the spectral equilibrium.
BoundsReport theorem2_bounds(const SystemParams& params,
                             const LaplacianBundle& laplacian,
                             const Eigen::VectorXd& pm);

/// Evaluates the fair-sharing and deviation inequalities at the supplied
/// equilibrium against the supplied bounds.
ObjectiveReport check_objective(const EquilibriumResult& equilibrium,
                                const Eigen::VectorXd& pm,
                                const BoundsReport& bounds);

/// Key-value text reports.
std::string to_text(const EquilibriumResult& result);
std::string to_text(const CertificateReport& report);
std::string to_text(const BoundsReport& report);
std::string to_text(const ObjectiveReport& report);

/// One-line CSV serialization for sweep aggregation.
std::string certificate_csv_header();
std::string certificate_csv_row(const CertificateReport& report);
std::string bounds_csv_header();
std::string bounds_csv_row(const BoundsReport& report);

}  // namespace mtdc

#endif  // MTDC_ANALYSIS_HPP
