#ifndef MTDC_TESTS_SUPPORT_HPP
#define MTDC_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <utility>

#include "mtdc/grid.hpp"
#include "mtdc/plant.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Eigen::VectorXd uniform_vector(Rng& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

/// Random spanning tree plus optional extra lines; connected by
/// construction.
inline mtdc::GridTopology random_connected_topology(
    Rng& rng, int n, double extra_edge_prob = 0.25) {
  mtdc::GridTopology topo;
  topo.node_count = n;
  std::set<std::pair<int, int>> used;
  for (int i = 1; i < n; ++i) {
    int parent = uniform_int(rng, 0, i - 1);
    topo.lines.push_back({parent, i, uniform(rng, 0.5, 2.0), std::nullopt});
    used.insert({parent, i});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (used.count({i, j}) != 0) continue;
      if (uniform(rng, 0.0, 1.0) < extra_edge_prob) {
        topo.lines.push_back({i, j, uniform(rng, 0.5, 2.0), std::nullopt});
      }
    }
  }
  return topo;
}

/// Uniform gains, balanced nominals, references consistent with zero
/// nominal line flows.
inline mtdc::SystemParams random_uniform_params(Rng& rng, int n) {
  mtdc::SystemParams p;
  p.inertia = uniform_vector(rng, n, 0.5, 5.0);
  p.capacitance = uniform_vector(rng, n, 0.1, 1.0);
  const double kw = log_uniform(rng, 1.0, 10.0);
  const double kd = log_uniform(rng, 1.0, 10.0);
  const double kv = log_uniform(rng, 5.0, 50.0);
  p.omega_gain = Eigen::VectorXd::Constant(n, kw);
  p.droop_gain = Eigen::VectorXd::Constant(n, kd);
  p.voltage_gain = Eigen::VectorXd::Constant(n, kv);
  p.v_nom = uniform(rng, 0.9, 1.1);
  p.v_ref = Eigen::VectorXd::Constant(n, p.v_nom);
  p.p_nom = Eigen::VectorXd::Zero(n);
  p.p_inj_nom = Eigen::VectorXd::Zero(n);
  p.omega_ref = 1.0;
  return p;
}

/// Per-node gain spreads on top of random_uniform_params.
inline mtdc::SystemParams random_params(Rng& rng, int n) {
  mtdc::SystemParams p = random_uniform_params(rng, n);
  p.omega_gain = uniform_vector(rng, n, 1.0, 10.0);
  p.droop_gain = uniform_vector(rng, n, 1.0, 10.0);
  p.voltage_gain = uniform_vector(rng, n, 5.0, 50.0);
  return p;
}

/// Perturbs the voltage references and re-dispatches the nominal
/// injections so the references stay an equilibrium.
inline void apply_nonuniform_refs(Rng& rng, mtdc::SystemParams& p,
                                  const mtdc::LaplacianBundle& lap) {
  const int n = p.n();
  p.v_ref = p.v_nom * Eigen::VectorXd::Ones(n) +
            uniform_vector(rng, n, -0.02, 0.02);
  p.p_inj_nom = p.v_nom * (lap.laplacian * p.v_ref);
  p.p_nom = p.p_inj_nom;
}

inline Eigen::VectorXd random_pm(Rng& rng, int n, double scale = 1.0) {
  return uniform_vector(rng, n, -scale, scale);
}

/// Matrix exponential reference for linear-model checks.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) { return a.exp(); }

/// Guaranteed exponential decay rate of the energy function: the smallest
/// generalized eigenvalue of (2 Q_1, P) with P the energy weight matrix,
/// so that W(t) <= W(0) exp(-mu t). Built independently from the library's
/// certificate code.
inline double decay_rate(const mtdc::SystemParams& p,
                         const Eigen::MatrixXd& laplacian) {
  const int n = p.n();
  Eigen::MatrixXd q1 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    q1(i, i) = p.omega_gain(i) / p.voltage_gain(i) *
               (p.omega_gain(i) + p.droop_gain(i));
    q1(i, n + i) = -p.omega_gain(i);
    q1(n + i, i) = -p.omega_gain(i);
  }
  q1.bottomRightCorner(n, n) = p.v_nom * laplacian;
  q1.bottomRightCorner(n, n).diagonal() += p.voltage_gain;

  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    weight(i, i) = p.omega_gain(i) * p.inertia(i) / p.voltage_gain(i);
    weight(n + i, n + i) = p.v_nom * p.capacitance(i);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      2.0 * q1, weight);
  return solver.eigenvalues()(0);
}

/// The bundled three-area reference system.
inline mtdc::GridTopology reference_topology() {
  mtdc::GridTopology topo;
  topo.node_count = 3;
  topo.lines = {{0, 1, 0.0015, 0.01},
                {0, 2, 0.0045, 0.03},
                {1, 2, 0.0015, 0.01}};
  return topo;
}

inline mtdc::SystemParams reference_params() {
  mtdc::SystemParams p;
  p.inertia = Eigen::VectorXd::Constant(3, 10.0);
  p.capacitance = Eigen::VectorXd::Constant(3, 0.1);
  p.omega_gain = Eigen::VectorXd::Constant(3, 501.0);
  p.droop_gain = Eigen::VectorXd::Constant(3, 667.0);
  p.voltage_gain = Eigen::VectorXd::Constant(3, 10.0);
  p.v_ref = Eigen::VectorXd::Ones(3);
  p.p_nom = Eigen::VectorXd::Zero(3);
  p.p_inj_nom = Eigen::VectorXd::Zero(3);
  return p;
}

/// Message of the exception thrown by f, or "" if it does not throw.
template <class F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace testsupport

#endif  // MTDC_TESTS_SUPPORT_HPP
