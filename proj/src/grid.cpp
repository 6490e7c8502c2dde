#include "mtdc/grid.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "mtdc/errors.hpp"

namespace mtdc {

void validate(const GridTopology& topology) {
  const int n = topology.node_count;
  if (n < 1) {
    throw ValidationError("grid: need at least 1 node, got " +
                          std::to_string(n));
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < topology.lines.size(); ++k) {
    const Line& line = topology.lines[k];
    const std::string where = "grid: line " + std::to_string(k + 1);
    if (line.from < 0 || line.from >= n || line.to < 0 || line.to >= n) {
      throw ValidationError(where + " references node " +
                            std::to_string(std::max(line.from, line.to) + 1) +
                            " outside 1.." + std::to_string(n));
    }
    if (line.from == line.to) {
      throw ValidationError(where + " is a self-loop at node " +
                            std::to_string(line.from + 1));
    }
    if (line.resistance <= 0.0) {
      throw ValidationError(where + " has non-positive resistance " +
                            std::to_string(line.resistance));
    }
    auto key = std::minmax(line.from, line.to);
    if (!seen.insert(key).second) {
      throw ValidationError(where + " duplicates a line between nodes " +
                            std::to_string(key.first + 1) + " and " +
                            std::to_string(key.second + 1));
    }
  }
}

int connectivity_check(const GridTopology& topology,
                       std::vector<int>& labels) {
  const int n = topology.node_count;
  std::vector<std::vector<int>> adj(n);
  for (const Line& line : topology.lines) {
    adj[line.from].push_back(line.to);
    adj[line.to].push_back(line.from);
  }
  labels.assign(n, -1);
  int components = 0;
  for (int start = 0; start < n; ++start) {
    if (labels[start] >= 0) continue;
    std::queue<int> frontier;
    frontier.push(start);
    labels[start] = components;
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int v : adj[u]) {
        if (labels[v] < 0) {
          labels[v] = components;
          frontier.push(v);
        }
      }
    }
    ++components;
  }
  return components;
}

LaplacianBundle build_laplacian(const GridTopology& topology) {
  validate(topology);
  std::vector<int> labels;
  if (connectivity_check(topology, labels) != 1) {
    int witness = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != labels[0]) {
        witness = static_cast<int>(i);
        break;
      }
    }
    throw ValidationError(
        "grid: network is disconnected (node 1 and node " +
        std::to_string(witness + 1) + " lie in different components)");
  }

  const int n = topology.node_count;
  const int m = static_cast<int>(topology.lines.size());

  LaplacianBundle bundle;
  bundle.incidence = Eigen::MatrixXd::Zero(n, m);
  bundle.conductances = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    const Line& line = topology.lines[k];
    bundle.incidence(line.from, k) = 1.0;
    bundle.incidence(line.to, k) = -1.0;
    bundle.conductances(k) = 1.0 / line.resistance;
  }
  bundle.laplacian = bundle.incidence * bundle.conductances.asDiagonal() *
                     bundle.incidence.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(bundle.laplacian);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("grid: Laplacian eigendecomposition failed");
  }
  bundle.eigenvalues = solver.eigenvalues();
  bundle.eigenvectors = solver.eigenvectors();

  const double lambda_max = bundle.eigenvalues(n - 1);
  const double zero_cut = 1e-9 * std::max(lambda_max, 1.0);
  bundle.inverse_eigenvalue_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (bundle.eigenvalues(i) > zero_cut) {
      bundle.inverse_eigenvalue_sum += 1.0 / bundle.eigenvalues(i);
    }
  }
  bundle.lambda2 = n >= 2 ? bundle.eigenvalues(1) : 0.0;
  return bundle;
}

}  // namespace mtdc
