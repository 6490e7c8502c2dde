#ifndef MTDC_GRID_HPP
#define MTDC_GRID_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace mtdc {

/// A DC line between two converter nodes. Indices are 0-based. The series
/// reactance is carried along as metadata for scenario round-trips but does
/// not enter the static network model.
struct Line {
  int from = 0;
  int to = 0;
  double resistance = 0.0;
  std::optional<double> reactance;
};

/// Node/line description of the MTDC network.
struct GridTopology {
  int node_count = 0;
  std::vector<Line> lines;
};

/// Conductance Laplacian of a topology together with its spectral data.
struct LaplacianBundle {
  Eigen::MatrixXd laplacian;       // n x n, symmetric PSD
  Eigen::MatrixXd incidence;       // n x m, column per line, +1 at from, -1 at to
  Eigen::VectorXd conductances;    // m, 1/R per line
  Eigen::VectorXd eigenvalues;     // ascending, eigenvalues[0] ~ 0
  Eigen::MatrixXd eigenvectors;    // orthonormal columns matching eigenvalues
  double inverse_eigenvalue_sum = 0.0;  // sum of 1/lambda_i over nonzero modes
  double lambda2 = 0.0;            // algebraic connectivity
};

/// Throws ValidationError if the topology is malformed: no nodes, line
/// endpoints out of range or equal, non-positive resistance, or a
/// duplicate line in either orientation. Messages cite 1-based nodes.
void validate(const GridTopology& topology);

/// Labels each node with its connected component (labels start at 0, in
/// order of first appearance) and returns the component count.
int connectivity_check(const GridTopology& topology,
                       std::vector<int>& labels);

/// Validates, requires connectivity, then assembles the weighted Laplacian
/// with edge weights 1/R and its full eigendecomposition. Eigenvalues below
/// 1e-9 relative to the largest count as the zero mode and are excluded
/// from inverse_eigenvalue_sum.
LaplacianBundle build_laplacian(const GridTopology& topology);

}  // namespace mtdc

#endif  // MTDC_GRID_HPP
