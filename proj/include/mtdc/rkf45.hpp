#ifndef MTDC_RKF45_HPP
#define MTDC_RKF45_HPP

#include <Eigen/Dense>
#include <functional>

namespace mtdc {

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y,
                                  Eigen::VectorXd& dydt)>;

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_max = 0.1;
  double dt_min = 1e-12;
  double dt_init = 0.0;  // 0 selects the starting step automatically
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

/// Invoked after every accepted step with both endpoints and their
/// derivatives, enabling dense output on [t0, t1].
using StepSink =
    std::function<void(double t0, const Eigen::VectorXd& y0,
                       const Eigen::VectorXd& f0, double t1,
                       const Eigen::VectorXd& y1, const Eigen::VectorXd& f1)>;

/// Cubic Hermite interpolant through (t0, y0, f0) and (t1, y1, f1),
/// evaluated at t in [t0, t1].
Eigen::VectorXd hermite_interpolate(double t0, const Eigen::VectorXd& y0,
                                    const Eigen::VectorXd& f0, double t1,
                                    const Eigen::VectorXd& y1,
                                    const Eigen::VectorXd& f1, double t);

/// Integrates y' = rhs(t, y) from t_begin to t_end with the embedded
/// Fehlberg 4(5) pair, propagating the 4th-order member and using the
/// 5th-order member for error control. Steps never exceed dt_max; the
/// first step is dt_init when positive. Error weights are
/// atol + rtol * |y| componentwise with an RMS norm. Throws
/// NumericalError when step control pushes the step below dt_min.
/// Returns the state at t_end.
Eigen::VectorXd integrate_rkf45(const OdeRhs& rhs, double t_begin,
                                double t_end, const Eigen::VectorXd& y0,
                                const IntegratorOptions& options,
                                IntegratorStats* stats = nullptr,
                                const StepSink& sink = {});

}  // namespace mtdc

#endif  // MTDC_RKF45_HPP
