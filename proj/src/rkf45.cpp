#include "mtdc/rkf45.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtdc/errors.hpp"

namespace mtdc {

namespace {

// Fehlberg 4(5) tableau.
constexpr double kC2 = 1.0 / 4.0, kC3 = 3.0 / 8.0, kC4 = 12.0 / 13.0,
                 kC5 = 1.0, kC6 = 1.0 / 2.0;
constexpr double kA21 = 1.0 / 4.0;
constexpr double kA31 = 3.0 / 32.0, kA32 = 9.0 / 32.0;
constexpr double kA41 = 1932.0 / 2197.0, kA42 = -7200.0 / 2197.0,
                 kA43 = 7296.0 / 2197.0;
constexpr double kA51 = 439.0 / 216.0, kA52 = -8.0, kA53 = 3680.0 / 513.0,
                 kA54 = -845.0 / 4104.0;
constexpr double kA61 = -8.0 / 27.0, kA62 = 2.0, kA63 = -3544.0 / 2565.0,
                 kA64 = 1859.0 / 4104.0, kA65 = -11.0 / 40.0;
// 4th-order weights (propagated) and 5th-order weights (error control).
constexpr double kB41 = 25.0 / 216.0, kB43 = 1408.0 / 2565.0,
                 kB44 = 2197.0 / 4104.0, kB45 = -1.0 / 5.0;
constexpr double kB51 = 16.0 / 135.0, kB53 = 6656.0 / 12825.0,
                 kB54 = 28561.0 / 56430.0, kB55 = -9.0 / 50.0,
                 kB56 = 2.0 / 55.0;

double error_norm(const Eigen::VectorXd& diff, const Eigen::VectorXd& y_old,
                  const Eigen::VectorXd& y_new, double atol, double rtol) {
  double sum = 0.0;
  for (int i = 0; i < diff.size(); ++i) {
    const double sc =
        atol + rtol * std::max(std::abs(y_old(i)), std::abs(y_new(i)));
    const double r = diff(i) / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(diff.size()));
}

}  // namespace

Eigen::VectorXd hermite_interpolate(double t0, const Eigen::VectorXd& y0,
                                    const Eigen::VectorXd& f0, double t1,
                                    const Eigen::VectorXd& y1,
                                    const Eigen::VectorXd& f1, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (1.0 - 3.0 * s2 + 2.0 * s3) * y0 + (3.0 * s2 - 2.0 * s3) * y1 +
         h * ((s - 2.0 * s2 + s3) * f0 + (s3 - s2) * f1);
}

Eigen::VectorXd integrate_rkf45(const OdeRhs& rhs, double t_begin,
                                double t_end, const Eigen::VectorXd& y0,
                                const IntegratorOptions& options,
                                IntegratorStats* stats,
                                const StepSink& sink) {
  const double span = t_end - t_begin;
  if (!(span >= 0.0)) {
    throw ValidationError("integrator: t_end must not precede t_begin");
  }
  const double t_eps = 1e-14 * std::max(1.0, std::abs(t_end));
  if (span <= t_eps) {
    return y0;
  }

  IntegratorStats local;
  IntegratorStats& st = stats ? *stats : local;

  double t = t_begin;
  Eigen::VectorXd y = y0;
  Eigen::VectorXd f(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
      k5(y.size()), k6(y.size()), f_new(y.size());

  auto eval = [&](double ts, const Eigen::VectorXd& ys, Eigen::VectorXd& out) {
    try {
      rhs(ts, ys, out);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) +
                           " (during step starting at t = " +
                           std::to_string(t) + " s)");
    }
    ++st.rhs_evaluations;
  };

  eval(t, y, f);

  double dt;
  if (options.dt_init > 0.0) {
    dt = options.dt_init;
  } else {
    // Crude starting guess from the initial derivative scale.
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc = options.atol + options.rtol * std::abs(y(i));
      d0 += (y(i) / sc) * (y(i) / sc);
      d1 += (f(i) / sc) * (f(i) / sc);
    }
    d0 = std::sqrt(d0 / y.size());
    d1 = std::sqrt(d1 / y.size());
    dt = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }
  dt = std::clamp(dt, options.dt_min, std::min(options.dt_max, span));

  Eigen::VectorXd y4(y.size()), y5(y.size());
  while (t_end - t > t_eps) {
    bool clipped = false;
    double h = dt;
    if (t + h >= t_end - t_eps) {
      h = t_end - t;
      clipped = true;
    }

    // A trial stage may leave the model's domain (e.g. drive a voltage
    // non-positive) even when the true solution does not; treat that like
    // any other failed step and retry smaller. Only a failure at the
    // minimum step is final.
    double err = 0.0;
    bool stage_failed = false;
    try {
      eval(t + kC2 * h, y + h * (kA21 * f), k2);
      eval(t + kC3 * h, y + h * (kA31 * f + kA32 * k2), k3);
      eval(t + kC4 * h, y + h * (kA41 * f + kA42 * k2 + kA43 * k3), k4);
      eval(t + kC5 * h,
           y + h * (kA51 * f + kA52 * k2 + kA53 * k3 + kA54 * k4), k5);
      eval(t + kC6 * h,
           y + h * (kA61 * f + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5),
           k6);

      y4 = y + h * (kB41 * f + kB43 * k3 + kB44 * k4 + kB45 * k5);
      y5 = y + h * (kB51 * f + kB53 * k3 + kB54 * k4 + kB55 * k5 + kB56 * k6);

      err = error_norm(y5 - y4, y, y4, options.atol, options.rtol);
      if (!std::isfinite(err)) {
        err = 1e10;
      }
    } catch (const NumericalError&) {
      if (h <= options.dt_min * (1.0 + 1e-9)) {
        throw;
      }
      stage_failed = true;
    }
    if (stage_failed) {
      ++st.rejected;
      dt = std::max(0.1 * h, options.dt_min);
      continue;
    }

    if (err <= 1.0) {
      const double t_new = clipped ? t_end : t + h;
      eval(t_new, y4, f_new);
      if (sink) {
        sink(t, y, f, t_new, y4, f_new);
      }
      t = t_new;
      y.swap(y4);
      f.swap(f_new);
      ++st.accepted;
      const double factor =
          err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
      if (!clipped) {
        dt = h;
      }
      dt = std::clamp(dt * factor, options.dt_min, options.dt_max);
    } else {
      ++st.rejected;
      const double factor = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      const double dt_next = h * factor;
      if (dt_next < options.dt_min) {
        throw NumericalError(
            "integrator: step size fell below " +
            std::to_string(options.dt_min) + " s at t = " +
            std::to_string(t) + " s (problem too stiff for the tolerance)");
      }
      dt = dt_next;
    }
  }
  return y;
}

}  // namespace mtdc
