#ifndef MTDC_ERRORS_HPP
#define MTDC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mtdc {

/// Invalid input data: bad topology, malformed scenario file, violated
/// model assumption. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown: singular system, voltage collapse, step-size
/// underflow. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mtdc

#endif  // MTDC_ERRORS_HPP
