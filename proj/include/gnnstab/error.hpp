#ifndef GNNSTAB_ERROR_HPP_
#define GNNSTAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gnnstab {

// Bad input: shape mismatch, asymmetry, out-of-range parameter.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative method hit its cap. Carries the last estimate so callers
// can decide whether it is still usable. The CLI maps this to exit code 1.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, double last_estimate)
        : std::runtime_error(what), last_estimate_(last_estimate) {}

    double last_estimate() const { return last_estimate_; }

  private:
    double last_estimate_;
};

// Training produced a non-finite loss or otherwise cannot continue.
class TrainingError : public std::runtime_error {
  public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gnnstab

#endif  // GNNSTAB_ERROR_HPP_
