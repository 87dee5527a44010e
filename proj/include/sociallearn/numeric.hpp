#pragma once

#include <functional>
#include <limits>
#include <span>

namespace sociallearn {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Max-shifted log(sum(exp(x))). Returns -inf when every entry is -inf.
double log_sum_exp(std::span<const double> x);

// Shifts x in place so that log_sum_exp(x) == 0. Returns the removed
// normalizer, -inf if the row carried no mass (x is then left untouched).
double normalize_log(std::span<double> x);

struct Maximum {
  double argmax = 0.0;
  double value = 0.0;
};

// Golden-section search for the maximum of a unimodal function on [lo, hi].
// Stops when the bracket is narrower than x_tol.
Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                double x_tol);

// Maximizes a concave function over the half line starting at `origin`
// heading in `direction` (+1 or -1). The bracket doubles until f stops
// increasing or |x - origin| exceeds `limit`; `hit_limit` reports the latter.
struct HalfLineMaximum {
  Maximum max;
  bool hit_limit = false;
  double last_increment = 0.0;
};
HalfLineMaximum maximize_concave_half_line(const std::function<double(double)>& f, double origin,
                                           int direction, double initial_step, double limit,
                                           double x_tol);

// Adaptive Gauss-Kronrod quadrature with a relative tolerance. Throws
// Error(QuadratureNotConverged) when the error estimate stays above it.
double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol);

// Central finite difference.
double central_difference(const std::function<double(double)>& f, double x, double h);

}  // namespace sociallearn
