#include "sociallearn/numeric.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sociallearn/error.hpp"

namespace sociallearn {

double log_sum_exp(std::span<const double> x) {
  double hi = kNegInf;
  for (double v : x) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  if (hi == kPosInf) return kPosInf;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

double normalize_log(std::span<double> x) {
  const double z = log_sum_exp(x);
  if (z == kNegInf) return z;
  for (double& v : x) v -= z;
  return z;
}

Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                double x_tol) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (std::abs(b - a) > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    // Bracket stops shrinking once it is a few ulps wide.
    if (c == d) break;
  }
  Maximum best{c, fc};
  if (fd > best.value) best = {d, fd};
  for (double end : {lo, hi}) {
    const double fe = f(end);
    if (fe > best.value) best = {end, fe};
  }
  return best;
}

HalfLineMaximum maximize_concave_half_line(const std::function<double(double)>& f, double origin,
                                           int direction, double initial_step, double limit,
                                           double x_tol) {
  const double dir = direction >= 0 ? 1.0 : -1.0;
  double prev_offset = 0.0;
  double prev_value = f(origin);
  double offset = initial_step;
  double value = f(origin + dir * offset);
  HalfLineMaximum out;
  double before_prev = prev_offset;
  while (value > prev_value) {
    if (offset >= limit) {
      out.hit_limit = true;
      out.last_increment = value - prev_value;
      out.max = {origin + dir * offset, value};
      return out;
    }
    before_prev = prev_offset;
    prev_offset = offset;
    prev_value = value;
    offset *= 2.0;
    value = f(origin + dir * offset);
  }
  // The maximum lies in [before_prev, offset].
  const double a = origin + dir * before_prev;
  const double b = origin + dir * offset;
  out.max = golden_section_maximize(f, std::min(a, b), std::max(a, b), x_tol);
  return out;
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  double l1 = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > std::max(rel_tol * l1, 1e-300) * 10.0) {
    throw Error(ErrorCode::QuadratureNotConverged,
                "estimated error " + std::to_string(error) + " on integral " + std::to_string(value));
  }
  return value;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace sociallearn
