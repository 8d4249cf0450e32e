#include "pxem/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pxem/errors.hpp"

namespace pxem {
namespace {

constexpr double kCfTolerance = 1e-14;
constexpr int kCfMaxIterations = 300;
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the continued fraction for I_x(a, b),
// valid (fast converging) for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kCfTolerance) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge (a=" +
                           std::to_string(a) + ", b=" + std::to_string(b) +
                           ", x=" + std::to_string(x) + ")");
}

// ln I_x(a, b) with the complement y = 1 - x supplied separately so that
// callers holding an accurate y (e.g. t^2 / (nu + t^2)) do not lose it.
double log_ibeta(double x, double y, double a, double b) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (y <= 0.0) return 0.0;
  const double log_front =
      a * std::log(x) + b * std::log(y) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return log_front + std::log(beta_continued_fraction(x, a, b)) - std::log(a);
  }
  const double log_complement =
      log_front + std::log(beta_continued_fraction(y, b, a)) - std::log(b);
  return std::log1p(-std::exp(log_complement));
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

Dof::Dof(double nu) : nu_(nu) {
  if (!(std::isfinite(nu) && nu > 0.0)) {
    throw DomainError("degrees of freedom must be finite and positive, got " +
                      std::to_string(nu));
  }
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma requires a finite positive argument");
  }
  // Lanczos approximation, g = 607/128, 14 terms.
  static constexpr std::array<double, 14> cof = {
      57.1562356658629235,     -59.5979603554754912,
      14.1360979747417471,     -0.491913816097620199,
      .339946499848118887e-4,  .465236289270485756e-4,
      -.983744753048795646e-4, .158088703224912494e-3,
      -.210264441724104883e-3, .217439618115212643e-3,
      -.164318106536763890e-3, .844182239838527433e-4,
      -.261908384015814087e-4, .368991826595316234e-5};
  double y = x;
  double tmp = x + 5.24218750000000000;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double ser = 0.999999999999997092;
  for (double c : cof) ser += c / ++y;
  return tmp + std::log(2.5066282746310005 * ser / x);
}

double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double log_inc_beta_reg(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta requires 0 <= x <= 1");
  if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("incomplete beta requires a > 0 and b > 0");
  }
  return log_ibeta(x, 1.0 - x, a, b);
}

double inc_beta_reg(double x, double a, double b) {
  return std::exp(log_inc_beta_reg(x, a, b));
}

double t_log_pdf(double x, Dof dof) {
  require_finite(x, "t density argument");
  const double nu = dof.value();
  return log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi) -
         0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double t_pdf(double x, Dof nu) { return std::exp(t_log_pdf(x, nu)); }

double t_log_cdf(double x, Dof dof) {
  if (std::isnan(x)) throw DomainError("t CDF argument is NaN");
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  if (x == -std::numeric_limits<double>::infinity()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double nu = dof.value();
  // P(|T| > |x|) = I_w(nu/2, 1/2) with w = nu / (nu + x^2).
  const double denom = nu + x * x;
  const double w = nu / denom;
  const double w_complement = x * x / denom;
  const double log_two_tail = log_ibeta(w, w_complement, 0.5 * nu, 0.5);
  if (x < 0.0) return std::log(0.5) + log_two_tail;
  return std::log1p(-0.5 * std::exp(log_two_tail));
}

double t_cdf(double x, Dof nu) { return std::exp(t_log_cdf(x, nu)); }

}  // namespace pxem
