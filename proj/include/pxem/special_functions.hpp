#pragma once

// Special functions for the Student-t link: log-gamma, the regularized
// incomplete beta function, and the standard Student-t density and CDF
// (center 0, unit scale). All functions are pure and reentrant.

namespace pxem {

/// Degrees of freedom of a Student-t distribution. Always positive.
class Dof {
 public:
  /// Throws DomainError unless nu is finite and > 0.
  explicit Dof(double nu);

  double value() const noexcept { return nu_; }

  friend bool operator==(const Dof&, const Dof&) = default;

 private:
  double nu_;
};

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// ln B(a, b) for a, b > 0.
double log_beta(double a, double b);

/// ln I_x(a, b), the log of the regularized incomplete beta function.
/// Requires 0 <= x <= 1 and a, b > 0; returns -inf at x = 0.
double log_inc_beta_reg(double x, double a, double b);

/// I_x(a, b).
double inc_beta_reg(double x, double a, double b);

double t_log_pdf(double x, Dof nu);
double t_pdf(double x, Dof nu);

/// ln P(T <= x). Accurate in both tails; x may be +-infinity.
double t_log_cdf(double x, Dof nu);

/// P(T <= x); exactly 0 at -inf and 1 at +inf.
double t_cdf(double x, Dof nu);

}  // namespace pxem
