#pragma once

// Poisson-Binomial toy model.
//
//   Z | lambda        ~ Poisson(lambda)          (missing)
//   X | Z, lambda     ~ Binomial(Z, pi)          (observed, pi known)
//
// so X | lambda ~ Poisson(pi * lambda) and the MLE is X / pi. The expanded
// model activates pi as alpha in (0, 1) with null value alpha0 = pi and
// reduction lambda = (alpha / pi) * lambda_star.

#include <cstdint>
#include <span>
#include <vector>

namespace pxem {

struct ToyConfig {
  std::uint64_t x_obs = 0;
  double pi = 0.5;

  /// Throws PreconditionError unless 0 < pi < 1.
  void validate() const;
};

struct ToyParam {
  double lambda = 1.0;
};

struct ToyExpandedParam {
  double lambda_star = 1.0;
  double alpha = 0.5;
};

struct ToyEStats {
  double z_hat = 0.0;  // E(Z | X, lambda)
};

/// Smallest lambda returned by the M step when the imputed count is 0.
inline constexpr double kToyLambdaFloor = 1e-300;

ToyEStats toy_e_step(const ToyConfig& cfg, const ToyParam& p);
/// E step under the expanded imputation model: X + lambda_star (1 - alpha).
ToyEStats toy_expanded_e_step(const ToyConfig& cfg, const ToyExpandedParam& xp);
ToyParam toy_m_step(const ToyConfig& cfg, const ToyEStats& s);
ToyExpandedParam toy_px_m_step(const ToyConfig& cfg, const ToyEStats& s);
ToyParam toy_reduce(const ToyConfig& cfg, const ToyExpandedParam& xp);

/// X ln(pi lambda) - pi lambda - ln X!
double toy_loglik(const ToyConfig& cfg, const ToyParam& p);
/// L*(lambda_star, alpha) = L(R(lambda_star, alpha)).
double toy_expanded_loglik(const ToyConfig& cfg, const ToyExpandedParam& xp);

/// Expected expanded complete-data log-likelihood Q(lambda_star, alpha | lambda),
/// with every parameter-free term set to 0:
///   Zhat ln lambda_star - lambda_star + Zhat ln(1 - alpha) + X ln(alpha / (1 - alpha)).
double toy_q_function(const ToyConfig& cfg, const ToyParam& current,
                      const ToyExpandedParam& xp);

struct SurfacePoint {
  double lambda_star = 0.0;
  double alpha = 0.0;
  double l_star = 0.0;
  double q = 0.0;
};

/// Evaluates L* and Q on the Cartesian grid, lexicographic in
/// (lambda_star, alpha). Throws DomainError for points outside
/// (0, inf) x (0, 1) and PreconditionError for empty grids.
std::vector<SurfacePoint> toy_surface_grid(const ToyConfig& cfg, const ToyParam& current,
                                           std::span<const double> lambda_grid,
                                           std::span<const double> alpha_grid);

/// Default surface grids: 60 log-spaced lambda_star values on [1, 60] and
/// 49 alpha values on [0.02, 0.98].
std::vector<double> default_lambda_grid();
std::vector<double> default_alpha_grid();

/// Imputation point (lambda_star, alpha) on the set
/// {alpha * lambda_star = pi * lambda} whose E step gives Zhat = X / pi.
/// Throws PreconditionError when X = 0 (no interior solution).
ToyExpandedParam toy_efficient_da(const ToyConfig& cfg, const ToyParam& p);

/// Engine adapter.
class ToyModel {
 public:
  using Param = ToyParam;
  using Expanded = ToyExpandedParam;
  using Stats = ToyEStats;
  using Alpha = double;

  explicit ToyModel(ToyConfig cfg);

  const ToyConfig& config() const { return cfg_; }

  void validate(const ToyParam& p) const;
  ToyEStats e_step(const ToyParam& p) const { return toy_e_step(cfg_, p); }
  ToyParam m_step(const ToyEStats& s) const { return toy_m_step(cfg_, s); }
  ToyExpandedParam px_m_step(const ToyEStats& s) const { return toy_px_m_step(cfg_, s); }
  /// lambda_star fixed, alpha maximizes Q: alpha = X / Zhat.
  ToyExpandedParam cm_alpha_step(const ToyEStats& s, const ToyParam& lambda_star) const;
  ToyParam reduce(const ToyExpandedParam& xp) const { return toy_reduce(cfg_, xp); }
  ToyExpandedParam expand(const ToyParam& p, double alpha) const { return {p.lambda, alpha}; }
  double null_alpha() const { return cfg_.pi; }
  double loglik(const ToyParam& p) const { return toy_loglik(cfg_, p); }
  std::vector<double> coordinates(const ToyParam& p) const { return {p.lambda}; }

 private:
  ToyConfig cfg_;
};

}  // namespace pxem
