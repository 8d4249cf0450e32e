#include "pxem/toy_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pxem/diagnostics.hpp"
#include "pxem/errors.hpp"
#include "pxem/special_functions.hpp"

namespace pxem {
namespace {

void check_lambda(double lambda, const char* what) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) {
    throw DomainError(std::string(what) + " must be finite and positive");
  }
}

void check_expanded(const ToyExpandedParam& xp) {
  check_lambda(xp.lambda_star, "lambda_star");
  if (!(xp.alpha > 0.0 && xp.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

}  // namespace

void ToyConfig::validate() const {
  if (!(pi > 0.0 && pi < 1.0)) throw PreconditionError("pi must lie in (0, 1)");
}

ToyEStats toy_e_step(const ToyConfig& cfg, const ToyParam& p) {
  check_lambda(p.lambda, "lambda");
  return {static_cast<double>(cfg.x_obs) + p.lambda * (1.0 - cfg.pi)};
}

ToyEStats toy_expanded_e_step(const ToyConfig& cfg, const ToyExpandedParam& xp) {
  check_expanded(xp);
  return {static_cast<double>(cfg.x_obs) + xp.lambda_star * (1.0 - xp.alpha)};
}

ToyParam toy_m_step(const ToyConfig&, const ToyEStats& s) {
  if (!(s.z_hat >= 0.0)) throw DomainError("imputed count must be nonnegative");
  if (s.z_hat == 0.0) {
    diag::warn("toy M step: imputed count is 0, lambda clamped to the positive floor");
    return {kToyLambdaFloor};
  }
  return {s.z_hat};
}

ToyExpandedParam toy_px_m_step(const ToyConfig& cfg, const ToyEStats& s) {
  if (!(s.z_hat > 0.0)) throw PreconditionError("PX-M step needs a positive imputed count");
  const double x = static_cast<double>(cfg.x_obs);
  double alpha = x / s.z_hat;
  if (alpha <= 0.0) {
    diag::warn("toy PX-M step: X = 0 puts alpha on the boundary, clamped to machine epsilon");
    alpha = std::numeric_limits<double>::epsilon();
  }
  return {s.z_hat, alpha};
}

ToyParam toy_reduce(const ToyConfig& cfg, const ToyExpandedParam& xp) {
  check_expanded(xp);
  return {xp.alpha / cfg.pi * xp.lambda_star};
}

double toy_loglik(const ToyConfig& cfg, const ToyParam& p) {
  check_lambda(p.lambda, "lambda");
  const double x = static_cast<double>(cfg.x_obs);
  const double mean = cfg.pi * p.lambda;
  const double log_term = cfg.x_obs == 0 ? 0.0 : x * std::log(mean);
  return log_term - mean - log_gamma(x + 1.0);
}

double toy_expanded_loglik(const ToyConfig& cfg, const ToyExpandedParam& xp) {
  return toy_loglik(cfg, toy_reduce(cfg, xp));
}

double toy_q_function(const ToyConfig& cfg, const ToyParam& current,
                      const ToyExpandedParam& xp) {
  check_expanded(xp);
  const double z_hat = toy_e_step(cfg, current).z_hat;
  const double x = static_cast<double>(cfg.x_obs);
  const double log_odds = cfg.x_obs == 0 ? 0.0 : x * std::log(xp.alpha / (1.0 - xp.alpha));
  return z_hat * std::log(xp.lambda_star) - xp.lambda_star +
         z_hat * std::log1p(-xp.alpha) + log_odds;
}

std::vector<SurfacePoint> toy_surface_grid(const ToyConfig& cfg, const ToyParam& current,
                                           std::span<const double> lambda_grid,
                                           std::span<const double> alpha_grid) {
  if (lambda_grid.empty() || alpha_grid.empty()) {
    throw PreconditionError("surface grids must be nonempty");
  }
  std::vector<SurfacePoint> out;
  out.reserve(lambda_grid.size() * alpha_grid.size());
  for (double ls : lambda_grid) {
    for (double a : alpha_grid) {
      const ToyExpandedParam xp{ls, a};
      check_expanded(xp);
      out.push_back({ls, a, toy_expanded_loglik(cfg, xp), toy_q_function(cfg, current, xp)});
    }
  }
  return out;
}

std::vector<double> default_lambda_grid() {
  constexpr int n = 60;
  std::vector<double> g(n);
  const double lo = std::log(1.0);
  const double hi = std::log(60.0);
  for (int k = 0; k < n; ++k) g[k] = std::exp(lo + (hi - lo) * k / (n - 1));
  g.front() = 1.0;
  g.back() = 60.0;
  return g;
}

std::vector<double> default_alpha_grid() {
  constexpr int n = 49;
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = 0.02 + 0.96 * k / (n - 1);
  return g;
}

ToyExpandedParam toy_efficient_da(const ToyConfig& cfg, const ToyParam& p) {
  cfg.validate();
  check_lambda(p.lambda, "lambda");
  if (cfg.x_obs == 0) {
    throw PreconditionError("efficient data augmentation needs X > 0 (no interior solution)");
  }
  const double x = static_cast<double>(cfg.x_obs);
  const double ridge = p.lambda * cfg.pi;  // alpha * lambda_star on the subset
  const double lambda_star = x * (1.0 - cfg.pi) / cfg.pi + ridge;
  return {lambda_star, ridge / lambda_star};
}

ToyModel::ToyModel(ToyConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void ToyModel::validate(const ToyParam& p) const {
  if (!(std::isfinite(p.lambda) && p.lambda > 0.0)) {
    throw PreconditionError("toy start value lambda must be finite and positive");
  }
}

ToyExpandedParam ToyModel::cm_alpha_step(const ToyEStats& s, const ToyParam& lambda_star) const {
  ToyExpandedParam xp = toy_px_m_step(cfg_, s);
  xp.lambda_star = lambda_star.lambda;
  return xp;
}

}  // namespace pxem
