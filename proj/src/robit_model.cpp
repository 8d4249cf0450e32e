#include "pxem/robit_model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "pxem/diagnostics.hpp"
#include "pxem/errors.hpp"
#include "pxem/linalg.hpp"

namespace pxem {
namespace {

Eigen::VectorXd linear_predictor(const RobitData& d, const RobitParam& p) {
  if (p.beta.size() != d.cols()) {
    throw PreconditionError("beta has " + std::to_string(p.beta.size()) +
                            " entries, design has " + std::to_string(d.cols()) + " columns");
  }
  Eigen::VectorXd eta = d.x() * p.beta;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (!std::isfinite(eta(i))) {
      throw DomainError("non-finite linear predictor at row " + std::to_string(i + 1));
    }
  }
  return eta;
}

double nonneg_sigma_sq(double sigma_sq) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    std::ostringstream msg;
    msg << "complete-data residual variance " << sigma_sq
        << " is not positive; the data may be perfectly separated";
    throw DegenerateFitError(msg.str());
  }
  return sigma_sq;
}

}  // namespace

RobitData::RobitData(Eigen::MatrixXd x, Eigen::VectorXd y, Dof nu)
    : x_(std::move(x)), y_(std::move(y)), nu_(nu) {
  if (x_.cols() < 1) throw PreconditionError("design needs at least one column");
  if (x_.rows() < x_.cols()) {
    throw PreconditionError("design needs at least as many rows as columns");
  }
  if (y_.size() != x_.rows()) throw PreconditionError("response length does not match design");
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (y_(i) != 0.0 && y_(i) != 1.0) {
      throw PreconditionError("response at row " + std::to_string(i + 1) + " is not 0/1");
    }
  }
  if (!x_.allFinite()) throw PreconditionError("design contains non-finite entries");
  if (column_rank(x_) < x_.cols()) {
    throw RankDeficientError("design matrix does not have full column rank");
  }
}

RobitData RobitData::with_nu(Dof nu) const {
  RobitData copy = *this;
  copy.nu_ = nu;
  return copy;
}

std::string_view to_string(ReductionVariant v) {
  switch (v) {
    case ReductionVariant::kCorrect:
      return "correct";
    case ReductionVariant::kAlphaOverSigma:
      return "alpha-over-sigma";
    case ReductionVariant::kAlphaOverSigmaSq:
      return "alpha-over-sigma-sq";
  }
  return "?";
}

ReductionVariant parse_reduction_variant(std::string_view name) {
  if (name == "correct") return ReductionVariant::kCorrect;
  if (name == "alpha-over-sigma") return ReductionVariant::kAlphaOverSigma;
  if (name == "alpha-over-sigma-sq") return ReductionVariant::kAlphaOverSigmaSq;
  throw PreconditionError("unknown reduction '" + std::string(name) +
                          "' (expected correct, alpha-over-sigma or alpha-over-sigma-sq)");
}

RobitRowMoments robit_row_moments(bool y, double eta, Dof nu) {
  const double v = nu.value();
  const double sign = y ? 1.0 : -1.0;
  const double scale = std::sqrt(1.0 + 2.0 / v);
  const Dof nu2(v + 2.0);

  // tau = F_{nu+2}(s c eta) / F_nu(s eta),  z = eta + s f_nu(eta) / F_{nu+2}(s c eta)
  const double log_num = t_log_cdf(sign * scale * eta, nu2);
  const double log_den = t_log_cdf(sign * eta, nu);
  if (!std::isfinite(log_num) || !std::isfinite(log_den)) {
    throw DomainError("tail probability underflow");
  }
  RobitRowMoments m;
  m.tau = std::exp(log_num - log_den);
  m.z = eta + sign * std::exp(t_log_pdf(eta, nu) - log_num);
  m.tau_z2 = (v + 1.0) - v * m.tau + m.tau * eta * (2.0 * m.z - eta);
  return m;
}

double robit_loglik(const RobitData& d, const RobitParam& p) {
  const Eigen::VectorXd eta = linear_predictor(d, p);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // ln(1 - F(eta)) = ln F(-eta)
    ll += t_log_cdf(d.y()(i) == 1.0 ? eta(i) : -eta(i), d.nu());
  }
  return ll;
}

RobitEStats robit_e_step(const RobitData& d, const RobitParam& p) {
  Eigen::VectorXd eta = linear_predictor(d, p);
  const Eigen::Index n = d.rows();
  const Eigen::Index cols = d.cols();

  std::size_t capped = 0;
  RobitEStats s;
  s.tau_hat.resize(n);
  s.z_hat.resize(n);
  s.s_txx = Eigen::MatrixXd::Zero(cols, cols);
  s.s_txz = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::fabs(eta(i)) > kMaxLinearPredictor) {
      eta(i) = std::copysign(kMaxLinearPredictor, eta(i));
      ++capped;
    }
    RobitRowMoments m;
    try {
      m = robit_row_moments(d.y()(i) == 1.0, eta(i), d.nu());
    } catch (const DomainError& e) {
      throw RowError(std::string("E step failed at row ") + std::to_string(i + 1) + ": " +
                         e.what(),
                     static_cast<std::size_t>(i));
    }
    if (!(m.tau > 0.0) || !std::isfinite(m.z)) {
      throw RowError("E step produced a degenerate weight at row " + std::to_string(i + 1),
                     static_cast<std::size_t>(i));
    }
    s.tau_hat(i) = m.tau;
    s.z_hat(i) = m.z;
    const auto xi = d.x().row(i).transpose();
    s.s_txx.selfadjointView<Eigen::Lower>().rankUpdate(xi, m.tau);
    s.s_txz += (m.tau * m.z) * xi;
    s.s_t += m.tau;
    s.s_tz2 += m.tau_z2;
  }
  s.s_txx = s.s_txx.selfadjointView<Eigen::Lower>();
  if (capped > 0) {
    diag::warn("robit E step: " + std::to_string(capped) +
               " linear predictor(s) capped at |x'beta| = 300; suspect separation");
  }
  return s;
}

RobitParam robit_m_step(const RobitData&, const RobitEStats& s) {
  return {solve_spd(s.s_txx, s.s_txz)};
}

RobitExpandedParam robit_px_m_step(const RobitData& d, const RobitEStats& s) {
  const double n = static_cast<double>(d.rows());
  RobitExpandedParam xp;
  xp.beta_star = solve_spd(s.s_txx, s.s_txz);
  xp.alpha = s.s_t / n;
  xp.sigma = std::sqrt(nonneg_sigma_sq((s.s_tz2 - s.s_txz.dot(xp.beta_star)) / n));
  return xp;
}

RobitExpandedParam robit_cm_alpha_step(const RobitData& d, const RobitEStats& s,
                                       const RobitParam& beta_star) {
  const double n = static_cast<double>(d.rows());
  const Eigen::VectorXd& b = beta_star.beta;
  if (b.size() != d.cols()) throw PreconditionError("beta_star has the wrong dimension");
  RobitExpandedParam xp;
  xp.beta_star = b;
  xp.alpha = s.s_t / n;
  const double rss = s.s_tz2 - 2.0 * b.dot(s.s_txz) + b.dot(s.s_txx * b);
  xp.sigma = std::sqrt(nonneg_sigma_sq(rss / n));
  return xp;
}

RobitParam robit_reduce(const RobitExpandedParam& xp, ReductionVariant variant) {
  if (!(xp.alpha > 0.0) || !(xp.sigma > 0.0)) {
    throw DomainError("expansion parameters alpha and sigma must be positive");
  }
  double factor = 1.0;
  switch (variant) {
    case ReductionVariant::kCorrect:
      factor = std::sqrt(xp.alpha) / xp.sigma;
      break;
    case ReductionVariant::kAlphaOverSigma:
      factor = xp.alpha / xp.sigma;
      break;
    case ReductionVariant::kAlphaOverSigmaSq:
      factor = xp.alpha / (xp.sigma * xp.sigma);
      break;
  }
  return {factor * xp.beta_star};
}

RobitModel::RobitModel(RobitData data, ReductionVariant variant)
    : data_(std::move(data)), variant_(variant) {}

void RobitModel::validate(const RobitParam& p) const {
  if (p.beta.size() != data_.cols()) {
    throw PreconditionError("start vector has " + std::to_string(p.beta.size()) +
                            " entries, design has " + std::to_string(data_.cols()) +
                            " columns");
  }
  if (!p.beta.allFinite()) throw PreconditionError("start vector must be finite");
}

}  // namespace pxem
