#pragma once

// Robit regression: binary regression with a Student-t link,
//   P(y_i = 1 | x_i, beta) = F_nu(x_i' beta),   nu known.
//
// Complete data per row: tau_i ~ Gamma(nu/2, nu/2), z_i | tau_i ~ N(x_i' beta, 1/tau_i),
// y_i = 1{z_i > 0}. The expanded model scales tau_i by alpha and the variance
// of z_i by sigma^2; the observed model is preserved by
//   beta = (alpha^{1/2} / sigma) beta_star.

#include <Eigen/Dense>
#include <string_view>
#include <vector>

#include "pxem/special_functions.hpp"

namespace pxem {

/// Validated design, response and degrees of freedom.
class RobitData {
 public:
  /// Throws PreconditionError on shape or response errors and
  /// RankDeficientError when x lacks full column rank.
  RobitData(Eigen::MatrixXd x, Eigen::VectorXd y, Dof nu);

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  Dof nu() const { return nu_; }
  Eigen::Index rows() const { return x_.rows(); }
  Eigen::Index cols() const { return x_.cols(); }

  RobitData with_nu(Dof nu) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Dof nu_;
};

struct RobitParam {
  Eigen::VectorXd beta;
};

struct RobitExpandedParam {
  Eigen::VectorXd beta_star;
  double alpha = 1.0;
  double sigma = 1.0;
};

/// Imputed complete-data sufficient statistics.
struct RobitEStats {
  Eigen::MatrixXd s_txx;  // sum tau_i x_i x_i'
  Eigen::VectorXd s_txz;  // sum tau_i x_i z_i
  double s_t = 0.0;       // sum tau_i
  double s_tz2 = 0.0;     // sum tau_i z_i^2
  Eigen::VectorXd tau_hat;
  Eigen::VectorXd z_hat;
};

enum class ReductionVariant { kCorrect, kAlphaOverSigma, kAlphaOverSigmaSq };

std::string_view to_string(ReductionVariant v);
/// Accepts "correct", "alpha-over-sigma", "alpha-over-sigma-sq".
ReductionVariant parse_reduction_variant(std::string_view name);

/// |x'beta| beyond this is capped (with a warning) in the E step.
inline constexpr double kMaxLinearPredictor = 300.0;

/// Conditional moments of one row given y and eta = x'beta.
struct RobitRowMoments {
  double tau = 0.0;     // E(tau | y)
  double z = 0.0;       // E(tau z | y) / E(tau | y)
  double tau_z2 = 0.0;  // E(tau z^2 | y)
};

RobitRowMoments robit_row_moments(bool y, double eta, Dof nu);

double robit_loglik(const RobitData& d, const RobitParam& p);
RobitEStats robit_e_step(const RobitData& d, const RobitParam& p);
RobitParam robit_m_step(const RobitData& d, const RobitEStats& s);
RobitExpandedParam robit_px_m_step(const RobitData& d, const RobitEStats& s);
RobitExpandedParam robit_cm_alpha_step(const RobitData& d, const RobitEStats& s,
                                       const RobitParam& beta_star);
RobitParam robit_reduce(const RobitExpandedParam& xp,
                        ReductionVariant variant = ReductionVariant::kCorrect);

/// Engine adapter; the reduction variant applies to PX-EM and ECM.
class RobitModel {
 public:
  struct Alpha {
    double alpha = 1.0;
    double sigma = 1.0;
  };
  using Param = RobitParam;
  using Expanded = RobitExpandedParam;
  using Stats = RobitEStats;

  explicit RobitModel(RobitData data, ReductionVariant variant = ReductionVariant::kCorrect);

  const RobitData& data() const { return data_; }
  ReductionVariant variant() const { return variant_; }

  void validate(const RobitParam& p) const;
  RobitEStats e_step(const RobitParam& p) const { return robit_e_step(data_, p); }
  RobitParam m_step(const RobitEStats& s) const { return robit_m_step(data_, s); }
  RobitExpandedParam px_m_step(const RobitEStats& s) const { return robit_px_m_step(data_, s); }
  RobitExpandedParam cm_alpha_step(const RobitEStats& s, const RobitParam& beta_star) const {
    return robit_cm_alpha_step(data_, s, beta_star);
  }
  RobitParam reduce(const RobitExpandedParam& xp) const { return robit_reduce(xp, variant_); }
  RobitExpandedParam expand(const RobitParam& p, const Alpha& a) const {
    return {p.beta, a.alpha, a.sigma};
  }
  Alpha null_alpha() const { return {}; }
  double loglik(const RobitParam& p) const { return robit_loglik(data_, p); }
  std::vector<double> coordinates(const RobitParam& p) const {
    return {p.beta.data(), p.beta.data() + p.beta.size()};
  }
  RobitParam zero_start() const { return {Eigen::VectorXd::Zero(data_.cols())}; }

 private:
  RobitData data_;
  ReductionVariant variant_;
};

}  // namespace pxem
