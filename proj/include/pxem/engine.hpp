#pragma once

// Fixed-point iteration driver for EM-type schedules.
//
// A model supplies its own parameter, expanded-parameter and E-step
// statistic types together with the steps below; the engine only
// sequences them, records the trace and decides when to stop.
//
//   EM     theta' = m_step(e_step(theta))
//   PX-EM  theta' = reduce(px_m_step(e_step(theta)))
//   ECM    theta' = reduce(cm_alpha_step(s, m_step(s))),  s = e_step(theta)
//
// The E step is always evaluated at (theta, alpha0); PX-EM and ECM only
// change what happens after it.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pxem/errors.hpp"

namespace pxem {

template <class M>
concept ExpandableModel =
    requires(const M& m, const typename M::Param& theta,
             const typename M::Stats& stats, const typename M::Expanded& xp,
             const typename M::Alpha& alpha) {
      { m.validate(theta) } -> std::same_as<void>;
      { m.e_step(theta) } -> std::convertible_to<typename M::Stats>;
      { m.m_step(stats) } -> std::convertible_to<typename M::Param>;
      { m.px_m_step(stats) } -> std::convertible_to<typename M::Expanded>;
      { m.cm_alpha_step(stats, theta) } -> std::convertible_to<typename M::Expanded>;
      { m.reduce(xp) } -> std::convertible_to<typename M::Param>;
      { m.expand(theta, alpha) } -> std::convertible_to<typename M::Expanded>;
      { m.null_alpha() } -> std::convertible_to<typename M::Alpha>;
      { m.loglik(theta) } -> std::convertible_to<double>;
      { m.coordinates(theta) } -> std::convertible_to<std::vector<double>>;
    };

enum class Schedule { kEm, kEcm, kPxEm };

std::string_view to_string(Schedule s);
/// Accepts "em", "ecm", "pxem". Throws PreconditionError otherwise.
Schedule parse_schedule(std::string_view name);

struct StopRule {
  double loglik_tol = 1e-10;
  double param_tol = 1e-9;  // max-norm
  std::size_t max_iter = 10000;

  /// Throws PreconditionError on nonpositive tolerances or max_iter == 0.
  void validate() const;
};

/// Tolerances used when a trace feeds rate diagnostics, where the final
/// value stands in for the limit.
inline constexpr StopRule kRateStopRule{1e-13, 1e-13, 200000};

enum class StopReason { kTolerance, kMaxIter, kDivergence };

std::string_view to_string(StopReason r);

struct TraceRecord {
  std::size_t iter = 0;
  std::vector<double> theta;
  double loglik = 0.0;
};

struct FitTrace {
  Schedule schedule = Schedule::kEm;
  std::vector<TraceRecord> records;  // records[0] is the starting point
  bool converged = false;
  StopReason stop_reason = StopReason::kMaxIter;

  /// Number of parameter updates kept in the trace.
  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
  const TraceRecord& final() const { return records.back(); }

  /// True when loglik never drops by more than slack between records.
  bool is_monotone(double slack = 1e-10) const;
  /// Largest single-step log-likelihood decrease (0 if monotone).
  double worst_decrease() const;
};

namespace detail {

inline double max_abs_change(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = std::fabs(a[j] - b[j]);
    if (!(d <= m)) m = d;  // propagates NaN
  }
  return m;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

template <ExpandableModel M, class Update>
FitTrace iterate(const M& model, const typename M::Param& theta0, const StopRule& rule,
                 Schedule schedule, Update update) {
  rule.validate();
  model.validate(theta0);

  FitTrace trace;
  trace.schedule = schedule;
  typename M::Param theta = theta0;
  trace.records.push_back({0, model.coordinates(theta), model.loglik(theta)});
  if (!std::isfinite(trace.records.back().loglik)) {
    trace.stop_reason = StopReason::kDivergence;
    return trace;
  }

  for (std::size_t t = 1; t <= rule.max_iter; ++t) {
    typename M::Param next = update(theta);
    std::vector<double> coords = model.coordinates(next);
    const double ll = all_finite(coords) ? double(model.loglik(next))
                                         : std::numeric_limits<double>::quiet_NaN();
    const TraceRecord& prev = trace.records.back();
    if (!std::isfinite(ll)) {
      trace.records.push_back({t, std::move(coords), ll});
      trace.stop_reason = StopReason::kDivergence;
      return trace;
    }
    const bool settled = std::fabs(ll - prev.loglik) < rule.loglik_tol &&
                         max_abs_change(coords, prev.theta) < rule.param_tol;
    if (settled) {
      trace.converged = true;
      trace.stop_reason = StopReason::kTolerance;
      return trace;
    }
    trace.records.push_back({t, std::move(coords), ll});
    theta = std::move(next);
  }
  trace.stop_reason = StopReason::kMaxIter;
  return trace;
}

}  // namespace detail

template <ExpandableModel M>
FitTrace run_em(const M& model, const typename M::Param& theta0, const StopRule& rule = {}) {
  return detail::iterate(model, theta0, rule, Schedule::kEm,
                         [&](const typename M::Param& theta) {
                           return typename M::Param(model.m_step(model.e_step(theta)));
                         });
}

template <ExpandableModel M>
FitTrace run_px_em(const M& model, const typename M::Param& theta0,
                   const StopRule& rule = {}) {
  return detail::iterate(model, theta0, rule, Schedule::kPxEm,
                         [&](const typename M::Param& theta) {
                           return typename M::Param(
                               model.reduce(model.px_m_step(model.e_step(theta))));
                         });
}

template <ExpandableModel M>
FitTrace run_ecm(const M& model, const typename M::Param& theta0, const StopRule& rule = {}) {
  return detail::iterate(model, theta0, rule, Schedule::kEcm,
                         [&](const typename M::Param& theta) {
                           const typename M::Stats stats = model.e_step(theta);
                           const typename M::Param theta_star = model.m_step(stats);
                           return typename M::Param(
                               model.reduce(model.cm_alpha_step(stats, theta_star)));
                         });
}

template <ExpandableModel M>
FitTrace run(const M& model, Schedule schedule, const typename M::Param& theta0,
             const StopRule& rule = {}) {
  switch (schedule) {
    case Schedule::kEm:
      return run_em(model, theta0, rule);
    case Schedule::kEcm:
      return run_ecm(model, theta0, rule);
    case Schedule::kPxEm:
      return run_px_em(model, theta0, rule);
  }
  throw PreconditionError("unknown schedule");
}

struct RateEntry {
  std::size_t iter = 0;  // t in |x(t+1) - x(inf)| / |x(t) - x(inf)|
  double rate = 0.0;
};

struct RateDiagnostics {
  std::vector<RateEntry> loglik;
  std::vector<std::vector<RateEntry>> coordinates;  // one series per coordinate
};

inline constexpr double kRateMinDenominator = 1e-14;

/// Successive-error ratios against the final trace value, which stands in
/// for the limit. Entries with a denominator below min_denominator are
/// omitted, as is the last step (its numerator is the limit itself).
/// Throws PreconditionError on an empty trace.
RateDiagnostics rate_diagnostics(const FitTrace& trace, bool per_coordinate,
                                 double min_denominator = kRateMinDenominator);

/// Writes `iter,loglik,theta_1..theta_p` with 17 significant digits.
void write_trace_csv(std::ostream& out, const FitTrace& trace);

/// Round-trip formatting used by every CSV writer.
std::string format_real(double x);

}  // namespace pxem
