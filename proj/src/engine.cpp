#include "pxem/engine.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace pxem {

std::string_view to_string(Schedule s) {
  switch (s) {
    case Schedule::kEm:
      return "em";
    case Schedule::kEcm:
      return "ecm";
    case Schedule::kPxEm:
      return "pxem";
  }
  return "?";
}

Schedule parse_schedule(std::string_view name) {
  if (name == "em") return Schedule::kEm;
  if (name == "ecm") return Schedule::kEcm;
  if (name == "pxem") return Schedule::kPxEm;
  throw PreconditionError("unknown schedule '" + std::string(name) +
                          "' (expected em, ecm or pxem)");
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kTolerance:
      return "tolerance";
    case StopReason::kMaxIter:
      return "max_iter";
    case StopReason::kDivergence:
      return "divergence";
  }
  return "?";
}

void StopRule::validate() const {
  if (!(loglik_tol > 0.0) || !(param_tol > 0.0)) {
    throw PreconditionError("stop-rule tolerances must be positive");
  }
  if (max_iter < 1) throw PreconditionError("max_iter must be at least 1");
}

double FitTrace::worst_decrease() const {
  double worst = 0.0;
  for (std::size_t t = 1; t < records.size(); ++t) {
    const double drop = records[t - 1].loglik - records[t].loglik;
    if (drop > worst) worst = drop;
  }
  return worst;
}

bool FitTrace::is_monotone(double slack) const { return worst_decrease() <= slack; }

namespace {

std::vector<RateEntry> ratio_series(const std::vector<double>& values, double min_denominator) {
  std::vector<RateEntry> out;
  if (values.size() < 3) return out;
  const double limit = values.back();
  for (std::size_t t = 0; t + 2 < values.size(); ++t) {
    const double denom = std::fabs(values[t] - limit);
    if (denom < min_denominator) continue;
    out.push_back({t, std::fabs(values[t + 1] - limit) / denom});
  }
  return out;
}

}  // namespace

RateDiagnostics rate_diagnostics(const FitTrace& trace, bool per_coordinate,
                                 double min_denominator) {
  if (trace.records.empty()) {
    throw PreconditionError("rate diagnostics need a nonempty trace");
  }
  RateDiagnostics out;
  std::vector<double> series;
  series.reserve(trace.records.size());
  for (const auto& r : trace.records) series.push_back(r.loglik);
  out.loglik = ratio_series(series, min_denominator);

  if (per_coordinate) {
    const std::size_t p = trace.records.front().theta.size();
    out.coordinates.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      series.clear();
      for (const auto& r : trace.records) series.push_back(r.theta[j]);
      out.coordinates[j] = ratio_series(series, min_denominator);
    }
  }
  return out;
}

std::string format_real(double x) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return os.str();
}

void write_trace_csv(std::ostream& out, const FitTrace& trace) {
  const std::size_t p = trace.records.empty() ? 0 : trace.records.front().theta.size();
  out << "iter,loglik";
  for (std::size_t j = 1; j <= p; ++j) out << ",theta_" << j;
  out << '\n';
  for (const auto& r : trace.records) {
    out << r.iter << ',' << format_real(r.loglik);
    for (double v : r.theta) out << ',' << format_real(v);
    out << '\n';
  }
}

}  // namespace pxem
