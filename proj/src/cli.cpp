#include "pxem/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "pxem/dataset.hpp"
#include "pxem/diagnostics.hpp"
#include "pxem/errors.hpp"
#include "pxem/toy_model.hpp"

namespace pxem::cli {
namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_reals(const std::string& s, const char* flag) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) {
      throw PreconditionError(std::string(flag) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

// "lo:hi:n", log-spaced or evenly spaced.
std::vector<double> parse_grid(const std::string& s, bool log_spaced, const char* flag) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw PreconditionError(std::string(flag) + " expects lo:hi:n");
  const double lo = std::stod(parts[0]);
  const double hi = std::stod(parts[1]);
  const int n = std::stoi(parts[2]);
  if (n < 1 || !(hi >= lo)) throw PreconditionError(std::string(flag) + ": invalid range");
  if (log_spaced && !(lo > 0.0)) throw DomainError(std::string(flag) + ": lo must be > 0");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double f = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
    g[k] = log_spaced ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                      : lo + f * (hi - lo);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

ToyConfig toy_config(const ExperimentConfig& cfg) {
  if (!cfg.x_obs || !cfg.pi) throw PreconditionError("toy model requires --x and --pi");
  ToyConfig t{*cfg.x_obs, *cfg.pi};
  t.validate();
  return t;
}

ToyParam toy_start(const ExperimentConfig& cfg) {
  if (cfg.start.empty()) return {1.0};
  if (cfg.start.size() != 1) throw PreconditionError("toy start takes a single value");
  return {cfg.start.front()};
}

RobitData robit_data(const ExperimentConfig& cfg) {
  if (!cfg.data) throw PreconditionError("robit model requires --data");
  return load_robit_csv(*cfg.data, Dof(cfg.nu));
}

RobitParam robit_start(const ExperimentConfig& cfg, const RobitData& d) {
  if (cfg.start.empty()) return {Eigen::VectorXd::Zero(d.cols())};
  return {Eigen::Map<const Eigen::VectorXd>(cfg.start.data(),
                                            static_cast<Eigen::Index>(cfg.start.size()))};
}

int exit_code_for(const FitTrace& trace) {
  switch (trace.stop_reason) {
    case StopReason::kTolerance:
      return kExitConverged;
    case StopReason::kMaxIter:
      return kExitMaxIter;
    case StopReason::kDivergence:
      return kExitDivergence;
  }
  return kExitDivergence;
}

std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) s += ',';
    s += format_real(v[j]);
  }
  return s;
}

// Ratio of successive differences at the last step whose earlier difference
// clears a round-off floor. Independent of the unknown limit.
std::optional<double> tail_step_ratio(const std::vector<double>& s) {
  for (std::size_t t = s.size(); t-- > 2;) {
    const double prev = s[t - 1] - s[t - 2];
    if (std::fabs(prev) > 1e-10 * (1.0 + std::fabs(s[t - 1]))) return (s[t] - s[t - 1]) / prev;
  }
  return std::nullopt;
}

std::string schedule_label(Schedule s, ReductionVariant v) {
  std::string label(to_string(s));
  if (s != Schedule::kEm && v != ReductionVariant::kCorrect) {
    label += ':';
    label += to_string(v);
  }
  return label;
}

// Writes to --out when given, otherwise to `fallback`.
void emit(const ExperimentConfig& cfg, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (!cfg.out) {
    write(fallback);
    return;
  }
  std::ofstream file(*cfg.out);
  if (!file) throw DataError("cannot write '" + cfg.out->string() + "'");
  write(file);
}

void write_metadata(std::ostream& os, const ExperimentConfig& cfg) {
  if (cfg.model == ModelKind::kToy) {
    os << "# model=toy X=" << cfg.x_obs.value_or(0) << " pi=" << format_real(cfg.pi.value_or(0))
       << '\n';
  } else {
    os << "# model=robit data=" << (cfg.data ? cfg.data->string() : "") << " nu="
       << format_real(cfg.nu) << '\n';
  }
  os << "# loglik_tol=" << format_real(cfg.stop.loglik_tol)
     << " param_tol=" << format_real(cfg.stop.param_tol) << " max_iter=" << cfg.stop.max_iter
     << '\n';
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const RankDeficientError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRankDeficient;
  } catch (const SingularMatrixError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRankDeficient;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const DegenerateFitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const RowError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace

FitTrace fit_trace(const ExperimentConfig& cfg, Schedule schedule, ReductionVariant variant) {
  if (cfg.model == ModelKind::kToy) {
    const ToyModel model(toy_config(cfg));
    return run(model, schedule, toy_start(cfg), cfg.stop);
  }
  RobitData data = robit_data(cfg);
  const RobitParam start = robit_start(cfg, data);
  const RobitModel model(std::move(data), variant);
  return run(model, schedule, start, cfg.stop);
}

int cmd_fit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.schedules.size() != 1) throw PreconditionError("fit takes exactly one schedule");
    const Schedule schedule = cfg.schedules.front();
    const ReductionVariant variant = cfg.reductions.front();
    const FitTrace trace = fit_trace(cfg, schedule, variant);
    if (cfg.out) emit(cfg, out, [&](std::ostream& os) { write_trace_csv(os, trace); });

    out << "schedule: " << schedule_label(schedule, variant) << '\n';
    out << "iterations: " << trace.iterations() << '\n';
    out << "stop_reason: " << to_string(trace.stop_reason) << '\n';
    out << "loglik: " << format_real(trace.final().loglik) << '\n';
    out << "theta: " << join_reals(trace.final().theta) << '\n';
    std::vector<double> ll;
    std::vector<std::vector<double>> coords(trace.final().theta.size());
    for (const auto& r : trace.records) {
      ll.push_back(r.loglik);
      for (std::size_t j = 0; j < coords.size(); ++j) coords[j].push_back(r.theta[j]);
    }
    if (const auto rate = tail_step_ratio(ll)) {
      out << "tail_rate_loglik: " << format_real(*rate) << '\n';
    }
    std::vector<double> tail_theta;
    bool any = false;
    for (const auto& series : coords) {
      const auto rate = tail_step_ratio(series);
      any = any || rate.has_value();
      tail_theta.push_back(rate.value_or(std::nan("")));
    }
    if (any) out << "tail_rate_theta: " << join_reals(tail_theta) << '\n';
    if (!trace.is_monotone()) {
      err << "warning: log-likelihood decreased by " << trace.worst_decrease() << '\n';
    }
    return exit_code_for(trace);
  });
}

int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    struct Run {
      std::string label;
      FitTrace trace;
    };
    std::vector<Run> runs;
    for (Schedule s : cfg.schedules) {
      if (s == Schedule::kEm || cfg.model == ModelKind::kToy) {
        runs.push_back({schedule_label(s, ReductionVariant::kCorrect),
                        fit_trace(cfg, s, ReductionVariant::kCorrect)});
        continue;
      }
      for (ReductionVariant v : cfg.reductions) {
        runs.push_back({schedule_label(s, v), fit_trace(cfg, s, v)});
      }
    }
    if (runs.size() < 2) throw PreconditionError("compare needs at least two runs");

    emit(cfg, out, [&](std::ostream& os) {
      write_metadata(os, cfg);
      os << "# rate_loglik uses the final row of each schedule as the limit\n";
      const std::size_t p = runs.front().trace.final().theta.size();
      os << "schedule,iter,loglik,rate_loglik";
      for (std::size_t j = 1; j <= p; ++j) os << ",theta_" << j;
      os << '\n';
      for (const auto& run : runs) {
        const RateDiagnostics rates = rate_diagnostics(run.trace, false);
        auto next_rate = rates.loglik.begin();
        for (const auto& r : run.trace.records) {
          os << run.label << ',' << r.iter << ',' << format_real(r.loglik) << ',';
          if (next_rate != rates.loglik.end() && next_rate->iter == r.iter) {
            os << format_real(next_rate->rate);
            ++next_rate;
          }
          for (double v : r.theta) os << ',' << format_real(v);
          os << '\n';
        }
      }
    });

    int code = kExitConverged;
    for (const auto& run : runs) {
      if (cfg.out) {
        out << run.label << ": iterations=" << run.trace.iterations()
            << " stop_reason=" << to_string(run.trace.stop_reason)
            << " loglik=" << format_real(run.trace.final().loglik)
            << " theta=" << join_reals(run.trace.final().theta) << '\n';
      }
      const int c = exit_code_for(run.trace);
      if (c == kExitDivergence || (c == kExitMaxIter && code == kExitConverged)) code = c;
    }
    return code;
  });
}

int cmd_surface(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.model != ModelKind::kToy) {
      throw PreconditionError("surface is only supported for the toy model");
    }
    const ToyConfig toy = toy_config(cfg);
    const ToyParam current = toy_start(cfg);
    const std::vector<double> lg = cfg.lambda_grid.empty() ? default_lambda_grid() : cfg.lambda_grid;
    const std::vector<double> ag = cfg.alpha_grid.empty() ? default_alpha_grid() : cfg.alpha_grid;
    const auto grid = toy_surface_grid(toy, current, lg, ag);
    emit(cfg, out, [&](std::ostream& os) {
      os << "# X=" << toy.x_obs << '\n';
      os << "# pi=" << format_real(toy.pi) << '\n';
      os << "# lambda_t=" << format_real(current.lambda) << '\n';
      os << "lambda_star,alpha,L_star,Q\n";
      for (const auto& g : grid) {
        os << format_real(g.lambda_star) << ',' << format_real(g.alpha) << ','
           << format_real(g.l_star) << ',' << format_real(g.q) << '\n';
      }
    });
    return int(kExitConverged);
  });
}

int cmd_efficient_da(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.model != ModelKind::kToy) {
      throw PreconditionError("efficient-da is only supported for the toy model");
    }
    const ToyConfig toy = toy_config(cfg);
    const ToyParam current = toy_start(cfg);
    if (toy.x_obs == 0) {
      err << "error: X = 0 has no interior efficient augmentation point\n";
      return int(kExitNoInteriorSolution);
    }
    const ToyExpandedParam xp = toy_efficient_da(toy, current);
    const ToyEStats imputed = toy_expanded_e_step(toy, xp);
    const ToyParam next = toy_m_step(toy, imputed);
    const double x = static_cast<double>(toy.x_obs);
    out << "lambda_star: " << format_real(xp.lambda_star) << '\n';
    out << "alpha: " << format_real(xp.alpha) << '\n';
    out << "subset_residual: " << format_real(xp.alpha * xp.lambda_star - toy.pi * current.lambda)
        << '\n';
    out << "ancillary_residual: " << format_real(imputed.z_hat - x / toy.pi) << '\n';
    out << "z_hat: " << format_real(imputed.z_hat) << '\n';
    out << "lambda_next: " << format_real(next.lambda) << '\n';
    return int(kExitConverged);
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EM, ECM and PX-EM fits for the Poisson-Binomial toy model and robit regression"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string model = "toy";
  std::string schedules;
  std::string reductions = "correct";
  std::string start;
  std::string data;
  std::string out_path;
  std::string lambda_grid;
  std::string alpha_grid;
  std::uint64_t x_obs = 0;
  double pi = 0.0;

  auto add_shared = [&](CLI::App* sub, const std::string& default_schedule) {
    sub->add_option("--model", model, "toy or robit")
        ->check(CLI::IsMember({"toy", "robit"}))
        ->capture_default_str();
    sub->add_option("--schedule", schedules, "em, ecm or pxem (compare: comma list)")
        ->default_str(default_schedule);
    sub->add_option("--data", data, "robit dataset CSV");
    sub->add_option("--nu", cfg.nu, "degrees of freedom of the t link")->capture_default_str();
    sub->add_option("--x", x_obs, "observed count X (toy)");
    sub->add_option("--pi", pi, "known binomial probability (toy)");
    sub->add_option("--start", start, "comma-separated starting parameter");
    sub->add_option("--loglik-tol", cfg.stop.loglik_tol)->capture_default_str();
    sub->add_option("--param-tol", cfg.stop.param_tol)->capture_default_str();
    sub->add_option("--max-iter", cfg.stop.max_iter)->capture_default_str();
    sub->add_option("--out", out_path, "output CSV path");
    sub->add_option("--reduction", reductions,
                    "correct, alpha-over-sigma or alpha-over-sigma-sq (compare: comma list)")
        ->capture_default_str();
  };

  auto* fit = app.add_subcommand("fit", "run one schedule and write its trace");
  add_shared(fit, "em");
  auto* compare = app.add_subcommand("compare", "run several schedules from one start");
  add_shared(compare, "em,pxem");
  auto* surface = app.add_subcommand("surface", "toy expanded log-likelihood and Q surface");
  add_shared(surface, "em");
  surface->add_option("--lambda-grid", lambda_grid, "lo:hi:n, log-spaced");
  surface->add_option("--alpha-grid", alpha_grid, "lo:hi:n, evenly spaced");
  auto* eda = app.add_subcommand("efficient-da", "toy efficient data augmentation step");
  add_shared(eda, "em");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : int(kExitInputError);
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    cfg.model = model == "robit" ? ModelKind::kRobit : ModelKind::kToy;
    if (schedules.empty()) schedules = active == compare ? "em,pxem" : "em";
    cfg.schedules.clear();
    for (const auto& s : split_list(schedules)) cfg.schedules.push_back(parse_schedule(s));
    cfg.reductions.clear();
    for (const auto& r : split_list(reductions)) {
      cfg.reductions.push_back(parse_reduction_variant(r));
    }
    if (cfg.reductions.empty()) cfg.reductions.push_back(ReductionVariant::kCorrect);
    if (active != compare && cfg.reductions.size() != 1) {
      throw PreconditionError("--reduction takes a single value here");
    }
    if (active->count("--x")) cfg.x_obs = x_obs;
    if (active->count("--pi")) cfg.pi = pi;
    if (!data.empty()) cfg.data = data;
    if (!out_path.empty()) cfg.out = out_path;
    cfg.start = parse_reals(start, "--start");
    if (!lambda_grid.empty()) cfg.lambda_grid = parse_grid(lambda_grid, true, "--lambda-grid");
    if (!alpha_grid.empty()) cfg.alpha_grid = parse_grid(alpha_grid, false, "--alpha-grid");
    cfg.stop.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  // Numerical warnings go to the error stream of this invocation.
  diag::WarningHandler previous =
      diag::set_warning_handler([&err](std::string_view msg) { err << "warning: " << msg << '\n'; });
  int code = kExitInputError;
  if (active == fit) {
    code = cmd_fit(cfg, out, err);
  } else if (active == compare) {
    code = cmd_compare(cfg, out, err);
  } else if (active == surface) {
    code = cmd_surface(cfg, out, err);
  } else if (active == eda) {
    code = cmd_efficient_da(cfg, out, err);
  }
  diag::set_warning_handler(std::move(previous));
  return code;
}

}  // namespace pxem::cli
