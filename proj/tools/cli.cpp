#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "hazardforge/bands.hpp"
#include "hazardforge/csv_io.hpp"
#include "hazardforge/dabrowska.hpp"
#include "hazardforge/diagnostics.hpp"
#include "hazardforge/errors.hpp"
#include "hazardforge/json_io.hpp"
#include "hazardforge/kernels.hpp"
#include "hazardforge/logrank.hpp"
#include "hazardforge/multistate.hpp"
#include "hazardforge/nonparam.hpp"
#include "hazardforge/npmle.hpp"
#include "hazardforge/regress.hpp"
#include "hazardforge/simlab.hpp"

namespace hazardforge::cli {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

constexpr const char* kManifestSchema = "hazardforge-manifest/1";

struct Options {
  std::string input;
  std::string output;
  std::string manifest;
  std::string format = "json";
  double conf_level = 0.95;
  std::string transform = "linear";
  std::string band = "none";
  std::vector<double> band_interval;
  std::size_t mc_reps = 100000;
  std::size_t grid_points = 1000;
  std::vector<double> quantiles;
  std::string weight = "logrank";
  double rho = 0.0;
  std::optional<double> bandwidth;
  std::string kernel = "epanechnikov";
  std::optional<std::uint64_t> seed;
  std::string group_col = "group";
  std::string strata_col;
  std::string cause_col;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<double> until;
  std::optional<int> states;
  std::string population_col = "mu";
  double step = 0.01;
  std::optional<double> z0;
  int column = 0;
  std::string family = "weibull";
  // simulate
  std::size_t n = 0;
  std::string event = "exp:1";
  std::string censor = "none";
  std::string covariates;
  std::string model = "none";
  std::vector<double> beta;
  double sigma = 1.0;
  std::string rates;
  double horizon = 1.0;
  std::vector<double> initial;
};

struct Outcome {
  Outcome() = default;
  explicit Outcome(std::string bytes) : primary(std::move(bytes)) {}
  std::string primary;  // bytes of the primary artifact
  int code = kExitOk;
  std::string failure;  // set with a nonzero code when the artifact is still written
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << bytes;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw UsageError("bad number '" + s + "' in " + what);
  }
}

// Covariate column names in file order, for labelling coefficients.
std::vector<std::string> covariate_names(const std::string& text, const RightCensoredColumns& cols) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> names;
  auto fields = split(line, ',');
  for (std::size_t c = 2; c < fields.size(); ++c) {
    auto f = fields[c];
    f.erase(0, f.find_first_not_of(" \t\r"));
    f.erase(f.find_last_not_of(" \t\r") + 1);
    if (f == cols.group || (!cols.strata.empty() && f == cols.strata) ||
        (!cols.cause.empty() && f == cols.cause)) {
      continue;
    }
    names.push_back(f);
  }
  return names;
}

RightCensoredColumns columns(const Options& o) {
  RightCensoredColumns cols;
  cols.group = o.group_col;
  cols.strata = o.strata_col;
  cols.cause = o.cause_col;
  return cols;
}

RightCensoredSample load_right(const Options& o, std::vector<std::string>* names = nullptr) {
  const auto text = read_file(o.input);
  const auto cols = columns(o);
  if (names) *names = covariate_names(text, cols);
  std::istringstream in(text);
  return read_right_censored(in, cols);
}

Transform parse_transform(const std::string& s) {
  if (s == "linear") return Transform::linear;
  if (s == "loglog") return Transform::loglog;
  return Transform::arcsin_sqrt;
}

std::uint64_t require_seed(const Options& o, const std::string& why) {
  if (!o.seed) throw UsageError(why + " requires an explicit --seed");
  return *o.seed;
}

std::string curve_csv(const CurveEstimate& curve, const Options& o) {
  std::ostringstream out;
  out << "time,estimate,variance,lo,hi\n";
  const auto times = curve.estimate.jump_times();
  const auto values = curve.estimate.values();
  const auto tr = parse_transform(o.transform);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto ci = pointwise_ci(curve, times[k], o.conf_level, tr);
    out << format_double(times[k]) << ',' << format_double(values[k]) << ','
        << format_double(curve.variance(times[k])) << ',' << format_double(ci.lo) << ','
        << format_double(ci.hi) << '\n';
  }
  return out.str();
}

Outcome cmd_curve(const Options& o, bool survival) {
  const auto sample = load_right(o);
  const auto curve = survival ? kaplan_meier(sample) : nelson_aalen(sample);
  if (o.format == "csv") return Outcome(curve_csv(curve, o));
  std::optional<Band> band;
  if (o.band != "none") {
    if (o.band_interval.size() != 2) throw UsageError("--band needs --band-interval LO HI");
    BandSpec spec;
    spec.type = o.band == "ep" ? BandType::equal_precision : BandType::hall_wellner;
    spec.conf_level = o.conf_level;
    spec.t_lo = o.band_interval[0];
    spec.t_hi = o.band_interval[1];
    spec.mc_reps = o.mc_reps;
    spec.grid_points = o.grid_points;
    spec.seed = require_seed(o, "--band");
    band = simultaneous_band(curve, spec);
  }
  Json j = to_json(curve, band);
  const auto tr = parse_transform(o.transform);
  std::vector<double> lo;
  std::vector<double> hi;
  for (double t : curve.estimate.jump_times()) {
    const auto ci = pointwise_ci(curve, t, o.conf_level, tr);
    lo.push_back(ci.lo);
    hi.push_back(ci.hi);
  }
  j["pointwise"] = Json{{"conf_level", o.conf_level},
                        {"transform", o.transform},
                        {"lo", to_json(lo)},
                        {"hi", to_json(hi)}};
  if (survival && !o.quantiles.empty()) {
    Json qs = Json::array();
    for (double p : o.quantiles) {
      try {
        qs.push_back(to_json(survival_quantile(curve, p, o.conf_level, tr)));
      } catch (const QuantileUndefinedError&) {
        qs.push_back(Json{{"p", p}, {"quantile", nullptr}, {"reason", "quantile-undefined"}});
      }
    }
    j["quantiles"] = std::move(qs);
  }
  if (!survival && o.bandwidth) {
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(curve.max_time * k / 100.0);
    j["smoothed"] = Json{{"bandwidth", *o.bandwidth},
                         {"kernel", std::string(kernel_name(parse_kernel(o.kernel)))},
                         {"grid", to_json(grid)},
                         {"hazard", to_json(smoothed_hazard(curve, *o.bandwidth,
                                                            parse_kernel(o.kernel), grid))}};
  }
  return Outcome(dump(j));
}

Outcome cmd_aj(const Options& o) {
  std::istringstream in(read_file(o.input));
  const auto history = read_multistate(in, o.states);
  return Outcome(dump(to_json(aalen_johansen(history))));
}

Outcome cmd_cif(const Options& o) {
  Options oo = o;
  if (oo.cause_col.empty()) oo.cause_col = "cause";
  return Outcome(dump(to_json(competing_risks_cif(load_right(oo)))));
}

Outcome cmd_excess(const Options& o) {
  const auto text = read_file(o.input);
  const auto cols = columns(o);
  const auto names = covariate_names(text, cols);
  const auto it = std::find(names.begin(), names.end(), o.population_col);
  if (it == names.end()) throw ValidationError("population column '" + o.population_col + "' not found");
  std::istringstream in(text);
  const auto sample = read_right_censored(in, cols);
  const auto c = static_cast<Eigen::Index>(it - names.begin());
  std::vector<PopulationHazard> mu;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double rate = sample.covariates()(static_cast<Eigen::Index>(i), c);
    if (rate < 0.0) throw ValidationError("population hazard must be nonnegative");
    mu.push_back([rate](double) { return rate; });
  }
  return Outcome(dump(to_json(excess_mortality(sample, mu, o.step))));
}

Outcome cmd_dabrowska(const Options& o) {
  std::istringstream in(read_file(o.input));
  return Outcome(dump(to_json(dabrowska(read_bivariate(in)))));
}

Outcome cmd_turnbull(const Options& o) {
  std::istringstream in(read_file(o.input));
  const auto problem = turnbull_intervals(read_interval(in));
  const auto sol = turnbull_em(problem, o.tol.value_or(1e-9), o.max_iter.value_or(100000));
  Outcome out{dump(to_json(problem, sol))};
  if (!sol.converged) {
    out.code = kExitNumerical;
    out.failure = "EM did not converge within the iteration limit";
  }
  return out;
}

Outcome cmd_logrank(const Options& o) {
  const auto sample = load_right(o);
  WeightSpec w;
  w.kind = o.weight == "wilcoxon" ? WeightKind::wilcoxon
           : o.weight == "fh"     ? WeightKind::fleming_harrington
                                  : WeightKind::logrank;
  w.rho = o.rho;
  const double t = o.until.value_or(kInf);
  const auto result = o.strata_col.empty() ? k_sample_logrank(sample, w, t)
                                           : stratified_logrank(sample, w, t);
  Json j = to_json(result);
  j["weight"] = o.weight;
  if (w.kind == WeightKind::fleming_harrington) j["rho"] = o.rho;
  return Outcome(dump(j));
}

CoxOptions cox_options(const Options& o) {
  CoxOptions c;
  if (o.tol) c.tol = *o.tol;
  if (o.max_iter) c.max_iter = *o.max_iter;
  return c;
}

Outcome cmd_cox(const Options& o) {
  std::vector<std::string> names;
  const auto sample = load_right(o, &names);
  const auto fit = cox_fit(sample, cox_options(o));
  Json j;
  j["covariates"] = names;
  const Json body = to_json(fit);
  for (const auto& [k, v] : body.items()) j[k] = v;
  if (o.bandwidth) {
    std::vector<double> grid;
    const double tmax = sample.time().maxCoeff();
    for (int k = 0; k <= 100; ++k) grid.push_back(tmax * k / 100.0);
    j["smoothed_baseline"] = Json{
        {"grid", to_json(grid)},
        {"hazard", to_json(smoothed_baseline(fit, *o.bandwidth, parse_kernel(o.kernel), grid))}};
  }
  Outcome out{dump(j)};
  if (!fit.converged) {
    out.code = kExitNumerical;
    out.failure = "Newton iteration did not converge";
  }
  return out;
}

Outcome cmd_aalen(const Options& o) {
  std::vector<std::string> names;
  const auto sample = load_right(o, &names);
  const auto fit = aalen_additive(sample);
  Json j;
  names.insert(names.begin(), "intercept");
  j["covariates"] = names;
  const Json body = to_json(fit);
  for (const auto& [k, v] : body.items()) j[k] = v;
  if (o.bandwidth) {
    std::vector<double> grid;
    const double tmax = fit.times.empty() ? 0.0 : fit.times.back();
    for (int k = 0; k <= 100; ++k) grid.push_back(tmax * k / 100.0);
    Json rows = Json::array();
    for (const auto& r :
         aalen_smoothed_coefficients(fit, *o.bandwidth, parse_kernel(o.kernel), grid)) {
      rows.push_back(to_json(r));
    }
    j["smoothed"] = Json{{"grid", to_json(grid)}, {"coefficients", std::move(rows)}};
  }
  return Outcome(dump(j));
}

Outcome cmd_bj(const Options& o) {
  std::vector<std::string> names;
  const auto sample = load_right(o, &names);
  BuckleyJamesOptions bo;
  if (o.tol) bo.tol = *o.tol;
  if (o.max_iter) bo.max_iter = *o.max_iter;
  const auto fit = buckley_james(sample, bo);
  Json j;
  names.insert(names.begin(), "intercept");
  j["covariates"] = names;
  const Json body = to_json(fit);
  for (const auto& [k, v] : body.items()) j[k] = v;
  // a cycle is resolved by averaging over it; only a run out of iterations fails
  if (fit.cycled) j["warning"] = "iteration cycled; coefficients averaged over the cycle";
  Outcome out{dump(j)};
  if (!fit.converged && !fit.cycled) {
    out.code = kExitNumerical;
    out.failure = "iteration did not converge";
  }
  return out;
}

Outcome cmd_beran(const Options& o) {
  if (!o.z0) throw UsageError("beran needs --z0");
  if (!o.bandwidth) throw UsageError("beran needs --bandwidth");
  const auto sample = load_right(o);
  return Outcome(dump(to_json(
      beran_conditional(sample, *o.z0, *o.bandwidth, parse_kernel(o.kernel), o.column))));
}

Outcome cmd_parametric(const Options& o) {
  const auto sample = load_right(o);
  ParametricOptions po;
  if (o.tol) po.tol = *o.tol;
  if (o.max_iter) po.max_iter = *o.max_iter;
  const auto fit = parametric_fit(
      sample, o.family == "exponential" ? ParametricFamily::exponential : ParametricFamily::weibull,
      po);
  Outcome out{dump(to_json(fit))};
  if (!fit.converged) {
    out.code = kExitNumerical;
    out.failure = "Newton iteration did not converge";
  }
  return out;
}

Outcome cmd_residuals(const Options& o) {
  const auto sample = load_right(o);
  const auto fit = cox_fit(sample, cox_options(o));
  if (!fit.converged) throw NumericalError("Cox fit did not converge");
  auto res = martingale_residuals(fit, sample);
  if (o.format == "csv") {
    std::ostringstream out;
    out << "time,status,martingale,deviance,cox_snell\n";
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out << format_double(sample.time(i)) << ',' << res.status[k] << ','
          << format_double(res.martingale[k]) << ',' << format_double(res.deviance[k]) << ','
          << format_double(res.cox_snell[k]) << '\n';
    }
    return Outcome(out.str());
  }
  Json j;
  j["residuals"] = to_json(res);
  j["cox_snell"] = to_json(cox_snell(fit, sample));
  if (!o.strata_col.empty()) {
    Json arjas = Json::array();
    for (const auto& s : arjas_plot_data(fit, sample, sample.strata())) arjas.push_back(to_json(s));
    j["arjas"] = std::move(arjas);
    if (sample.stratum_labels().size() == 2) {
      // plot data is optional; a stratum too small to fit should not sink the residuals
      try {
        j["andersen"] = to_json(andersen_plot_data(sample, sample.strata()));
      } catch (const Error& e) {
        j["andersen"] = Json{{"skipped", e.what()}};
      }
    }
  }
  return Outcome(dump(j));
}

EventLaw parse_event(const std::string& s) {
  const auto parts = split(s, ':');
  EventLaw law;
  if (parts.size() == 2 && parts[0] == "exp") {
    law.kind = EventLaw::Kind::exponential;
    law.rate = to_double(parts[1], "--event");
  } else if (parts.size() == 3 && parts[0] == "weibull") {
    law.kind = EventLaw::Kind::weibull;
    law.shape = to_double(parts[1], "--event");
    law.scale = to_double(parts[2], "--event");
  } else {
    throw UsageError("--event must be exp:RATE or weibull:SHAPE:SCALE");
  }
  return law;
}

CensorLaw parse_censor(const std::string& s) {
  const auto parts = split(s, ':');
  CensorLaw law;
  if (parts.size() == 1 && parts[0] == "none") return law;
  if (parts.size() == 2 && parts[0] == "exp") {
    law.kind = CensorLaw::Kind::exponential;
    law.rate = to_double(parts[1], "--censor");
  } else if (parts.size() == 2 && parts[0] == "uniform") {
    law.kind = CensorLaw::Kind::uniform;
    law.upper = to_double(parts[1], "--censor");
  } else if (parts.size() == 2 && parts[0] == "admin") {
    law.kind = CensorLaw::Kind::admin;
    law.upper = to_double(parts[1], "--censor");
  } else {
    throw UsageError("--censor must be none, exp:RATE, uniform:UPPER or admin:TIME");
  }
  return law;
}

CovariateLaw parse_covariates(const std::string& s, std::size_t beta_dim) {
  CovariateLaw law;
  if (s.empty()) {
    if (beta_dim == 0) return law;
    if (beta_dim == 1) {
      law.kind = CovariateLaw::Kind::bernoulli;
      return law;
    }
    law.kind = CovariateLaw::Kind::normal;
    law.dim = static_cast<int>(beta_dim);
    return law;
  }
  const auto parts = split(s, ':');
  if (parts.size() == 1 && parts[0] == "none") return law;
  if (parts.size() == 2 && parts[0] == "bernoulli") {
    law.kind = CovariateLaw::Kind::bernoulli;
    law.p = to_double(parts[1], "--covariates");
  } else if (parts.size() == 2 && parts[0] == "normal") {
    law.kind = CovariateLaw::Kind::normal;
    law.dim = static_cast<int>(to_double(parts[1], "--covariates"));
  } else {
    throw UsageError("--covariates must be none, bernoulli:P or normal:DIM");
  }
  return law;
}

Outcome cmd_simulate(const Options& o) {
  SimConfig config;
  config.seed = require_seed(o, "simulate");
  config.n = o.n;
  config.censor = parse_censor(o.censor);
  std::ostringstream out;
  if (!o.rates.empty()) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : split(o.rates, ';')) {
      rows.emplace_back();
      for (const auto& x : split(r, ',')) rows.back().push_back(to_double(x, "--rates"));
    }
    MarkovSpec spec;
    const auto k = static_cast<Eigen::Index>(rows.size());
    spec.rates = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index h = 0; h < k; ++h) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(h)].size()) != k) {
        throw UsageError("--rates must be a square matrix, rows separated by ';'");
      }
      for (Eigen::Index j = 0; j < k; ++j) spec.rates(h, j) = rows[static_cast<std::size_t>(h)][static_cast<std::size_t>(j)];
    }
    spec.horizon = o.horizon;
    if (!o.initial.empty()) {
      spec.initial = Eigen::Map<const Eigen::VectorXd>(o.initial.data(),
                                                       static_cast<Eigen::Index>(o.initial.size()));
    }
    config.markov = spec;
    write_multistate(out, simulate_markov(config));
    return Outcome(out.str());
  }
  config.event = parse_event(o.event);
  config.covariates = parse_covariates(o.covariates, o.beta.size());
  if (o.model == "cox" || o.model == "aft") {
    config.model.kind = o.model == "cox" ? ModelSpec::Kind::cox : ModelSpec::Kind::aft;
    config.model.beta = Eigen::Map<const Eigen::VectorXd>(o.beta.data(),
                                                          static_cast<Eigen::Index>(o.beta.size()));
    config.model.sigma = o.sigma;
  }
  write_right_censored(out, simulate_right_censored(config));
  return Outcome(out.str());
}

using Handler = Outcome (*)(const Options&);

struct Command {
  const char* name;
  const char* help;
  Handler handler;
  bool needs_input;
};

Outcome cmd_na(const Options& o) { return cmd_curve(o, false); }
Outcome cmd_km(const Options& o) { return cmd_curve(o, true); }

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"na", "Nelson-Aalen cumulative hazard", cmd_na, true},
      {"km", "Kaplan-Meier survival curve", cmd_km, true},
      {"aj", "Aalen-Johansen transition matrices", cmd_aj, true},
      {"cif", "competing-risks cumulative incidence", cmd_cif, true},
      {"excess", "excess mortality against a population hazard column", cmd_excess, true},
      {"dabrowska", "bivariate survivor surface", cmd_dabrowska, true},
      {"turnbull", "interval-censored NPMLE", cmd_turnbull, true},
      {"logrank", "weighted k-sample or stratified log-rank test", cmd_logrank, true},
      {"cox", "Cox regression with Breslow baseline", cmd_cox, true},
      {"aalen", "additive hazards regression", cmd_aalen, true},
      {"bj", "Buckley-James censored linear regression", cmd_bj, true},
      {"beran", "kernel-conditional survival", cmd_beran, true},
      {"parametric", "exponential or Weibull maximum likelihood", cmd_parametric, true},
      {"residuals", "Cox model residuals and plot data", cmd_residuals, true},
      {"simulate", "simulate a sample as CSV", cmd_simulate, false},
  };
  return table;
}

void add_options(CLI::App& sub, Options& o, const Command& c) {
  auto* input = sub.add_option("--input", o.input, "input CSV");
  if (c.needs_input) input->required()->check(CLI::ExistingFile);
  sub.add_option("--output", o.output, "write the primary artifact here");
  sub.add_option("--manifest", o.manifest, "manifest path (default OUTPUT.manifest.json)");
  sub.add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));
  sub.add_option("--conf-level", o.conf_level)->check(CLI::Range(0.0, 1.0));
  sub.add_option("--transform", o.transform)->check(CLI::IsMember({"linear", "loglog", "arcsin"}));
  sub.add_option("--band", o.band)->check(CLI::IsMember({"ep", "hw", "none"}));
  sub.add_option("--band-interval", o.band_interval)->expected(2);
  sub.add_option("--mc-reps", o.mc_reps);
  sub.add_option("--grid-points", o.grid_points);
  sub.add_option("--quantile", o.quantiles)->expected(1, 16);
  sub.add_option("--weight", o.weight)->check(CLI::IsMember({"logrank", "wilcoxon", "fh"}));
  sub.add_option("--rho", o.rho);
  sub.add_option("--bandwidth", o.bandwidth);
  sub.add_option("--kernel", o.kernel)
      ->check(CLI::IsMember({"epanechnikov", "uniform", "biweight"}));
  sub.add_option("--seed", o.seed);
  sub.add_option("--group-col", o.group_col);
  sub.add_option("--strata-col", o.strata_col);
  sub.add_option("--cause-col", o.cause_col);
  sub.add_option("--tol", o.tol);
  sub.add_option("--max-iter", o.max_iter);
  sub.add_option("--until", o.until, "restrict tests to [0, UNTIL]");
  sub.add_option("--states", o.states);
  sub.add_option("--population-col", o.population_col);
  sub.add_option("--step", o.step, "quadrature step");
  sub.add_option("--z0", o.z0);
  sub.add_option("--column", o.column, "covariate index for beran");
  sub.add_option("--family", o.family)->check(CLI::IsMember({"exponential", "weibull"}));
  sub.add_option("--n", o.n);
  sub.add_option("--event", o.event);
  sub.add_option("--censor", o.censor);
  sub.add_option("--covariates", o.covariates);
  sub.add_option("--model", o.model)->check(CLI::IsMember({"none", "cox", "aft"}));
  sub.add_option("--beta", o.beta)->expected(1, 64);
  sub.add_option("--sigma", o.sigma);
  sub.add_option("--rates", o.rates, "generator rows separated by ';'");
  sub.add_option("--horizon", o.horizon);
  sub.add_option("--initial", o.initial)->expected(1, 64);
}

int report(std::ostream& err, const std::string& kind, int code, const std::string& message) {
  std::string flat = message;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  err << "error kind=" << kind << " exit=" << code << " message=" << flat << '\n';
  return code;
}

struct Execution {
  std::string subcommand;
  Options options;
  Json option_map = Json::object();
  Outcome outcome;
};

// Parses and runs one subcommand. Returns a nonzero exit code on usage
// errors or thrown failures; fills `exec` otherwise.
int execute(const std::vector<std::string>& args, Execution& exec, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"hazardforge: counting-process survival analysis"};
  app.require_subcommand(1);
  Options& o = exec.options;
  std::map<std::string, const Command*> by_name;
  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_options(*sub, o, c);
    by_name[c.name] = &c;
  }
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return -1;
  } catch (const CLI::ParseError& e) {
    return report(err, "usage", kExitUsage, e.what());
  }
  CLI::App* sub = app.get_subcommands().front();
  exec.subcommand = sub->get_name();
  for (const auto* opt : sub->get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--help") continue;
    exec.option_map[opt->get_name()] = opt->results();
  }
  try {
    if (o.format == "csv" && exec.subcommand != "na" && exec.subcommand != "km" &&
        exec.subcommand != "residuals" && exec.subcommand != "simulate") {
      throw UsageError("--format csv is available for na, km, residuals and simulate");
    }
    exec.outcome = by_name.at(exec.subcommand)->handler(o);
  } catch (const UsageError& e) {
    return report(err, "usage", kExitUsage, e.what());
  } catch (const ValidationError& e) {
    return report(err, e.kind(), kExitValidation, e.what());
  } catch (const DomainError& e) {
    return report(err, e.kind(), kExitValidation, e.what());
  } catch (const NumericalError& e) {
    return report(err, e.kind(), kExitNumerical, e.what());
  } catch (const std::exception& e) {
    return report(err, "internal", kExitNumerical, e.what());
  }
  return kExitOk;
}

std::vector<std::string> strip_output_args(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--output" || args[i] == "--manifest") {
      ++i;
      continue;
    }
    if (args[i].rfind("--output=", 0) == 0 || args[i].rfind("--manifest=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

Json build_manifest(const std::vector<std::string>& args, const Execution& exec) {
  Json m;
  m["schema"] = kManifestSchema;
  m["subcommand"] = exec.subcommand;
  m["args"] = strip_output_args(args);
  Json inputs = Json::array();
  if (!exec.options.input.empty()) {
    inputs.push_back(Json{{"path", exec.options.input},
                          {"fnv1a", fnv1a_hex(read_file(exec.options.input))}});
  }
  m["inputs"] = std::move(inputs);
  m["options"] = exec.option_map;
  if (exec.options.seed) {
    m["seed"] = *exec.options.seed;
  } else {
    m["seed"] = nullptr;
  }
  m["output"] = exec.options.output;
  m["format"] = exec.subcommand == "simulate" ? "csv" : exec.options.format;
  m["checksums"] = Json{{"output", fnv1a_hex(exec.outcome.primary)}};
  m["exit_code"] = exec.outcome.code;
  return m;
}

int run_replay(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"replay a run manifest"};
  std::string manifest_path;
  std::string output;
  app.add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  app.add_option("--output", output, "also write the replayed artifact here");
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend() - 1));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report(err, "usage", kExitUsage, e.what());
  }
  Json m;
  try {
    m = Json::parse(read_file(manifest_path));
    if (m.value("schema", "") != kManifestSchema) throw ValidationError("not a run manifest");
    for (const auto& in : m.at("inputs")) {
      const auto path = in.at("path").get<std::string>();
      if (fnv1a_hex(read_file(path)) != in.at("fnv1a").get<std::string>()) {
        throw ValidationError("input " + path + " changed since the manifest was written");
      }
    }
  } catch (const ValidationError& e) {
    return report(err, e.kind(), kExitValidation, e.what());
  } catch (const Json::exception& e) {
    return report(err, "validation", kExitValidation, std::string("bad manifest: ") + e.what());
  }
  Execution exec;
  const auto replay_args = m.at("args").get<std::vector<std::string>>();
  const int code = execute(replay_args, exec, out, err);
  if (code != kExitOk) return code;
  if (!output.empty()) write_file(output, exec.outcome.primary);
  const auto expected = m.at("checksums").at("output").get<std::string>();
  const auto actual = fnv1a_hex(exec.outcome.primary);
  Json r;
  r["manifest"] = manifest_path;
  r["expected"] = expected;
  r["actual"] = actual;
  r["identical"] = expected == actual;
  out << dump(r);
  if (expected != actual) {
    return report(err, "replay-mismatch", kExitNumerical, "replayed output differs from manifest");
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && args.front() == "replay") return run_replay(args, out, err);
  Execution exec;
  const int code = execute(args, exec, out, err);
  if (code == -1) return kExitOk;  // help
  if (code != kExitOk) return code;
  try {
    const auto& o = exec.options;
    if (o.output.empty()) {
      out << exec.outcome.primary;
    } else {
      write_file(o.output, exec.outcome.primary);
    }
    const std::string manifest_path =
        !o.manifest.empty() ? o.manifest : (o.output.empty() ? "" : o.output + ".manifest.json");
    if (!manifest_path.empty()) write_file(manifest_path, dump(build_manifest(args, exec)));
  } catch (const ValidationError& e) {
    return report(err, e.kind(), kExitValidation, e.what());
  }
  if (exec.outcome.code != kExitOk) {
    return report(err, "numerical", exec.outcome.code, exec.outcome.failure);
  }
  return kExitOk;
}

}  // namespace hazardforge::cli
