#include "pacbayes_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pacbayes/bounds.hpp"
#include "pacbayes/compare.hpp"
#include "pacbayes/gibbs.hpp"
#include "pacbayes/instance.hpp"
#include "pacbayes/model.hpp"
#include "pacbayes/numeric.hpp"
#include "pacbayes/posterior.hpp"
#include "pacbayes/processes.hpp"
#include "pacbayes/verify.hpp"
#include "pacbayes_cli/config.hpp"

#ifndef PACBAYES_VERSION
#define PACBAYES_VERSION "unknown"
#endif

namespace pacbayes::cli {

namespace {

using nlohmann::json;

/// Raised for invalid flag combinations detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kSubcommands[] = {"bounds", "coverage", "lemmas", "duality", "optimize", "sweep", "gen-instance"};

struct Options {
  std::string config;
  std::string out;
  std::string run_log = "pacbayes_runs.jsonl";
  std::optional<std::uint64_t> seed;
  std::string instance;

  // bounds
  std::string family = "all";
  std::optional<double> emp;
  std::optional<double> kl;
  std::optional<std::size_t> m;
  std::optional<double> flat;
  double delta = 0.05;
  double catoni_C = 1.0;
  double c = 1.0;
  std::optional<double> c2;
  double h = 0.5;

  // coverage, optimize, sweep
  std::string rule = "gibbs";
  double beta = 1.0;
  std::string beta_grid = "0,0.1,0.3,1,3,10";
  std::size_t refine_steps = 20;
  std::size_t trials = 1000;
  std::string m_grid;
  std::string save_instance;

  // lemmas and duality
  std::string which;
  std::optional<double> lambda_over_m;
  std::optional<double> k;
  std::string mu;
  bool force = false;
  std::size_t f = 0;
  std::optional<double> t;
  std::string variant = "kl-ball";
  double kappa = 1.0;
  std::string kappas = "0.1,1,3";
  std::string values;
  double lambda_min = 1e-3;
  double lambda_max = 1e4;
  std::size_t lambda_count = 200;
  double tolerance = 1e-6;

  // gen-instance
  std::size_t hypotheses = 10;
  std::size_t points = 8;
  std::size_t levels = 2;
  double max_error = 0.5;
};

struct Outcome {
  int code = kExitOk;
  std::string text;
  json summary = json::object();
};

// ---------------------------------------------------------------------------
// Formatting and parsing helpers

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) { row_strings(std::vector<std::string>(header)); }

  template <class... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> out;
    (out.push_back(cell(cells)), ...);
    row_strings(out);
  }

  [[nodiscard]] std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(std::string_view v) { return std::string(v); }
  static std::string cell(const char* v) { return v; }
  static std::string cell(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

  std::ostringstream os_;
};

double parse_double(const std::string& token, const char* what) {
  char* stop = nullptr;
  const double v = std::strtod(token.c_str(), &stop);
  if (token.empty() || stop != token.c_str() + token.size()) {
    throw UsageError(std::string("invalid number '") + token + "' in " + what);
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) throw UsageError(std::string("empty entry in ") + what);
    out.push_back(parse_double(item.substr(a, b - a + 1), what));
  }
  if (out.empty()) throw UsageError(std::string(what) + " must not be empty");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  for (double v : parse_list(text, what)) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) {
      throw UsageError(std::string(what) + " entries must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<BoundFamily> parse_families(const std::string& text) {
  if (text == "all") return {kAllBoundFamilies.begin(), kAllBoundFamilies.end()};
  std::vector<BoundFamily> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto f = parse_bound_family(item);
    if (!f) throw UsageError("unknown bound family '" + item + "'");
    out.push_back(*f);
  }
  if (out.empty()) throw UsageError("--family must name at least one family");
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Shared pieces of the subcommand pipelines

std::uint64_t require_seed(const Options& o, const std::string& command) {
  if (!o.seed) throw UsageError(command + " is stochastic and requires --seed");
  return *o.seed;
}

Instance require_instance(const Options& o, const std::string& command) {
  if (o.instance.empty()) throw UsageError(command + " requires --instance");
  try {
    return load_instance(o.instance);
  } catch (const ParseError& e) {
    throw UsageError(o.instance + ": " + e.what());
  }
}

std::size_t require_m(const Options& o, const std::string& command) {
  if (!o.m) throw UsageError(command + " requires --m");
  return *o.m;
}

BoundParams bound_params(const Options& o) {
  BoundParams p;
  p.delta = o.delta;
  p.catoni_C = o.catoni_C;
  p.c = o.c;
  p.c2 = o.c2;
  p.h = o.h;
  return p;
}

PosteriorRule posterior_rule(const Options& o, const Instance& inst) {
  const auto kind = parse_posterior_rule(o.rule);
  if (!kind) throw UsageError("unknown posterior rule '" + o.rule + "' (use fixed, gibbs or minimizer)");
  PosteriorRule rule;
  rule.kind = *kind;
  rule.beta = o.beta;
  rule.beta_grid = parse_list(o.beta_grid, "--beta-grid");
  rule.refine_steps = o.refine_steps;
  if (rule.kind == PosteriorRuleKind::fixed) {
    if (!inst.posterior) throw UsageError("the fixed rule needs a [posterior] section in the instance");
    rule.fixed = inst.posterior;
  }
  return rule;
}

std::string status(bool applicable, bool pass) { return applicable ? (pass ? "PASS" : "FAIL") : "NA"; }

// ---------------------------------------------------------------------------
// Subcommands

Outcome cmd_bounds(const Options& o) {
  const auto families = parse_families(o.family);
  const BoundParams params = bound_params(o);
  std::vector<BoundReport> reports;
  json summary;
  if (!o.instance.empty()) {
    const Instance inst = require_instance(o, "bounds");
    const std::size_t m = require_m(o, "bounds");
    const std::uint64_t seed = require_seed(o, "bounds with --instance");
    const Sample s = draw_sample(inst.space, m, seed);
    const ProbMeasure p = inst.prior_or_uniform();
    const ProbMeasure q = inst.posterior ? *inst.posterior : p;
    for (BoundFamily f : families) reports.push_back(evaluate_bound(f, params, q, p, inst.losses, s));
    summary["gibbs_risk"] = gibbs_risk(q, inst.losses, inst.space);
    summary["empirical_risk"] = gibbs_empirical_risk(q, inst.losses, s);
    summary["kl"] = finite_or_null(kl_divergence(q, p));
  } else {
    if (!o.emp || !o.kl || !o.m) throw UsageError("bounds needs --emp, --kl and --m, or --instance with --m and --seed");
    const bool needs_flat = std::find(families.begin(), families.end(), BoundFamily::flatness) != families.end();
    if (needs_flat && !o.flat) throw UsageError("the flatness family needs --flat (the h-flatness of the posterior)");
    const BoundTerms terms{*o.emp, *o.kl, *o.m, o.flat.value_or(0.0)};
    for (BoundFamily f : families) reports.push_back(evaluate_bound_terms(f, params, terms));
  }
  Csv csv({"family", "value", "emp_term", "complexity_term", "flatness_term", "C_derived", "lambda_over_m", "C1", "C2",
           "C3"});
  for (const auto& r : reports) {
    std::optional<double> derived;
    if (r.family == BoundFamily::catoni || r.family == BoundFamily::flatness) derived = r.constant("C");
    if (r.family == BoundFamily::matched_catoni) derived = r.constant("C_prime");
    csv.row(to_string(r.family), r.value, r.empirical_term, r.complexity_term, r.flatness_term, derived,
            r.constant("lambda_over_m"), r.constant("C1"), r.constant("C2"), r.constant("C3"));
    summary[std::string(to_string(r.family))] = finite_or_null(r.value);
  }
  return {kExitOk, csv.str(), summary};
}

Outcome cmd_coverage(const Options& o) {
  const Instance inst = require_instance(o, "coverage");
  const std::uint64_t seed = require_seed(o, "coverage");
  const std::size_t m = o.m.value_or(100);
  const auto families = parse_families(o.family);
  const BoundParams params = bound_params(o);
  const PosteriorRule rule = posterior_rule(o, inst);
  const ProbMeasure prior = inst.prior_or_uniform();

  Csv csv({"family", "trials", "violations", "cp_upper", "mean_slack"});
  Outcome outcome;
  for (BoundFamily f : families) {
    // Every family sees the same training sets.
    const auto r = coverage_experiment(inst.space, inst.losses, prior, rule, f, params, m, o.trials, seed);
    csv.row(to_string(f), r.trials, r.violations, r.clopper_pearson_upper, r.mean_slack);
    outcome.summary[std::string(to_string(f))] = {{"violations", r.violations},
                                                  {"cp_upper", r.clopper_pearson_upper}};
    if (r.violation_rate > params.delta) outcome.code = kExitCheckFailed;
  }
  outcome.text = csv.str();
  return outcome;
}

Outcome lemma_debias(const Options& o) {
  const Instance inst = require_instance(o, "lemmas --which debias");
  if (!o.lambda_over_m || !o.k) throw UsageError("debias needs --lambda-over-m and --k");
  const std::size_t m = o.m.value_or(100);
  const double x = *o.lambda_over_m;
  const double value = debias_mgf_exact(inst.prior_or_uniform(), inst.losses, inst.space, x, *o.k, m);
  const double threshold = log_cosh_ratio(x);
  const bool applicable = *o.k >= threshold;
  const bool pass = value <= 1.0 + 1e-12;
  Csv csv({"lemma", "m", "lambda_over_m", "k", "threshold_k", "value", "status"});
  csv.row("debias", m, x, *o.k, threshold, value, status(applicable, pass));
  return {applicable && !pass ? kExitCheckFailed : kExitOk, csv.str(), {{"value", value}, {"pass", pass}}};
}

Outcome lemma_xy(const Options& o) {
  if (o.mu.empty()) throw UsageError("xy needs --mu (comma-separated Bernoulli means)");
  const auto mu = parse_list(o.mu, "--mu");
  const double c2 = o.c2.value_or(o.h * o.h * o.c / (1.0 + 16.0 * o.h * o.h * o.c));
  const double cap = xy_lambda_cap(o.c, c2, o.h);
  const double x = o.lambda_over_m.value_or(0.5 * cap);
  const bool applicable = c2 > 0.0 && c2 < o.h * o.h * o.c && x > 0.0 && x < cap && o.h > 0.0 && o.h <= 1.0;
  const double value = xy_mgf_bruteforce(mu, x, o.c, c2, o.h, o.force);
  const bool pass = value <= 1.0 + 1e-12;
  Csv csv({"lemma", "m", "lambda_over_m", "c", "c2", "h", "cap", "value", "status"});
  csv.row("xy", mu.size(), x, o.c, c2, o.h, cap, value, status(applicable, pass));
  return {applicable && !pass ? kExitCheckFailed : kExitOk, csv.str(), {{"value", value}, {"pass", pass}}};
}

Outcome lemma_tail(const Options& o) {
  const Instance inst = require_instance(o, "lemmas --which tail");
  const std::uint64_t seed = require_seed(o, "lemmas --which tail");
  const std::size_t m = o.m.value_or(50);
  const double c2 = o.c2.value_or(o.h * o.h * o.c / (1.0 + 16.0 * o.h * o.h * o.c));
  const double threshold = shifted_flatness_threshold(m, c2, o.h);
  const double t = o.t.value_or(threshold);
  if (o.f >= inst.losses.hypothesis_count()) throw UsageError("--f is out of range of the loss table");
  const auto e = shifted_flatness_tail_mc(inst.losses, o.f, inst.space, m, c2, o.h, t, o.trials, seed);
  const bool applicable = t >= threshold;
  const bool pass = e.probability <= 0.5 + e.wilson_halfwidth;
  Csv csv({"lemma", "f", "m", "c2", "h", "t", "threshold", "trials", "hits", "probability", "wilson_halfwidth",
           "status"});
  csv.row("tail", o.f, m, c2, o.h, t, threshold, e.trials, e.hits, e.probability, e.wilson_halfwidth,
          status(applicable, pass));
  return {applicable && !pass ? kExitCheckFailed : kExitOk, csv.str(),
          {{"probability", e.probability}, {"pass", pass}}};
}

Outcome lemma_symmetrization(const Options& o) {
  const Instance inst = require_instance(o, "lemmas --which symmetrization");
  const std::uint64_t seed = require_seed(o, "lemmas --which symmetrization");
  if (!o.t) throw UsageError("symmetrization needs --t");
  SymmetrizationParams params;
  if (o.variant == "kl-ball") {
    params.variant = SymmetrizationVariant::shifted_kl_ball;
  } else if (o.variant == "flatness-rows") {
    params.variant = SymmetrizationVariant::flatness_rows;
  } else {
    throw UsageError("unknown --variant '" + o.variant + "' (use kl-ball or flatness-rows)");
  }
  params.m = o.m.value_or(20);
  params.kappa = o.kappa;
  params.c = o.c;
  params.h = o.h;
  params.c2 = o.c2.value_or(params.variant == SymmetrizationVariant::shifted_kl_ball
                                ? o.c / 2.0
                                : o.h * o.h * o.c / (1.0 + 16.0 * o.h * o.h * o.c));
  const auto r = symmetrization_tail_mc(inst.space, inst.losses, inst.prior_or_uniform(), params, *o.t, o.trials, seed);
  const bool pass = r.lhs.probability <= 4.0 * r.rhs.probability + r.lhs.wilson_halfwidth + 4.0 * r.rhs.wilson_halfwidth;
  Csv csv({"lemma", "variant", "m", "kappa", "t", "trials", "lhs", "lhs_halfwidth", "rhs", "rhs_halfwidth",
           "rhs_level", "status"});
  csv.row("symmetrization", o.variant, params.m, params.kappa, *o.t, o.trials, r.lhs.probability,
          r.lhs.wilson_halfwidth, r.rhs.probability, r.rhs.wilson_halfwidth, r.rhs_level,
          status(r.precondition_met, pass));
  return {r.precondition_met && !pass ? kExitCheckFailed : kExitOk, csv.str(),
          {{"lhs", r.lhs.probability}, {"rhs", r.rhs.probability}, {"pass", pass}}};
}

Outcome lemma_markov(const Options& o) {
  const Instance inst = require_instance(o, "lemmas --which markov");
  const std::uint64_t seed = require_seed(o, "lemmas --which markov");
  if (!o.t) throw UsageError("markov needs --t");
  const double c2 = o.c2.value_or(o.c / 2.0);
  const std::size_t m = o.m.value_or(20);
  const double x = o.lambda_over_m.value_or(derive_matched_catoni_constants(o.c, c2, o.delta).lambda_over_m);
  const ProbMeasure prior = inst.prior_or_uniform();
  const double bound = markov_shifted_tail_bound(prior, inst.losses, inst.space, m, o.kappa, o.c, c2, x, *o.t);
  SymmetrizationParams params;
  params.m = m;
  params.kappa = o.kappa;
  params.c = o.c;
  params.c2 = c2;
  const auto sim = symmetrization_tail_mc(inst.space, inst.losses, prior, params, *o.t, o.trials, seed);
  const bool pass = sim.lhs.probability <= bound + sim.lhs.wilson_halfwidth;
  Csv csv({"lemma", "m", "kappa", "lambda_over_m", "t", "bound", "lhs", "lhs_halfwidth", "status"});
  csv.row("markov", m, o.kappa, x, *o.t, bound, sim.lhs.probability, sim.lhs.wilson_halfwidth, status(true, pass));
  return {pass ? kExitOk : kExitCheckFailed, csv.str(), {{"bound", bound}, {"lhs", sim.lhs.probability}}};
}

Outcome cmd_lemmas(const Options& o) {
  if (o.which == "debias") return lemma_debias(o);
  if (o.which == "xy") return lemma_xy(o);
  if (o.which == "tail") return lemma_tail(o);
  if (o.which == "symmetrization") return lemma_symmetrization(o);
  if (o.which == "markov") return lemma_markov(o);
  throw UsageError("--which must be one of debias, xy, tail, symmetrization, markov");
}

Outcome cmd_duality(const Options& o) {
  const Instance inst = require_instance(o, "duality");
  const ProbMeasure prior = inst.prior_or_uniform();
  const std::vector<double> values =
      o.values.empty() ? true_risks(inst.losses, inst.space) : parse_list(o.values, "--values");
  if (values.size() != prior.size()) throw UsageError("--values must have one entry per hypothesis");
  const auto grid = log_spaced_grid(o.lambda_min, o.lambda_max, o.lambda_count);
  Csv csv({"kappa", "primal", "dual", "gap", "status"});
  Outcome outcome;
  double worst = 0.0;
  for (double kappa : parse_list(o.kappas, "--kappa")) {
    const double primal = kl_ball_sup(prior, values, kappa);
    const double dual = kl_dual_value(prior, values, kappa, grid);
    const double gap = dual - primal;
    const bool pass = std::abs(gap) <= o.tolerance;
    worst = std::max(worst, std::abs(gap));
    csv.row(kappa, primal, dual, gap, status(true, pass));
    if (!pass) outcome.code = kExitCheckFailed;
  }
  outcome.text = csv.str();
  outcome.summary = {{"max_abs_gap", worst}};
  return outcome;
}

Outcome cmd_optimize(const Options& o) {
  Instance inst = require_instance(o, "optimize");
  const std::uint64_t seed = require_seed(o, "optimize");
  const std::size_t m = require_m(o, "optimize");
  const auto families = parse_families(o.family == "all" ? std::string("catoni") : o.family);
  if (families.size() != 1) throw UsageError("optimize needs a single --family");
  const BoundObjective objective{families.front(), bound_params(o)};
  const Sample s = draw_sample(inst.space, m, seed);
  const ProbMeasure prior = inst.prior_or_uniform();
  const auto grid = parse_list(o.beta_grid, "--beta-grid");
  const auto r = minimize_bound(objective, prior, inst.losses, s, grid, o.refine_steps);
  const double risk = gibbs_risk(r.posterior, inst.losses, inst.space);
  const double kl = kl_divergence(r.posterior, prior);
  const double flat = flatness(r.posterior, inst.losses, s, o.h).value;
  Csv csv({"family", "beta", "accepted_steps", "value", "emp_term", "complexity_term", "flatness_term", "kl",
           "flatness", "gibbs_risk"});
  csv.row(to_string(r.report.family), r.beta, r.accepted_steps, r.report.value, r.report.empirical_term,
          r.report.complexity_term, r.report.flatness_term, kl, flat, risk);
  if (!o.save_instance.empty()) {
    inst.posterior = r.posterior;
    save_instance(inst, o.save_instance);
  }
  return {risk > r.report.value ? kExitCheckFailed : kExitOk, csv.str(),
          {{"value", finite_or_null(r.report.value)}, {"gibbs_risk", risk}, {"beta", r.beta}}};
}

Outcome cmd_sweep(const Options& o) {
  const Instance inst = require_instance(o, "sweep");
  const std::uint64_t seed = require_seed(o, "sweep");
  if (o.m_grid.empty()) throw UsageError("sweep requires --m-grid");
  SweepConfig config;
  config.c = o.c;
  config.h = o.h;
  config.delta = o.delta;
  config.m_grid = parse_size_list(o.m_grid, "--m-grid");
  config.trials = o.trials;
  config.seed = seed;
  const auto table = bound_sweep(inst.space, inst.losses, inst.prior_or_uniform(), posterior_rule(o, inst), config);
  Csv csv({"m", "catoni_mean", "flatness_mean", "T_m_mean", "kl_mean", "crossover_flag"});
  for (const auto& row : table.rows) {
    csv.row(row.m, row.catoni_mean, row.flatness_mean, row.T_m_mean, row.kl_mean, row.crossover_flag);
  }
  json summary = {{"crossover_m", finite_or_null(table.crossover_m)},
                  {"catoni_C", table.catoni_C},
                  {"T_m_mean", table.T_m_mean},
                  {"kl_mean", table.kl_mean}};
  if (table.T_m_mean > 0.0) {
    const auto sc = schematic_constants(o.c, o.h);
    summary["crossover_threshold"] = crossover_threshold(table.T_m_mean, sc.C_r, sc.C_c, table.kl_mean, o.delta);
  }
  return {kExitOk, csv.str(), summary};
}

Outcome cmd_gen_instance(const Options& o) {
  const std::uint64_t seed = require_seed(o, "gen-instance");
  const Instance inst = generate_instance({o.hypotheses, o.points, o.levels, o.max_error}, seed);
  return {kExitOk, format_instance(inst),
          {{"hypotheses", o.hypotheses}, {"points", o.points}, {"binary", inst.losses.is_binary()}}};
}

// ---------------------------------------------------------------------------
// Command-line definition

void add_bound_params(CLI::App* sub, Options& o, bool with_catoni_C) {
  sub->add_option("--delta", o.delta, "Confidence parameter delta in (0, 1)")->capture_default_str();
  if (with_catoni_C) sub->add_option("--C", o.catoni_C, "Catoni's C")->capture_default_str();
  sub->add_option("--c", o.c, "Inflation of the empirical risk")->capture_default_str();
  sub->add_option("--c2", o.c2, "Auxiliary constant (family-dependent default)");
  sub->add_option("--h", o.h, "Flatness parameter")->capture_default_str();
}

void add_rule_options(CLI::App* sub, Options& o) {
  sub->add_option("--rule", o.rule, "Posterior rule: fixed, gibbs or minimizer")->capture_default_str();
  sub->add_option("--beta", o.beta, "Inverse temperature of the gibbs rule")->capture_default_str();
  sub->add_option("--beta-grid", o.beta_grid, "Comma-separated temperatures for the minimizer")->capture_default_str();
  sub->add_option("--refine-steps", o.refine_steps, "Exponentiated-gradient steps for the minimizer")
      ->capture_default_str();
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Configuration file of section.key = value lines");
  sub->add_option("--out", o.out, "Write output here instead of stdout");
  sub->add_option("--run-log", o.run_log, "Append a JSON run record to this file (empty to disable)")
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "64-bit seed (required by stochastic subcommands)");
}

struct Cli {
  CLI::App app{"PAC-Bayes bound evaluation, certification and lemma checks", "pacbayes"};
  Options opts;
  std::map<std::string, std::function<Outcome(const Options&)>> handlers;

  Cli() {
    // --h is the flatness parameter, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", PACBAYES_VERSION);
    Options& o = opts;

    auto* bounds = app.add_subcommand("bounds", "Evaluate bound families from scalar terms or an instance");
    add_common(bounds, o);
    bounds->add_option("--family", o.family, "all, or comma-separated family names")->capture_default_str();
    bounds->add_option("--emp", o.emp, "Empirical Gibbs risk");
    bounds->add_option("--kl", o.kl, "KL(Q||P)");
    bounds->add_option("--m", o.m, "Sample size");
    bounds->add_option("--flat", o.flat, "h-flatness of the posterior (flatness family)");
    bounds->add_option("--instance", o.instance, "Instance file; draws a sample of size --m with --seed");
    add_bound_params(bounds, o, true);
    handlers["bounds"] = cmd_bounds;

    auto* coverage = app.add_subcommand("coverage", "Certify bound coverage over repeated sample draws");
    add_common(coverage, o);
    coverage->add_option("--instance", o.instance, "Instance file");
    coverage->add_option("--family", o.family, "all, or comma-separated family names")->capture_default_str();
    coverage->add_option("--m", o.m, "Sample size (default 100)");
    coverage->add_option("--trials", o.trials, "Number of training sets")->capture_default_str();
    add_bound_params(coverage, o, true);
    add_rule_options(coverage, o);
    handlers["coverage"] = cmd_coverage;

    auto* lemmas = app.add_subcommand("lemmas", "Check the MGF and tail lemmas behind the bounds");
    add_common(lemmas, o);
    lemmas->add_option("--which", o.which, "debias, xy, tail, symmetrization or markov")->required();
    lemmas->add_option("--instance", o.instance, "Instance file");
    lemmas->add_option("--m", o.m, "Sample size");
    lemmas->add_option("--lambda-over-m", o.lambda_over_m, "lambda/m");
    lemmas->add_option("--k", o.k, "Rademacher shift (debias)");
    lemmas->add_option("--mu", o.mu, "Comma-separated Bernoulli means (xy)");
    lemmas->add_flag("--force", o.force, "Evaluate xy outside its admissible range");
    lemmas->add_option("--f", o.f, "Hypothesis index (tail)")->capture_default_str();
    lemmas->add_option("--t", o.t, "Deviation level");
    lemmas->add_option("--variant", o.variant, "kl-ball or flatness-rows (symmetrization)")->capture_default_str();
    lemmas->add_option("--kappa", o.kappa, "KL radius")->capture_default_str();
    lemmas->add_option("--trials", o.trials, "Monte-Carlo trials")->capture_default_str();
    add_bound_params(lemmas, o, false);
    handlers["lemmas"] = cmd_lemmas;

    auto* duality = app.add_subcommand("duality", "Compare the KL-ball supremum with its dual");
    add_common(duality, o);
    duality->add_option("--instance", o.instance, "Instance file (prior and default values)");
    duality->add_option("--kappa", o.kappas, "Comma-separated KL radii")->capture_default_str();
    duality->add_option("--values", o.values, "Comma-separated values per hypothesis (default: true risks)");
    duality->add_option("--lambda-min", o.lambda_min, "Smallest grid lambda")->capture_default_str();
    duality->add_option("--lambda-max", o.lambda_max, "Largest grid lambda")->capture_default_str();
    duality->add_option("--lambda-count", o.lambda_count, "Grid size")->capture_default_str();
    duality->add_option("--tolerance", o.tolerance, "Allowed |dual - primal|")->capture_default_str();
    handlers["duality"] = cmd_duality;

    auto* optimize = app.add_subcommand("optimize", "Minimize a bound over posteriors for one sample");
    add_common(optimize, o);
    optimize->add_option("--instance", o.instance, "Instance file");
    optimize->add_option("--family", o.family, "Bound family to minimize (default catoni)");
    optimize->add_option("--m", o.m, "Sample size");
    optimize->add_option("--beta-grid", o.beta_grid, "Comma-separated temperatures")->capture_default_str();
    optimize->add_option("--refine-steps", o.refine_steps, "Exponentiated-gradient steps")->capture_default_str();
    optimize->add_option("--save-instance", o.save_instance, "Write the instance with the optimized posterior");
    add_bound_params(optimize, o, true);
    handlers["optimize"] = cmd_optimize;

    auto* sweep = app.add_subcommand("sweep", "Compare the flatness and aligned Catoni bounds across m");
    add_common(sweep, o);
    sweep->add_option("--instance", o.instance, "Instance file");
    sweep->add_option("--m-grid", o.m_grid, "Comma-separated sample sizes");
    sweep->add_option("--trials", o.trials, "Samples per grid point")->capture_default_str();
    sweep->add_option("--delta", o.delta, "Confidence parameter")->capture_default_str();
    sweep->add_option("--c", o.c, "Shared inflation of the empirical risk")->capture_default_str();
    sweep->add_option("--h", o.h, "Flatness parameter in (0, 1)")->capture_default_str();
    add_rule_options(sweep, o);
    handlers["sweep"] = cmd_sweep;

    auto* gen = app.add_subcommand("gen-instance", "Write a random instance file");
    add_common(gen, o);
    gen->add_option("--hypotheses", o.hypotheses, "Number of hypotheses")->capture_default_str();
    gen->add_option("--points", o.points, "Number of data points")->capture_default_str();
    gen->add_option("--levels", o.levels, "Loss levels (2 for zero-one loss)")->capture_default_str();
    gen->add_option("--max-error", o.max_error, "Upper end of per-hypothesis error rates")->capture_default_str();
    handlers["gen-instance"] = cmd_gen_instance;
  }
};

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

/// Flags for `command` taken from the config file; they precede the real
/// arguments so that explicit flags win.
std::vector<std::string> config_arguments(const std::string& path, const std::string& command, CLI::App* sub) {
  std::vector<std::string> out;
  for (const auto& e : load_config(path)) {
    const bool known_section =
        e.section == "common" || std::find(std::begin(kSubcommands), std::end(kSubcommands), e.section) !=
                                     std::end(kSubcommands);
    if (!known_section) {
      throw UsageError(path + ": line " + std::to_string(e.line) + ": unknown section '" + e.section + "'");
    }
    if (e.section != "common" && e.section != command) continue;
    const std::string flag = "--" + e.key;
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      if (e.section == "common") continue;  // common keys apply only where the flag exists
      throw UsageError(path + ": line " + std::to_string(e.line) + ": '" + command + "' has no option '" + e.key + "'");
    }
    if (e.key == "config") throw UsageError(path + ": line " + std::to_string(e.line) + ": nested config");
    if (opt->get_type_size() == 0) {
      if (e.value == "true") out.push_back(flag);
      else if (e.value != "false") throw UsageError(path + ": line " + std::to_string(e.line) + ": expected true or false");
    } else {
      out.push_back(flag);
      out.push_back(e.value);
    }
  }
  return out;
}

std::string canonical_config(CLI::App* sub) {
  std::vector<std::string> items;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (opt->count() == 0 || name == "--out" || name == "--run-log" || name == "--config" || name == "--seed" ||
        name == "--help") {
      continue;
    }
    std::string joined;
    for (const auto& r : opt->reduced_results()) joined += r + ";";
    items.push_back(name + "=" + joined);
  }
  std::sort(items.begin(), items.end());
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

void append_run_log(const std::string& path, const json& record) {
  if (path.empty()) return;
  std::ofstream log(path, std::ios::app | std::ios::binary);
  if (!log) throw std::runtime_error("cannot open run log " + path);
  log << record.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli;
  const auto command_it = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
  const std::string command = command_it == args.end() ? std::string() : *command_it;
  CLI::App* sub = nullptr;
  if (!command.empty()) {
    try {
      sub = cli.app.get_subcommand(command);
    } catch (const CLI::OptionNotFound&) {
    }
  }

  std::vector<std::string> full = args;
  try {
    if (sub) {
      if (const auto config = find_config_path(args)) {
        const auto extra = config_arguments(*config, command, sub);
        full.insert(full.begin() + (command_it - args.begin()) + 1, extra.begin(), extra.end());
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<std::string> reversed(full.rbegin(), full.rend());
  try {
    cli.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (sub ? sub->help() : cli.app.help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << cli.app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << PACBAYES_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << (sub ? sub->help() : cli.app.help());
    return kExitUsage;
  }

  const Options& o = cli.opts;
  Outcome outcome;
  try {
    outcome = cli.handlers.at(command)(o);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const ResourceLimitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }

  try {
    if (o.out.empty()) {
      out << outcome.text;
    } else {
      std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot write " + o.out);
      file << outcome.text;
      if (!file) throw std::runtime_error("failed writing " + o.out);
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_config(sub))));
    json record = {{"command", command},
                   {"config_hash", hash},
                   {"seed", o.seed ? json(*o.seed) : json(nullptr)},
                   {"version", PACBAYES_VERSION},
                   {"time", utc_now()},
                   {"exit_code", outcome.code},
                   {"summary", outcome.summary}};
    append_run_log(o.run_log, record);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (outcome.code == kExitCheckFailed) err << command << ": a check failed; see the status column\n";
  return outcome.code;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace pacbayes::cli
