// Command-line driver: simulation, conditional tail-index estimation, Hill
// traces, risk profiles, Monte Carlo studies and exploratory diagnostics over
// x,y CSV files. Every command is a pure function of (flags, config file,
// input files, seed); re-runs produce byte-identical outputs.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctev/bandwidth.hpp"
#include "ctev/csv.hpp"
#include "ctev/diagnostics.hpp"
#include "ctev/estimators.hpp"
#include "ctev/kernel.hpp"
#include "ctev/mc.hpp"
#include "ctev/series.hpp"
#include "ctev/simulate.hpp"

namespace {

using ctev::ConfigHeader;
using ctev::fmt17;

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

void report_error(const std::string& kind, const std::string& message, int exit_code) {
  std::cerr << "{\"error\":" << json_quote(kind) << ",\"message\":" << json_quote(message)
            << ",\"exit_code\":" << exit_code << "}" << std::endl;
}

const char* errc_name(ctev::errc c) {
  switch (c) {
    case ctev::errc::internal: return "internal";
    case ctev::errc::config: return "config";
    case ctev::errc::empty_window: return "empty_window";
    case ctev::errc::parse: return "parse";
    case ctev::errc::invariant: return "invariant";
    case ctev::errc::degenerate_sample: return "degenerate_sample";
    case ctev::errc::io: return "io";
    case ctev::errc::all_missing: return "all_missing";
    case ctev::errc::cholesky: return "cholesky";
    case ctev::errc::empty_side: return "empty_side";
    case ctev::errc::degenerate_series: return "degenerate_series";
    case ctev::errc::non_positive_response: return "non_positive_response";
  }
  return "error";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ctev::io_error("cannot open output file: " + path);
  return f;
}

// Expands `--config <file>` into `--key=value` tokens inserted right after
// the subcommand name. Flags given on the command line come later and win
// (every option takes the last value), so the precedence is
// defaults < config file < command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw ctev::config_error("cannot open config file: " + path);
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ctev::config_error("config file line is not key=value: " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ctev::config_error("config file line has an empty key: " + line);
    injected.push_back("--" + key + "=" + value);
  }

  std::vector<std::string> out;
  out.reserve(args.size() + injected.size());
  out.push_back(args.front());
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

void finish_out(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw ctev::io_error("write failed: " + path);
}

// --- simulation options shared by `simulate` and `mc` -----------------------

struct SimOpts {
  std::string model = "pareto";
  std::size_t n = 1000;
  double phi = 0.1;
  double length_scale = 0.5;
  double sigma = 1.0;
  std::size_t truncation = 100;
  double ar = 0.5;
  double ma = 0.2;
  double d = 0.1;
};

void add_sim_options(CLI::App* cmd, SimOpts& o) {
  cmd->add_option("--model", o.model, "generative model: frechet|pareto|csgms|arfima")
      ->capture_default_str();
  cmd->add_option("--n", o.n, "series length")->capture_default_str();
  cmd->add_option("--phi", o.phi, "AR(1) coefficient of the X and U drivers (frechet/pareto)")
      ->capture_default_str();
  cmd->add_option("--length-scale", o.length_scale, "Gaussian-process length scale (csgms)")
      ->capture_default_str();
  cmd->add_option("--sigma", o.sigma, "Gaussian-process standard deviation (csgms)")
      ->capture_default_str();
  cmd->add_option("--truncation", o.truncation, "point-process atoms kept (csgms)")
      ->capture_default_str();
  cmd->add_option("--ar", o.ar, "AR coefficient (arfima)")->capture_default_str();
  cmd->add_option("--ma", o.ma, "MA coefficient (arfima)")->capture_default_str();
  cmd->add_option("--d", o.d, "fractional-differencing order (arfima)")->capture_default_str();
}

ctev::SimSpec make_spec(const SimOpts& o, std::uint64_t seed) {
  ctev::SimSpec sp;
  sp.model = ctev::sim_model_from_name(o.model);
  sp.n = o.n;
  sp.seed = seed;
  sp.ar_coeff = o.phi;
  sp.length_scale = o.length_scale;
  sp.sigma = o.sigma;
  sp.truncation = o.truncation;
  sp.arfima_ar = o.ar;
  sp.arfima_ma = o.ma;
  sp.arfima_d = o.d;
  return sp;
}

void append_sim_config(ConfigHeader& cfg, const SimOpts& o, std::uint64_t seed) {
  cfg.emplace_back("model", o.model);
  cfg.emplace_back("n", std::to_string(o.n));
  cfg.emplace_back("seed", std::to_string(seed));
  const auto model = ctev::sim_model_from_name(o.model);
  if (model == ctev::SimModel::cond_frechet || model == ctev::SimModel::cond_pareto) {
    cfg.emplace_back("phi", fmt17(o.phi));
  } else if (model == ctev::SimModel::csgms) {
    cfg.emplace_back("length_scale", fmt17(o.length_scale));
    cfg.emplace_back("sigma", fmt17(o.sigma));
    cfg.emplace_back("truncation", std::to_string(o.truncation));
  } else {
    cfg.emplace_back("ar", fmt17(o.ar));
    cfg.emplace_back("ma", fmt17(o.ma));
    cfg.emplace_back("d", fmt17(o.d));
  }
}

// --- bandwidth-rule options --------------------------------------------------

struct RuleOpts {
  std::string rule = "fixed";
  double cv_b = 0.0;
  double cv_lo = 0.25;
  double cv_hi = 4.0;
  std::size_t cv_grid = 20;
};

void add_rule_options(CLI::App* cmd, RuleOpts& o) {
  cmd->add_option("--h-rule", o.rule, "bandwidth rule: fixed|sj-global|sj-concomitant|cv")
      ->capture_default_str();
  cmd->add_option("--cv-b", o.cv_b, "response smoothing bandwidth for cv (0 = automatic)")
      ->capture_default_str();
  cmd->add_option("--cv-lo", o.cv_lo, "cv grid lower factor")->capture_default_str();
  cmd->add_option("--cv-hi", o.cv_hi, "cv grid upper factor")->capture_default_str();
  cmd->add_option("--cv-grid", o.cv_grid, "cv grid size")->capture_default_str();
}

ctev::BandwidthRule make_rule(const RuleOpts& o) {
  ctev::BandwidthRule r;
  r.variant = ctev::bandwidth_rule_from_name(o.rule);
  r.cv = ctev::CVParams{o.cv_lo, o.cv_hi, o.cv_grid, o.cv_b};
  return r;
}

CLI::Option* add_ci_level(CLI::App* cmd, double& ci) {
  return cmd->add_option("--ci-level", ci, "confidence level, strictly inside (0,1)")
      ->capture_default_str()
      ->check([](const std::string& s) -> std::string {
        const double v = std::atof(s.c_str());
        if (v > 0.0 && v < 1.0) return {};
        return "must be strictly inside (0,1)";
      });
}

ctev::Kernel parse_kernel(const std::string& name) {
  const ctev::Kernel k = ctev::kernel_from_name(name);
  if (!k.compact())
    std::cerr << "note: the gaussian kernel has unbounded support; estimates use it as-is\n";
  return k;
}

void write_estimate_fields(std::ostream& out, const ctev::HillEstimate& e) {
  out << fmt17(e.gamma_hat) << ',' << fmt17(e.std_error) << ',' << fmt17(e.ci_lo) << ','
      << fmt17(e.ci_hi) << ',' << fmt17(e.q_hat) << ',' << fmt17(e.g_hat);
}

// --- commands ----------------------------------------------------------------

struct SimulateCmd {
  SimOpts sim;
  std::uint64_t seed = 1;
  std::string output;

  int run() const {
    const auto series = ctev::build_sim(make_spec(sim, seed));
    ConfigHeader cfg{{"command", "simulate"}};
    append_sim_config(cfg, sim, seed);
    auto out = open_out(output);
    ctev::write_config_header(out, cfg);
    out << "x,y\n";
    for (std::size_t j = 0; j < series.n(); ++j)
      out << fmt17(series.x()[j]) << ',' << fmt17(series.y()[j]) << "\n";
    finish_out(out, output);
    return 0;
  }
};

struct EstimateCmd {
  std::string input, output;
  double x0 = 0.5;
  std::size_t k = 0;
  double h = 0.0;  // explicit bandwidth; 0 means resolve through the rule
  std::string kernel = "epanechnikov";
  RuleOpts rule;
  double ci_level = 0.95;

  int run() const {
    const auto series = ctev::ingest_csv(input);
    const auto kern = parse_kernel(kernel);
    const double hr = h > 0.0 ? h : ctev::resolve(make_rule(rule), series, k);
    const auto est = ctev::cond_hill(series, ctev::EstimatorConfig{x0, k, hr, kern, ci_level});

    ConfigHeader cfg{{"command", "estimate"}, {"input", input},
                     {"x0", fmt17(x0)},       {"k", std::to_string(k)},
                     {"h", fmt17(hr)},        {"kernel", kernel},
                     {"h_rule", h > 0.0 ? std::string("explicit") : rule.rule},
                     {"ci_level", fmt17(ci_level)}};
    auto out = open_out(output);
    ctev::write_config_header(out, cfg);
    out << "k,h,gamma_hat,std_error,ci_lo,ci_hi,q_hat,g_hat,effective_mass,window_count\n";
    out << k << ',' << fmt17(hr) << ',';
    write_estimate_fields(out, est);
    out << ',' << fmt17(est.effective_mass) << ',' << est.window_count << "\n";
    finish_out(out, output);
    return 0;
  }
};

struct TraceCmd {
  std::string input, output;
  double x0 = 0.5;
  std::size_t k_min = 2, k_max = 0, k_step = 1;
  std::string kernel = "epanechnikov";
  RuleOpts rule;
  double ci_level = 0.95;

  int run() const {
    const auto series = ctev::ingest_csv(input);
    const auto kern = parse_kernel(kernel);
    const std::size_t hi = k_max == 0 ? series.n() : k_max;
    if (k_min < 2 || hi < k_min || k_step < 1)
      throw ctev::config_error("invalid k grid: need 2 <= k-min <= k-max and k-step >= 1");
    std::vector<std::size_t> ks;
    for (std::size_t k = k_min; k <= hi; k += k_step) ks.push_back(k);
    const auto trace = ctev::hill_trace(series, x0, kern, ks, make_rule(rule), ci_level);

    ConfigHeader cfg{{"command", "hill-trace"}, {"input", input},
                     {"x0", fmt17(x0)},          {"k_min", std::to_string(k_min)},
                     {"k_max", std::to_string(hi)}, {"k_step", std::to_string(k_step)},
                     {"kernel", kernel},         {"h_rule", rule.rule},
                     {"ci_level", fmt17(ci_level)}};
    auto out = open_out(output);
    ctev::write_config_header(out, cfg);
    out << "k,h,gamma_hat,std_error,ci_lo,ci_hi,q_hat,g_hat,window_count\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& p : trace) {
      out << p.k << ',' << fmt17(p.h) << ',';
      if (p.estimate) {
        write_estimate_fields(out, *p.estimate);
        out << ',' << p.estimate->window_count;
      } else {
        for (int c = 0; c < 6; ++c) out << fmt17(nan) << ',';
        out << 0;
      }
      out << "\n";
    }
    finish_out(out, output);
    return 0;
  }
};

struct ProfileCmd {
  std::string input, output;
  double x_min = 0.05, x_max = 0.95;
  std::size_t x_count = 19;
  std::size_t k = 0;
  std::string kernel = "epanechnikov";
  RuleOpts rule;
  double ci_level = 0.95;

  int run() const {
    const auto series = ctev::ingest_csv(input);
    const auto kern = parse_kernel(kernel);
    if (x_count < 1 || !(x_max >= x_min)) throw ctev::config_error("invalid x grid");
    std::vector<double> xs(x_count);
    for (std::size_t i = 0; i < x_count; ++i)
      xs[i] = x_count == 1 ? x_min
                           : x_min + (x_max - x_min) * static_cast<double>(i) /
                                 static_cast<double>(x_count - 1);
    const auto prof = ctev::risk_profile(series, xs, k, kern, make_rule(rule), ci_level);

    ConfigHeader cfg{{"command", "profile"}, {"input", input},
                     {"x_min", fmt17(x_min)}, {"x_max", fmt17(x_max)},
                     {"x_count", std::to_string(x_count)}, {"k", std::to_string(k)},
                     {"kernel", kernel},      {"h_rule", rule.rule},
                     {"ci_level", fmt17(ci_level)}};
    auto out = open_out(output);
    ctev::write_config_header(out, cfg);
    out << "x,gamma_hat,std_error,ci_lo,ci_hi\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& p : prof) {
      out << fmt17(p.x) << ',';
      if (p.estimate) {
        out << fmt17(p.estimate->gamma_hat) << ',' << fmt17(p.estimate->std_error) << ','
            << fmt17(p.estimate->ci_lo) << ',' << fmt17(p.estimate->ci_hi);
      } else {
        out << fmt17(nan) << ',' << fmt17(nan) << ',' << fmt17(nan) << ',' << fmt17(nan);
      }
      out << "\n";
    }
    finish_out(out, output);
    return 0;
  }
};

struct McCmd {
  SimOpts sim;
  std::uint64_t base_seed = 1;
  double x0 = 0.6;
  std::string k_fracs = "0.02,0.05,0.1,0.2,0.3,0.5";
  std::size_t reps = 200;
  std::size_t workers = 1;
  std::string kernel = "epanechnikov";
  RuleOpts rule;
  double ci_level = 0.95;
  std::string output;

  int run() const {
    ctev::MCStudy st;
    st.spec = make_spec(sim, base_seed);
    st.x0 = x0;
    std::stringstream ss(k_fracs);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) st.k_fracs.push_back(std::atof(tok.c_str()));
    st.h_rule = make_rule(rule);
    st.replications = reps;
    st.base_seed = base_seed;
    st.kernel = parse_kernel(kernel);
    st.ci_level = ci_level;

    const auto result = ctev::run_mc(st, workers);

    // The worker count distributes work but never changes the result, so it
    // is deliberately absent from the emitted configuration.
    ConfigHeader cfg{{"command", "mc"}};
    append_sim_config(cfg, sim, base_seed);
    cfg.emplace_back("x0", fmt17(x0));
    cfg.emplace_back("k_fracs", k_fracs);
    cfg.emplace_back("reps", std::to_string(reps));
    cfg.emplace_back("h_rule", rule.rule);
    cfg.emplace_back("kernel", kernel);
    cfg.emplace_back("ci_level", fmt17(ci_level));
    cfg.emplace_back("gamma_true", fmt17(result.gamma_true));
    ctev::emit_mc_csv(result, output, cfg);
    return 0;
  }
};

struct DiagnoseCmd {
  std::string input, out_prefix;
  std::size_t max_lag = 50;
  double qq_frac = 0.5;

  void write_qq(const ctev::QQData& qq, const std::string& side, const ConfigHeader& base) const {
    const std::string path = out_prefix + "_qq_" + side + ".csv";
    auto out = open_out(path);
    ConfigHeader cfg = base;
    cfg.emplace_back("side", side);
    cfg.emplace_back("slope_hint", fmt17(qq.slope_hint));
    ctev::write_config_header(out, cfg);
    out << "i,theoretical,empirical\n";
    for (std::size_t i = 0; i < qq.theoretical.size(); ++i)
      out << (i + 1) << ',' << fmt17(qq.theoretical[i]) << ',' << fmt17(qq.empirical[i]) << "\n";
    finish_out(out, path);
  }

  void write_acf(std::span<const double> z, const std::string& tag,
                 const ConfigHeader& base) const {
    const auto [acf, pacf] = ctev::acf_pacf(z, max_lag);
    const std::string path = out_prefix + "_acf_" + tag + ".csv";
    auto out = open_out(path);
    ConfigHeader cfg = base;
    cfg.emplace_back("series", tag);
    ctev::write_config_header(out, cfg);
    out << "lag,acf,pacf\n";
    for (std::size_t l = 0; l < acf.size(); ++l)
      out << l << ',' << fmt17(acf[l]) << ',' << fmt17(pacf[l]) << "\n";
    finish_out(out, path);
  }

  int run() const {
    auto [xraw, r] = ctev::read_xy_csv(input, /*require_positive_y=*/false);
    const auto xu = ctev::rank_to_uniform(xraw);
    const auto [pos, neg] = ctev::split_signed(xu, r);

    ConfigHeader base{{"command", "diagnose"},
                      {"input", input},
                      {"max_lag", std::to_string(max_lag)},
                      {"qq_frac", fmt17(qq_frac)}};

    auto qq_m = [&](std::size_t n_side) {
      const auto m = static_cast<std::size_t>(
          std::floor(qq_frac * static_cast<double>(n_side)));
      return std::min(std::max<std::size_t>(m, 2), n_side - 1);
    };
    write_qq(ctev::pareto_qq(pos.y(), qq_m(pos.n())), "pos", base);
    write_qq(ctev::pareto_qq(neg.y(), qq_m(neg.n())), "neg", base);
    write_acf(xraw, "x", base);
    write_acf(pos.y(), "pos", base);
    write_acf(neg.y(), "neg", base);
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional tail-index estimation for heavy-tailed time series"};
  app.require_subcommand(1);
  app.footer(
      "exit codes:\n"
      "  0   success\n"
      "  1   internal error\n"
      "  2   invalid configuration\n"
      "  3   empty window (no covariate with positive kernel weight)\n"
      "  4   input parse error\n"
      "  5   input invariant violation (e.g. non-positive response)\n"
      "  6   degenerate sample in bandwidth selection\n"
      "  7   i/o error\n"
      "  8   all replications missing in a Monte Carlo cell\n"
      "  9   covariance factorisation failure\n"
      "  10  signed split produced a side with < 2 observations\n"
      "  11  degenerate series in acf/pacf\n"
      "  12  non-positive response in QQ data");

  SimulateCmd sim_cmd;
  EstimateCmd est_cmd;
  TraceCmd trace_cmd;
  ProfileCmd prof_cmd;
  McCmd mc_cmd;
  DiagnoseCmd diag_cmd;
  std::string g_config_path;
  std::function<int()> action;

  {
    auto* c = app.add_subcommand("simulate", "draw a series from one of the generative models");
    c->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c->add_option("--config", g_config_path, "flat key=value configuration file");
    add_sim_options(c, sim_cmd.sim);
    c->add_option("--seed", sim_cmd.seed, "RNG seed")->capture_default_str();
    c->add_option("-o,--output", sim_cmd.output, "output CSV path")->required();
    c->callback([&] { action = [&] { return sim_cmd.run(); }; });
  }
  {
    auto* c = app.add_subcommand("estimate", "conditional Hill estimate at one point");
    c->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c->add_option("--config", g_config_path, "flat key=value configuration file");
    c->set_help_flag("--help", "print help");  // frees -h/--h for the bandwidth option
    c->add_option("-i,--input", est_cmd.input, "input CSV with columns x,y")->required();
    c->add_option("-o,--output", est_cmd.output, "output CSV path")->required();
    c->add_option("--x0", est_cmd.x0, "conditioning point")->capture_default_str();
    c->add_option("--k", est_cmd.k, "intermediate-sequence value, in [2,n]")->required();
    c->add_option("--h", est_cmd.h, "explicit bandwidth (overrides --h-rule)")
        ->check(CLI::PositiveNumber);
    c->add_option("--kernel", est_cmd.kernel, "kernel family")->capture_default_str();
    add_rule_options(c, est_cmd.rule);
    add_ci_level(c, est_cmd.ci_level);
    c->callback([&] { action = [&] { return est_cmd.run(); }; });
  }
  {
    auto* c = app.add_subcommand("hill-trace", "Hill estimates over a k grid at fixed x0");
    c->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c->add_option("--config", g_config_path, "flat key=value configuration file");
    c->add_option("-i,--input", trace_cmd.input, "input CSV with columns x,y")->required();
    c->add_option("-o,--output", trace_cmd.output, "output CSV path")->required();
    c->add_option("--x0", trace_cmd.x0, "conditioning point")->capture_default_str();
    c->add_option("--k-min", trace_cmd.k_min, "smallest k")->capture_default_str();
    c->add_option("--k-max", trace_cmd.k_max, "largest k (0 = n)")->capture_default_str();
    c->add_option("--k-step", trace_cmd.k_step, "k increment")->capture_default_str();
    c->add_option("--kernel", trace_cmd.kernel, "kernel family")->capture_default_str();
    add_rule_options(c, trace_cmd.rule);
    add_ci_level(c, trace_cmd.ci_level);
    c->callback([&] { action = [&] { return trace_cmd.run(); }; });
  }
  {
    auto* c = app.add_subcommand("profile", "risk profile: Hill estimates over x at fixed k");
    c->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c->add_option("--config", g_config_path, "flat key=value configuration file");
    c->add_option("-i,--input", prof_cmd.input, "input CSV with columns x,y")->required();
    c->add_option("-o,--output", prof_cmd.output, "output CSV path")->required();
    c->add_option("--x-min", prof_cmd.x_min, "grid start")->capture_default_str();
    c->add_option("--x-max", prof_cmd.x_max, "grid end")->capture_default_str();
    c->add_option("--x-count", prof_cmd.x_count, "grid size")->capture_default_str();
    c->add_option("--k", prof_cmd.k, "intermediate-sequence value")->required();
    c->add_option("--kernel", prof_cmd.kernel, "kernel family")->capture_default_str();
    add_rule_options(c, prof_cmd.rule);
    add_ci_level(c, prof_cmd.ci_level);
    c->callback([&] { action = [&] { return prof_cmd.run(); }; });
  }
  {
    auto* c = app.add_subcommand("mc", "Monte Carlo bias/MSE study over a k/n grid");
    c->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c->add_option("--config", g_config_path, "flat key=value configuration file");
    add_sim_options(c, mc_cmd.sim);
    c->add_option("--base-seed", mc_cmd.base_seed, "base seed; replication r simulates with base_seed xor r")
        ->capture_default_str();
    c->add_option("--x0", mc_cmd.x0, "conditioning point")->capture_default_str();
    c->add_option("--k-fracs", mc_cmd.k_fracs, "comma-separated k/n grid")->capture_default_str();
    c->add_option("--reps", mc_cmd.reps, "replication count")->capture_default_str();
    c->add_option("--workers", mc_cmd.workers, "worker threads (does not affect the result)")
        ->capture_default_str();
    c->add_option("--kernel", mc_cmd.kernel, "kernel family")->capture_default_str();
    add_rule_options(c, mc_cmd.rule);
    add_ci_level(c, mc_cmd.ci_level);
    c->add_option("-o,--output", mc_cmd.output, "output CSV path")->required();
    c->callback([&] { action = [&] { return mc_cmd.run(); }; });
  }
  {
    auto* c = app.add_subcommand(
        "diagnose", "rank-uniformise, split by sign, Pareto QQ and ACF/PACF tables");
    c->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c->add_option("--config", g_config_path, "flat key=value configuration file");
    c->add_option("-i,--input", diag_cmd.input, "input CSV with columns x,y (y may be signed)")
        ->required();
    c->add_option("--out-prefix", diag_cmd.out_prefix, "prefix of the emitted CSV files")
        ->required();
    c->add_option("--max-lag", diag_cmd.max_lag, "largest ACF/PACF lag")->capture_default_str();
    c->add_option("--qq-frac", diag_cmd.qq_frac, "fraction of each side used in the QQ data")
        ->capture_default_str();
    c->callback([&] { action = [&] { return diag_cmd.run(); }; });
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const ctev::error& e) {
    report_error(errc_name(e.code()), e.what(), e.exit_code());
    return e.exit_code();
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("config", e.what(), 2);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const ctev::error& e) {
    report_error(errc_name(e.code()), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const std::exception& e) {
    report_error("internal", e.what(), 1);
    return 1;
  }
}
