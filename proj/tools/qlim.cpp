// qlim: command-line front end for the Erlang-A simulation and verification lab.
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error,
// 3 verification failure.

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlim/diffusion.hpp"
#include "qlim/errors.hpp"
#include "qlim/fluid.hpp"
#include "qlim/harness.hpp"
#include "qlim/sim_mm.hpp"
#include "qlim/steady.hpp"
#include "qlim/suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kConfig = 2;
constexpr int kVerify = 3;

struct Common {
  std::string config;
  std::string out = ".";
  int jobs = 0;
  bool timings = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Flat key = value config file (flags win)");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  sub->add_flag("--timings", c.timings, "Record wall-clock runtimes (outputs stop being byte-stable)");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splices `--config FILE` entries into the argument list right after the
// subcommand name. Keys already given on the command line are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (file.empty() || args.size() < 2) return args;
  std::ifstream in(file);
  if (!in) throw qlim::ConfigError("cannot read config file " + file);
  auto given = [&](const std::string& key) {
    for (std::size_t i = 2; i < args.size(); ++i) {
      if (args[i] == "--" + key || args[i].rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw qlim::ConfigError("bad config line '" + line + "'");
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key == "config" || value.empty() || given(key)) continue;
    if (value == "true") {
      extra.push_back("--" + key);
    } else if (value != "false") {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  args.insert(args.begin() + 2, extra.begin(), extra.end());
  return args;
}

// Resolved options as flat key = value lines, unset optionals dropped.
std::string resolved_config(const CLI::App& sub) {
  std::stringstream in(sub.config_to_str(true, false));
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind("config=", 0) == 0 || line.rfind("help", 0) == 0) continue;
    if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
    out += line + "\n";
  }
  return out;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

void write_manifest(const CLI::App& sub, const Common& c, const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
  const fs::path dir(c.out);
  const auto toml = resolved_config(sub);
  write_text(dir / "config.toml", toml);
  json m;
  m["command"] = sub.get_name();
  m["version"] = qlim::git_describe();
  m["config"] = toml;
  m["outputs"] = outputs;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_json(dir / "manifest.json", m);
}

std::vector<std::int64_t> parse_n_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const auto v = std::stoll(item, &pos);
    if (pos != item.size()) throw qlim::ConfigError("bad n list entry '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Erlang-A heavy-traffic simulation and verification lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qlim::git_describe());

  // ---------------------------------------------------------------- simulate
  Common sim_c;
  std::int64_t sim_n = 0;
  double sim_lambda = 0, sim_mu = 0, sim_theta = 0, sim_horizon = 10.0;
  std::string sim_init = "0";
  std::uint64_t sim_seed = 1;
  std::optional<double> sim_stop;
  std::size_t sim_reps = 1;
  auto* sim = app.add_subcommand("simulate", "Simulate M/M/n+M sample paths");
  add_common(sim, sim_c);
  sim->add_option("--n", sim_n, "Servers")->required()->check(CLI::PositiveNumber);
  sim->add_option("--lambda", sim_lambda, "Arrival rate of the system")->required();
  sim->add_option("--mu", sim_mu, "Service rate per server")->required();
  sim->add_option("--theta", sim_theta, "Abandonment rate per waiting customer")->required();
  sim->add_option("--horizon", sim_horizon, "Time horizon")->capture_default_str();
  sim->add_option("--init", sim_init, "Initial count or 'stationary'")->capture_default_str();
  sim->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  sim->add_option("--stop-time", sim_stop, "Stop arrivals at this time");
  sim->add_option("--reps", sim_reps, "Replications")->capture_default_str()->check(CLI::PositiveNumber);

  // ------------------------------------------------------------------- fluid
  Common fl_c;
  std::string fl_regime = "ed";
  double fl_lambda = 2.0, fl_mu = 1.0, fl_theta = 1.0, fl_horizon = 10.0, fl_dt = 0.01;
  std::optional<double> fl_tau;
  bool fl_inverse_mu = false;
  auto* fl = app.add_subcommand("fluid", "Tabulate fluid limits");
  add_common(fl, fl_c);
  fl->add_option("--regime", fl_regime, "qed or ed")->check(CLI::IsMember({"qed", "ed"}))->capture_default_str();
  fl->add_option("--lambda", fl_lambda, "Per-server arrival rate (ed)")->capture_default_str();
  fl->add_option("--mu", fl_mu)->capture_default_str();
  fl->add_option("--theta", fl_theta)->capture_default_str();
  fl->add_option("--horizon", fl_horizon)->capture_default_str();
  fl->add_option("--dt", fl_dt, "Output time step")->capture_default_str();
  fl->add_option("--tau", fl_tau, "Stop arrivals at tau (ed)");
  fl->add_flag("--inverse-mu-coefficient", fl_inverse_mu,
               "Use 1/mu on the post-(tau + w) service increment");

  // --------------------------------------------------------------- diffusion
  Common df_c;
  std::string df_regime = "ed";
  double df_beta = 1.0, df_lambda = 2.0, df_mu = 1.0, df_theta = 1.0;
  double df_dt = 1e-3, df_horizon = 5.0, df_x0 = 0.0;
  std::size_t df_reps = 1;
  std::uint64_t df_seed = 1;
  bool df_stationary = false, df_expanding = false;
  std::string df_taus = "0,1,2";
  auto* df = app.add_subcommand("diffusion", "Simulate limit diffusions");
  add_common(df, df_c);
  df->add_option("--regime", df_regime, "qed, ed or stopped")
      ->check(CLI::IsMember({"qed", "ed", "stopped"}))->capture_default_str();
  df->add_option("--beta", df_beta)->capture_default_str();
  df->add_option("--lambda", df_lambda, "Per-server arrival rate")->capture_default_str();
  df->add_option("--mu", df_mu)->capture_default_str();
  df->add_option("--theta", df_theta)->capture_default_str();
  df->add_option("--dt", df_dt)->capture_default_str();
  df->add_option("--horizon", df_horizon)->capture_default_str();
  df->add_option("--x0", df_x0)->capture_default_str();
  df->add_option("--reps", df_reps)->capture_default_str()->check(CLI::PositiveNumber);
  df->add_option("--seed", df_seed)->capture_default_str();
  df->add_option("--tau", df_taus, "Comma-separated stop times (stopped), first must be 0")
      ->capture_default_str();
  df->add_flag("--stationary", df_stationary, "Stationary initial law (ed, stopped)");
  df->add_flag("--expanding-pre-switch-drift", df_expanding,
               "Use +theta X drift before tau + w (stopped)");

  // ------------------------------------------------------------------ steady
  Common st_c;
  std::int64_t st_n = 0;
  double st_lambda = 0, st_mu = 0, st_theta = 0;
  auto* st = app.add_subcommand("steady", "Exact stationary distribution and wait moments");
  add_common(st, st_c);
  st->add_option("--n", st_n)->required()->check(CLI::PositiveNumber);
  st->add_option("--lambda", st_lambda, "Arrival rate of the system")->required();
  st->add_option("--mu", st_mu)->required();
  st->add_option("--theta", st_theta)->required();

  // ------------------------------------------------------------------ verify
  Common vf_c;
  std::string vf_suite;
  std::string vf_n;
  std::size_t vf_reps = 0, vf_ref_reps = 0;
  double vf_dt = 0.0;
  std::uint64_t vf_seed = qlim::SuiteOptions{}.seed;
  bool vf_serial = false;
  qlim::Tolerances vf_tol;
  auto* vf = app.add_subcommand("verify", "Run a verification suite");
  add_common(vf, vf_c);
  std::vector<std::string> choices = qlim::suite_names();
  choices.push_back("all");
  vf->add_option("--suite", vf_suite, "Suite name or 'all'")->required()->check(CLI::IsMember(choices));
  vf->add_option("--n", vf_n, "Comma-separated server counts");
  vf->add_option("--reps", vf_reps, "Replications (0 = suite default)")->capture_default_str();
  vf->add_option("--ref-reps", vf_ref_reps, "Reference replications (0 = suite default)")->capture_default_str();
  vf->add_option("--dt", vf_dt, "Diffusion / mesh step (0 = suite default)")->capture_default_str();
  vf->add_option("--seed", vf_seed)->capture_default_str();
  vf->add_flag("--serial", vf_serial, "Use the serial reference kernels");
  vf->add_option("--se-mult", vf_tol.se_mult)->capture_default_str();
  vf->add_option("--ks-slack", vf_tol.ks_slack)->capture_default_str();
  vf->add_option("--ks-max", vf_tol.ks_max)->capture_default_str();
  vf->add_option("--steady-ks-max", vf_tol.steady_ks_max)->capture_default_str();
  vf->add_option("--steady-mean", vf_tol.steady_mean)->capture_default_str();
  vf->add_option("--steady-var", vf_tol.steady_var)->capture_default_str();
  vf->add_option("--slope-lo", vf_tol.slope_lo)->capture_default_str();
  vf->add_option("--slope-hi", vf_tol.slope_hi)->capture_default_str();
  vf->add_option("--bound-se-mult", vf_tol.bound_se_mult)->capture_default_str();

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(argc, argv);
    } catch (const qlim::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfig;
    }
    std::vector<std::string> rev(args.rbegin(), std::prev(args.rend()));
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  CLI::App* active = app.get_subcommands().front();
  const Common& common = active == sim ? sim_c
                         : active == fl ? fl_c
                         : active == df ? df_c
                         : active == st ? st_c
                                        : vf_c;
  try {
    if (common.jobs > 0) omp_set_num_threads(common.jobs);
    fs::create_directories(common.out);
    const fs::path dir(common.out);

    if (active == sim) {
      qlim::ModelParams p{sim_n, sim_lambda, sim_mu, sim_theta};
      p.validate();
      qlim::SimConfig cfg;
      cfg.horizon = sim_horizon;
      cfg.seed = sim_seed;
      cfg.stop_time = sim_stop;
      if (sim_init == "stationary") {
        cfg.init = qlim::Stationary{};
      } else {
        std::size_t pos = 0;
        std::int64_t x0 = 0;
        try {
          x0 = std::stoll(sim_init, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos == 0 || pos != sim_init.size()) {
          throw qlim::ConfigError("--init must be an integer or 'stationary'");
        }
        cfg.init = x0;
      }
      cfg.validate();
      std::vector<std::string> outputs;
      for (std::size_t r = 0; r < sim_reps; ++r) {
        cfg.replication = r;
        const auto b = qlim::simulate(p, cfg);
        const std::string stem = sim_reps == 1 ? "bundle" : "bundle_" + std::to_string(r);
        std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
        qlim::write_bundle_csv(csv, b);
        write_json(dir / (stem + ".json"), qlim::bundle_sidecar(b));
        outputs.push_back(stem + ".csv");
        outputs.push_back(stem + ".json");
      }
      write_manifest(*sim, sim_c, outputs, {{"seed", sim_seed}});
      return kOk;
    }

    if (active == fl) {
      const auto steps = static_cast<std::size_t>(std::llround(fl_horizon / fl_dt));
      if (!(fl_dt > 0.0) || steps == 0) throw qlim::ConfigError("need dt > 0 and horizon >= dt");
      std::ofstream csv(dir / "fluid.csv", std::ios::binary);
      csv << "t,A,D,L,X,V\n";
      for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * fl_dt;
        qlim::FluidPoint f;
        if (fl_regime == "qed") {
          f = qlim::fluid_qed(t, fl_mu);
        } else if (fl_tau) {
          const auto s = qlim::fluid_stopped(*fl_tau, t, fl_lambda, fl_mu, fl_theta,
                                             {fl_inverse_mu});
          f = {s.A, s.D, s.L, s.X, qlim::ed_constants(fl_lambda, fl_mu, fl_theta).w};
        } else {
          f = qlim::fluid_ed(t, fl_lambda, fl_mu, fl_theta);
        }
        csv << qlim::format_double(t) << ',' << qlim::format_double(f.A) << ','
            << qlim::format_double(f.D) << ',' << qlim::format_double(f.L) << ','
            << qlim::format_double(f.X) << ',' << qlim::format_double(f.V) << '\n';
      }
      json extra = json::object();
      if (fl_regime == "ed") {
        const auto c = qlim::ed_constants(fl_lambda, fl_mu, fl_theta);
        extra["ed_constants"] = {{"q", c.q}, {"w", c.w}, {"xbar_level", c.xbar_level}};
      }
      write_manifest(*fl, fl_c, {"fluid.csv"}, extra);
      return kOk;
    }

    if (active == df) {
      qlim::SdeConfig cfg{df_dt, df_horizon, df_reps, df_seed, df_x0, df_stationary, true};
      cfg.validate();
      std::vector<std::string> outputs;
      json seeds = json::array();
      for (std::size_t r = 0; r < df_reps; ++r) {
        const std::string suffix = df_reps == 1 ? "" : "_" + std::to_string(r);
        seeds.push_back({{"replication", r}, {"seed", df_seed}});
        if (df_regime == "stopped") {
          const auto s = qlim::sde_stopped(df_lambda, df_mu, df_theta, parse_list(df_taus), cfg, r,
                                           {df_expanding});
          const std::pair<const char*, const qlim::Grid2*> parts[] = {
              {"X", &s.X}, {"A", &s.A}, {"D", &s.D}, {"L", &s.L}};
          for (const auto& [name, g] : parts) {
            const auto file = std::string("stopped_") + name + suffix + ".csv";
            std::ofstream csv(dir / file, std::ios::binary);
            qlim::write_grid2_csv(csv, *g);
            outputs.push_back(file);
          }
          continue;
        }
        const auto p = df_regime == "qed"
                           ? qlim::sde_qed_path(df_beta, df_mu, df_theta, cfg, r)
                           : qlim::sde_ed_path(df_lambda, df_mu, df_theta, cfg, r);
        const auto file = "path" + suffix + ".csv";
        std::ofstream csv(dir / file, std::ios::binary);
        csv << "t,X,A,D,L\n";
        for (std::size_t k = 0; k < p.t.size(); ++k) {
          csv << qlim::format_double(p.t[k]) << ',' << qlim::format_double(p.X[k]) << ','
              << qlim::format_double(p.A[k]) << ',' << qlim::format_double(p.D[k]) << ','
              << qlim::format_double(p.L[k]) << '\n';
        }
        outputs.push_back(file);
      }
      write_manifest(*df, df_c, outputs, {{"replications", seeds}});
      return kOk;
    }

    if (active == st) {
      const qlim::ModelParams p{st_n, st_lambda, st_mu, st_theta};
      const auto d = qlim::stationary_dist(p);
      std::ofstream csv(dir / "stationary.csv", std::ios::binary);
      qlim::write_stationary_csv(csv, d);
      json summary = {{"truncation", d.truncation},
                      {"tail_mass_bound", d.tail_mass_bound},
                      {"mean_count", d.mean()},
                      {"mean_virtual_wait", qlim::stationary_vwait_mean(d)},
                      {"detailed_balance_residual", d.detailed_balance_residual()}};
      write_json(dir / "summary.json", summary);
      write_manifest(*st, st_c, {"stationary.csv", "summary.json"});
      return kOk;
    }

    // verify
    qlim::SuiteOptions opt;
    opt.n_list = parse_n_list(vf_n);
    opt.reps = vf_reps;
    opt.ref_reps = vf_ref_reps;
    opt.dt = vf_dt;
    opt.seed = vf_seed;
    opt.tol = vf_tol;
    opt.exec = vf_serial ? qlim::Exec::serial : qlim::Exec::parallel;
    opt.timings = vf_c.timings;
    const std::vector<std::string> suites =
        vf_suite == "all" ? qlim::suite_names() : std::vector<std::string>{vf_suite};
    std::vector<std::string> outputs;
    std::vector<std::string> failures;
    for (const auto& name : suites) {
      const auto report = qlim::run_suite(name, opt);
      const auto file = "report_" + name + ".json";
      write_json(dir / file, report.to_json());
      outputs.push_back(file);
      for (const auto& v : report.verdicts) {
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.name << " ("
                  << qlim::format_double(v.value) << ' ' << v.relation << ' '
                  << qlim::format_double(v.tolerance) << ")\n";
        if (!v.pass) failures.push_back(name + ": " + v.name);
      }
    }
    write_manifest(*vf, vf_c, outputs, {{"seed", vf_seed}});
    if (!failures.empty()) {
      std::cerr << failures.size() << " verdict(s) failed:\n";
      for (const auto& f : failures) std::cerr << "  " << f << '\n';
      return kVerify;
    }
    return kOk;
  } catch (const qlim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const qlim::RegimeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
