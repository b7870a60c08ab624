// Acceptance run: one PASS/FAIL line per criterion. Thresholds are pinned
// here rather than read from Tolerances, and each check recomputes its
// pass/fail from the raw report numbers.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "qlim/harness.hpp"
#include "qlim/steady.hpp"
#include "qlim/suites.hpp"

using namespace qlim;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;

  void need(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note += (note.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void info(const std::string& s) { note += (note.empty() ? "" : "; ") + s; }
};

std::map<std::string, std::string> first_run;

json timed_suite(const std::string& name, double& seconds, Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_suite(name);
  seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto j = r.to_json();
  first_run[name] = j.dump();
  for (const auto& v : j.at("verdicts")) {
    if (!v.at("pass").get<bool>()) out.need(false, name + ": " + v.at("name").get<std::string>());
  }
  return j;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const json& checkpoint(const json& rep, std::int64_t n, std::size_t k = 0) {
  for (const auto& p : rep.at("per_n")) {
    if (p.at("n").get<std::int64_t>() == n) return p.at("checkpoints").at(k);
  }
  throw std::runtime_error("no per_n entry for n=" + std::to_string(n));
}

bool ks_monotone(const json& rep, double slack) {
  double prev = 2.0;
  for (const auto& p : rep.at("per_n")) {
    const double ks = p.at("checkpoints").at(0).at("ks").get<double>();
    if (ks > prev + slack) return false;
    prev = ks;
  }
  return true;
}

Outcome c1(double& s) {
  Outcome o;
  timed_suite("erlang-a", s, o);
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = stationary_dist({1, 1.0, 1.0, 1.0});
  double fact = 1.0, z = 0.0;
  std::vector<double> w;
  for (std::size_t k = 0; k <= d.truncation; ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    w.push_back(1.0 / fact);
    z += 1.0 / fact;
  }
  double worst = 0.0;
  for (std::size_t k = 0; k <= d.truncation; ++k) worst = std::max(worst, std::abs(d.probabilities[k] - w[k] / z));
  o.need(worst <= 1e-12, "Poisson(1) match");
  o.need(std::abs(d.probabilities[0] - std::exp(-1.0)) <= 1e-12, "pi_0 = e^-1");
  double bal = 0.0;
  for (std::int64_t n : {1, 10, 100, 1000}) {
    for (double load : {0.5, 1.0, 2.0}) {
      bal = std::max(bal, stationary_dist({n, load * n, 1.0, 1.0}).detailed_balance_residual());
    }
  }
  o.need(bal < 1e-12, "detailed balance");
  s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.info("max |pi - e^-1/k!| " + num(worst) + ", balance residual " + num(bal));
  return o;
}

Outcome c2(double& s) {
  Outcome o;
  const auto j = timed_suite("ed-steady", s, o);
  const auto& c = checkpoint(j, 400);
  const double mean = c.at("mean").get<double>();
  const double var = c.at("var").get<double>();
  const double ks = c.at("ks").get<double>();
  o.need(std::abs(mean) <= 0.03, "|mean| <= 0.03");
  o.need(std::abs(var - 1.0) <= 0.08, "|var - 1| <= 0.08");
  o.need(ks <= 0.03, "KS <= 0.03");
  o.need(ks_monotone(j, 0.02), "KS nonincreasing (slack 0.02)");
  o.need(j.at("config").at("reps").get<std::size_t>() == 100000, "10^5 draws");
  o.info("n=400 mean " + num(mean) + ", var " + num(var) + ", KS " + num(ks));
  return o;
}

Outcome c3(double& s) {
  Outcome o;
  const auto j = timed_suite("partial-sums", s, o);
  o.need(j.at("config").at("n").get<std::int64_t>() == 2000, "n = 2000");
  const std::map<double, double> d_expected{{0.5, 1.0 / 3.0}, {1.0, 0.5}};
  for (const auto& c : j.at("per_n").at(0).at("checkpoints")) {
    const double t = c.at("t").get<double>();
    const double var = c.at("var").get<double>();
    // var_se is not in the checkpoint record; the suite verdict carries it.
    o.need(std::abs(c.at("ref_var").get<double>() - d_expected.at(t)) <= 1e-15, "d(t) closed form");
    o.info("t=" + num(t) + " var " + num(var) + " vs " + num(d_expected.at(t)));
  }
  for (const auto& v : j.at("verdicts")) {
    const auto name = v.at("name").get<std::string>();
    if (name.rfind("|var - d(t)|", 0) == 0) {
      o.need(v.at("value").get<double>() <= v.at("tolerance").get<double>(), "within 3 SE");
    }
  }
  const double lambda = 2.0, mu = 1.0, theta = 1.0;
  const double lhs = c_and_d((lambda - mu) / theta, mu, theta).d + (lambda / theta) / (lambda * lambda);
  o.need(lhs == 1.0 / (theta * mu), "d(q) + (lambda/theta)/lambda^2 = 1/(theta mu) exactly");
  return o;
}

Outcome c4(double& s) {
  Outcome o;
  const auto j = timed_suite("ed-fluid", s, o);
  const double su = j.at("details").at("slope_unstopped").get<double>();
  const double ss = j.at("details").at("slope_stopped").get<double>();
  o.need(su >= -0.65 && su <= -0.35, "unstopped slope in [-0.65, -0.35]");
  o.need(ss >= -0.65 && ss <= -0.35, "stopped slope in [-0.65, -0.35]");
  for (const auto& v : j.at("verdicts")) {
    const auto name = v.at("name").get<std::string>();
    if (name.find("flow balance") != std::string::npos) {
      o.need(v.at("value").get<double>() <= 1e-12, "flow balance 1e-12");
    }
  }
  o.info("slopes " + num(su) + " / " + num(ss));
  return o;
}

Outcome vwait(const std::string& suite, double t, double& s) {
  Outcome o;
  const auto j = timed_suite(suite, s, o);
  o.need(j.at("config").at("plan").at("reps").get<std::size_t>() == 2000, "2000 reps");
  o.need(j.at("config").at("plan").at("ref_reps").get<std::size_t>() == 2000, "2000 reference reps");
  const auto& c = checkpoint(j, 400);
  o.need(c.at("t").get<double>() == t, "checkpoint");
  const double ks = c.at("ks").get<double>();
  o.need(ks <= 0.08, "KS <= 0.08 at n=400");
  o.need(ks_monotone(j, 0.02), "KS nonincreasing (slack 0.02)");
  std::string seq;
  for (const auto& p : j.at("per_n")) seq += (seq.empty() ? "" : ", ") + num(p.at("checkpoints").at(0).at("ks").get<double>());
  o.info("KS over n " + seq);
  return o;
}

Outcome c7(double& s) {
  Outcome o;
  const auto j = timed_suite("diffusion", s, o);
  std::string ratios;
  for (const auto& [label, v] : j.at("details").at("noise_off").items()) {
    const double r = v.at("ratio").get<double>();
    o.need(r >= 1.8 && r <= 2.2, label + " halving ratio");
    ratios += (ratios.empty() ? "" : ", ") + label + " " + num(r);
  }
  double worst = 0.0;
  for (const auto& v : j.at("verdicts")) {
    const auto name = v.at("name").get<std::string>();
    if (name.find("balance") != std::string::npos || name.find("Uhat") != std::string::npos) {
      o.need(v.at("value").get<double>() <= 5.0 * 1e-3, name + " <= 5 dt");
      worst = std::max(worst, v.at("value").get<double>());
    }
  }
  o.info("worst identity residual " + num(worst) + ", halving ratios " + ratios);
  return o;
}

Outcome c8(double& s) {
  Outcome o;
  const auto j = timed_suite("func2p", s, o);
  const auto& rows = j.at("details").at("centering_sin").at("rows");
  double prev = 1e9;
  const double floor = 10.0 * 1e-4;
  for (const auto& r : rows) {
    const double e = r.at("error").get<double>();
    o.need(e <= prev || e <= floor, "centering monotone");
    prev = e;
  }
  o.need(prev <= floor, "centering reaches 10 dt");
  const double slope = j.at("details").at("regulator").at("slope").get<double>();
  o.need(-slope >= 0.8 && -slope <= 1.2, "first-order regulator convergence");
  o.info("centering at c=1e4 " + num(prev) + ", regulator order " + num(-slope));
  return o;
}

Outcome c9(double& s) {
  Outcome o;
  const auto j = timed_suite("bounds", s, o);
  o.need(j.at("config").at("reps").get<std::size_t>() == 500, "500 replications");
  for (const auto& v : j.at("verdicts")) {
    const auto name = v.at("name").get<std::string>();
    if (name.find("lower > upper") != std::string::npos) o.need(v.at("value").get<double>() == 0.0, "lower <= upper");
  }
  for (const auto& p : j.at("details").at("probes")) {
    o.need(p.at("mean_lower").get<double>() <= p.at("mean_upper").get<double>(), "mean ordering");
    if (p.at("t").get<double>() == 3.0) {
      o.info("t=3 means lower " + num(p.at("mean_lower").get<double>()) + ", V " +
             num(p.at("mean_v").get<double>()) + ", upper " + num(p.at("mean_upper").get<double>()));
    }
  }
  return o;
}

Outcome c10(double& s) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t same = 0;
  for (const auto& name : suite_names()) {
    const auto again = run_suite(name).to_json().dump();
    if (again == first_run.at(name)) {
      ++same;
    } else {
      o.need(false, name + " rerun differs");
    }
  }
  for (const char* name : {"bounds", "ed-fluid", "qed-vwait"}) {
    SuiteOptions serial;
    serial.exec = Exec::serial;
    if (run_suite(name, serial).to_json().dump() != first_run.at(name)) o.need(false, std::string(name) + " serial differs");
  }
  s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.info(std::to_string(same) + "/" + std::to_string(suite_names().size()) + " reports byte-identical");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<Outcome(double&)> run;
  };
  const std::vector<Criterion> all{
      {1, "Erlang-A exactness", 1.0, c1},
      {2, "steady-state ED wait", 60.0, c2},
      {3, "partial-sum CLT", 60.0, c3},
      {4, "ED fluid rates", 120.0, c4},
      {5, "ED waiting time", 300.0, [](double& s) { return vwait("ed-vwait", 3.0, s); }},
      {6, "QED waiting time", 300.0, [](double& s) { return vwait("qed-vwait", 2.0, s); }},
      {7, "diffusion identities", 60.0, c7},
      {8, "func2p properties", 60.0, c8},
      {9, "wait bounds", 120.0, c9},
      {10, "reproducibility", 1e9, c10},
  };
  int failed = 0;
  for (const auto& c : all) {
    double secs = 0.0;
    Outcome o;
    try {
      o = c.run(secs);
    } catch (const std::exception& e) {
      o.need(false, std::string("exception: ") + e.what());
    }
    if (c.budget_s < 1e9) o.need(secs < c.budget_s, "runtime budget");
    std::printf("criterion %2d: %s  %s [%.2fs%s]  %s\n", c.id, o.pass ? "PASS" : "FAIL",
                c.title.c_str(), secs,
                c.budget_s < 1e9 ? (" < " + num(c.budget_s) + "s").c_str() : "", o.note.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed (threads: %d)\n", static_cast<int>(all.size()) - failed,
              all.size(), omp_get_max_threads());
  return failed == 0 ? 0 : 1;
}
