#include "qlim/harness.hpp"

#include <algorithm>
#include <cmath>

#include "qlim/diffusion.hpp"
#include "qlim/errors.hpp"
#include "qlim/sim_mm.hpp"

#ifndef QLIM_GIT_DESCRIBE
#define QLIM_GIT_DESCRIBE "unknown"
#endif

namespace qlim {

std::string git_describe() { return QLIM_GIT_DESCRIBE; }

// ------------------------------------------------------------------ regime

void RegimeSeq::validate() const {
  if (!(mu > 0.0) || !(theta > 0.0)) throw ConfigError("mu and theta must be > 0");
  if (n_list.empty()) throw ConfigError("n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw ConfigError("n must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ConfigError("n_list must increase");
  }
  if (kind == Kind::ed) {
    ed_constants(lambda, mu, theta);
  } else {
    for (auto n : n_list) {
      if (!(params(n).lambda > 0.0)) {
        throw ConfigError("QED arrival rate not positive at n=" + std::to_string(n));
      }
    }
  }
}

ModelParams RegimeSeq::params(std::int64_t n) const {
  const auto nd = static_cast<double>(n);
  ModelParams p;
  p.n = n;
  p.mu = mu;
  p.theta = theta;
  p.lambda = kind == Kind::ed ? nd * lambda : nd * mu * (1.0 - beta / std::sqrt(nd));
  return p;
}

std::int64_t RegimeSeq::warm_start(std::int64_t n) const {
  if (kind == Kind::qed) return n;
  const auto c = ed_constants(lambda, mu, theta);
  return static_cast<std::int64_t>(std::llround(static_cast<double>(n) * c.xbar_level));
}

double RegimeSeq::fluid_wait() const {
  return kind == Kind::ed ? ed_constants(lambda, mu, theta).w : 0.0;
}

nlohmann::json RegimeSeq::to_json() const {
  nlohmann::json j;
  j["regime"] = kind == Kind::ed ? "ED" : "QED";
  if (kind == Kind::ed) j["lambda"] = lambda;
  else j["beta"] = beta;
  j["mu"] = mu;
  j["theta"] = theta;
  j["n_list"] = n_list;
  return j;
}

nlohmann::json Tolerances::to_json() const {
  return {{"se_mult", se_mult},
          {"ks_slack", ks_slack},
          {"ks_max", ks_max},
          {"steady_ks_max", steady_ks_max},
          {"steady_mean", steady_mean},
          {"steady_var", steady_var},
          {"slope_lo", slope_lo},
          {"slope_hi", slope_hi},
          {"bound_se_mult", bound_se_mult},
          {"identity_dt_mult", identity_dt_mult},
          {"mesh_floor_mult", mesh_floor_mult},
          {"exact_tol", exact_tol}};
}

// ---------------------------------------------------------------- verdicts

nlohmann::json Verdict::to_json() const {
  return {{"name", name},
          {"value", value},
          {"tolerance", tolerance},
          {"relation", relation},
          {"pass", pass}};
}

Verdict verdict_le(std::string name, double value, double tol) {
  return {std::move(name), value, tol, "<=", value <= tol};
}

Verdict verdict_ge(std::string name, double value, double tol) {
  return {std::move(name), value, tol, ">=", value >= tol};
}

Verdict verdict_flag(std::string name, bool ok) {
  return {std::move(name), ok ? 1.0 : 0.0, 1.0, "==", ok};
}

// ----------------------------------------------------------------- scaling

ScaledPaths scale_paths(const PathBundle& b, const FluidRef& ref) {
  if (ref.horizon != b.horizon) throw ShapeError("scale_paths: horizon mismatch");
  const auto n = b.params.n;
  const double root = std::sqrt(static_cast<double>(n));
  const double inv = 1.0 / static_cast<double>(n);

  std::vector<double> t;
  std::vector<double> a, d, l, x;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const auto f = ref.at(b.times[i]);
    const double va = root * (static_cast<double>(b.A[i]) * inv - f.A);
    const double vd = root * (static_cast<double>(b.D[i]) * inv - f.D);
    const double vl = root * (static_cast<double>(b.L[i]) * inv - f.L);
    const double vx = root * (static_cast<double>(b.X[i]) * inv - f.X);
    if (!t.empty() && t.back() == b.times[i]) {
      a.back() = va;
      d.back() = vd;
      l.back() = vl;
      x.back() = vx;
      continue;
    }
    t.push_back(b.times[i]);
    a.push_back(va);
    d.push_back(vd);
    l.push_back(vl);
    x.push_back(vx);
  }
  return {StepPath(t, std::move(a), b.horizon), StepPath(t, std::move(d), b.horizon),
          StepPath(t, std::move(l), b.horizon), StepPath(t, std::move(x), b.horizon)};
}

double fluid_sup_error(const PathBundle& b, Component c,
                       const std::function<double(double)>& fbar) {
  const auto& col = b.column(c);
  const double inv = 1.0 / static_cast<double>(b.params.n);
  double worst = 0.0;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const double v = static_cast<double>(col[i]) * inv;
    const double end = i + 1 < b.rows() ? b.times[i + 1] : b.horizon;
    worst = std::max({worst, std::abs(v - fbar(b.times[i])), std::abs(v - fbar(end))});
  }
  return worst;
}

// -------------------------------------------------------------- experiment

nlohmann::json ScalingPlan::to_json() const {
  return {{"checkpoints", checkpoints}, {"reps", reps},           {"ref_reps", ref_reps},
          {"dt", dt},                   {"seed", seed},           {"tolerances", tol.to_json()}};
}

bool ScalingReport::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

nlohmann::json ScalingReport::to_json() const {
  nlohmann::json j;
  j["config"] = config;
  j["git_describe"] = git_describe();
  j["per_n"] = nlohmann::json::array();
  for (const auto& p : per_n) {
    nlohmann::json pj;
    pj["n"] = p.n;
    pj["checkpoints"] = nlohmann::json::array();
    for (const auto& c : p.checkpoints) {
      pj["checkpoints"].push_back({{"t", c.t},
                                   {"mean", c.sample.mean},
                                   {"var", c.sample.var},
                                   {"ks", c.ks.statistic},
                                   {"ks_p", c.ks.p_value},
                                   {"se", c.sample.mean_se},
                                   {"ref_mean", c.reference.mean},
                                   {"ref_var", c.reference.var},
                                   {"gap", c.gap},
                                   {"gap_tol", c.gap_tol},
                                   {"verdict", c.verdict ? "pass" : "fail"}});
    }
    j["per_n"].push_back(pj);
  }
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : verdicts) j["verdicts"].push_back(v.to_json());
  if (!details.empty()) j["details"] = details;
  j["runtime_s"] = runtime_s ? nlohmann::json(*runtime_s) : nlohmann::json();
  return j;
}

std::vector<double> scaled_wait_samples(const RegimeSeq& seq, std::int64_t n,
                                        const ScalingPlan& plan) {
  const auto p = seq.params(n);
  const auto m = plan.checkpoints.size();
  const double horizon = *std::max_element(plan.checkpoints.begin(), plan.checkpoints.end());
  const double vbar = seq.fluid_wait();
  std::vector<double> out(plan.reps * m);
  for_each_index(plan.reps, plan.exec, [&](std::size_t r) {
    SimConfig cfg;
    cfg.horizon = horizon;
    cfg.init = seq.warm_start(n);
    cfg.seed = plan.seed;
    cfg.replication = r;
    const auto b = simulate(p, cfg);
    Stream rng(plan.seed, r, purpose_tag(Purpose::vwait, static_cast<std::uint64_t>(n)));
    for (std::size_t k = 0; k < m; ++k) {
      const auto x = b.value_at(Component::X, plan.checkpoints[k]);
      out[r * m + k] = scale_wait(sample_virtual_wait(p, x, rng), n, vbar);
    }
  });
  return out;
}

std::vector<double> limit_wait_samples(const RegimeSeq& seq, const ScalingPlan& plan) {
  const auto m = plan.checkpoints.size();
  const double tmax = *std::max_element(plan.checkpoints.begin(), plan.checkpoints.end());
  std::vector<double> out(plan.ref_reps * m);

  SdeConfig cfg;
  cfg.dt = plan.dt;
  cfg.reps = plan.ref_reps;
  cfg.seed = plan.seed;
  cfg.x0 = 0.0;

  if (seq.kind == RegimeSeq::Kind::qed) {
    cfg.horizon = std::max(tmax, 100.0 * plan.dt);
    for_each_index(plan.ref_reps, plan.exec, [&](std::size_t r) {
      const auto path = sde_qed_path(seq.beta, seq.mu, seq.theta, cfg, r);
      const Grid2 g({0.0}, path.t, path.X);
      for (std::size_t k = 0; k < m; ++k) {
        out[r * m + k] = std::max(g.at(0, g.node_at(plan.checkpoints[k])), 0.0) / seq.mu;
      }
    });
    return out;
  }

  const double w = seq.fluid_wait();
  std::vector<double> taus{0.0};
  for (double c : plan.checkpoints) {
    if (c > 0.0) taus.push_back(c);
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  cfg.horizon = tmax + w + 2.0 * plan.dt;
  for_each_index(plan.ref_reps, plan.exec, [&](std::size_t r) {
    const auto s = sde_stopped(seq.lambda, seq.mu, seq.theta, taus, cfg, r);
    for (std::size_t k = 0; k < m; ++k) {
      const auto row = static_cast<std::size_t>(
          std::lower_bound(taus.begin(), taus.end(), plan.checkpoints[k]) - taus.begin());
      out[r * m + k] = s.X.at(row, s.X.node_at(plan.checkpoints[k] + w)) / seq.mu;
    }
  });
  return out;
}

namespace {

std::vector<double> column_of(const std::vector<double>& rows, std::size_t m, std::size_t k) {
  std::vector<double> c;
  c.reserve(rows.size() / m);
  for (std::size_t i = k; i < rows.size(); i += m) c.push_back(rows[i]);
  return c;
}

}  // namespace

ScalingReport run_experiment(const RegimeSeq& seq, const ScalingPlan& plan) {
  seq.validate();
  if (plan.checkpoints.empty()) throw ConfigError("no checkpoints");
  if (plan.reps < 2 || plan.ref_reps < 2) throw ConfigError("reps must be >= 2");
  for (double c : plan.checkpoints) {
    if (!(c >= 0.0)) throw ConfigError("checkpoints must be >= 0");
  }

  ScalingReport rep;
  rep.config = {{"regime", seq.to_json()}, {"plan", plan.to_json()}};
  const auto m = plan.checkpoints.size();
  const auto ref = limit_wait_samples(seq, plan);

  for (auto n : seq.n_list) {
    const auto samples = scaled_wait_samples(seq, n, plan);
    PerN pn;
    pn.n = n;
    for (std::size_t k = 0; k < m; ++k) {
      CheckpointStats cs;
      cs.t = plan.checkpoints[k];
      const auto a = column_of(samples, m, k);
      const auto b = column_of(ref, m, k);
      cs.sample = moments(a);
      cs.reference = moments(b);
      cs.ks = ks_two_sample(a, b);
      cs.gap = std::abs(cs.sample.mean - cs.reference.mean);
      cs.gap_tol = plan.tol.se_mult * std::hypot(cs.sample.mean_se, cs.reference.mean_se);
      cs.verdict = cs.gap <= cs.gap_tol;
      pn.checkpoints.push_back(cs);
    }
    rep.per_n.push_back(std::move(pn));
  }

  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> ks;
    for (const auto& pn : rep.per_n) ks.push_back(pn.checkpoints[k].ks.statistic);
    const auto tag = "t=" + format_double(plan.checkpoints[k]);
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < ks.size(); ++i) worst_rise = std::max(worst_rise, ks[i] - ks[i - 1]);
    rep.verdicts.push_back(verdict_le("ks nonincreasing in n (largest rise), " + tag,
                                      worst_rise, plan.tol.ks_slack));
    const auto& last = rep.per_n.back().checkpoints[k];
    rep.verdicts.push_back(verdict_le("ks at largest n, " + tag, last.ks.statistic,
                                      plan.tol.ks_max));
    rep.verdicts.push_back(verdict_le("mean gap at largest n, " + tag, last.gap, last.gap_tol));
  }
  return rep;
}

}  // namespace qlim
