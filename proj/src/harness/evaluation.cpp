#include <algorithm>
#include <cmath>
#include <numeric>

#include "aacc/envs.hpp"
#include "aacc/harness.hpp"

namespace aacc::harness {

namespace {

struct EpisodeStats {
  double total_reward = 0.0;
  bool terminated = false;
  long context_changes = 0;
  double mean_heading_error = 0.0;
};

EpisodeStats run_eval_episode(const Agent& agent, Environment& env, const ContextSpec& dist,
                              double p, Rng& rng) {
  EpisodeStats st;
  Observation obs = env.reset(sample_context(dist, rng), rng);
  Vector prev = Vector::Zero(agent.prev_action_dim);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (!env.done()) {
    const auto sample = agent.act(obs, env.context().values, prev, rng);
    const Action action = agent.to_env_action(sample.action);
    StepResult r = env.step(action);
    st.total_reward += r.reward;
    st.terminated = r.terminated;
    if (agent.prev_action_dim > 0) prev = agent.prev_action_features(action);
    obs = std::move(r.observation);
    // p = 0 draws nothing, so the rng stream matches plain evaluation.
    if (p > 0.0 && !env.done() && u(rng) < p) {
      env.replace_context(sample_context(dist, rng));
      ++st.context_changes;
    }
  }
  if (const auto* windy = dynamic_cast<const envs::WindyPointMass*>(&env)) {
    st.mean_heading_error = windy->mean_heading_error();
  }
  return st;
}

bool episode_succeeded(const Environment& env, const EpisodeStats& st, double threshold) {
  const auto id = env.id();
  if (id == "windy") return st.mean_heading_error < threshold;
  if (id == "cartpole") return !st.terminated;
  if (id == "acrobot") return st.terminated;
  return st.total_reward >= threshold;
}

}  // namespace

EvalRecord summarize_returns(std::vector<double> returns) {
  EvalRecord rec;
  if (returns.empty()) return rec;
  const double n = static_cast<double>(returns.size());
  rec.mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  rec.min = *lo;
  rec.max = *hi;
  double ss = 0.0;
  for (double r : returns) ss += (r - rec.mean) * (r - rec.mean);
  rec.std = std::sqrt(ss / n);
  // Guard the [min, max] invariant against rounding in the mean.
  rec.mean = std::clamp(rec.mean, rec.min, rec.max);
  rec.returns = std::move(returns);
  return rec;
}

EvalRecord evaluate(const Agent& agent, Environment& env, const ContextSpec& eval_dist,
                    int rollouts, Rng& rng) {
  if (rollouts < 1) throw std::invalid_argument("evaluate needs at least one rollout");
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(rollouts));
  for (int i = 0; i < rollouts; ++i) {
    returns.push_back(run_eval_episode(agent, env, eval_dist, 0.0, rng).total_reward);
  }
  EvalRecord rec = summarize_returns(std::move(returns));
  rec.context_fingerprint = eval_dist.fingerprint();
  return rec;
}

AdaptationResult continuous_adaptation_eval(const Agent& agent, Environment& env,
                                            const ContextSpec& eval_dist, double p, int rollouts,
                                            Rng& rng, double success_threshold) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("resample probability must lie in [0, 1]");
  if (rollouts < 1) throw std::invalid_argument("continuous adaptation needs at least one rollout");
  AdaptationResult out;
  std::vector<double> returns;
  int successes = 0;
  for (int i = 0; i < rollouts; ++i) {
    const EpisodeStats st = run_eval_episode(agent, env, eval_dist, p, rng);
    returns.push_back(st.total_reward);
    const bool ok = episode_succeeded(env, st, success_threshold);
    out.success.push_back(ok);
    successes += ok ? 1 : 0;
    out.context_changes += st.context_changes;
  }
  out.record = summarize_returns(std::move(returns));
  out.record.context_fingerprint = eval_dist.fingerprint();
  out.success_ratio = static_cast<double>(successes) / rollouts;
  return out;
}

const std::vector<std::string>& schedule_names() {
  static const std::vector<std::string> names{"Fix1", "Fix2", "Random1", "Random2", "Random3", "Uniform"};
  return names;
}

std::vector<std::pair<std::string, DistSpec>> randomization_schedule(std::string_view name) {
  DistSpec down;
  if (name == "Fix1") {
    down = Fixed{-10.0};
  } else if (name == "Fix2") {
    down = Fixed{0.0};
  } else if (name == "Random1") {
    down = FiniteSet{{-30.0, 30.0}};
  } else if (name == "Random2") {
    down = FiniteSet{{-30.0, 0.0, 30.0}};
  } else if (name == "Random3") {
    down = FiniteSet{{-30.0, -15.0, 0.0, 15.0, 30.0}};
  } else if (name == "Uniform") {
    down = Uniform{-30.0, 30.0};
  } else {
    std::string msg = "unknown randomization schedule '" + std::string(name) + "' (expected one of";
    for (const auto& n : schedule_names()) msg += " " + n;
    throw std::invalid_argument(msg + ")");
  }
  return {{"north_wind", Fixed{0.0}}, {"east_wind", Fixed{0.0}}, {"down_wind", down}};
}

ContextSpec apply_schedule(const ContextSpec& windy_spec, std::string_view name) {
  ContextSpec out = windy_spec;
  for (auto& [factor, dist] : randomization_schedule(name)) {
    const double def = windy_spec.factor(windy_spec.index_of(factor)).default_value;
    if (std::holds_alternative<Fixed>(dist) && factor != "down_wind") dist = Fixed{def};
    out = out.with_distribution(factor, dist);
  }
  return out;
}

}  // namespace aacc::harness
