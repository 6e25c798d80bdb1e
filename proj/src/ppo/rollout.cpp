#include <cmath>
#include <stdexcept>

#include "aacc/ppo.hpp"

namespace aacc {

void RolloutBuffer::add(EpisodeRecord episode) {
  num_steps_ += episode.steps.size();
  episodes_.push_back(std::move(episode));
}

void RolloutBuffer::clear() {
  episodes_.clear();
  num_steps_ = 0;
}

bool RolloutBuffer::contexts_consistent() const {
  for (const auto& ep : episodes_) {
    for (const auto& t : ep.steps) {
      if (t.context.size() != ep.context.values.size() || t.context != ep.context.values) {
        return false;
      }
    }
  }
  return true;
}

RolloutBuffer collect_rollouts(const Agent& agent, Environment& env,
                               const ContextSpec& context_dist, long min_steps, Rng& rng) {
  if (env.observation_dim() != agent.observation_dim ||
      static_cast<int>(env.context_spec().size()) != agent.factor_dim) {
    throw std::invalid_argument("agent and environment dimensions disagree");
  }
  RolloutBuffer buffer;
  while (static_cast<long>(buffer.num_steps()) < min_steps) {
    EpisodeRecord ep;
    ep.context = sample_context(context_dist, rng);
    Observation obs = env.reset(ep.context, rng);
    Vector prev = Vector::Zero(agent.prev_action_dim);
    while (!env.done()) {
      const auto sample = agent.act(obs, ep.context.values, prev, rng);
      const Action action = agent.to_env_action(sample.action);
      StepResult r = env.step(action);
      Transition t;
      t.observation = std::move(obs);
      t.action = sample.action;
      t.reward = r.reward;
      t.next_observation = r.observation;
      t.done = r.done;
      t.log_prob = sample.log_prob;
      t.context = env.context().values;
      t.prev_action = prev;
      ep.total_reward += r.reward;
      ep.terminated = r.terminated;
      ep.steps.push_back(std::move(t));
      if (agent.prev_action_dim > 0) prev = agent.prev_action_features(action);
      obs = std::move(r.observation);
    }
    buffer.add(std::move(ep));
  }
  return buffer;
}

Vector compute_returns(const RolloutBuffer& buffer, double gamma) {
  Vector out(static_cast<Eigen::Index>(buffer.num_steps()));
  Eigen::Index base = 0;
  for (const auto& ep : buffer.episodes()) {
    double running = 0.0;
    const auto n = static_cast<Eigen::Index>(ep.steps.size());
    for (Eigen::Index t = n - 1; t >= 0; --t) {
      running = ep.steps[t].reward + gamma * running;
      out(base + t) = running;
    }
    base += n;
  }
  return out;
}

Batch make_batch(const RolloutBuffer& buffer, const Agent& agent) {
  const auto n = static_cast<Eigen::Index>(buffer.num_steps());
  Batch b;
  b.observations.resize(agent.observation_dim, n);
  Matrix raw(agent.factor_dim, n);
  b.prev_actions.resize(agent.prev_action_dim, n);
  b.actions.resize(agent.head.action_dim(), n);
  b.log_probs_old.resize(n);
  Eigen::Index c = 0;
  for (const auto& ep : buffer.episodes()) {
    for (const auto& t : ep.steps) {
      b.observations.col(c) = t.observation;
      raw.col(c) = t.context;
      if (agent.prev_action_dim > 0) b.prev_actions.col(c) = t.prev_action;
      b.actions.col(c) = t.action;
      b.log_probs_old(c) = t.log_prob;
      ++c;
    }
  }
  b.factors = agent.normalizer(raw);
  return b;
}

Batch Batch::select(const std::vector<Eigen::Index>& columns) const {
  Batch out;
  const auto n = static_cast<Eigen::Index>(columns.size());
  out.observations.resize(observations.rows(), n);
  out.factors.resize(factors.rows(), n);
  out.prev_actions.resize(prev_actions.rows(), n);
  out.actions.resize(actions.rows(), n);
  out.log_probs_old.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = columns[static_cast<std::size_t>(i)];
    out.observations.col(i) = observations.col(c);
    out.factors.col(i) = factors.col(c);
    if (prev_actions.rows() > 0) out.prev_actions.col(i) = prev_actions.col(c);
    out.actions.col(i) = actions.col(c);
    out.log_probs_old(i) = log_probs_old(c);
  }
  return out;
}

Vector standardize(const Vector& x) {
  if (x.size() < 2) return x;
  const double mean = x.mean();
  const Vector centered = x.array() - mean;
  const double var = centered.squaredNorm() / static_cast<double>(x.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) return centered;
  return centered / sd;
}

Vector compute_advantages(const RolloutBuffer& buffer, const Agent& agent, const Vector& returns,
                          const TrainConfig& config) {
  const Batch batch = make_batch(buffer, agent);
  const Vector values = critic_values(agent, batch.observations, batch.factors);
  Vector adv(values.size());
  if (config.advantage == AdvantageEstimator::kMonteCarlo) {
    adv = returns - values;
  } else {
    Eigen::Index base = 0;
    for (const auto& ep : buffer.episodes()) {
      const auto n = static_cast<Eigen::Index>(ep.steps.size());
      // Bootstrap from the final next-observation only when the horizon cut
      // the episode.
      double next_value = 0.0;
      if (!ep.terminated) {
        next_value = agent.value(ep.steps.back().next_observation, ep.context.values);
      }
      double running = 0.0;
      for (Eigen::Index t = n - 1; t >= 0; --t) {
        const double v_next = t + 1 < n ? values(base + t + 1) : next_value;
        const double delta = ep.steps[t].reward + config.gamma * v_next - values(base + t);
        running = delta + config.gamma * config.gae_lambda * running;
        adv(base + t) = running;
      }
      base += n;
    }
  }
  return config.standardize_advantages ? standardize(adv) : adv;
}

}  // namespace aacc
