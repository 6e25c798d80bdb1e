#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aacc/ppo.hpp"

namespace aacc {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(clip > 0.0)) throw std::invalid_argument("clip ratio must be > 0");
  if (epochs < 1) throw std::invalid_argument("update epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (minibatch_size < 0) throw std::invalid_argument("minibatch size must be >= 0");
  if (!(lr_actor > 0.0 && lr_critic > 0.0 && lr_encoder > 0.0)) {
    throw std::invalid_argument("learning rates must be > 0");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae lambda must lie in [0, 1]");
  }
  if (entropy_coef < 0.0) throw std::invalid_argument("entropy coefficient must be >= 0");
}

namespace {

struct ActorPass {
  Net::Tape actor_tape;
  Net::Tape encoder_tape;
  Matrix head_inputs;
  Eigen::Index encoder_row = -1;
};

ActorPass actor_pass(const Agent& agent, const Batch& batch) {
  ActorPass pass;
  const Net* encoder = agent.actor_side_encoder();
  const Eigen::Index n = batch.size();
  Matrix x(agent.actor.input_dim(), n);
  Eigen::Index r = 0;
  x.topRows(agent.observation_dim) = batch.observations;
  r += agent.observation_dim;
  if (agent.wires.actor_sees_factors && !agent.wires.actor_uses_encoder) {
    x.middleRows(r, agent.factor_dim) = batch.factors;
    r += agent.factor_dim;
  }
  if (agent.prev_action_dim > 0) {
    x.middleRows(r, agent.prev_action_dim) = batch.prev_actions;
    r += agent.prev_action_dim;
  }
  if (encoder != nullptr) {
    pass.encoder_row = r;
    x.middleRows(r, encoder->output_dim()) = encoder->forward(batch.factors, pass.encoder_tape);
  }
  pass.head_inputs = agent.actor.forward(x, pass.actor_tape);
  return pass;
}

struct CriticPass {
  Net::Tape critic_tape;
  Net::Tape encoder_tape;
  Matrix values;  // 1 x n
};

Matrix critic_inputs(const Agent& agent, const Matrix& observations, const Matrix& factors,
                     Net::Tape* encoder_tape) {
  const Eigen::Index n = observations.cols();
  Matrix x(agent.critic.input_dim(), n);
  if (agent.critic_encoder) {
    const int w = agent.critic_encoder->output_dim();
    x.topRows(w) = encoder_tape ? agent.critic_encoder->forward(factors, *encoder_tape)
                                : agent.critic_encoder->forward(factors);
    x.bottomRows(agent.observation_dim) = observations;
  } else if (agent.wires.critic_sees_factors) {
    x.topRows(agent.observation_dim) = observations;
    x.bottomRows(agent.factor_dim) = factors;
  } else {
    x = observations;
  }
  return x;
}

}  // namespace

Vector critic_values(const Agent& agent, const Matrix& observations, const Matrix& factors) {
  return agent.critic.forward(critic_inputs(agent, observations, factors, nullptr)).row(0).transpose();
}

double clipped_surrogate_term(double ratio, double advantage, double clip) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantage);
}

SurrogateResult clipped_surrogate(const Vector& logp_new, const Vector& logp_old,
                                  const Vector& advantages, double clip) {
  const Eigen::Index n = logp_new.size();
  if (logp_old.size() != n || advantages.size() != n) {
    throw std::invalid_argument("surrogate inputs must have equal length");
  }
  SurrogateResult out;
  out.objective_grad.resize(n);
  double total = 0.0, ratio_sum = 0.0;
  int clipped = 0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(logp_new(i) - logp_old(i));
    const double a = advantages(i);
    const double unclipped = ratio * a;
    const double term = clipped_surrogate_term(ratio, a, clip);
    total += term;
    ratio_sum += ratio;
    // The min selects the constant clipped branch only when it is strictly
    // smaller; otherwise d term / d logp = ratio * A.
    const bool active = unclipped <= term;
    out.objective_grad(i) = active ? unclipped * inv_n : 0.0;
    if (!active) ++clipped;
  }
  out.objective = total * inv_n;
  out.mean_ratio = ratio_sum * inv_n;
  out.clip_fraction = clipped * inv_n;
  return out;
}

AgentGradients AgentGradients::zeros_like(const Agent& agent) {
  AgentGradients g;
  g.actor = Vector::Zero(agent.actor.num_params());
  g.log_std = Vector::Zero(agent.head.log_std().size());
  g.critic = Vector::Zero(agent.critic.num_params());
  g.actor_encoder = Vector::Zero(agent.actor_encoder ? agent.actor_encoder->num_params() : 0);
  g.critic_encoder = Vector::Zero(agent.critic_encoder ? agent.critic_encoder->num_params() : 0);
  return g;
}

ActorLoss actor_loss_and_gradients(const Agent& agent, const Batch& batch,
                                   const Vector& advantages, double clip, double entropy_coef,
                                   AgentGradients& grads) {
  const ActorPass pass = actor_pass(agent, batch);
  const Vector logp = agent.head.log_probs(pass.head_inputs, batch.actions);
  const SurrogateResult sur = clipped_surrogate(logp, batch.log_probs_old, advantages, clip);
  const double n = static_cast<double>(batch.size());

  ActorLoss out;
  out.mean_ratio = sur.mean_ratio;
  out.clip_fraction = sur.clip_fraction;
  out.approx_kl = (batch.log_probs_old - logp).mean();

  Matrix d_head =
      agent.head.log_prob_backward(pass.head_inputs, batch.actions, -sur.objective_grad,
                                   grads.log_std);
  const Vector entropies = agent.head.entropies(pass.head_inputs);
  out.entropy = entropies.mean();
  out.objective = sur.objective + entropy_coef * out.entropy;
  if (entropy_coef > 0.0) {
    d_head += agent.head.entropy_backward(
        pass.head_inputs, Vector::Constant(batch.size(), -entropy_coef / n), grads.log_std);
  }
  const Matrix d_input = agent.actor.backward(pass.actor_tape, d_head, grads.actor);
  if (const Net* encoder = agent.actor_side_encoder()) {
    Vector& target = agent.wires.shared_encoder ? grads.critic_encoder : grads.actor_encoder;
    encoder->backward(pass.encoder_tape, d_input.middleRows(pass.encoder_row, encoder->output_dim()),
                      target);
  }
  return out;
}

double critic_loss_and_gradients(const Agent& agent, const Batch& batch, const Vector& targets,
                                 AgentGradients& grads) {
  Net::Tape encoder_tape, critic_tape;
  const Matrix x = critic_inputs(agent, batch.observations, batch.factors, &encoder_tape);
  const Matrix values = agent.critic.forward(x, critic_tape);
  const Eigen::RowVectorXd diff = values.row(0) - targets.transpose();
  const double n = static_cast<double>(batch.size());
  const double loss = diff.squaredNorm() / n;
  if (!std::isfinite(loss)) throw std::runtime_error("critic loss is not finite");
  const Matrix d_values = (2.0 / n) * diff;
  const Matrix d_input = agent.critic.backward(critic_tape, d_values, grads.critic);
  if (agent.critic_encoder) {
    agent.critic_encoder->backward(encoder_tape,
                                   d_input.topRows(agent.critic_encoder->output_dim()),
                                   grads.critic_encoder);
  }
  return loss;
}

PpoTrainer::PpoTrainer(Agent agent, TrainConfig config)
    : agent_(std::move(agent)), config_(config) {
  config_.validate();
  actor_opt_ = Adam<double>(agent_.actor.num_params(), config_.lr_actor);
  log_std_opt_ = Adam<double>(agent_.head.log_std().size(), config_.lr_actor);
  critic_opt_ = Adam<double>(agent_.critic.num_params(), config_.lr_critic);
  if (agent_.actor_encoder) {
    actor_encoder_opt_ = Adam<double>(agent_.actor_encoder->num_params(), config_.lr_encoder);
  }
  if (agent_.critic_encoder) {
    critic_encoder_opt_ = Adam<double>(agent_.critic_encoder->num_params(), config_.lr_encoder);
  }
}

void PpoTrainer::apply(const AgentGradients& g, bool actor_side, bool critic_side) {
  if (actor_side) {
    actor_opt_.step(agent_.actor.params(), g.actor);
    if (!agent_.head.discrete()) log_std_opt_.step(agent_.head.log_std(), g.log_std);
    if (agent_.actor_encoder) actor_encoder_opt_.step(agent_.actor_encoder->params(), g.actor_encoder);
  }
  if (critic_side) {
    critic_opt_.step(agent_.critic.params(), g.critic);
    if (agent_.critic_encoder) {
      critic_encoder_opt_.step(agent_.critic_encoder->params(), g.critic_encoder);
    }
  }
}

IterationMetrics PpoTrainer::train_iteration(Environment& env, const ContextSpec& train_dist,
                                             Rng& rng) {
  RolloutBuffer buffer = collect_rollouts(agent_, env, train_dist, config_.batch_size, rng);
  env_steps_ += static_cast<long>(buffer.num_steps());
  return update(buffer, rng);
}

IterationMetrics PpoTrainer::update(RolloutBuffer& buffer, Rng& rng) {
  IterationMetrics m;
  m.episodes = static_cast<int>(buffer.episodes().size());
  double ret_sum = 0.0;
  for (const auto& ep : buffer.episodes()) ret_sum += ep.total_reward;
  m.mean_episode_return = m.episodes > 0 ? ret_sum / m.episodes : 0.0;

  const Vector returns = compute_returns(buffer, config_.gamma);
  const Vector advantages = compute_advantages(buffer, agent_, returns, config_);
  const Batch batch = make_batch(buffer, agent_);
  const Eigen::Index n = batch.size();
  const Eigen::Index mb =
      config_.minibatch_size > 0 ? std::min<Eigen::Index>(config_.minibatch_size, n) : n;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  bool first = true;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    if (mb < n) std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += mb) {
      const bool whole = mb == n;
      std::vector<Eigen::Index> cols;
      if (!whole) cols.assign(order.begin() + start, order.begin() + std::min(start + mb, n));
      const Batch part = whole ? Batch{} : batch.select(cols);
      const Batch& b = whole ? batch : part;
      Vector adv(b.size()), targets(b.size());
      for (Eigen::Index i = 0; i < b.size(); ++i) {
        const Eigen::Index c = whole ? i : cols[static_cast<std::size_t>(i)];
        adv(i) = advantages(c);
        targets(i) = returns(c);
      }

      AgentGradients g = AgentGradients::zeros_like(agent_);
      const ActorLoss al =
          actor_loss_and_gradients(agent_, b, adv, config_.clip, config_.entropy_coef, g);
      if (first) {
        m.first_epoch_mean_ratio = al.mean_ratio;
        first = false;
      }
      m.last_epoch_mean_ratio = al.mean_ratio;
      m.actor_objective = al.objective;
      m.clip_fraction = al.clip_fraction;
      m.approx_kl = al.approx_kl;
      apply(g, /*actor_side=*/true, /*critic_side=*/false);

      m.critic_loss = critic_loss_and_gradients(agent_, b, targets, g);
      apply(g, /*actor_side=*/false, /*critic_side=*/true);
    }
  }
  buffer.clear();
  ++iterations_;
  m.iteration = iterations_;
  m.env_steps = env_steps_;
  return m;
}

}  // namespace aacc
