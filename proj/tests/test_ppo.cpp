#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "aacc/envs.hpp"
#include "aacc/ppo.hpp"

namespace aacc {
namespace {

// One step, two actions: action 1 pays the context value, action 0 pays 0.
class OneStepEnv final : public Environment {
 public:
  OneStepEnv()
      : spec_({FactorSpec{"payoff", 1.0, -5.0, 5.0, FactorKind::kContinuous, Uniform{-2.0, 2.0}}}) {}
  std::string_view id() const override { return "one_step"; }
  int observation_dim() const override { return 2; }
  ActionSpace action_space() const override { return {ActionKind::kDiscrete, 2}; }
  int horizon() const override { return 1; }
  const ContextSpec& context_spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<OneStepEnv>(*this); }

 protected:
  Observation do_reset(Rng&) override { return Vector::Ones(2); }
  StepResult do_step(const Action& a) override {
    return {Vector::Zero(2), a(0) == 1 ? factors()(0) : 0.0, true, true};
  }

 private:
  ContextSpec spec_;
};

Agent make_agent(ArchVariant v, const Environment& env, std::uint64_t seed = 1) {
  Rng rng(seed);
  NetworkShape shape;
  shape.encoder_dim = env.id() == "one_step" ? 1 : envs::default_encoder_dim(env.id());
  return Agent(v, env.observation_dim(), env.action_space(), env.context_spec(), shape, rng);
}

Agent make_agent(ArchVariant v, std::string_view env_id, std::uint64_t seed = 1) {
  return make_agent(v, *envs::make_environment(env_id), seed);
}

EpisodeRecord episode_with_rewards(const std::vector<double>& rewards) {
  EpisodeRecord ep;
  ep.context.values = Vector::Zero(1);
  for (double r : rewards) {
    Transition t;
    t.reward = r;
    t.context = ep.context.values;
    ep.steps.push_back(t);
  }
  return ep;
}

TEST(Wiring, TableRows) {
  auto row = [](ArchVariant v) {
    const Wiring w = wiring(v);
    return std::vector<bool>{w.actor_sees_factors, w.actor_uses_encoder, w.critic_sees_factors,
                             w.critic_uses_encoder, w.actor_sees_prev_action, w.shared_encoder};
  };
  EXPECT_EQ(row(ArchVariant::kAACC), (std::vector<bool>{false, false, true, true, false, false}));
  EXPECT_EQ(row(ArchVariant::kRobust), (std::vector<bool>{false, false, false, false, false, false}));
  EXPECT_EQ(row(ArchVariant::kSysID), (std::vector<bool>{true, false, true, false, false, false}));
  EXPECT_EQ(row(ArchVariant::kRMA), (std::vector<bool>{true, true, true, true, true, true}));
  EXPECT_EQ(row(ArchVariant::kRMANormal), (std::vector<bool>{true, true, true, true, false, true}));
  EXPECT_EQ(row(ArchVariant::kAACCActor), (std::vector<bool>{true, true, false, false, false, false}));
  EXPECT_EQ(row(ArchVariant::kAACCHybrid), (std::vector<bool>{true, true, true, true, false, false}));
}

TEST(Wiring, NamesRoundTrip) {
  for (auto v : all_variants()) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("PPO"), std::invalid_argument);
}

TEST(Wiring, InputDimensions) {
  // CartPole: 4 observations, 6 factors, 2 actions, encoder width 3.
  const Agent sysid = make_agent(ArchVariant::kSysID, "cartpole");
  EXPECT_EQ(sysid.actor.input_dim(), 10);
  EXPECT_EQ(sysid.critic.input_dim(), 10);
  const Agent rma = make_agent(ArchVariant::kRMA, "cartpole");
  EXPECT_EQ(rma.actor.input_dim(), 9);
  EXPECT_EQ(rma.actor_side_encoder(), &*rma.critic_encoder);
  EXPECT_FALSE(rma.actor_encoder.has_value());
  const Agent robust = make_agent(ArchVariant::kRobust, "cartpole");
  EXPECT_EQ(robust.actor.input_dim(), 4);
  EXPECT_EQ(robust.critic.input_dim(), 4);
  EXPECT_FALSE(robust.actor_encoder || robust.critic_encoder);
  // Pendulum: 3 observations, 4 factors, encoder width 2.
  const Agent aacc = make_agent(ArchVariant::kAACC, "pendulum");
  EXPECT_EQ(aacc.actor.input_dim(), 3);
  EXPECT_EQ(aacc.critic.input_dim(), 5);
  EXPECT_EQ(aacc.actor.output_dim(), 1);
  const Agent actor_only = make_agent(ArchVariant::kAACCActor, "pendulum");
  EXPECT_EQ(actor_only.actor.input_dim(), 5);
  EXPECT_EQ(actor_only.critic.input_dim(), 3);
}

TEST(Wiring, HybridActorEncoderWidth) {
  auto env = envs::make_environment("windy");
  NetworkShape shape;
  shape.encoder_dim = 4;
  shape.actor_encoder_dim = 2;
  Rng rng(1);
  const Agent a(ArchVariant::kAACCHybrid, env->observation_dim(), env->action_space(), env->context_spec(),
                shape, rng);
  EXPECT_EQ(a.critic_encoder->output_dim(), 4);
  EXPECT_EQ(a.actor_encoder->output_dim(), 2);
  EXPECT_EQ(a.actor.input_dim(), env->observation_dim() + 2);
}

TEST(Wiring, CriticInputIsEncodingThenObservation) {
  const Vector o = (Vector(2) << 1, 2).finished();
  const Vector e = (Vector(3) << 0.1, 0.2, 0.3).finished();
  Net zero({3, 4, 2});
  const Vector x = build_critic_input(ArchVariant::kAACC, o, e, &zero);
  EXPECT_EQ(x, (Vector(4) << 0, 0, 1, 2).finished());
  EXPECT_EQ(build_critic_input(ArchVariant::kSysID, o, e, nullptr), (Vector(5) << 1, 2, 0.1, 0.2, 0.3).finished());
  EXPECT_EQ(build_critic_input(ArchVariant::kRobust, o, e, nullptr), o);
  EXPECT_EQ(build_actor_input(ArchVariant::kAACC, o, e, nullptr, nullptr), o);
}

TEST(Wiring, MissingEncoderOrPreviousActionThrows) {
  const Vector o = Vector::Zero(2), e = Vector::Zero(3), prev = Vector::Zero(2);
  Net enc({3, 2});
  EXPECT_THROW(build_critic_input(ArchVariant::kAACC, o, e, nullptr), std::invalid_argument);
  EXPECT_THROW(build_actor_input(ArchVariant::kAACCActor, o, e, nullptr, nullptr), std::invalid_argument);
  EXPECT_THROW(build_actor_input(ArchVariant::kRMA, o, e, nullptr, &enc), std::invalid_argument);
  EXPECT_NO_THROW(build_actor_input(ArchVariant::kRMA, o, e, &prev, &enc));
}

TEST(Wiring, ZeroEncoderDimensionRejected) {
  auto env = envs::make_environment("cartpole");
  NetworkShape shape;
  shape.encoder_dim = 0;
  Rng rng(1);
  EXPECT_THROW(Agent(ArchVariant::kAACC, 4, env->action_space(), env->context_spec(), shape, rng),
               std::invalid_argument);
  EXPECT_NO_THROW(Agent(ArchVariant::kRobust, 4, env->action_space(), env->context_spec(), shape, rng));
}

TEST(Asymmetry, ActorOutputIndependentOfContext) {
  for (const auto& id : envs::environment_ids()) {
    for (auto v : {ArchVariant::kAACC, ArchVariant::kRobust}) {
      auto env = envs::make_environment(id);
      const Agent agent = make_agent(v, *env, 3);
      Rng rng(5);
      const Observation obs = env->reset(Context{env->context_spec().defaults()}, rng);
      const Vector prev = Vector::Zero(agent.prev_action_dim);
      const Vector ref = agent.policy_output(obs, env->context_spec().defaults(), prev);
      for (int i = 0; i < 100; ++i) {
        const Context c = sample_context(env->context_spec(), rng);
        ASSERT_EQ(agent.policy_output(obs, c.values, prev), ref) << id << " " << to_string(v);
      }
    }
  }
}

TEST(Asymmetry, CriticDependsOnContextForAacc) {
  auto env = envs::make_environment("cartpole");
  Agent agent = make_agent(ArchVariant::kAACC, *env, 3);
  Rng rng(5);
  const Observation obs = env->reset(Context{env->context_spec().defaults()}, rng);
  const Context c = sample_context(env->context_spec(), rng);
  EXPECT_NE(agent.value(obs, c.values), agent.value(obs, env->context_spec().defaults()));
}

TEST(Asymmetry, ZeroedEncoderFeedsZerosThenObservation) {
  auto env = envs::make_environment("windy");
  Agent agent = make_agent(ArchVariant::kAACC, *env);
  agent.critic_encoder->params().setZero();
  Rng rng(2);
  const Observation obs = env->reset(sample_context(env->context_spec(), rng), rng);
  const Vector x = agent.critic_input(obs, sample_context(env->context_spec(), rng).values);
  ASSERT_EQ(x.size(), 3 + obs.size());
  EXPECT_EQ(x.head(3), Vector::Zero(3));
  EXPECT_EQ(x.tail(obs.size()), obs);
}

Batch collect_batch(const Agent& agent, Environment& env, RolloutBuffer& buffer, long steps, Rng& rng) {
  buffer = collect_rollouts(agent, env, env.context_spec(), steps, rng);
  return make_batch(buffer, agent);
}

TEST(Asymmetry, ActorGradientsNeverReachAaccEncoder) {
  auto env = envs::make_environment("cartpole");
  Agent agent = make_agent(ArchVariant::kAACC, *env);
  Rng rng(4);
  RolloutBuffer buffer;
  const Batch batch = collect_batch(agent, *env, buffer, 300, rng);
  const Vector adv = standardize(compute_returns(buffer, 0.99));
  AgentGradients g = AgentGradients::zeros_like(agent);
  actor_loss_and_gradients(agent, batch, adv, 0.2, 0.01, g);
  EXPECT_GT(g.actor.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.critic_encoder, Vector::Zero(g.critic_encoder.size()));
  EXPECT_EQ(g.critic, Vector::Zero(g.critic.size()));

  const auto before = agent.encoder_fingerprint();
  const Vector encoder_before = agent.critic_encoder->params();
  Adam<double> opt(agent.actor.num_params(), 3e-4);
  for (int i = 0; i < 5; ++i) {
    AgentGradients gi = AgentGradients::zeros_like(agent);
    actor_loss_and_gradients(agent, batch, adv, 0.2, 0.0, gi);
    opt.step(agent.actor.params(), gi.actor);
  }
  EXPECT_EQ(agent.encoder_fingerprint(), before);
  EXPECT_EQ(agent.critic_encoder->params(), encoder_before);
}

TEST(Asymmetry, SharedRmaEncoderReceivesActorGradient) {
  auto env = envs::make_environment("cartpole");
  Agent agent = make_agent(ArchVariant::kRMA, *env);
  Rng rng(4);
  RolloutBuffer buffer;
  const Batch batch = collect_batch(agent, *env, buffer, 300, rng);
  const Vector adv = standardize(compute_returns(buffer, 0.99));
  AgentGradients g = AgentGradients::zeros_like(agent);
  actor_loss_and_gradients(agent, batch, adv, 0.2, 0.0, g);
  EXPECT_GT(g.critic_encoder.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.actor_encoder.size(), 0);
}

TEST(Asymmetry, CriticLossTrainsEncoderButNotActor) {
  auto env = envs::make_environment("windy");
  Agent agent = make_agent(ArchVariant::kAACC, *env);
  Rng rng(4);
  RolloutBuffer buffer;
  const Batch batch = collect_batch(agent, *env, buffer, 600, rng);
  AgentGradients g = AgentGradients::zeros_like(agent);
  critic_loss_and_gradients(agent, batch, compute_returns(buffer, 0.99), g);
  EXPECT_GT(g.critic_encoder.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.actor, Vector::Zero(g.actor.size()));
}

TEST(Surrogate, ClipArithmetic) {
  EXPECT_EQ(clipped_surrogate_term(1.3, 2.0, 0.2), 2.4);
  EXPECT_EQ(clipped_surrogate_term(0.5, -1.0, 0.2), -0.8);
  EXPECT_EQ(clipped_surrogate_term(1.1, 2.0, 0.2), 2.2);
  EXPECT_EQ(clipped_surrogate_term(1.5, -1.0, 0.2), -1.5);
  EXPECT_EQ(clipped_surrogate_term(0.5, 1.0, 0.2), 0.5);
}

TEST(Surrogate, ClippedSamplesHaveZeroGradient) {
  const Vector logp_old = Vector::Zero(3);
  const Vector logp_new = (Vector(3) << std::log(1.3), std::log(1.1), std::log(0.5)).finished();
  const Vector adv = (Vector(3) << 2.0, 2.0, -1.0).finished();
  const auto s = clipped_surrogate(logp_new, logp_old, adv, 0.2);
  EXPECT_NEAR(s.objective, (2.4 + 2.2 - 0.8) / 3, 1e-14);
  EXPECT_EQ(s.objective_grad(0), 0.0);
  EXPECT_NEAR(s.objective_grad(1), 1.1 * 2.0 / 3, 1e-14);
  EXPECT_EQ(s.objective_grad(2), 0.0);
  EXPECT_NEAR(s.clip_fraction, 2.0 / 3, 1e-15);
  EXPECT_THROW(clipped_surrogate(logp_new, Vector::Zero(2), adv, 0.2), std::invalid_argument);
}

TEST(Returns, HandComputed) {
  RolloutBuffer buffer;
  buffer.add(episode_with_rewards({1, 1, 1}));
  const Vector g = compute_returns(buffer, 0.99);
  EXPECT_NEAR(g(0), 2.9701, 1e-12);
  EXPECT_NEAR(g(1), 1.99, 1e-12);
  EXPECT_NEAR(g(2), 1.0, 1e-12);
  EXPECT_EQ(compute_returns(buffer, 0.0), Vector::Ones(3));
}

TEST(Returns, MatchQuadraticBruteForceAndResetAtEpisodeBoundaries) {
  Rng rng(6);
  std::normal_distribution<double> n(0, 1);
  RolloutBuffer buffer;
  std::vector<std::vector<double>> rewards;
  for (int e = 0; e < 4; ++e) {
    std::vector<double> r(static_cast<std::size_t>(20 + 37 * e));
    for (auto& x : r) x = n(rng);
    rewards.push_back(r);
    buffer.add(episode_with_rewards(r));
  }
  const double gamma = 0.97;
  const Vector g = compute_returns(buffer, gamma);
  Eigen::Index i = 0;
  for (const auto& r : rewards) {
    for (std::size_t t = 0; t < r.size(); ++t, ++i) {
      double brute = 0.0;
      for (std::size_t k = t; k < r.size(); ++k) brute += std::pow(gamma, static_cast<double>(k - t)) * r[k];
      ASSERT_NEAR(g(i), brute, 1e-12);
    }
  }
  EXPECT_EQ(i, g.size());
}

TEST(Advantages, StandardizeGivesZeroMeanUnitStd) {
  Rng rng(7);
  const Vector x = Vector::NullaryExpr(500, [&] { return std::normal_distribution<double>(3, 5)(rng); });
  const Vector z = standardize(x);
  EXPECT_NEAR(z.mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(z.squaredNorm() / 500), 1.0, 1e-12);
  EXPECT_EQ(standardize(Vector::Constant(4, 2.0)), Vector::Zero(4));
}

TEST(Advantages, ReturnMinusCriticBaseline) {
  OneStepEnv env;
  Agent agent = make_agent(ArchVariant::kAACC, env);
  Rng rng(8);
  RolloutBuffer buffer = collect_rollouts(agent, env, env.context_spec(), 20, rng);
  const Vector returns = compute_returns(buffer, 0.99);
  TrainConfig cfg;
  cfg.standardize_advantages = false;
  const Vector adv = compute_advantages(buffer, agent, returns, cfg);
  for (Eigen::Index i = 0; i < adv.size(); ++i) {
    const auto& ep = buffer.episodes()[static_cast<std::size_t>(i)];
    EXPECT_NEAR(adv(i), returns(i) - agent.value(ep.steps[0].observation, ep.context.values), 1e-12);
  }
}

TEST(Rollouts, HorizonOneCollectsWholeEpisodesWithConstantContexts) {
  OneStepEnv env;
  const Agent agent = make_agent(ArchVariant::kAACC, env);
  Rng rng(9);
  const RolloutBuffer buffer = collect_rollouts(agent, env, env.context_spec(), 3, rng);
  EXPECT_EQ(buffer.episodes().size(), 3u);
  EXPECT_EQ(buffer.num_steps(), 3u);
  EXPECT_TRUE(buffer.contexts_consistent());
  for (const auto& ep : buffer.episodes()) {
    ASSERT_EQ(ep.steps.size(), 1u);
    EXPECT_EQ(ep.steps[0].reward, ep.steps[0].action(0) == 1 ? ep.context.values(0) : 0.0);
  }
}

TEST(Rollouts, ContextsFixedWithinLongEpisodes) {
  auto env = envs::make_environment("pendulum");
  const Agent agent = make_agent(ArchVariant::kAACC, *env);
  Rng rng(10);
  const RolloutBuffer buffer = collect_rollouts(agent, *env, env->context_spec(), 1000, rng);
  EXPECT_TRUE(buffer.contexts_consistent());
  EXPECT_GE(buffer.num_steps(), 1000u);
  EXPECT_EQ(buffer.num_steps() % 200, 0u);
  EXPECT_NE(buffer.episodes()[0].context, buffer.episodes()[1].context);
}

TEST(Rollouts, FixedDistributionSharesOneContext) {
  auto env = envs::make_environment("cartpole");
  const Agent agent = make_agent(ArchVariant::kAACC, *env);
  const ContextSpec fixed = env->context_spec().with_all_distributions(Fixed{});
  Rng rng(11);
  const RolloutBuffer buffer = collect_rollouts(agent, *env, fixed, 500, rng);
  for (const auto& ep : buffer.episodes()) EXPECT_EQ(ep.context, buffer.episodes()[0].context);
}

TEST(Rollouts, MismatchedAgentRejected) {
  auto env = envs::make_environment("cartpole");
  const Agent agent = make_agent(ArchVariant::kAACC, "pendulum");
  Rng rng(1);
  EXPECT_THROW(collect_rollouts(agent, *env, env->context_spec(), 10, rng), std::invalid_argument);
}

TEST(Critic, LossZeroWhenPredictionsMatchTargets) {
  auto env = envs::make_environment("cartpole");
  const Agent agent = make_agent(ArchVariant::kAACC, *env);
  Rng rng(12);
  RolloutBuffer buffer;
  const Batch batch = collect_batch(agent, *env, buffer, 200, rng);
  const Vector targets = critic_values(agent, batch.observations, batch.factors);
  AgentGradients g = AgentGradients::zeros_like(agent);
  EXPECT_EQ(critic_loss_and_gradients(agent, batch, targets, g), 0.0);
  EXPECT_EQ(g.critic, Vector::Zero(g.critic.size()));
  EXPECT_EQ(g.critic_encoder, Vector::Zero(g.critic_encoder.size()));
}

TEST(Trainer, FirstEpochRatioIsOne) {
  for (const char* id : {"cartpole", "pendulum"}) {
    auto env = envs::make_environment(id);
    TrainConfig cfg;
    cfg.batch_size = 400;
    cfg.epochs = 3;
    PpoTrainer trainer(make_agent(ArchVariant::kAACC, *env), cfg);
    Rng rng(13);
    for (int it = 0; it < 2; ++it) {
      const auto m = trainer.train_iteration(*env, env->context_spec(), rng);
      EXPECT_NEAR(m.first_epoch_mean_ratio, 1.0, 1e-12) << id;
      EXPECT_GE(m.env_steps, 400 * (it + 1));
    }
  }
}

TEST(Trainer, RobustHasNoEncoderAndStillTrains) {
  auto env = envs::make_environment("cartpole");
  TrainConfig cfg;
  cfg.batch_size = 300;
  cfg.epochs = 2;
  PpoTrainer trainer(make_agent(ArchVariant::kRobust, *env), cfg);
  EXPECT_FALSE(trainer.agent().critic_encoder.has_value());
  const auto before = trainer.agent().fingerprint();
  Rng rng(14);
  trainer.train_iteration(*env, env->context_spec(), rng);
  EXPECT_NE(trainer.agent().fingerprint(), before);
}

TEST(Trainer, EveryVariantRunsAnIteration) {
  for (auto v : all_variants()) {
    for (const char* id : {"cartpole", "pendulum"}) {
      auto env = envs::make_environment(id);
      TrainConfig cfg;
      cfg.batch_size = 250;
      cfg.epochs = 2;
      cfg.minibatch_size = 64;
      PpoTrainer trainer(make_agent(v, *env), cfg);
      Rng rng(15);
      const auto m = trainer.train_iteration(*env, env->context_spec(), rng);
      EXPECT_TRUE(std::isfinite(m.critic_loss)) << to_string(v) << " " << id;
    }
  }
}

TEST(Trainer, BitDeterministic) {
  auto run = [] {
    auto env = envs::make_environment("cartpole");
    TrainConfig cfg;
    cfg.batch_size = 500;
    cfg.epochs = 4;
    PpoTrainer trainer(make_agent(ArchVariant::kAACC, *env, 21), cfg);
    Rng rng(22);
    for (int i = 0; i < 2; ++i) trainer.train_iteration(*env, env->context_spec(), rng);
    std::ostringstream out;
    save_checkpoint(trainer.agent(), "cartpole", out);
    return out.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(Trainer, LearnsOneStepBandit) {
  OneStepEnv env;
  TrainConfig cfg;
  cfg.batch_size = 200;
  cfg.epochs = 10;
  cfg.lr_actor = 1e-2;
  // Context-free payoff is positive on average under Uniform(0.5, 2).
  const ContextSpec dist = env.context_spec().with_distribution("payoff", Uniform{0.5, 2.0});
  PpoTrainer trainer(make_agent(ArchVariant::kAACC, env), cfg);
  Rng rng(16);
  for (int i = 0; i < 20; ++i) trainer.train_iteration(env, dist, rng);
  const Vector p = trainer.agent().head.probabilities(trainer.agent().policy_output(Vector::Ones(2), Vector::Ones(1), Vector()));
  EXPECT_GT(p(1), 0.95);
}

TEST(TrainConfig, RejectsInvalidHyperparameters) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = [&](auto mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
  };
  bad([](TrainConfig& c) { c.gamma = 1.5; });
  bad([](TrainConfig& c) { c.clip = 0.0; });
  bad([](TrainConfig& c) { c.epochs = 0; });
  bad([](TrainConfig& c) { c.batch_size = 0; });
  bad([](TrainConfig& c) { c.lr_actor = -1; });
}

TEST(Checkpoint, RoundTripIsBitExact) {
  for (auto v : all_variants()) {
    const Agent agent = make_agent(v, "pendulum", 30);
    std::stringstream first;
    save_checkpoint(agent, "pendulum", first);
    const auto loaded = load_checkpoint(first);
    EXPECT_EQ(loaded.env_id, "pendulum");
    EXPECT_EQ(loaded.agent.variant, v);
    EXPECT_EQ(loaded.agent.actor.params(), agent.actor.params());
    EXPECT_EQ(loaded.agent.critic.params(), agent.critic.params());
    EXPECT_EQ(loaded.agent.head.log_std(), agent.head.log_std());
    EXPECT_EQ(loaded.agent.fingerprint(), agent.fingerprint());
    std::stringstream second;
    save_checkpoint(loaded.agent, "pendulum", second);
    EXPECT_EQ(first.str(), second.str());
  }
}

TEST(Checkpoint, TruncatedFileRejected) {
  const Agent agent = make_agent(ArchVariant::kAACC, "cartpole");
  std::stringstream out;
  save_checkpoint(agent, "cartpole", out);
  const std::string text = out.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_checkpoint(cut), std::runtime_error);
}

}  // namespace
}  // namespace aacc
