#pragma once

// PPO with an asymmetric, context-aware critic. The critic (and optionally the
// actor, for the baseline wirings) consumes environmental factors, either raw
// or compressed by a small encoder network trained with the critic loss.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aacc/cmdp.hpp"
#include "aacc/neural.hpp"

namespace aacc {

using Net = Mlp<double>;
using Head = PolicyHead<double>;

enum class ArchVariant { kAACC, kRobust, kSysID, kRMA, kRMANormal, kAACCActor, kAACCHybrid };

// Which side receives environmental factors and how. `*_sees_factors` means
// the network receives factor information in any form; `*_uses_encoder`
// means it arrives through an encoder rather than raw.
struct Wiring {
  bool actor_sees_factors = false;
  bool actor_uses_encoder = false;
  bool critic_sees_factors = false;
  bool critic_uses_encoder = false;
  bool actor_sees_prev_action = false;
  bool shared_encoder = false;
};

Wiring wiring(ArchVariant variant);
std::string_view to_string(ArchVariant variant);
ArchVariant parse_variant(std::string_view name);
const std::vector<ArchVariant>& all_variants();

struct NetworkShape {
  std::vector<int> hidden{64, 64};
  std::vector<int> encoder_hidden{32};
  int encoder_dim = 3;
  // Output width of the actor-side encoder of AACC-hybrid; 0 means
  // encoder_dim.
  int actor_encoder_dim = 0;
};

// Actor input: o, [e], [a_prev], [mu_actor(e)] depending on the variant.
// Throws std::invalid_argument when a required encoder or previous action is
// missing.
Vector build_actor_input(ArchVariant variant, const Vector& observation, const Vector& factors,
                         const Vector* prev_action, const Net* actor_encoder);
// Critic input: o, (o, e) or (mu(e), o).
Vector build_critic_input(ArchVariant variant, const Vector& observation, const Vector& factors,
                          const Net* critic_encoder);

/// Actor, critic and encoder networks for one architecture variant. The
/// networks see normalized factors; callers pass raw factor vectors.
struct Agent {
  Agent() = default;
  Agent(ArchVariant variant, int observation_dim, ActionSpace actions,
        const ContextSpec& factor_schema, NetworkShape shape, Rng& init_rng);

  ArchVariant variant = ArchVariant::kAACC;
  Wiring wires;
  NetworkShape shape;
  ActionSpace actions;
  ContextNormalizer normalizer;
  int observation_dim = 0;
  int factor_dim = 0;
  int prev_action_dim = 0;

  Net actor;
  Head head;
  Net critic;
  std::optional<Net> actor_encoder;   // separate actor-side encoder
  std::optional<Net> critic_encoder;  // critic-side encoder (shared with the actor for RMA)

  const Net* actor_side_encoder() const;
  int actor_encoder_width() const;
  int critic_encoder_width() const;

  Vector prev_action_features(const Action& action) const;
  Vector actor_input(const Observation& obs, const Vector& raw_factors,
                     const Vector& prev_action) const;
  Vector critic_input(const Observation& obs, const Vector& raw_factors) const;
  Vector policy_output(const Observation& obs, const Vector& raw_factors,
                       const Vector& prev_action) const;
  Head::Sample act(const Observation& obs, const Vector& raw_factors, const Vector& prev_action,
                   Rng& rng) const;
  double value(const Observation& obs, const Vector& raw_factors) const;
  // Clips a sampled continuous action into the action bounds.
  Action to_env_action(const Vector& sampled) const;

  std::uint64_t fingerprint() const;
  std::uint64_t encoder_fingerprint() const;
};

struct Transition {
  Observation observation;
  Action action;
  double reward = 0.0;
  Observation next_observation;
  bool done = false;
  double log_prob = 0.0;  // under the acting policy
  Vector context;         // raw environmental factors e
  Vector prev_action;     // features of a_{t-1}; zeros at t = 0
};

struct EpisodeRecord {
  Context context;
  std::vector<Transition> steps;
  double total_reward = 0.0;
  bool terminated = false;
};

class RolloutBuffer {
 public:
  void add(EpisodeRecord episode);
  void clear();
  bool empty() const { return episodes_.empty(); }
  std::size_t num_steps() const { return num_steps_; }
  const std::vector<EpisodeRecord>& episodes() const { return episodes_; }
  // True when every step of every episode carries its episode's context.
  bool contexts_consistent() const;

 private:
  std::vector<EpisodeRecord> episodes_;
  std::size_t num_steps_ = 0;
};

// Whole episodes until at least `min_steps` transitions; a fresh context is
// drawn from `context_dist` at the start of each episode.
RolloutBuffer collect_rollouts(const Agent& agent, Environment& env,
                               const ContextSpec& context_dist, long min_steps, Rng& rng);

// Discounted reward-to-go within each episode, in buffer order.
Vector compute_returns(const RolloutBuffer& buffer, double gamma);

enum class AdvantageEstimator { kMonteCarlo, kGae };

struct TrainConfig {
  double gamma = 0.99;
  double clip = 0.2;
  int epochs = 30;
  int batch_size = 4000;  // env steps per iteration
  int minibatch_size = 0;  // 0: full batch
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  double lr_encoder = 5e-4;
  AdvantageEstimator advantage = AdvantageEstimator::kMonteCarlo;
  double gae_lambda = 0.95;
  double entropy_coef = 0.0;
  bool standardize_advantages = true;

  void validate() const;
};

/// Flattened training batch; columns are samples.
struct Batch {
  Matrix observations;
  Matrix factors;  // normalized
  Matrix prev_actions;
  Matrix actions;
  Vector log_probs_old;

  Eigen::Index size() const { return observations.cols(); }
  Batch select(const std::vector<Eigen::Index>& columns) const;
};

Batch make_batch(const RolloutBuffer& buffer, const Agent& agent);

Vector critic_values(const Agent& agent, const Matrix& observations, const Matrix& factors);

// Per-step advantages in buffer order: return minus critic baseline, or
// GAE(lambda), optionally standardized to zero mean and unit std.
Vector compute_advantages(const RolloutBuffer& buffer, const Agent& agent, const Vector& returns,
                          const TrainConfig& config);
Vector standardize(const Vector& x);

// min(r A, clip(r, 1-eps, 1+eps) A) for a single sample.
double clipped_surrogate_term(double ratio, double advantage, double clip);

struct SurrogateResult {
  double objective = 0.0;  // batch mean of the clipped terms (to be maximized)
  Vector objective_grad;   // d objective / d logp_new
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
};
SurrogateResult clipped_surrogate(const Vector& logp_new, const Vector& logp_old,
                                  const Vector& advantages, double clip);

// Gradient buffers aligned with an agent's parameters.
struct AgentGradients {
  Vector actor;
  Vector log_std;
  Vector critic;
  Vector actor_encoder;
  Vector critic_encoder;

  static AgentGradients zeros_like(const Agent& agent);
};

struct ActorLoss {
  double objective = 0.0;  // surrogate + entropy bonus
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
};

// Accumulates the gradient of the loss -objective into `grads`. Gradients
// reach the actor, the Gaussian log-std and any actor-side encoder only.
ActorLoss actor_loss_and_gradients(const Agent& agent, const Batch& batch,
                                   const Vector& advantages, double clip, double entropy_coef,
                                   AgentGradients& grads);

// Mean squared error of the critic against `targets`; accumulates gradients
// for the critic and, through the encoder slice of the critic input, the
// critic-side encoder.
double critic_loss_and_gradients(const Agent& agent, const Batch& batch, const Vector& targets,
                                 AgentGradients& grads);

struct IterationMetrics {
  int iteration = 0;
  long env_steps = 0;
  int episodes = 0;
  double mean_episode_return = 0.0;
  double actor_objective = 0.0;
  double critic_loss = 0.0;
  double first_epoch_mean_ratio = 1.0;
  double last_epoch_mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

class PpoTrainer {
 public:
  PpoTrainer(Agent agent, TrainConfig config);

  // Collect, compute targets, run the update epochs, empty the buffer.
  IterationMetrics train_iteration(Environment& env, const ContextSpec& train_dist, Rng& rng);
  // Update phase on an already collected buffer; the buffer is emptied.
  IterationMetrics update(RolloutBuffer& buffer, Rng& rng);

  const Agent& agent() const { return agent_; }
  Agent& agent() { return agent_; }
  TrainConfig& config() { return config_; }
  const TrainConfig& config() const { return config_; }
  long env_steps() const { return env_steps_; }
  int iterations() const { return iterations_; }

 private:
  void apply(const AgentGradients& grads, bool actor_side, bool critic_side);

  Agent agent_;
  TrainConfig config_;
  Adam<double> actor_opt_;
  Adam<double> log_std_opt_;
  Adam<double> critic_opt_;
  Adam<double> actor_encoder_opt_;
  Adam<double> critic_encoder_opt_;
  long env_steps_ = 0;
  int iterations_ = 0;
};

// Text checkpoint: header lines with format version, environment id,
// variant and layer widths, then every parameter as a shortest round-trip
// decimal, one per line.
void save_checkpoint(const Agent& agent, std::string_view env_id, std::ostream& out);
void save_checkpoint(const Agent& agent, std::string_view env_id,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  std::string env_id;
  Agent agent;
};
LoadedCheckpoint load_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aacc
