#pragma once

// Contextual MDP building blocks: environmental-factor schemas, context
// sampling and the episodic environment contract.

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aacc/types.hpp"

namespace aacc {

/// value = default * g with g ~ Normal(1, std).
struct GaussianMultiplicative {
  double std = 0.0;
};
struct Uniform {
  double low = 0.0;
  double high = 1.0;
};
struct TruncatedNormal {
  double mean = 0.0;
  double std = 1.0;
  double low = 0.0;
  double high = 0.0;
};
struct FiniteSet {
  std::vector<double> values;
};
struct Fixed {
  double value = 0.0;
};

using DistSpec =
    std::variant<GaussianMultiplicative, Uniform, TruncatedNormal, FiniteSet, Fixed>;

void validate(const DistSpec& dist);
std::string describe(const DistSpec& dist);

enum class FactorKind { kContinuous, kInteger };

struct FactorSpec {
  std::string name;
  double default_value = 0.0;
  double low = 0.0;
  double high = 0.0;
  FactorKind kind = FactorKind::kContinuous;
  DistSpec distribution = Fixed{};
};

struct Context {
  Vector values;

  bool operator==(const Context& other) const {
    return values.size() == other.values.size() && values == other.values;
  }
};

/// Ordered set of environmental factors. Construction validates the schema
/// and throws std::invalid_argument on violations.
class ContextSpec {
 public:
  ContextSpec() = default;
  explicit ContextSpec(std::vector<FactorSpec> factors);

  std::size_t size() const { return factors_.size(); }
  const std::vector<FactorSpec>& factors() const { return factors_; }
  const FactorSpec& factor(std::size_t i) const { return factors_.at(i); }
  std::size_t index_of(std::string_view name) const;

  Vector defaults() const;
  bool contains(const Context& ctx) const;

  // Replaces one factor's distribution. Bounded distributions whose support
  // leaves the factor bounds widen the bounds (shifted evaluation scenarios).
  ContextSpec with_distribution(std::string_view name, DistSpec dist) const;
  ContextSpec with_all_distributions(const DistSpec& dist) const;

  // Stable text identity of the distributions, recorded alongside results.
  std::string fingerprint() const;

 private:
  std::vector<FactorSpec> factors_;
};

Context sample_context(const ContextSpec& spec, Rng& rng);

/// Affine map of raw factors onto O(1) network features, fixed per schema:
/// (e - default) / scale with scale = half-width for finite bounds.
class ContextNormalizer {
 public:
  ContextNormalizer() = default;
  explicit ContextNormalizer(const ContextSpec& spec);

  Vector operator()(const Vector& raw) const;
  Matrix operator()(const Matrix& raw) const;
  Eigen::Index size() const { return center_.size(); }
  const Vector& center() const { return center_; }
  const Vector& scale() const { return scale_; }

 private:
  Vector center_;
  Vector scale_;
};

std::string format_context(const Context& ctx);

struct EpisodeOutcome {
  double total_reward = 0.0;
  int steps = 0;
  bool terminated_early = false;
};

enum class ActionKind { kDiscrete, kContinuous };

struct ActionSpace {
  ActionKind kind = ActionKind::kDiscrete;
  int size = 0;  // action count (discrete) or dimension (continuous)
  double low = -1.0;
  double high = 1.0;

  bool discrete() const { return kind == ActionKind::kDiscrete; }
  // Width of the action encoding used as a network input (one-hot for
  // discrete spaces).
  int feature_dim() const { return size; }
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool terminated = false;  // ended by the task, not by the horizon
};

/// Episodic environment whose dynamics are parameterized by a Context held
/// fixed from reset to the end of the episode.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view id() const = 0;
  virtual int observation_dim() const = 0;
  virtual ActionSpace action_space() const = 0;
  virtual int horizon() const = 0;
  // Canonical factor schema with the default training distribution.
  virtual const ContextSpec& context_spec() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  Observation reset(const Context& ctx, Rng& rng);
  StepResult step(const Action& action);

  // Mid-episode context swap; only the continuous-adaptation evaluation
  // uses this.
  void replace_context(const Context& ctx);

  const Context& context() const { return ctx_; }
  bool done() const { return done_; }
  bool started() const { return started_; }
  int steps() const { return steps_; }

 protected:
  virtual Observation do_reset(Rng& rng) = 0;
  virtual StepResult do_step(const Action& action) = 0;
  const Vector& factors() const { return ctx_.values; }

 private:
  void check_context(const Context& ctx) const;

  Context ctx_;
  int steps_ = 0;
  bool started_ = false;
  bool done_ = false;
};

EpisodeOutcome run_episode_with(Environment& env, const Context& ctx, Rng& rng,
                                const std::function<Action(const Observation&)>& policy);

}  // namespace aacc
