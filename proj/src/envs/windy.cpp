#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "aacc/envs.hpp"

namespace aacc::envs {

ContextSpec windy_context_spec() {
  const DistSpec u = Uniform{-30.0, 30.0};
  return ContextSpec({
      {"north_wind", 0.0, -30.0, 30.0, FactorKind::kContinuous, u},
      {"east_wind", 0.0, -30.0, 30.0, FactorKind::kContinuous, u},
      {"down_wind", 0.0, -30.0, 30.0, FactorKind::kContinuous, u},
  });
}

WindyState windy_dynamics(const WindyState& s, const Eigen::Vector3d& thrust,
                          const Eigen::Vector3d& wind) {
  const Eigen::Vector3d u = thrust.cwiseMax(-1.0).cwiseMin(1.0);
  WindyState n = s;
  n.velocity = s.velocity + (u * kWindyMaxAccel + kWindyDrag * (wind - s.velocity)) * kWindyDt;
  n.position = s.position + n.velocity * kWindyDt;
  return n;
}

double windy_heading_error(const WindyState& s) {
  const Eigen::Vector2d v_h = s.velocity.head<2>();
  const double along = v_h.dot(s.heading);
  return 0.5 * (1.0 - along / std::max(v_h.norm(), kWindyMinSpeed));
}

double windy_altitude_penalty(const WindyState& s) {
  const double dz = std::abs(s.position.z());
  return dz / (dz + kWindyAltitudeScale);
}

double windy_reward(const WindyState& s) {
  return -windy_heading_error(s) - windy_altitude_penalty(s);
}

WindyPointMass::WindyPointMass() : spec_(windy_context_spec()) {}

Observation WindyPointMass::observe() const {
  Observation o(6);
  o << state_.velocity / 10.0, std::clamp(state_.position.z() / 10.0, -3.0, 3.0),
      state_.heading;
  return o;
}

double WindyPointMass::mean_heading_error() const {
  return steps() > 0 ? heading_error_sum_ / steps() : 0.0;
}

Observation WindyPointMass::do_reset(Rng& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> vel(-1.0, 1.0);
  const double h = angle(rng);
  state_.position.setZero();
  state_.velocity = Eigen::Vector3d(vel(rng), vel(rng), vel(rng));
  state_.heading = Eigen::Vector2d(std::cos(h), std::sin(h));
  heading_error_sum_ = 0.0;
  return observe();
}

StepResult WindyPointMass::do_step(const Action& action) {
  if (action.size() != 3) throw std::invalid_argument("windy: thrust must be a 3-vector");
  const Eigen::Vector3d wind = factors().head<3>();
  state_ = windy_dynamics(state_, action.head<3>(), wind);
  StepResult r;
  const double heading_error = windy_heading_error(state_);
  heading_error_sum_ += heading_error;
  r.reward = -heading_error - windy_altitude_penalty(state_);
  r.observation = observe();
  return r;
}

// ---------------------------------------------------------------- registry

std::unique_ptr<Environment> make_environment(std::string_view id) {
  if (id == "cartpole") return std::make_unique<CartPole>();
  if (id == "acrobot") return std::make_unique<Acrobot>();
  if (id == "pendulum") return std::make_unique<Pendulum>();
  if (id == "windy") return std::make_unique<WindyPointMass>();
  throw std::invalid_argument("unknown environment id: " + std::string(id));
}

std::vector<std::string> environment_ids() { return {"acrobot", "cartpole", "pendulum", "windy"}; }

int default_encoder_dim(std::string_view id) {
  if (id == "acrobot") return 4;
  if (id == "cartpole") return 3;
  if (id == "pendulum") return 2;
  if (id == "windy") return 3;
  throw std::invalid_argument("unknown environment id: " + std::string(id));
}

}  // namespace aacc::envs
