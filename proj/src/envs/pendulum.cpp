#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aacc/envs.hpp"

namespace aacc::envs {

ContextSpec pendulum_context_spec() {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const DistSpec g = GaussianMultiplicative{0.1};
  return ContextSpec({
      {"dt", 0.05, 0.0, kInf, FactorKind::kContinuous, g},
      {"g", 10.0, 0.0, kInf, FactorKind::kContinuous, g},
      {"l", 1.0, 1e-6, kInf, FactorKind::kContinuous, g},
      {"m", 1.0, 1e-6, kInf, FactorKind::kContinuous, g},
  });
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(angle + pi, 2.0 * pi);
  if (a < 0.0) a += 2.0 * pi;
  return a - pi;
}

double pendulum_reward(const PendulumState& s, double torque) {
  const double u = std::clamp(torque, -kPendulumMaxTorque, kPendulumMaxTorque);
  const double th = wrap_angle(s.angle);
  return -(th * th + 0.1 * s.angular_velocity * s.angular_velocity + 0.001 * u * u);
}

PendulumState pendulum_dynamics(const PendulumState& s, double torque, const Vector& factors) {
  const double dt = factors(0);
  const double g = factors(1);
  const double l = factors(2);
  const double m = factors(3);
  const double u = std::clamp(torque, -kPendulumMaxTorque, kPendulumMaxTorque);

  PendulumState n;
  n.angular_velocity =
      s.angular_velocity + (3.0 * g / (2.0 * l) * std::sin(s.angle) + 3.0 / (m * l * l) * u) * dt;
  n.angular_velocity = std::clamp(n.angular_velocity, -kPendulumMaxSpeed, kPendulumMaxSpeed);
  n.angle = s.angle + n.angular_velocity * dt;
  return n;
}

Pendulum::Pendulum() : spec_(pendulum_context_spec()) {}

namespace {
Observation pendulum_obs(const PendulumState& s) {
  Observation o(3);
  o << std::cos(s.angle), std::sin(s.angle), s.angular_velocity;
  return o;
}
}  // namespace

Observation Pendulum::do_reset(Rng& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> vel(-1.0, 1.0);
  state_.angle = angle(rng);
  state_.angular_velocity = vel(rng);
  return pendulum_obs(state_);
}

StepResult Pendulum::do_step(const Action& action) {
  const double torque = action(0);
  StepResult r;
  r.reward = pendulum_reward(state_, torque);
  state_ = pendulum_dynamics(state_, torque, factors());
  r.observation = pendulum_obs(state_);
  return r;
}

}  // namespace aacc::envs
