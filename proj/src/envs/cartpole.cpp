#include <cmath>
#include <limits>

#include "aacc/envs.hpp"

namespace aacc::envs {

ContextSpec cartpole_context_spec() {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const DistSpec g = GaussianMultiplicative{0.5};
  return ContextSpec({
      {"force_magnifier", 10.0, 1.0, 100.0, FactorKind::kInteger, g},
      {"gravity", 9.8, 0.1, kInf, FactorKind::kContinuous, g},
      {"masscart", 1.0, 0.1, 10.0, FactorKind::kContinuous, g},
      {"masspole", 0.1, 0.01, 1.0, FactorKind::kContinuous, g},
      {"pole_length", 0.5, 0.05, 5.0, FactorKind::kContinuous, g},
      {"update_interval", 0.02, 0.002, 0.2, FactorKind::kContinuous, g},
  });
}

CartPoleState cartpole_step_with_force(const CartPoleState& s, double force,
                                       const Vector& factors) {
  const double gravity = factors(1);
  const double masscart = factors(2);
  const double masspole = factors(3);
  const double length = factors(4);
  const double tau = factors(5);

  const double total_mass = masspole + masscart;
  const double polemass_length = masspole * length;
  const double cos_t = std::cos(s.pole_angle);
  const double sin_t = std::sin(s.pole_angle);

  const double temp =
      (force + polemass_length * s.pole_angular_velocity * s.pole_angular_velocity * sin_t) /
      total_mass;
  const double theta_acc = (gravity * sin_t - cos_t * temp) /
                           (length * (4.0 / 3.0 - masspole * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

  CartPoleState next;
  next.cart_position = s.cart_position + tau * s.cart_velocity;
  next.cart_velocity = s.cart_velocity + tau * x_acc;
  next.pole_angle = s.pole_angle + tau * s.pole_angular_velocity;
  next.pole_angular_velocity = s.pole_angular_velocity + tau * theta_acc;
  return next;
}

CartPoleState cartpole_dynamics(const CartPoleState& s, int action, const Vector& factors) {
  const double force = action == 1 ? factors(0) : -factors(0);
  return cartpole_step_with_force(s, force, factors);
}

bool cartpole_failed(const CartPoleState& s) {
  return std::abs(s.cart_position) > kCartPolePositionLimit ||
         std::abs(s.pole_angle) > kCartPoleAngleLimit;
}

CartPole::CartPole() : spec_(cartpole_context_spec()) {}

namespace {
Observation cartpole_obs(const CartPoleState& s) {
  Observation o(4);
  o << s.cart_position, s.cart_velocity, s.pole_angle, s.pole_angular_velocity;
  return o;
}
}  // namespace

Observation CartPole::do_reset(Rng& rng) {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  state_.cart_position = u(rng);
  state_.cart_velocity = u(rng);
  state_.pole_angle = u(rng);
  state_.pole_angular_velocity = u(rng);
  return cartpole_obs(state_);
}

StepResult CartPole::do_step(const Action& action) {
  const int a = static_cast<int>(action(0));
  state_ = cartpole_dynamics(state_, a, factors());
  StepResult r;
  r.terminated = cartpole_failed(state_);
  r.reward = r.terminated ? 0.0 : 1.0;
  r.observation = cartpole_obs(state_);
  return r;
}

}  // namespace aacc::envs
