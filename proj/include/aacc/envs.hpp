#pragma once

// Contextual classic-control tasks plus a windy point-mass flight task.
// Dynamics are exposed as free functions of (state, action, factors) so they
// can be checked independently of the episodic wrappers.

#include <Eigen/Core>

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aacc/cmdp.hpp"

namespace aacc::envs {

// ---------------------------------------------------------------- CartPole

struct CartPoleState {
  double cart_position = 0.0;
  double cart_velocity = 0.0;
  double pole_angle = 0.0;
  double pole_angular_velocity = 0.0;
};

inline constexpr double kCartPoleAngleLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
inline constexpr double kCartPolePositionLimit = 2.4;

// Factor order: force_magnifier, gravity, masscart, masspole, pole_length
// (half length), update_interval.
ContextSpec cartpole_context_spec();

// Explicit Euler step under an arbitrary horizontal force.
CartPoleState cartpole_step_with_force(const CartPoleState& s, double force,
                                       const Vector& factors);
// action 1 pushes right with +force_magnifier, action 0 pushes left.
CartPoleState cartpole_dynamics(const CartPoleState& s, int action, const Vector& factors);
bool cartpole_failed(const CartPoleState& s);

class CartPole final : public Environment {
 public:
  CartPole();
  std::string_view id() const override { return "cartpole"; }
  int observation_dim() const override { return 4; }
  ActionSpace action_space() const override { return {ActionKind::kDiscrete, 2}; }
  int horizon() const override { return 500; }
  const ContextSpec& context_spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<CartPole>(*this);
  }
  const CartPoleState& state() const { return state_; }

 protected:
  Observation do_reset(Rng& rng) override;
  StepResult do_step(const Action& action) override;

 private:
  ContextSpec spec_;
  CartPoleState state_;
};

// ----------------------------------------------------------------- Acrobot

struct AcrobotState {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double dtheta1 = 0.0;
  double dtheta2 = 0.0;
};

inline constexpr double kAcrobotDt = 0.2;
inline constexpr int kAcrobotRk4Substeps = 4;
inline constexpr int kAcrobotMaxHalvings = 16;
inline constexpr double kAcrobotGravity = 9.8;
inline constexpr double kAcrobotMaxVel1 = 4.0 * 3.14159265358979323846;
inline constexpr double kAcrobotMaxVel2 = 9.0 * 3.14159265358979323846;

// Factor order: link_com_1, link_com_2, link_length_1, link_length_2,
// link_mass_1, link_mass_2, link_moi.
ContextSpec acrobot_context_spec();

// Time derivative of (theta1, theta2, dtheta1, dtheta2) under torque at the
// second joint.
std::array<double, 4> acrobot_derivatives(const std::array<double, 4>& y, double torque,
                                          const Vector& factors);
// Advances kAcrobotDt with kAcrobotRk4Substeps RK4 substeps (halved where
// a substep diverges), without wrapping or clipping.
AcrobotState acrobot_integrate(const AcrobotState& s, double torque, const Vector& factors);
// Full environment transition: RK4, angle wrap to [-pi, pi], velocity clip.
// action in {0, 1, 2} maps to torque {-1, 0, +1}.
AcrobotState acrobot_dynamics(const AcrobotState& s, int action, const Vector& factors);
bool acrobot_reached_goal(const AcrobotState& s);

class Acrobot final : public Environment {
 public:
  Acrobot();
  std::string_view id() const override { return "acrobot"; }
  int observation_dim() const override { return 6; }
  ActionSpace action_space() const override { return {ActionKind::kDiscrete, 3}; }
  int horizon() const override { return 500; }
  const ContextSpec& context_spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<Acrobot>(*this);
  }
  const AcrobotState& state() const { return state_; }

 protected:
  Observation do_reset(Rng& rng) override;
  StepResult do_step(const Action& action) override;

 private:
  ContextSpec spec_;
  AcrobotState state_;
};

// ---------------------------------------------------------------- Pendulum

struct PendulumState {
  double angle = 0.0;  // 0 is upright
  double angular_velocity = 0.0;
};

inline constexpr double kPendulumMaxTorque = 2.0;
inline constexpr double kPendulumMaxSpeed = 8.0;

// Factor order: dt, g, l, m.
ContextSpec pendulum_context_spec();

double wrap_angle(double angle);
// Reward of applying `torque` (clipped) in state `s`.
double pendulum_reward(const PendulumState& s, double torque);
PendulumState pendulum_dynamics(const PendulumState& s, double torque, const Vector& factors);

class Pendulum final : public Environment {
 public:
  Pendulum();
  std::string_view id() const override { return "pendulum"; }
  int observation_dim() const override { return 3; }
  ActionSpace action_space() const override {
    return {ActionKind::kContinuous, 1, -kPendulumMaxTorque, kPendulumMaxTorque};
  }
  int horizon() const override { return 200; }
  const ContextSpec& context_spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<Pendulum>(*this);
  }
  const PendulumState& state() const { return state_; }

 protected:
  Observation do_reset(Rng& rng) override;
  StepResult do_step(const Action& action) override;

 private:
  ContextSpec spec_;
  PendulumState state_;
};

// ----------------------------------------------------------- WindyPointMass

// North-east-down frame. The craft should fly along a horizontal heading
// while holding altitude zero against a constant wind.
struct WindyState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector2d heading = Eigen::Vector2d(1.0, 0.0);  // unit (north, east)
};

inline constexpr double kWindyMaxAccel = 2.0;     // m/s^2 at full thrust
inline constexpr double kWindyDrag = 0.15;        // 1/s
inline constexpr double kWindyDt = 0.1;           // s
inline constexpr double kWindyMinSpeed = 1.0;     // m/s, heading term reference
inline constexpr double kWindyAltitudeScale = 100.0;  // m of deviation for half penalty

// Factor order: north_wind, east_wind, down_wind.
ContextSpec windy_context_spec();

WindyState windy_dynamics(const WindyState& s, const Eigen::Vector3d& thrust,
                          const Eigen::Vector3d& wind);
// In [0, 1]: 0 when flying along the heading, 0.5 when hovering, 1 when
// flying against it.
double windy_heading_error(const WindyState& s);
// |z| / (|z| + scale): in [0, 1) and strictly increasing, so drifting further
// always costs more.
double windy_altitude_penalty(const WindyState& s);
double windy_reward(const WindyState& s);

class WindyPointMass final : public Environment {
 public:
  WindyPointMass();
  std::string_view id() const override { return "windy"; }
  int observation_dim() const override { return 6; }
  ActionSpace action_space() const override { return {ActionKind::kContinuous, 3, -1.0, 1.0}; }
  int horizon() const override { return 300; }
  const ContextSpec& context_spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<WindyPointMass>(*this);
  }
  const WindyState& state() const { return state_; }
  // Mean heading error over the steps taken so far in this episode.
  double mean_heading_error() const;

 protected:
  Observation do_reset(Rng& rng) override;
  StepResult do_step(const Action& action) override;

 private:
  Observation observe() const;

  ContextSpec spec_;
  WindyState state_;
  double heading_error_sum_ = 0.0;
};

// ---------------------------------------------------------------- registry

std::unique_ptr<Environment> make_environment(std::string_view id);
std::vector<std::string> environment_ids();
// Encoder output width per environment.
int default_encoder_dim(std::string_view id);

}  // namespace aacc::envs
