#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "aacc/envs.hpp"

namespace aacc::envs {
namespace {

constexpr double kPi = std::numbers::pi;

Vector cartpole_defaults() { return cartpole_context_spec().defaults(); }

// Cart-pole equations of motion written as the coupled 2x2 system
//   (M + m) xdd + m l cos(th) thdd = F + m l thd^2 sin(th)
//   cos(th) xdd + (4/3) l thdd     = g sin(th)
// solved directly, then one explicit Euler step.
CartPoleState cartpole_oracle(const CartPoleState& s, double force, double g, double M, double m,
                              double l, double tau) {
  const double c = std::cos(s.pole_angle), sn = std::sin(s.pole_angle);
  Eigen::Matrix2d A;
  A << M + m, m * l * c, c, 4.0 / 3.0 * l;
  const Eigen::Vector2d b(force + m * l * s.pole_angular_velocity * s.pole_angular_velocity * sn,
                          g * sn);
  const Eigen::Vector2d acc = A.fullPivLu().solve(b);
  return {s.cart_position + tau * s.cart_velocity, s.cart_velocity + tau * acc(0),
          s.pole_angle + tau * s.pole_angular_velocity, s.pole_angular_velocity + tau * acc(1)};
}

// Two-link manipulator in mass-matrix form M(q) qdd + h(q, qd) + G(q) = (0, tau).
std::array<double, 4> acrobot_oracle_derivative(const std::array<double, 4>& y, double tau,
                                                const Vector& f) {
  const double lc1 = f(0), lc2 = f(1), l1 = f(2), m1 = f(4), m2 = f(5), I = f(6), g = 9.8;
  const double t1 = y[0], t2 = y[1], w1 = y[2], w2 = y[3];
  Eigen::Matrix2d M;
  M(0, 0) = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(t2)) + 2 * I;
  M(0, 1) = M(1, 0) = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + I;
  M(1, 1) = m2 * lc2 * lc2 + I;
  const Eigen::Vector2d h(-m2 * l1 * lc2 * std::sin(t2) * (2 * w1 * w2 + w2 * w2),
                          m2 * l1 * lc2 * std::sin(t2) * w1 * w1);
  const Eigen::Vector2d G((m1 * lc1 + m2 * l1) * g * std::sin(t1) + m2 * lc2 * g * std::sin(t1 + t2),
                          m2 * lc2 * g * std::sin(t1 + t2));
  const Eigen::Vector2d qdd = M.fullPivLu().solve(Eigen::Vector2d(0, tau) - h - G);
  return {w1, w2, qdd(0), qdd(1)};
}

// ---------------------------------------------------------------- CartPole

TEST(CartPole, SpacesAndFactors) {
  CartPole env;
  EXPECT_EQ(env.observation_dim(), 4);
  EXPECT_EQ(env.action_space().size, 2);
  EXPECT_TRUE(env.action_space().discrete());
  EXPECT_EQ(env.horizon(), 500);
  EXPECT_EQ(env.context_spec().size(), 6u);
  EXPECT_EQ(env.context_spec().factor(0).kind, FactorKind::kInteger);
}

TEST(CartPole, UprightRestIsFixedPointWithoutForce) {
  const CartPoleState s{};
  const auto n = cartpole_step_with_force(s, 0.0, cartpole_defaults());
  EXPECT_EQ(n.cart_position, 0.0);
  EXPECT_EQ(n.cart_velocity, 0.0);
  EXPECT_EQ(n.pole_angle, 0.0);
  EXPECT_EQ(n.pole_angular_velocity, 0.0);
}

TEST(CartPole, PushFromRestTipsPoleAgainstForce) {
  // Explicit Euler: the first step changes only velocities; the pole's
  // angular velocity opposes the push, so the angle follows on step two.
  for (int action : {0, 1}) {
    const double dir = action == 1 ? 1.0 : -1.0;
    const auto s1 = cartpole_dynamics(CartPoleState{}, action, cartpole_defaults());
    EXPECT_EQ(s1.pole_angle, 0.0);
    EXPECT_LT(dir * s1.pole_angular_velocity, 0.0);
    EXPECT_GT(dir * s1.cart_velocity, 0.0);
    const auto s2 = cartpole_dynamics(s1, action, cartpole_defaults());
    EXPECT_LT(dir * s2.pole_angle, 0.0);
  }
}

TEST(CartPole, MatchesCoupledEquationOracle) {
  const CartPoleState s{0.0, 0.0, 0.01, 0.0};
  const auto got = cartpole_dynamics(s, 1, cartpole_defaults());
  const auto want = cartpole_oracle(s, 10.0, 9.8, 1.0, 0.1, 0.5, 0.02);
  EXPECT_NEAR(got.cart_position, want.cart_position, 1e-12);
  EXPECT_NEAR(got.cart_velocity, want.cart_velocity, 1e-12);
  EXPECT_NEAR(got.pole_angle, want.pole_angle, 1e-12);
  EXPECT_NEAR(got.pole_angular_velocity, want.pole_angular_velocity, 1e-12);

  Rng rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int i = 0; i < 200; ++i) {
    const Context ctx = sample_context(cartpole_context_spec(), rng);
    const Vector& f = ctx.values;
    const CartPoleState r{u(rng), u(rng), u(rng), u(rng)};
    const auto a = cartpole_dynamics(r, i % 2, f);
    const auto b = cartpole_oracle(r, i % 2 ? f(0) : -f(0), f(1), f(2), f(3), f(4), f(5));
    EXPECT_NEAR(a.cart_velocity, b.cart_velocity, 1e-9 * (1 + std::abs(b.cart_velocity)));
    EXPECT_NEAR(a.pole_angular_velocity, b.pole_angular_velocity,
                1e-9 * (1 + std::abs(b.pole_angular_velocity)));
    EXPECT_DOUBLE_EQ(a.cart_position, b.cart_position);
    EXPECT_DOUBLE_EQ(a.pole_angle, b.pole_angle);
  }
}

TEST(CartPole, GravityChangesNextState) {
  const CartPoleState s{0.0, 0.0, 0.05, 0.0};
  Vector f = cartpole_defaults();
  const auto a = cartpole_dynamics(s, 1, f);
  f(1) = 2.0 * 9.8;
  const auto b = cartpole_dynamics(s, 1, f);
  EXPECT_NE(a.pole_angular_velocity, b.pole_angular_velocity);
  const auto oracle = cartpole_oracle(s, 10.0, 19.6, 1.0, 0.1, 0.5, 0.02);
  EXPECT_NEAR(b.pole_angular_velocity, oracle.pole_angular_velocity, 1e-12);
}

TEST(CartPole, TerminationLimitsAndRewards) {
  EXPECT_TRUE(cartpole_failed({2.41, 0, 0, 0}));
  EXPECT_TRUE(cartpole_failed({0, 0, 12.01 * kPi / 180.0, 0}));
  EXPECT_FALSE(cartpole_failed({2.39, 0, 11.9 * kPi / 180.0, 0}));
  CartPole env;
  Rng rng(3);
  env.reset(Context{cartpole_defaults()}, rng);
  double total = 0.0;
  while (!env.done()) {
    const auto r = env.step(Vector::Constant(1, 1.0));
    EXPECT_TRUE(r.reward == 0.0 || r.reward == 1.0);
    if (r.terminated) EXPECT_EQ(r.reward, 0.0);
    total += r.reward;
  }
  EXPECT_LT(env.steps(), 500);
  EXPECT_EQ(total, env.steps() - 1);
}

TEST(CartPole, ResetNoiseWithinFiveHundredths) {
  CartPole env;
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const auto o = env.reset(Context{cartpole_defaults()}, rng);
    EXPECT_LE(o.cwiseAbs().maxCoeff(), 0.05);
  }
}

// ----------------------------------------------------------------- Acrobot

TEST(Acrobot, SpacesAndFactors) {
  Acrobot env;
  EXPECT_EQ(env.observation_dim(), 6);
  EXPECT_EQ(env.action_space().size, 3);
  EXPECT_EQ(env.context_spec().size(), 7u);
}

TEST(Acrobot, HangingRestIsEquilibrium) {
  const auto n = acrobot_dynamics(AcrobotState{}, 1, acrobot_context_spec().defaults());
  EXPECT_NEAR(n.theta1, 0.0, 1e-15);
  EXPECT_NEAR(n.theta2, 0.0, 1e-15);
  EXPECT_NEAR(n.dtheta1, 0.0, 1e-15);
  EXPECT_NEAR(n.dtheta2, 0.0, 1e-15);
}

TEST(Acrobot, DerivativesMatchMassMatrixForm) {
  Rng rng(4);
  std::uniform_real_distribution<double> ang(-kPi, kPi), vel(-5, 5);
  for (int i = 0; i < 500; ++i) {
    const Vector f = sample_context(acrobot_context_spec(), rng).values;
    const std::array<double, 4> y{ang(rng), ang(rng), vel(rng), vel(rng)};
    const double tau = static_cast<double>(i % 3) - 1.0;
    const auto a = acrobot_derivatives(y, tau, f);
    const auto b = acrobot_oracle_derivative(y, tau, f);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], 1e-9 * (1 + std::abs(b[k])));
  }
}

TEST(Acrobot, Rk4StepMatchesFineEuler) {
  Rng rng(12);
  std::uniform_real_distribution<double> ang(-1.0, 1.0), vel(-1.0, 1.0);
  const Vector f = acrobot_context_spec().defaults();
  for (int trial = 0; trial < 5; ++trial) {
    const AcrobotState s{ang(rng), ang(rng), vel(rng), vel(rng)};
    const double tau = static_cast<double>(trial % 3) - 1.0;
    const auto rk4 = acrobot_integrate(s, tau, f);
    std::array<double, 4> y{s.theta1, s.theta2, s.dtheta1, s.dtheta2};
    const double h = 1e-5;
    const int n = static_cast<int>(std::lround(kAcrobotDt / h));
    for (int i = 0; i < n; ++i) {
      const auto d = acrobot_oracle_derivative(y, tau, f);
      for (int k = 0; k < 4; ++k) y[k] += h * d[k];
    }
    EXPECT_NEAR(rk4.theta1, y[0], 1e-4);
    EXPECT_NEAR(rk4.theta2, y[1], 1e-4);
    EXPECT_NEAR(rk4.dtheta1, y[2], 1e-4);
    EXPECT_NEAR(rk4.dtheta2, y[3], 1e-4);
  }
}

TEST(Acrobot, StiffContextStaysFinite) {
  Vector f(7);
  f << 0.363969, 1.0, 2.02969, 2.38571, 0.985489, 2.90361, 0.1;
  Rng rng(1);
  std::uniform_real_distribution<double> ang(-kPi, kPi), v1(-4 * kPi, 4 * kPi), v2(-9 * kPi, 9 * kPi);
  for (int i = 0; i < 2000; ++i) {
    const auto n = acrobot_dynamics({ang(rng), ang(rng), v1(rng), v2(rng)}, i % 3, f);
    ASSERT_TRUE(std::isfinite(n.theta1) && std::isfinite(n.theta2) && std::isfinite(n.dtheta1) &&
                std::isfinite(n.dtheta2));
  }
}

TEST(Acrobot, HeavierSecondLinkChangesNextState) {
  const AcrobotState s{0.3, -0.2, 0.1, 0.0};
  Vector f = acrobot_context_spec().defaults();
  const auto a = acrobot_dynamics(s, 2, f);
  f(5) *= 2.0;
  const auto b = acrobot_dynamics(s, 2, f);
  EXPECT_NE(a.dtheta1, b.dtheta1);
  EXPECT_NE(a.dtheta2, b.dtheta2);
}

TEST(Acrobot, WrapsAnglesClipsVelocitiesAndRewards) {
  Rng rng(6);
  std::uniform_real_distribution<double> ang(-kPi, kPi), vel(-20, 20);
  for (int i = 0; i < 300; ++i) {
    const Vector f = sample_context(acrobot_context_spec(), rng).values;
    const auto n = acrobot_dynamics({ang(rng), ang(rng), vel(rng), vel(rng)}, i % 3, f);
    EXPECT_LE(std::abs(n.theta1), kPi);
    EXPECT_LE(std::abs(n.theta2), kPi);
    EXPECT_LE(std::abs(n.dtheta1), 4 * kPi);
    EXPECT_LE(std::abs(n.dtheta2), 9 * kPi);
  }
  EXPECT_TRUE(acrobot_reached_goal({kPi, 0, 0, 0}));
  EXPECT_FALSE(acrobot_reached_goal({0, 0, 0, 0}));
  Acrobot env;
  env.reset(Context{acrobot_context_spec().defaults()}, rng);
  while (!env.done()) {
    const auto r = env.step(Vector::Constant(1, static_cast<double>(env.steps() % 3)));
    EXPECT_TRUE(r.reward == -1.0 || r.reward == 0.0);
  }
}

// ---------------------------------------------------------------- Pendulum

TEST(Pendulum, SpacesAndFactors) {
  Pendulum env;
  EXPECT_EQ(env.observation_dim(), 3);
  EXPECT_FALSE(env.action_space().discrete());
  EXPECT_EQ(env.action_space().size, 1);
  EXPECT_EQ(env.horizon(), 200);
}

TEST(Pendulum, UprightRestHasZeroRewardAndStays) {
  const PendulumState s{};
  EXPECT_EQ(pendulum_reward(s, 0.0), 0.0);
  const auto n = pendulum_dynamics(s, 0.0, pendulum_context_spec().defaults());
  EXPECT_EQ(n.angle, 0.0);
  EXPECT_EQ(n.angular_velocity, 0.0);
}

TEST(Pendulum, NoGravityNoRestoringForce) {
  Vector f = pendulum_context_spec().defaults();
  f(1) = 0.0;
  for (double a : {-2.0, 0.4, 1.3, 3.0}) {
    const auto n = pendulum_dynamics({a, 0.0}, 0.0, f);
    EXPECT_EQ(n.angular_velocity, 0.0);
    EXPECT_EQ(n.angle, a);
  }
}

TEST(Pendulum, QuarterAngleUnitTorqueMatchesHandUpdate) {
  const auto n = pendulum_dynamics({kPi / 4.0, 0.0}, 1.0, pendulum_context_spec().defaults());
  const double omega = (3.0 * 10.0 / 2.0 * std::sin(kPi / 4.0) + 3.0 * 1.0) * 0.05;
  EXPECT_NEAR(n.angular_velocity, 0.6803300858899106, 1e-15);
  EXPECT_NEAR(n.angular_velocity, omega, 1e-15);
  EXPECT_NEAR(n.angle, kPi / 4.0 + 0.05 * omega, 1e-15);
  const double r = pendulum_reward({kPi / 4.0, 0.0}, 1.0);
  EXPECT_NEAR(r, -(kPi * kPi / 16.0 + 0.001), 1e-15);
}

TEST(Pendulum, TorqueAndSpeedClipping) {
  const Vector f = pendulum_context_spec().defaults();
  const auto a = pendulum_dynamics({0.3, 0.0}, 5.0, f);
  const auto b = pendulum_dynamics({0.3, 0.0}, 2.0, f);
  EXPECT_EQ(a.angular_velocity, b.angular_velocity);
  const auto c = pendulum_dynamics({1.5, 7.9}, 2.0, f);
  EXPECT_EQ(c.angular_velocity, 8.0);
  EXPECT_DOUBLE_EQ(wrap_angle(3 * kPi / 2), -kPi / 2);
}

TEST(Pendulum, RewardBounds) {
  const double lower = -(kPi * kPi + 0.1 * 64.0 + 0.001 * 4.0);
  Pendulum env;
  Rng rng(21);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int ep = 0; ep < 20; ++ep) {
    env.reset(sample_context(env.context_spec(), rng), rng);
    while (!env.done()) {
      const auto r = env.step(Vector::Constant(1, u(rng)));
      EXPECT_LE(r.reward, 0.0);
      EXPECT_GE(r.reward, lower);
    }
  }
}

// ----------------------------------------------------------- WindyPointMass

TEST(Windy, RestWithoutWindStaysPut) {
  WindyState s;
  const auto n = windy_dynamics(s, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero());
  EXPECT_EQ(n.position, s.position);
  EXPECT_EQ(n.velocity, s.velocity);
}

TEST(Windy, MovingWithTheWindHasNoDrag) {
  WindyState s;
  s.velocity = Eigen::Vector3d(7.0, 0.0, 0.0);
  const auto n = windy_dynamics(s, Eigen::Vector3d::Zero(), Eigen::Vector3d(7.0, 0.0, 0.0));
  EXPECT_EQ(n.velocity, s.velocity);
}

TEST(Windy, OneStepUnderWindMatchesFormula) {
  WindyState s;
  s.position = Eigen::Vector3d(1.0, -2.0, 0.5);
  s.velocity = Eigen::Vector3d(3.0, 1.0, -0.5);
  s.heading = Eigen::Vector2d(0.6, 0.8);
  const Eigen::Vector3d thrust(0.5, -2.0, 0.25);  // second component clips to -1
  const auto n = windy_dynamics(s, thrust, Eigen::Vector3d(10.0, -5.0, 3.0));
  const double vx = 3.0 + (0.5 * 2.0 + 0.15 * (10.0 - 3.0)) * 0.1;
  const double vy = 1.0 + (-1.0 * 2.0 + 0.15 * (-5.0 - 1.0)) * 0.1;
  const double vz = -0.5 + (0.25 * 2.0 + 0.15 * (3.0 + 0.5)) * 0.1;
  EXPECT_NEAR(n.velocity.x(), vx, 1e-15);
  EXPECT_NEAR(n.velocity.y(), vy, 1e-15);
  EXPECT_NEAR(n.velocity.z(), vz, 1e-15);
  EXPECT_NEAR(n.position.x(), 1.0 + 0.1 * vx, 1e-15);
  EXPECT_NEAR(n.position.y(), -2.0 + 0.1 * vy, 1e-15);
  EXPECT_NEAR(n.position.z(), 0.5 + 0.1 * vz, 1e-15);
  const double speed = std::hypot(vx, vy);
  const double err = 0.5 * (1.0 - (0.6 * vx + 0.8 * vy) / std::max(speed, 1.0));
  EXPECT_NEAR(windy_heading_error(n), err, 1e-15);
  const double dz = std::abs(n.position.z());
  EXPECT_NEAR(windy_reward(n), -err - dz / (dz + 100.0), 1e-15);
}

TEST(Windy, HeadingErrorRange) {
  WindyState s;
  s.heading = Eigen::Vector2d(1, 0);
  s.velocity = Eigen::Vector3d(5, 0, 0);
  EXPECT_DOUBLE_EQ(windy_heading_error(s), 0.0);
  s.velocity = Eigen::Vector3d(-5, 0, 0);
  EXPECT_DOUBLE_EQ(windy_heading_error(s), 1.0);
  s.velocity = Eigen::Vector3d::Zero();
  EXPECT_DOUBLE_EQ(windy_heading_error(s), 0.5);
}

TEST(Windy, AltitudePenaltyBoundedAndStrictlyIncreasing) {
  WindyState s;
  EXPECT_EQ(windy_altitude_penalty(s), 0.0);
  s.position.z() = -100.0;
  EXPECT_DOUBLE_EQ(windy_altitude_penalty(s), 0.5);
  s.position.z() = 25.0;
  EXPECT_DOUBLE_EQ(windy_altitude_penalty(s), 0.2);
  double prev = 0.2;
  for (double z : {50.0, 200.0, 1000.0, 1e6}) {
    s.position.z() = z;
    const double p = windy_altitude_penalty(s);
    EXPECT_GT(p, prev);
    EXPECT_LT(p, 1.0);
    prev = p;
  }
}

TEST(Windy, EpisodeTracksMeanHeadingError) {
  WindyPointMass env;
  Rng rng(2);
  env.reset(sample_context(env.context_spec(), rng), rng);
  double sum = 0.0;
  while (!env.done()) {
    env.step(Vector::Zero(3));
    sum += windy_heading_error(env.state());
  }
  EXPECT_EQ(env.steps(), 300);
  EXPECT_NEAR(env.mean_heading_error(), sum / 300.0, 1e-12);
}

TEST(Registry, IdsDimensionsAndEncoderWidths) {
  EXPECT_EQ(make_environment("acrobot")->observation_dim(), 6);
  EXPECT_EQ(make_environment("cartpole")->observation_dim(), 4);
  EXPECT_EQ(make_environment("pendulum")->observation_dim(), 3);
  EXPECT_EQ(make_environment("windy")->observation_dim(), 6);
  EXPECT_EQ(default_encoder_dim("acrobot"), 4);
  EXPECT_EQ(default_encoder_dim("cartpole"), 3);
  EXPECT_EQ(default_encoder_dim("pendulum"), 2);
  EXPECT_THROW(make_environment("hopper"), std::invalid_argument);
  for (const auto& id : environment_ids()) EXPECT_EQ(make_environment(id)->id(), id);
}

TEST(Environment, StepIsDeterministicGivenStateActionContext) {
  for (const auto& id : environment_ids()) {
    auto env = make_environment(id);
    Rng rng(31);
    const Context ctx = sample_context(env->context_spec(), rng);
    env->reset(ctx, rng);
    for (int i = 0; i < 5; ++i) env->step(env->action_space().discrete() ? Vector::Zero(1)
                                                                       : Vector::Constant(env->action_space().size, 0.3));
    auto copy = env->clone();
    const Action a = env->action_space().discrete() ? Vector::Constant(1, 1.0)
                                                    : Vector::Constant(env->action_space().size, -0.7);
    const auto r1 = env->step(a);
    const auto r2 = copy->step(a);
    EXPECT_EQ(r1.observation, r2.observation) << id;
    EXPECT_EQ(r1.reward, r2.reward) << id;
  }
}

}  // namespace
}  // namespace aacc::envs
