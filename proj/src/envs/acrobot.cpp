#include <algorithm>
#include <cmath>
#include <numbers>

#include "aacc/envs.hpp"

namespace aacc::envs {

ContextSpec acrobot_context_spec() {
  const DistSpec g = GaussianMultiplicative{2.0};
  return ContextSpec({
      {"link_com_1", 0.5, 0.0, 1.0, FactorKind::kContinuous, g},
      {"link_com_2", 0.5, 0.0, 1.0, FactorKind::kContinuous, g},
      {"link_length_1", 1.0, 0.1, 10.0, FactorKind::kContinuous, g},
      {"link_length_2", 1.0, 0.1, 10.0, FactorKind::kContinuous, g},
      {"link_mass_1", 1.0, 0.1, 10.0, FactorKind::kContinuous, g},
      {"link_mass_2", 1.0, 0.1, 10.0, FactorKind::kContinuous, g},
      {"link_moi", 1.0, 0.1, 10.0, FactorKind::kContinuous, g},
  });
}

std::array<double, 4> acrobot_derivatives(const std::array<double, 4>& y, double torque,
                                          const Vector& factors) {
  const double lc1 = factors(0);
  const double lc2 = factors(1);
  const double l1 = factors(2);
  const double m1 = factors(4);
  const double m2 = factors(5);
  const double moi = factors(6);
  const double g = kAcrobotGravity;
  const double pi = std::numbers::pi;

  const auto [theta1, theta2, dtheta1, dtheta2] = y;
  const double d1 = m1 * lc1 * lc1 +
                    m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + moi + moi;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + moi;
  const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - pi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                      2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - pi / 2.0) + phi2;
  const double ddtheta2 =
      (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
      (m2 * lc2 * lc2 + moi - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

namespace {

using AcrobotY = std::array<double, 4>;

AcrobotY rk4_step(const AcrobotY& y, double h, double torque, const Vector& factors) {
  auto axpy = [](const AcrobotY& a, double s, const AcrobotY& k) {
    return AcrobotY{a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2], a[3] + s * k[3]};
  };
  const AcrobotY k1 = acrobot_derivatives(y, torque, factors);
  const AcrobotY k2 = acrobot_derivatives(axpy(y, h / 2.0, k1), torque, factors);
  const AcrobotY k3 = acrobot_derivatives(axpy(y, h / 2.0, k2), torque, factors);
  const AcrobotY k4 = acrobot_derivatives(axpy(y, h, k3), torque, factors);
  AcrobotY out;
  for (int i = 0; i < 4; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Stiff contexts (light links, tiny inertia) can make a fixed substep
// diverge; such substeps are halved until the velocity jump stays within
// the velocity limits.
AcrobotY advance(const AcrobotY& y, double h, double torque, const Vector& factors, int depth) {
  const AcrobotY next = rk4_step(y, h, torque, factors);
  const bool ok = std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); }) &&
                  std::abs(next[2] - y[2]) <= kAcrobotMaxVel1 &&
                  std::abs(next[3] - y[3]) <= kAcrobotMaxVel2;
  if (ok || depth >= kAcrobotMaxHalvings) return next;
  const AcrobotY mid = advance(y, h / 2.0, torque, factors, depth + 1);
  return advance(mid, h / 2.0, torque, factors, depth + 1);
}

}  // namespace

AcrobotState acrobot_integrate(const AcrobotState& s, double torque, const Vector& factors) {
  const double h = kAcrobotDt / kAcrobotRk4Substeps;
  AcrobotY y{s.theta1, s.theta2, s.dtheta1, s.dtheta2};
  for (int sub = 0; sub < kAcrobotRk4Substeps; ++sub) y = advance(y, h, torque, factors, 0);
  return {y[0], y[1], y[2], y[3]};
}

AcrobotState acrobot_dynamics(const AcrobotState& s, int action, const Vector& factors) {
  const double torque = static_cast<double>(action) - 1.0;
  AcrobotState n = acrobot_integrate(s, torque, factors);
  n.theta1 = wrap_angle(n.theta1);
  n.theta2 = wrap_angle(n.theta2);
  n.dtheta1 = std::clamp(n.dtheta1, -kAcrobotMaxVel1, kAcrobotMaxVel1);
  n.dtheta2 = std::clamp(n.dtheta2, -kAcrobotMaxVel2, kAcrobotMaxVel2);
  return n;
}

bool acrobot_reached_goal(const AcrobotState& s) {
  return -std::cos(s.theta1) - std::cos(s.theta2 + s.theta1) > 1.0;
}

Acrobot::Acrobot() : spec_(acrobot_context_spec()) {}

namespace {
Observation acrobot_obs(const AcrobotState& s) {
  Observation o(6);
  o << std::cos(s.theta1), std::sin(s.theta1), std::cos(s.theta2), std::sin(s.theta2),
      s.dtheta1, s.dtheta2;
  return o;
}
}  // namespace

Observation Acrobot::do_reset(Rng& rng) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  state_.theta1 = u(rng);
  state_.theta2 = u(rng);
  state_.dtheta1 = u(rng);
  state_.dtheta2 = u(rng);
  return acrobot_obs(state_);
}

StepResult Acrobot::do_step(const Action& action) {
  state_ = acrobot_dynamics(state_, static_cast<int>(action(0)), factors());
  StepResult r;
  r.terminated = acrobot_reached_goal(state_);
  r.reward = r.terminated ? 0.0 : -1.0;
  r.observation = acrobot_obs(state_);
  return r;
}

}  // namespace aacc::envs
