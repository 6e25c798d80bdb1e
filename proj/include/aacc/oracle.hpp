#pragma once

// Exact dynamic-programming checks on small finite contextual MDPs: values
// per context by direct linear solves, the marginal (context-averaged) value
// identity, and the asymmetric policy gradient against finite differences.
// Templated on the scalar so the finite-difference side can run in extended
// precision.

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "aacc/types.hpp"

namespace aacc::oracle {

template <typename Scalar>
struct TabularCMDP {
  using Vec = VectorX<Scalar>;
  using Mat = MatrixX<Scalar>;

  int num_observations = 0;
  int num_actions = 0;
  int num_contexts = 0;
  // transitions[c] row (o * num_actions + a) is P(. | o, a, c).
  std::vector<Mat> transitions;
  // rewards[c](o, a) = R(c, o, a).
  std::vector<Mat> rewards;
  Vec context_probs;
  Vec initial;  // start-observation distribution rho0
  Scalar gamma = Scalar(0.95);

  Eigen::Index row(int o, int a) const { return static_cast<Eigen::Index>(o) * num_actions + a; }

  void validate() const {
    const Scalar tol = Scalar(1e-12);
    if (num_observations < 1 || num_actions < 1 || num_contexts < 1) {
      throw std::invalid_argument("tabular cmdp needs nonempty spaces");
    }
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("tabular cmdp gamma must lie in (0, 1)");
    if (static_cast<int>(transitions.size()) != num_contexts ||
        static_cast<int>(rewards.size()) != num_contexts) {
      throw std::invalid_argument("tabular cmdp needs one transition/reward table per context");
    }
    auto is_distribution = [&](const Vec& p) {
      return (p.array() >= 0).all() && std::abs(p.sum() - Scalar(1)) <= tol;
    };
    for (int c = 0; c < num_contexts; ++c) {
      if (transitions[c].rows() != num_observations * num_actions ||
          transitions[c].cols() != num_observations) {
        throw std::invalid_argument("transition table has the wrong shape");
      }
      if (rewards[c].rows() != num_observations || rewards[c].cols() != num_actions ||
          !rewards[c].allFinite()) {
        throw std::invalid_argument("reward table must be finite and O x A");
      }
      for (Eigen::Index r = 0; r < transitions[c].rows(); ++r) {
        if (!is_distribution(transitions[c].row(r).transpose())) {
          throw std::invalid_argument("transition row does not sum to 1");
        }
      }
    }
    if (context_probs.size() != num_contexts || !is_distribution(context_probs)) {
      throw std::invalid_argument("context distribution does not sum to 1");
    }
    if (initial.size() != num_observations || !is_distribution(initial)) {
      throw std::invalid_argument("initial distribution does not sum to 1");
    }
  }

  // Dirichlet(1) transition rows, context and start distributions; rewards
  // Uniform(-1, 1).
  static TabularCMDP random(int num_obs, int num_act, int num_ctx, Scalar gamma, Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto dirichlet = [&](int n) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v(i) = static_cast<Scalar>(expo(rng));
      return Vec(v / v.sum());
    };
    TabularCMDP m;
    m.num_observations = num_obs;
    m.num_actions = num_act;
    m.num_contexts = num_ctx;
    m.gamma = gamma;
    for (int c = 0; c < num_ctx; ++c) {
      Mat p(num_obs * num_act, num_obs);
      for (Eigen::Index r = 0; r < p.rows(); ++r) p.row(r) = dirichlet(num_obs).transpose();
      Mat rew(num_obs, num_act);
      for (int o = 0; o < num_obs; ++o) {
        for (int a = 0; a < num_act; ++a) rew(o, a) = static_cast<Scalar>(unif(rng));
      }
      m.transitions.push_back(std::move(p));
      m.rewards.push_back(std::move(rew));
    }
    m.context_probs = dirichlet(num_ctx);
    m.initial = dirichlet(num_obs);
    return m;
  }

  template <typename Other>
  TabularCMDP<Other> cast() const {
    TabularCMDP<Other> m;
    m.num_observations = num_observations;
    m.num_actions = num_actions;
    m.num_contexts = num_contexts;
    for (const auto& t : transitions) m.transitions.push_back(t.template cast<Other>());
    for (const auto& r : rewards) m.rewards.push_back(r.template cast<Other>());
    m.context_probs = context_probs.template cast<Other>();
    m.initial = initial.template cast<Other>();
    m.gamma = static_cast<Other>(gamma);
    return m;
  }
};

/// Softmax policy over actions conditioned on the observation only.
template <typename Scalar>
struct TabularPolicy {
  using Mat = MatrixX<Scalar>;
  Mat logits;  // O x A

  Mat probabilities() const {
    Mat p(logits.rows(), logits.cols());
    for (Eigen::Index o = 0; o < logits.rows(); ++o) {
      const Scalar mx = logits.row(o).maxCoeff();
      p.row(o) = (logits.row(o).array() - mx).exp();
      p.row(o) /= p.row(o).sum();
    }
    return p;
  }

  static TabularPolicy random(int num_obs, int num_act, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    TabularPolicy pi;
    pi.logits.resize(num_obs, num_act);
    for (int o = 0; o < num_obs; ++o) {
      for (int a = 0; a < num_act; ++a) pi.logits(o, a) = static_cast<Scalar>(normal(rng));
    }
    return pi;
  }

  template <typename Other>
  TabularPolicy<Other> cast() const {
    return {logits.template cast<Other>()};
  }
};

// ------------------------------------------------------------ primitives

template <typename Scalar>
MatrixX<Scalar> policy_transition(const TabularCMDP<Scalar>& m, int c, const MatrixX<Scalar>& probs) {
  MatrixX<Scalar> p = MatrixX<Scalar>::Zero(m.num_observations, m.num_observations);
  for (int o = 0; o < m.num_observations; ++o) {
    for (int a = 0; a < m.num_actions; ++a) p.row(o) += probs(o, a) * m.transitions[c].row(m.row(o, a));
  }
  return p;
}

template <typename Scalar>
VectorX<Scalar> policy_reward(const TabularCMDP<Scalar>& m, int c, const MatrixX<Scalar>& probs) {
  return m.rewards[c].cwiseProduct(probs).rowwise().sum();
}

template <typename Scalar>
MatrixX<Scalar> q_from_values(const TabularCMDP<Scalar>& m, int c, const VectorX<Scalar>& v) {
  MatrixX<Scalar> q(m.num_observations, m.num_actions);
  for (int o = 0; o < m.num_observations; ++o) {
    for (int a = 0; a < m.num_actions; ++a) {
      q(o, a) = m.rewards[c](o, a) + m.gamma * m.transitions[c].row(m.row(o, a)).dot(v);
    }
  }
  return q;
}

template <typename Scalar>
struct ContextValues {
  std::vector<VectorX<Scalar>> values;  // V[c](o)
  std::vector<MatrixX<Scalar>> q;       // Q[c](o, a)
  Scalar max_residual = 0;
};

// Per-context values for a possibly context-dependent policy
// (probs_per_context[c] is O x A).
template <typename Scalar>
ContextValues<Scalar> value_per_context(const TabularCMDP<Scalar>& m,
                                        const std::vector<MatrixX<Scalar>>& probs_per_context) {
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;
  ContextValues<Scalar> out;
  const Mat eye = Mat::Identity(m.num_observations, m.num_observations);
  for (int c = 0; c < m.num_contexts; ++c) {
    const Mat p = policy_transition(m, c, probs_per_context[c]);
    const Vec r = policy_reward(m, c, probs_per_context[c]);
    const Vec v = (eye - m.gamma * p).partialPivLu().solve(r);
    const Scalar residual = (v - r - m.gamma * p * v).cwiseAbs().maxCoeff();
    out.max_residual = std::max(out.max_residual, residual);
    out.values.push_back(v);
    out.q.push_back(q_from_values(m, c, v));
  }
  return out;
}

template <typename Scalar>
ContextValues<Scalar> value_per_context(const TabularCMDP<Scalar>& m, const TabularPolicy<Scalar>& pi) {
  return value_per_context(m, std::vector<MatrixX<Scalar>>(m.num_contexts, pi.probabilities()));
}

template <typename Scalar>
struct MarginalValues {
  VectorX<Scalar> mixture;       // sum_c p(c) V[c](o)
  VectorX<Scalar> marginal_mdp;  // value of the MDP with context-averaged P and R (diagnostic)
};

template <typename Scalar>
MarginalValues<Scalar> value_marginal(const TabularCMDP<Scalar>& m, const TabularPolicy<Scalar>& pi) {
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;
  const auto cv = value_per_context(m, pi);
  MarginalValues<Scalar> out;
  out.mixture = Vec::Zero(m.num_observations);
  for (int c = 0; c < m.num_contexts; ++c) out.mixture += m.context_probs(c) * cv.values[c];

  const Mat probs = pi.probabilities();
  Mat p_bar = Mat::Zero(m.num_observations, m.num_observations);
  Vec r_bar = Vec::Zero(m.num_observations);
  for (int c = 0; c < m.num_contexts; ++c) {
    p_bar += m.context_probs(c) * policy_transition(m, c, probs);
    r_bar += m.context_probs(c) * policy_reward(m, c, probs);
  }
  const Mat eye = Mat::Identity(m.num_observations, m.num_observations);
  out.marginal_mdp = (eye - m.gamma * p_bar).partialPivLu().solve(r_bar);
  return out;
}

// Discounted occupancy from each start observation, per context:
// column o of occupancy[c] is sum_t gamma^t Pr(o_t = . | o_0 = o, c).
template <typename Scalar>
std::vector<MatrixX<Scalar>> occupancy_per_context(const TabularCMDP<Scalar>& m,
                                                   const std::vector<MatrixX<Scalar>>& probs) {
  using Mat = MatrixX<Scalar>;
  const Mat eye = Mat::Identity(m.num_observations, m.num_observations);
  std::vector<Mat> out;
  for (int c = 0; c < m.num_contexts; ++c) {
    const Mat p = policy_transition(m, c, probs[c]);
    out.push_back((eye - m.gamma * p).transpose().partialPivLu().solve(eye));
  }
  return out;
}

// Value of starting at o with the context drawn from p(c) at episode start,
// computed by propagating the joint (context, observation) distribution
// forward rather than by per-context backups.
template <typename Scalar>
struct RolloutValues {
  VectorX<Scalar> v;  // V(o)
  MatrixX<Scalar> q;  // Q(o, a)
};

template <typename Scalar>
RolloutValues<Scalar> rollout_values(const TabularCMDP<Scalar>& m,
                                     const std::vector<MatrixX<Scalar>>& probs) {
  using Vec = VectorX<Scalar>;
  const auto occ = occupancy_per_context(m, probs);
  RolloutValues<Scalar> out;
  out.v = Vec::Zero(m.num_observations);
  out.q = MatrixX<Scalar>::Zero(m.num_observations, m.num_actions);
  for (int c = 0; c < m.num_contexts; ++c) {
    const Vec r = policy_reward(m, c, probs[c]);
    const Scalar pc = m.context_probs(c);
    for (int o = 0; o < m.num_observations; ++o) {
      out.v(o) += pc * occ[c].col(o).dot(r);
      for (int a = 0; a < m.num_actions; ++a) {
        const Vec next = m.transitions[c].row(m.row(o, a)).transpose();
        out.q(o, a) += pc * (m.rewards[c](o, a) + m.gamma * (occ[c] * next).dot(r));
      }
    }
  }
  return out;
}

// -------------------------------------------------------- value identity

template <typename Scalar>
struct ValueIdentityReport {
  // Deviation between consecutive lines of the marginalization chain, maximum
  // over observations. Step k compares line k and line k+1:
  //   1 E_c V(c,o)                       -> E_c sum_a pi(a|c,o) Q(c,o,a)
  //   2 (context-dependent policy)       -> sum_a pi(a|o) E_c Q(c,o,a)
  //   3                                  -> Bellman right-hand side
  //   4                                  -> averaged reward split out
  //   5                                  -> next-observation posterior form
  //   6                                  -> sum_a pi(a|o) Q(o,a) (rollout Q)
  //   7                                  -> V(o) (rollout value)
  std::array<Scalar, 7> step_deviation{};
  std::array<int, 7> step_worst_observation{};
  Scalar identity_deviation = 0;  // max_o |E_c V(c,o) - V(o)|
  int worst_observation = 0;
  Scalar max_residual = 0;
  Scalar marginal_mdp_deviation = 0;  // diagnostic only
  bool passed = false;

  int first_failing_step(Scalar tol) const {
    for (int k = 0; k < 7; ++k) {
      if (step_deviation[k] > tol) return k + 1;
    }
    return 0;
  }
};

// Evaluates the chain for per-context policies; pi(a|o) in lines 3-7 is the
// context-averaged policy. For an observation-only policy every step holds.
template <typename Scalar>
ValueIdentityReport<Scalar> value_identity_chain(const TabularCMDP<Scalar>& m,
                                      const std::vector<MatrixX<Scalar>>& probs,
                                      Scalar chain_tol = Scalar(1e-10),
                                      Scalar identity_tol = Scalar(1e-8)) {
  using Mat = MatrixX<Scalar>;
  const int n_o = m.num_observations;
  const int n_a = m.num_actions;
  const auto cv = value_per_context(m, probs);
  const auto roll = rollout_values(m, probs);

  Mat pi_bar = Mat::Zero(n_o, n_a);
  Mat r_bar = Mat::Zero(n_o, n_a);
  for (int c = 0; c < m.num_contexts; ++c) {
    pi_bar += m.context_probs(c) * probs[c];
    r_bar += m.context_probs(c) * m.rewards[c];
  }

  ValueIdentityReport<Scalar> rep;
  rep.max_residual = cv.max_residual;
  for (int o = 0; o < n_o; ++o) {
    std::array<Scalar, 8> line{};
    for (int c = 0; c < m.num_contexts; ++c) {
      const Scalar pc = m.context_probs(c);
      line[0] += pc * cv.values[c](o);
      line[1] += pc * probs[c].row(o).dot(cv.q[c].row(o));
    }
    for (int a = 0; a < n_a; ++a) {
      Scalar eq = 0, bellman = 0, next_avg = 0, posterior = 0;
      for (int c = 0; c < m.num_contexts; ++c) {
        const Scalar pc = m.context_probs(c);
        const auto prow = m.transitions[c].row(m.row(o, a));
        eq += pc * cv.q[c](o, a);
        bellman += pc * (m.rewards[c](o, a) + m.gamma * prow.dot(cv.values[c]));
        next_avg += pc * prow.dot(cv.values[c]);
      }
      for (int o2 = 0; o2 < n_o; ++o2) {
        Scalar p_next = 0, weighted = 0;
        for (int c = 0; c < m.num_contexts; ++c) {
          const Scalar w = m.context_probs(c) * m.transitions[c](m.row(o, a), o2);
          p_next += w;
          weighted += w * cv.values[c](o2);
        }
        if (p_next > 0) posterior += p_next * (weighted / p_next);
      }
      line[2] += pi_bar(o, a) * eq;
      line[3] += pi_bar(o, a) * bellman;
      line[4] += pi_bar(o, a) * (r_bar(o, a) + m.gamma * next_avg);
      line[5] += pi_bar(o, a) * (r_bar(o, a) + m.gamma * posterior);
      line[6] += pi_bar(o, a) * roll.q(o, a);
    }
    line[7] = roll.v(o);
    for (int k = 0; k < 7; ++k) {
      const Scalar d = std::abs(line[k] - line[k + 1]);
      if (d > rep.step_deviation[k]) {
        rep.step_deviation[k] = d;
        rep.step_worst_observation[k] = o;
      }
    }
    const Scalar id = std::abs(line[0] - roll.v(o));
    if (id > rep.identity_deviation) {
      rep.identity_deviation = id;
      rep.worst_observation = o;
    }
  }

  if (std::all_of(probs.begin(), probs.end(), [&](const Mat& p) { return p == probs[0]; })) {
    TabularPolicy<Scalar> dummy;
    const Mat& p0 = probs[0];
    // Marginal-MDP reading is only defined for an observation-only policy.
    Mat logits = p0.array().log();
    dummy.logits = logits;
    const auto mv = value_marginal(m, dummy);
    rep.marginal_mdp_deviation = (mv.mixture - mv.marginal_mdp).cwiseAbs().maxCoeff();
  }

  rep.passed = rep.first_failing_step(chain_tol) == 0 && rep.identity_deviation <= identity_tol &&
               rep.max_residual <= Scalar(1e-10);
  return rep;
}

template <typename Scalar>
ValueIdentityReport<Scalar> check_value_identity(const TabularCMDP<Scalar>& m, const TabularPolicy<Scalar>& pi,
                                      Scalar chain_tol = Scalar(1e-10),
                                      Scalar identity_tol = Scalar(1e-8)) {
  return value_identity_chain(m, std::vector<MatrixX<Scalar>>(m.num_contexts, pi.probabilities()),
                        chain_tol, identity_tol);
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  long episodes = 0;
};

// Return from `start` with the context drawn once per episode from p(c) and
// actions from the observation-only policy. Discounting is realized as a
// per-step continuation probability gamma, so undiscounted sums are unbiased
// for the discounted value.
template <typename Scalar>
MonteCarloEstimate monte_carlo_value(const TabularCMDP<Scalar>& m, const TabularPolicy<Scalar>& pi,
                                     int start, long episodes, Rng& rng) {
  const MatrixX<Scalar> probs = pi.probabilities();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](auto&& weight, int n) {
    const double x = u(rng);
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
      cum += static_cast<double>(weight(i));
      if (x < cum) return i;
    }
    return n - 1;
  };
  double sum = 0.0, sum_sq = 0.0;
  for (long e = 0; e < episodes; ++e) {
    const int c = pick([&](int i) { return m.context_probs(i); }, m.num_contexts);
    int o = start;
    double ret = 0.0;
    for (;;) {
      const int a = pick([&](int i) { return probs(o, i); }, m.num_actions);
      ret += static_cast<double>(m.rewards[c](o, a));
      const auto row = m.row(o, a);
      o = pick([&](int i) { return m.transitions[c](row, i); }, m.num_observations);
      if (u(rng) >= static_cast<double>(m.gamma)) break;
    }
    sum += ret;
    sum_sq += ret * ret;
  }
  MonteCarloEstimate est;
  est.episodes = episodes;
  est.mean = sum / static_cast<double>(episodes);
  const double var = std::max(0.0, sum_sq / static_cast<double>(episodes) - est.mean * est.mean);
  est.standard_error = std::sqrt(var / static_cast<double>(episodes));
  return est;
}

// ----------------------------------------------------- gradient identity

// J(pi) = sum_c p(c) rho0 . V[c].
template <typename Scalar>
Scalar objective(const TabularCMDP<Scalar>& m, const TabularPolicy<Scalar>& pi) {
  const auto cv = value_per_context(m, pi);
  Scalar j = 0;
  for (int c = 0; c < m.num_contexts; ++c) j += m.context_probs(c) * m.initial.dot(cv.values[c]);
  return j;
}

// Asymmetric policy gradient with respect to the logits:
// sum_c p(c) sum_{o,a} d_c(o) Q(c,o,a) grad log pi(a|o), where d_c is the
// discounted occupancy from rho0 under context c.
template <typename Scalar>
MatrixX<Scalar> exact_policy_gradient(const TabularCMDP<Scalar>& m, const TabularPolicy<Scalar>& pi) {
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;
  const Mat probs = pi.probabilities();
  const auto cv = value_per_context(m, pi);
  const auto occ = occupancy_per_context(m, std::vector<Mat>(m.num_contexts, probs));
  Mat grad = Mat::Zero(m.num_observations, m.num_actions);
  for (int c = 0; c < m.num_contexts; ++c) {
    const Vec d = occ[c] * m.initial;
    for (int o = 0; o < m.num_observations; ++o) {
      for (int a = 0; a < m.num_actions; ++a) {
        // grad_{logits(o, .)} log pi(a|o) = e_a - pi(.|o)
        Vec score = -probs.row(o).transpose();
        score(a) += 1;
        grad.row(o) += m.context_probs(c) * d(o) * probs(o, a) * cv.q[c](o, a) * score.transpose();
      }
    }
  }
  return grad;
}

// Classical observation-level policy gradient on the joint (context,
// observation) chain: occupancy d(o) summed over contexts and the critic
// Q(o,a) averaged under the occupancy posterior of the context.
template <typename Scalar>
MatrixX<Scalar> context_free_policy_gradient(const TabularCMDP<Scalar>& m,
                                             const TabularPolicy<Scalar>& pi) {
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;
  const int n_o = m.num_observations;
  const int n_joint = n_o * m.num_contexts;
  const Mat probs = pi.probabilities();
  Mat p_joint = Mat::Zero(n_joint, n_joint);
  Vec r_joint(n_joint), start(n_joint);
  for (int c = 0; c < m.num_contexts; ++c) {
    p_joint.block(c * n_o, c * n_o, n_o, n_o) = policy_transition(m, c, probs);
    r_joint.segment(c * n_o, n_o) = policy_reward(m, c, probs);
    start.segment(c * n_o, n_o) = m.context_probs(c) * m.initial;
  }
  const Mat system = Mat::Identity(n_joint, n_joint) - m.gamma * p_joint;
  const Vec v_joint = system.partialPivLu().solve(r_joint);
  const Vec d_joint = system.transpose().partialPivLu().solve(start);

  Mat grad = Mat::Zero(n_o, m.num_actions);
  for (int o = 0; o < n_o; ++o) {
    Scalar d_obs = 0;
    Vec q_obs = Vec::Zero(m.num_actions);
    for (int c = 0; c < m.num_contexts; ++c) {
      const Scalar w = d_joint(c * n_o + o);
      d_obs += w;
      for (int a = 0; a < m.num_actions; ++a) {
        const Vec next = m.transitions[c].row(m.row(o, a)).transpose();
        q_obs(a) += w * (m.rewards[c](o, a) + m.gamma * next.dot(v_joint.segment(c * n_o, n_o)));
      }
    }
    if (d_obs <= 0) continue;
    q_obs /= d_obs;
    const Scalar v_obs = probs.row(o).dot(q_obs);
    for (int a = 0; a < m.num_actions; ++a) grad(o, a) = d_obs * probs(o, a) * (q_obs(a) - v_obs);
  }
  return grad;
}

// Central differences of the exact objective with respect to every logit.
template <typename Scalar>
MatrixX<Scalar> finite_difference_gradient(const TabularCMDP<Scalar>& m,
                                           const TabularPolicy<Scalar>& pi, Scalar h) {
  MatrixX<Scalar> grad(pi.logits.rows(), pi.logits.cols());
  for (Eigen::Index o = 0; o < pi.logits.rows(); ++o) {
    for (Eigen::Index a = 0; a < pi.logits.cols(); ++a) {
      TabularPolicy<Scalar> plus = pi, minus = pi;
      plus.logits(o, a) += h;
      minus.logits(o, a) -= h;
      grad(o, a) = (objective(m, plus) - objective(m, minus)) / (2 * h);
    }
  }
  return grad;
}

// max |a - b| / max(|a|, |b|) over components where max(|a|, |b|) > floor.
template <typename Scalar>
Scalar max_relative_error(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, Scalar floor) {
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Scalar scale = std::max(std::abs(a(i)), std::abs(b(i)));
    if (scale > floor) worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

template <typename Scalar>
struct GradientIdentityReport {
  MatrixX<Scalar> asymmetric;    // exact context-aware Q form
  MatrixX<Scalar> context_free;  // observation-level form on the joint chain
  MatrixX<Scalar> finite_difference;
  Scalar rel_error_context_free = 0;
  Scalar rel_error_finite_difference = 0;
  Scalar prior_marginal_rel_error = 0;  // diagnostic: critic averaged under p(c) only
  bool passed = false;
};

// Finite differences are evaluated in long double; h = 1e-6.
template <typename Scalar>
GradientIdentityReport<Scalar> check_gradient_identity(const TabularCMDP<Scalar>& m, const TabularPolicy<Scalar>& pi,
                                      Scalar tol = Scalar(1e-6), Scalar floor = Scalar(1e-8)) {
  using Mat = MatrixX<Scalar>;
  GradientIdentityReport<Scalar> rep;
  rep.asymmetric = exact_policy_gradient(m, pi);
  rep.context_free = context_free_policy_gradient(m, pi);
  const auto m_ext = m.template cast<long double>();
  const auto pi_ext = pi.template cast<long double>();
  rep.finite_difference =
      finite_difference_gradient(m_ext, pi_ext, static_cast<long double>(1e-6)).template cast<Scalar>();
  rep.rel_error_context_free = max_relative_error(rep.asymmetric, rep.context_free, floor);
  rep.rel_error_finite_difference = max_relative_error(rep.asymmetric, rep.finite_difference, floor);

  const Mat probs = pi.probabilities();
  const auto cv = value_per_context(m, pi);
  const auto occ = occupancy_per_context(m, std::vector<Mat>(m.num_contexts, probs));
  Mat naive = Mat::Zero(m.num_observations, m.num_actions);
  VectorX<Scalar> d_bar = VectorX<Scalar>::Zero(m.num_observations);
  Mat q_bar = Mat::Zero(m.num_observations, m.num_actions);
  for (int c = 0; c < m.num_contexts; ++c) {
    d_bar += m.context_probs(c) * (occ[c] * m.initial);
    q_bar += m.context_probs(c) * cv.q[c];
  }
  for (int o = 0; o < m.num_observations; ++o) {
    const Scalar v = probs.row(o).dot(q_bar.row(o));
    for (int a = 0; a < m.num_actions; ++a) naive(o, a) = d_bar(o) * probs(o, a) * (q_bar(o, a) - v);
  }
  rep.prior_marginal_rel_error = max_relative_error(rep.asymmetric, naive, floor);

  rep.passed = rep.rel_error_context_free <= tol && rep.rel_error_finite_difference <= tol;
  return rep;
}

// Advantage under both sign conventions: as printed, A = V - Q; and the
// conventional A = Q - V, which the PPO update uses.
template <typename Scalar>
struct Advantages {
  MatrixX<Scalar> as_printed;
  MatrixX<Scalar> conventional;
};

template <typename Scalar>
Advantages<Scalar> advantages(const MatrixX<Scalar>& q, const MatrixX<Scalar>& probs) {
  const VectorX<Scalar> v = q.cwiseProduct(probs).rowwise().sum();
  Advantages<Scalar> out;
  out.conventional = q.colwise() - v;
  out.as_printed = -out.conventional;
  return out;
}

}  // namespace aacc::oracle
