#include "aacc/cmdp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace aacc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Support of a bounded distribution, or nullopt for the unbounded Gaussian.
std::optional<std::pair<double, double>> support(const DistSpec& dist) {
  return std::visit(
      Overloaded{
          [](const GaussianMultiplicative&) -> std::optional<std::pair<double, double>> {
            return std::nullopt;
          },
          [](const Uniform& d) -> std::optional<std::pair<double, double>> {
            return std::make_pair(d.low, d.high);
          },
          [](const TruncatedNormal& d) -> std::optional<std::pair<double, double>> {
            return std::make_pair(d.low, d.high);
          },
          [](const FiniteSet& d) -> std::optional<std::pair<double, double>> {
            auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
            return std::make_pair(*lo, *hi);
          },
          [](const Fixed& d) -> std::optional<std::pair<double, double>> {
            return std::make_pair(d.value, d.value);
          }},
      dist);
}

double draw(const FactorSpec& f, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const GaussianMultiplicative& d) {
            std::normal_distribution<double> n(1.0, d.std);
            return f.default_value * n(rng);
          },
          [&](const Uniform& d) {
            std::uniform_real_distribution<double> u(d.low, d.high);
            return u(rng);
          },
          [&](const TruncatedNormal& d) {
            std::normal_distribution<double> n(d.mean, d.std);
            double x = n(rng);
            for (int tries = 0; tries < 10000 && (x < d.low || x > d.high); ++tries) {
              x = n(rng);
            }
            return std::clamp(x, d.low, d.high);
          },
          [&](const FiniteSet& d) {
            std::uniform_int_distribution<std::size_t> pick(0, d.values.size() - 1);
            return d.values[pick(rng)];
          },
          [](const Fixed& d) { return d.value; }},
      f.distribution);
}

}  // namespace

void validate(const DistSpec& dist) {
  std::visit(Overloaded{
                 [](const GaussianMultiplicative& d) {
                   if (!(d.std > 0.0)) throw std::invalid_argument("gaussian std must be > 0");
                 },
                 [](const Uniform& d) {
                   if (!(d.low < d.high)) throw std::invalid_argument("uniform requires low < high");
                 },
                 [](const TruncatedNormal& d) {
                   if (!(d.std > 0.0)) throw std::invalid_argument("truncated normal std must be > 0");
                   if (!(d.low < d.high))
                     throw std::invalid_argument("truncated normal requires low < high");
                 },
                 [](const FiniteSet& d) {
                   if (d.values.empty()) throw std::invalid_argument("finite set must be nonempty");
                 },
                 [](const Fixed&) {}},
             dist);
}

std::string describe(const DistSpec& dist) {
  return std::visit(
      Overloaded{
          [](const GaussianMultiplicative& d) { return "gaussian(std=" + shortest(d.std) + ")"; },
          [](const Uniform& d) {
            return "uniform(" + shortest(d.low) + "," + shortest(d.high) + ")";
          },
          [](const TruncatedNormal& d) {
            return "truncnormal(" + shortest(d.mean) + "," + shortest(d.std) + "," +
                   shortest(d.low) + "," + shortest(d.high) + ")";
          },
          [](const FiniteSet& d) {
            std::string s = "set(";
            for (std::size_t i = 0; i < d.values.size(); ++i) {
              if (i) s += ",";
              s += shortest(d.values[i]);
            }
            return s + ")";
          },
          [](const Fixed& d) { return "fixed(" + shortest(d.value) + ")"; }},
      dist);
}

ContextSpec::ContextSpec(std::vector<FactorSpec> factors) : factors_(std::move(factors)) {
  std::set<std::string> names;
  for (const auto& f : factors_) {
    if (!names.insert(f.name).second) {
      throw std::invalid_argument("duplicate factor name: " + f.name);
    }
    if (!(f.low < f.high)) {
      throw std::invalid_argument("factor " + f.name + ": bounds require low < high");
    }
    if (f.default_value < f.low || f.default_value > f.high) {
      throw std::invalid_argument("factor " + f.name + ": default outside bounds");
    }
    validate(f.distribution);
  }
}

std::size_t ContextSpec::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].name == name) return i;
  }
  throw std::invalid_argument("unknown environmental factor: " + std::string(name));
}

Vector ContextSpec::defaults() const {
  Vector v(static_cast<Eigen::Index>(factors_.size()));
  for (std::size_t i = 0; i < factors_.size(); ++i) v(i) = factors_[i].default_value;
  return v;
}

bool ContextSpec::contains(const Context& ctx) const {
  if (ctx.values.size() != static_cast<Eigen::Index>(factors_.size())) return false;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const double v = ctx.values(i);
    if (!std::isfinite(v) || v < factors_[i].low || v > factors_[i].high) return false;
  }
  return true;
}

ContextSpec ContextSpec::with_distribution(std::string_view name, DistSpec dist) const {
  validate(dist);
  auto factors = factors_;
  auto& f = factors[index_of(name)];
  if (auto s = support(dist)) {
    f.low = std::min(f.low, s->first);
    f.high = std::max(f.high, s->second);
  }
  f.distribution = std::move(dist);
  return ContextSpec(std::move(factors));
}

ContextSpec ContextSpec::with_all_distributions(const DistSpec& dist) const {
  ContextSpec out = *this;
  for (const auto& f : factors_) out = out.with_distribution(f.name, dist);
  return out;
}

std::string ContextSpec::fingerprint() const {
  std::string s;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) s += ";";
    s += factors_[i].name + "=" + describe(factors_[i].distribution);
  }
  return s;
}

Context sample_context(const ContextSpec& spec, Rng& rng) {
  Context ctx;
  ctx.values.resize(static_cast<Eigen::Index>(spec.size()));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& f = spec.factor(i);
    double v = std::clamp(draw(f, rng), f.low, f.high);
    if (f.kind == FactorKind::kInteger) {
      v = std::clamp(std::round(v), std::ceil(f.low), std::floor(f.high));
    }
    ctx.values(i) = v;
  }
  return ctx;
}

ContextNormalizer::ContextNormalizer(const ContextSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  center_.resize(n);
  scale_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = spec.factor(i);
    center_(i) = f.default_value;
    if (std::isfinite(f.low) && std::isfinite(f.high)) {
      scale_(i) = 0.5 * (f.high - f.low);
    } else {
      scale_(i) = std::abs(f.default_value) > 0.0 ? std::abs(f.default_value) : 1.0;
    }
  }
}

Vector ContextNormalizer::operator()(const Vector& raw) const {
  return ((raw - center_).array() / scale_.array()).matrix();
}

Matrix ContextNormalizer::operator()(const Matrix& raw) const {
  return (raw.colwise() - center_).array().colwise() / scale_.array();
}

std::string format_context(const Context& ctx) {
  std::string s;
  for (Eigen::Index i = 0; i < ctx.values.size(); ++i) {
    if (i) s += ",";
    s += shortest(ctx.values(i));
  }
  return s;
}

void Environment::check_context(const Context& ctx) const {
  if (ctx.values.size() != static_cast<Eigen::Index>(context_spec().size())) {
    throw std::invalid_argument(std::string(id()) + ": context has " +
                                std::to_string(ctx.values.size()) + " factors, expected " +
                                std::to_string(context_spec().size()));
  }
}

Observation Environment::reset(const Context& ctx, Rng& rng) {
  check_context(ctx);
  ctx_ = ctx;
  steps_ = 0;
  started_ = true;
  done_ = false;
  return do_reset(rng);
}

StepResult Environment::step(const Action& action) {
  if (!started_) throw std::logic_error(std::string(id()) + ": step() before reset()");
  if (done_) throw std::logic_error(std::string(id()) + ": step() on a finished episode");
  StepResult r = do_step(action);
  ++steps_;
  if (r.terminated || steps_ >= horizon()) r.done = true;
  done_ = r.done;
  return r;
}

void Environment::replace_context(const Context& ctx) {
  check_context(ctx);
  ctx_ = ctx;
}

EpisodeOutcome run_episode_with(Environment& env, const Context& ctx, Rng& rng,
                                const std::function<Action(const Observation&)>& policy) {
  EpisodeOutcome out;
  Observation obs = env.reset(ctx, rng);
  while (!env.done()) {
    StepResult r = env.step(policy(obs));
    out.total_reward += r.reward;
    out.terminated_early = r.terminated;
    obs = std::move(r.observation);
  }
  out.steps = env.steps();
  return out;
}

}  // namespace aacc
