#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "aacc/envs.hpp"
#include "aacc/ppo.hpp"

namespace aacc {

Wiring wiring(ArchVariant variant) {
  switch (variant) {
    case ArchVariant::kAACC:
      return {false, false, true, true, false, false};
    case ArchVariant::kRobust:
      return {false, false, false, false, false, false};
    case ArchVariant::kSysID:
      return {true, false, true, false, false, false};
    case ArchVariant::kRMA:
      return {true, true, true, true, true, true};
    case ArchVariant::kRMANormal:
      return {true, true, true, true, false, true};
    case ArchVariant::kAACCActor:
      return {true, true, false, false, false, false};
    case ArchVariant::kAACCHybrid:
      return {true, true, true, true, false, false};
  }
  throw std::invalid_argument("unknown architecture variant");
}

std::string_view to_string(ArchVariant variant) {
  switch (variant) {
    case ArchVariant::kAACC: return "AACC";
    case ArchVariant::kRobust: return "Robust";
    case ArchVariant::kSysID: return "SysID";
    case ArchVariant::kRMA: return "RMA";
    case ArchVariant::kRMANormal: return "RMA-normal";
    case ArchVariant::kAACCActor: return "AACC-actor";
    case ArchVariant::kAACCHybrid: return "AACC-hybrid";
  }
  return "?";
}

ArchVariant parse_variant(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  for (ArchVariant v : all_variants()) {
    std::string candidate(to_string(v));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == key) return v;
  }
  throw std::invalid_argument("unknown architecture variant: " + std::string(name));
}

const std::vector<ArchVariant>& all_variants() {
  static const std::vector<ArchVariant> kAll = {
      ArchVariant::kAACC,      ArchVariant::kRobust,    ArchVariant::kSysID,
      ArchVariant::kRMA,       ArchVariant::kRMANormal, ArchVariant::kAACCActor,
      ArchVariant::kAACCHybrid};
  return kAll;
}

namespace {

Vector concat(std::initializer_list<const Vector*> parts) {
  Eigen::Index n = 0;
  for (const Vector* p : parts) n += p->size();
  Vector out(n);
  Eigen::Index r = 0;
  for (const Vector* p : parts) {
    out.segment(r, p->size()) = *p;
    r += p->size();
  }
  return out;
}

std::string config_error(ArchVariant v, std::string_view what) {
  return "configuration error: variant " + std::string(to_string(v)) + " requires " +
         std::string(what);
}

std::uint64_t fnv(std::uint64_t h, const Vector& v) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Vector build_actor_input(ArchVariant variant, const Vector& observation, const Vector& factors,
                         const Vector* prev_action, const Net* actor_encoder) {
  const Wiring w = wiring(variant);
  if (w.actor_uses_encoder && actor_encoder == nullptr) {
    throw std::invalid_argument(config_error(variant, "an actor-side encoder"));
  }
  if (w.actor_sees_prev_action && prev_action == nullptr) {
    throw std::invalid_argument(config_error(variant, "the previous action"));
  }
  if (!w.actor_sees_factors) return observation;
  if (!w.actor_uses_encoder) return concat({&observation, &factors});
  const Vector code = actor_encoder->forward(factors).col(0);
  if (w.actor_sees_prev_action) return concat({&observation, prev_action, &code});
  return concat({&observation, &code});
}

Vector build_critic_input(ArchVariant variant, const Vector& observation, const Vector& factors,
                          const Net* critic_encoder) {
  const Wiring w = wiring(variant);
  if (!w.critic_sees_factors) return observation;
  if (!w.critic_uses_encoder) return concat({&observation, &factors});
  if (critic_encoder == nullptr) {
    throw std::invalid_argument(config_error(variant, "a critic-side encoder"));
  }
  const Vector code = critic_encoder->forward(factors).col(0);
  return concat({&code, &observation});
}

Agent::Agent(ArchVariant variant_, int observation_dim_, ActionSpace actions_,
             const ContextSpec& factor_schema, NetworkShape shape_, Rng& init_rng)
    : variant(variant_),
      wires(wiring(variant_)),
      shape(std::move(shape_)),
      actions(actions_),
      normalizer(factor_schema),
      observation_dim(observation_dim_),
      factor_dim(static_cast<int>(factor_schema.size())) {
  if (shape.encoder_dim < 1 && (wires.actor_uses_encoder || wires.critic_uses_encoder)) {
    throw std::invalid_argument("encoder output dimension must be >= 1");
  }
  const double sqrt2 = std::sqrt(2.0);
  auto encoder_net = [&](int out) {
    std::vector<int> widths{factor_dim};
    widths.insert(widths.end(), shape.encoder_hidden.begin(), shape.encoder_hidden.end());
    widths.push_back(out);
    Net net(widths);
    net.init_orthogonal(init_rng, sqrt2, 1.0);
    return net;
  };
  auto body = [&](int in, int out, double out_gain) {
    std::vector<int> widths{in};
    widths.insert(widths.end(), shape.hidden.begin(), shape.hidden.end());
    widths.push_back(out);
    Net net(widths);
    net.init_orthogonal(init_rng, sqrt2, out_gain);
    return net;
  };

  head = actions.discrete() ? Head::categorical(actions.size)
                            : Head::diagonal_gaussian(actions.size, 0.0);
  prev_action_dim = wires.actor_sees_prev_action ? actions.feature_dim() : 0;

  if (wires.critic_uses_encoder) critic_encoder = encoder_net(shape.encoder_dim);
  if (wires.actor_uses_encoder && !wires.shared_encoder) {
    const int width = variant == ArchVariant::kAACCHybrid && shape.actor_encoder_dim > 0
                          ? shape.actor_encoder_dim
                          : shape.encoder_dim;
    actor_encoder = encoder_net(width);
  }

  int actor_in = observation_dim + prev_action_dim;
  if (wires.actor_sees_factors) {
    actor_in += wires.actor_uses_encoder ? actor_encoder_width() : factor_dim;
  }
  int critic_in = observation_dim;
  if (wires.critic_sees_factors) {
    critic_in += wires.critic_uses_encoder ? critic_encoder_width() : factor_dim;
  }
  actor = body(actor_in, head.input_dim(), 0.01);
  critic = body(critic_in, 1, 1.0);
}

const Net* Agent::actor_side_encoder() const {
  if (!wires.actor_uses_encoder) return nullptr;
  if (wires.shared_encoder) return critic_encoder ? &*critic_encoder : nullptr;
  return actor_encoder ? &*actor_encoder : nullptr;
}

int Agent::actor_encoder_width() const {
  const Net* enc = actor_side_encoder();
  return enc ? enc->output_dim() : 0;
}

int Agent::critic_encoder_width() const {
  return critic_encoder ? critic_encoder->output_dim() : 0;
}

Vector Agent::prev_action_features(const Action& action) const {
  if (!actions.discrete()) return action;
  Vector onehot = Vector::Zero(actions.size);
  onehot(static_cast<Eigen::Index>(std::lround(action(0)))) = 1.0;
  return onehot;
}

Vector Agent::actor_input(const Observation& obs, const Vector& raw_factors,
                          const Vector& prev_action) const {
  return build_actor_input(variant, obs, normalizer(raw_factors),
                           prev_action_dim > 0 ? &prev_action : nullptr, actor_side_encoder());
}

Vector Agent::critic_input(const Observation& obs, const Vector& raw_factors) const {
  return build_critic_input(variant, obs, normalizer(raw_factors),
                            critic_encoder ? &*critic_encoder : nullptr);
}

Vector Agent::policy_output(const Observation& obs, const Vector& raw_factors,
                            const Vector& prev_action) const {
  return actor.forward(actor_input(obs, raw_factors, prev_action)).col(0);
}

Head::Sample Agent::act(const Observation& obs, const Vector& raw_factors,
                        const Vector& prev_action, Rng& rng) const {
  return head.sample(policy_output(obs, raw_factors, prev_action), rng);
}

double Agent::value(const Observation& obs, const Vector& raw_factors) const {
  return critic.forward(critic_input(obs, raw_factors))(0, 0);
}

Action Agent::to_env_action(const Vector& sampled) const {
  if (actions.discrete()) return sampled;
  return sampled.cwiseMax(actions.low).cwiseMin(actions.high);
}

std::uint64_t Agent::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv(h, actor.params());
  h = fnv(h, head.log_std());
  h = fnv(h, critic.params());
  return h ^ encoder_fingerprint();
}

std::uint64_t Agent::encoder_fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  if (actor_encoder) h = fnv(h, actor_encoder->params());
  if (critic_encoder) h = fnv(h, critic_encoder->params());
  return h;
}

// ------------------------------------------------------------- checkpoints

namespace {

constexpr int kCheckpointVersion = 1;

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void write_widths(std::ostream& out, std::string_view name, const Net& net) {
  out << "net " << name;
  for (int w : net.widths()) out << ' ' << w;
  out << '\n';
}

std::string expect_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("checkpoint truncated: expected " + std::string(what));
  }
  return line;
}

}  // namespace

void save_checkpoint(const Agent& agent, std::string_view env_id, std::ostream& out) {
  out << "aacc-checkpoint " << kCheckpointVersion << '\n';
  out << "env " << env_id << '\n';
  out << "variant " << to_string(agent.variant) << '\n';
  out << "action " << (agent.actions.discrete() ? "discrete" : "continuous") << ' '
      << agent.actions.size << '\n';
  write_widths(out, "actor", agent.actor);
  write_widths(out, "critic", agent.critic);
  if (agent.actor_encoder) write_widths(out, "actor_encoder", *agent.actor_encoder);
  if (agent.critic_encoder) write_widths(out, "critic_encoder", *agent.critic_encoder);
  out << "log_std " << agent.head.log_std().size() << '\n';

  std::vector<const Vector*> blocks{&agent.actor.params(), &agent.critic.params()};
  if (agent.actor_encoder) blocks.push_back(&agent.actor_encoder->params());
  if (agent.critic_encoder) blocks.push_back(&agent.critic_encoder->params());
  blocks.push_back(&agent.head.log_std());
  Eigen::Index total = 0;
  for (const Vector* b : blocks) total += b->size();
  out << "params " << total << '\n';
  for (const Vector* b : blocks) {
    for (Eigen::Index i = 0; i < b->size(); ++i) out << shortest((*b)(i)) << '\n';
  }
}

void save_checkpoint(const Agent& agent, std::string_view env_id,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  save_checkpoint(agent, env_id, out);
  if (!out) throw std::runtime_error("error writing checkpoint: " + path.string());
}

LoadedCheckpoint load_checkpoint(std::istream& in) {
  std::string tag;
  int version = 0;
  {
    std::istringstream header(expect_line(in, "header"));
    header >> tag >> version;
  }
  if (tag != "aacc-checkpoint" || version != kCheckpointVersion) {
    throw std::runtime_error("not a version-" + std::to_string(kCheckpointVersion) +
                             " checkpoint");
  }
  LoadedCheckpoint ck;
  std::string key, variant_name, action_kind;
  int action_size = 0;
  std::istringstream(expect_line(in, "env")) >> key >> ck.env_id;
  std::istringstream(expect_line(in, "variant")) >> key >> variant_name;
  std::istringstream(expect_line(in, "action")) >> key >> action_kind >> action_size;

  std::vector<std::pair<std::string, std::vector<int>>> nets;
  long log_std_size = 0;
  for (;;) {
    std::istringstream ls(expect_line(in, "network header"));
    ls >> key;
    if (key == "net") {
      std::string name;
      ls >> name;
      std::vector<int> widths;
      for (int w; ls >> w;) widths.push_back(w);
      nets.emplace_back(name, widths);
    } else if (key == "log_std") {
      ls >> log_std_size;
      break;
    } else {
      throw std::runtime_error("unexpected checkpoint line: " + key);
    }
  }
  long total = 0;
  std::istringstream(expect_line(in, "params")) >> key >> total;

  auto env = envs::make_environment(ck.env_id);
  const ArchVariant variant = parse_variant(variant_name);
  NetworkShape shape;
  for (const auto& [name, widths] : nets) {
    if (name == "actor") {
      shape.hidden.assign(widths.begin() + 1, widths.end() - 1);
    } else if (name == "critic_encoder") {
      shape.encoder_hidden.assign(widths.begin() + 1, widths.end() - 1);
      shape.encoder_dim = widths.back();
    } else if (name == "actor_encoder") {
      shape.encoder_hidden.assign(widths.begin() + 1, widths.end() - 1);
      if (variant == ArchVariant::kAACCHybrid) {
        shape.actor_encoder_dim = widths.back();
      } else {
        shape.encoder_dim = widths.back();
      }
    }
  }
  Rng unused(0);
  ck.agent = Agent(variant, env->observation_dim(), env->action_space(), env->context_spec(),
                   shape, unused);
  Agent& a = ck.agent;
  auto check = [&](const Net& net, const std::string& name) {
    for (const auto& [n, widths] : nets) {
      if (n == name && widths == net.widths()) return;
    }
    throw std::runtime_error("checkpoint network " + name + " does not match its variant");
  };
  check(a.actor, "actor");
  check(a.critic, "critic");
  std::vector<Vector*> blocks{&a.actor.params(), &a.critic.params()};
  if (a.actor_encoder) {
    check(*a.actor_encoder, "actor_encoder");
    blocks.push_back(&a.actor_encoder->params());
  }
  if (a.critic_encoder) {
    check(*a.critic_encoder, "critic_encoder");
    blocks.push_back(&a.critic_encoder->params());
  }
  if (log_std_size != a.head.log_std().size()) {
    throw std::runtime_error("checkpoint log_std size does not match the action space");
  }
  blocks.push_back(&a.head.log_std());
  long expected = 0;
  for (Vector* b : blocks) expected += b->size();
  if (expected != total) throw std::runtime_error("checkpoint parameter count mismatch");

  for (Vector* b : blocks) {
    for (Eigen::Index i = 0; i < b->size(); ++i) {
      const std::string line = expect_line(in, "parameter value");
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
      if (ec != std::errc()) throw std::runtime_error("bad checkpoint value: " + line);
      (*b)(i) = v;
    }
  }
  return ck;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  return load_checkpoint(in);
}

}  // namespace aacc
