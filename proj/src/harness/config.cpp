#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

#include "aacc/envs.hpp"
#include "aacc/harness.hpp"

namespace aacc::harness {

namespace {

void check_keys(const YAML::Node& node, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

template <typename T>
T read(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": cannot parse value '" + YAML::Dump(node) + "'");
  }
}

template <typename T>
void read_opt(const YAML::Node& parent, const std::string& where, const std::string& key, T& out) {
  if (const auto n = parent[key]) out = read<T>(n, join(where, key));
}

std::vector<int> read_widths(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw ConfigError(path + ": expected a list");
  std::vector<int> out;
  for (const auto& n : node) out.push_back(read<int>(n, path));
  return out;
}

YAML::Node flow_sequence() {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

AdvantageEstimator parse_advantage(const std::string& s, const std::string& path) {
  if (s == "mc" || s == "monte_carlo") return AdvantageEstimator::kMonteCarlo;
  if (s == "gae") return AdvantageEstimator::kGae;
  throw ConfigError(path + ": expected 'mc' or 'gae', got '" + s + "'");
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

DistSpec parse_distribution(const YAML::Node& node) {
  if (!node.IsMap() || node.size() != 1) {
    throw ConfigError("distribution must be a single-key mapping, e.g. {uniform: [-30, 30]}");
  }
  const auto kind = node.begin()->first.as<std::string>();
  const YAML::Node v = node.begin()->second;
  const std::string path = "distribution " + kind;
  DistSpec dist;
  if (kind == "gaussian" || kind == "gaussian_multiplicative") {
    dist = GaussianMultiplicative{read<double>(v, path)};
  } else if (kind == "uniform") {
    if (!v.IsSequence() || v.size() != 2) throw ConfigError(path + ": expected [low, high]");
    dist = Uniform{read<double>(v[0], path), read<double>(v[1], path)};
  } else if (kind == "truncated_normal") {
    check_keys(v, path, {"mean", "std", "low", "high"});
    for (const char* k : {"mean", "std", "low", "high"}) {
      if (!v[k]) throw ConfigError(path + ": missing '" + k + "'");
    }
    dist = TruncatedNormal{read<double>(v["mean"], path), read<double>(v["std"], path),
                           read<double>(v["low"], path), read<double>(v["high"], path)};
  } else if (kind == "set") {
    if (!v.IsSequence()) throw ConfigError(path + ": expected a list");
    FiniteSet s;
    for (const auto& x : v) s.values.push_back(read<double>(x, path));
    dist = s;
  } else if (kind == "fixed") {
    dist = Fixed{read<double>(v, path)};
  } else {
    throw ConfigError("unknown distribution '" + kind + "'");
  }
  try {
    validate(dist);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return dist;
}

YAML::Node to_yaml(const DistSpec& dist) {
  YAML::Node n;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianMultiplicative>) {
          n["gaussian"] = format_number(d.std);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          auto s = flow_sequence();
          s.push_back(format_number(d.low));
          s.push_back(format_number(d.high));
          n["uniform"] = s;
        } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
          YAML::Node t;
          t.SetStyle(YAML::EmitterStyle::Flow);
          t["mean"] = format_number(d.mean);
          t["std"] = format_number(d.std);
          t["low"] = format_number(d.low);
          t["high"] = format_number(d.high);
          n["truncated_normal"] = t;
        } else if constexpr (std::is_same_v<T, FiniteSet>) {
          auto s = flow_sequence();
          for (double x : d.values) s.push_back(format_number(x));
          n["set"] = s;
        } else {
          n["fixed"] = format_number(d.value);
        }
      },
      dist);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

ContextSpec apply_context_overrides(const ContextSpec& spec, const YAML::Node& node) {
  if (!node) return spec;
  if (!node.IsMap()) throw ConfigError("contexts: expected a mapping of factor -> distribution");
  ContextSpec out = spec;
  if (const auto all = node["all"]) out = out.with_all_distributions(parse_distribution(all));
  for (const auto& kv : node) {
    const auto name = kv.first.as<std::string>();
    if (name == "all") continue;
    bool known = false;
    for (const auto& f : spec.factors()) known = known || f.name == name;
    if (!known) throw ConfigError("contexts: unknown factor '" + name + "'");
    try {
      out = out.with_distribution(name, parse_distribution(kv.second));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("contexts." + name + ": " + e.what());
    }
  }
  return out;
}

YAML::Node to_yaml(const ContextSpec& spec) {
  YAML::Node n(YAML::NodeType::Map);
  for (const auto& f : spec.factors()) n[f.name] = to_yaml(f.distribution);
  return n;
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv("AACC_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / dir;
  }
  return dir;
}

ExperimentConfig parse_config(const YAML::Node& root) {
  check_keys(root, "config",
             {"name", "env", "variant", "seeds", "total_env_steps", "stop_at_return", "jobs",
              "train", "network", "eval", "output"});
  ExperimentConfig cfg;
  read_opt(root, "", "name", cfg.name);
  if (!root["env"]) throw ConfigError("config: missing 'env'");
  cfg.env = read<std::string>(root["env"], "env");
  std::unique_ptr<Environment> env;
  try {
    env = envs::make_environment(cfg.env);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
  if (const auto v = root["variant"]) {
    try {
      cfg.variant = parse_variant(read<std::string>(v, "variant"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("variant: ") + e.what());
    }
  }
  if (const auto s = root["seeds"]) {
    if (!s.IsSequence()) throw ConfigError("seeds: expected a list");
    for (const auto& x : s) cfg.seeds.push_back(read<std::uint64_t>(x, "seeds"));
  }
  read_opt(root, "", "total_env_steps", cfg.total_env_steps);
  read_opt(root, "", "jobs", cfg.jobs);
  if (const auto v = root["stop_at_return"]) cfg.stop_at_return = read<double>(v, "stop_at_return");

  cfg.network.encoder_dim = envs::default_encoder_dim(cfg.env);
  cfg.train_contexts = env->context_spec();

  if (const auto t = root["train"]) {
    check_keys(t, "train",
               {"gamma", "clip", "epochs", "batch_size", "minibatch_size", "lr_actor", "lr_critic",
                "lr_encoder", "advantage", "gae_lambda", "entropy_coef", "standardize_advantages",
                "contexts", "schedule"});
    read_opt(t, "train", "gamma", cfg.train.gamma);
    read_opt(t, "train", "clip", cfg.train.clip);
    read_opt(t, "train", "epochs", cfg.train.epochs);
    read_opt(t, "train", "batch_size", cfg.train.batch_size);
    read_opt(t, "train", "minibatch_size", cfg.train.minibatch_size);
    read_opt(t, "train", "lr_actor", cfg.train.lr_actor);
    read_opt(t, "train", "lr_critic", cfg.train.lr_critic);
    read_opt(t, "train", "lr_encoder", cfg.train.lr_encoder);
    read_opt(t, "train", "gae_lambda", cfg.train.gae_lambda);
    read_opt(t, "train", "entropy_coef", cfg.train.entropy_coef);
    read_opt(t, "train", "standardize_advantages", cfg.train.standardize_advantages);
    if (const auto a = t["advantage"]) {
      cfg.train.advantage = parse_advantage(read<std::string>(a, "train.advantage"), "train.advantage");
    }
    if (const auto s = t["schedule"]) {
      if (cfg.env != "windy") throw ConfigError("train.schedule: schedules apply to the windy task only");
      try {
        cfg.train_contexts = apply_schedule(cfg.train_contexts, read<std::string>(s, "train.schedule"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("train.schedule: ") + e.what());
      }
    }
    cfg.train_contexts = apply_context_overrides(cfg.train_contexts, t["contexts"]);
  }

  if (const auto n = root["network"]) {
    check_keys(n, "network", {"hidden", "encoder_hidden", "encoder_dim", "actor_encoder_dim"});
    if (n["hidden"]) cfg.network.hidden = read_widths(n["hidden"], "network.hidden");
    if (n["encoder_hidden"]) cfg.network.encoder_hidden = read_widths(n["encoder_hidden"], "network.encoder_hidden");
    read_opt(n, "network", "encoder_dim", cfg.network.encoder_dim);
    read_opt(n, "network", "actor_encoder_dim", cfg.network.actor_encoder_dim);
  }

  cfg.eval_contexts = cfg.train_contexts;
  if (const auto e = root["eval"]) {
    check_keys(e, "eval", {"every_env_steps", "rollouts", "resample_probability", "contexts", "schedule"});
    read_opt(e, "eval", "every_env_steps", cfg.eval_every);
    read_opt(e, "eval", "rollouts", cfg.eval_rollouts);
    read_opt(e, "eval", "resample_probability", cfg.resample_probability);
    if (const auto s = e["schedule"]) {
      if (cfg.env != "windy") throw ConfigError("eval.schedule: schedules apply to the windy task only");
      try {
        cfg.eval_contexts = apply_schedule(env->context_spec(), read<std::string>(s, "eval.schedule"));
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("eval.schedule: ") + ex.what());
      }
    }
    cfg.eval_contexts = apply_context_overrides(cfg.eval_contexts, e["contexts"]);
  }

  if (const auto o = root["output"]) {
    check_keys(o, "output", {"dir", "wall_clock"});
    if (o["dir"]) cfg.output_dir = read<std::string>(o["dir"], "output.dir");
    read_opt(o, "output", "wall_clock", cfg.wall_clock);
  }
  if (cfg.output_dir.empty()) cfg.output_dir = std::filesystem::path("runs") / cfg.name;

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (env.empty()) throw ConfigError("env must be set");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (eval_every <= 0) throw ConfigError("eval.every_env_steps must be > 0");
  if (eval_rollouts < 1) throw ConfigError("eval.rollouts must be >= 1");
  if (total_env_steps <= 0) throw ConfigError("total_env_steps must be > 0");
  if (!(resample_probability >= 0.0 && resample_probability <= 1.0)) {
    throw ConfigError("eval.resample_probability must lie in [0, 1]");
  }
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (network.hidden.empty() || network.encoder_hidden.empty()) {
    throw ConfigError("network.hidden and network.encoder_hidden must be nonempty");
  }
  for (int w : network.hidden) {
    if (w < 1) throw ConfigError("network.hidden widths must be positive");
  }
  for (int w : network.encoder_hidden) {
    if (w < 1) throw ConfigError("network.encoder_hidden widths must be positive");
  }
  if (network.encoder_dim < 1) throw ConfigError("network.encoder_dim must be >= 1");
  if (network.actor_encoder_dim < 0) throw ConfigError("network.actor_encoder_dim must be >= 0");
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  const auto schema = envs::make_environment(env)->context_spec();
  if (train_contexts.size() != schema.size() || eval_contexts.size() != schema.size()) {
    throw ConfigError("context distributions do not match the environment factors");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config file: " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  for (const auto& [key, value] : overrides) {
    YAML::Node cur = root;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> path_parts;
    while (std::getline(parts, part, '.')) path_parts.push_back(part);
    if (path_parts.empty()) throw ConfigError("empty override key");
    for (std::size_t i = 0; i + 1 < path_parts.size(); ++i) {
      YAML::Node next = cur[path_parts[i]];
      if (!next.IsDefined() || next.IsNull()) cur[path_parts[i]] = YAML::Node(YAML::NodeType::Map);
      cur.reset(cur[path_parts[i]]);
    }
    try {
      cur[path_parts.back()] = YAML::Load(value);
    } catch (const YAML::Exception& e) {
      throw ConfigError("override " + key + ": " + e.what());
    }
  }
  return parse_config(root);
}

YAML::Node to_yaml(const ExperimentConfig& cfg) {
  YAML::Node n;
  n["name"] = cfg.name;
  n["env"] = cfg.env;
  n["variant"] = std::string(to_string(cfg.variant));
  auto seeds = flow_sequence();
  for (auto s : cfg.seeds) seeds.push_back(s);
  n["seeds"] = seeds;
  n["total_env_steps"] = cfg.total_env_steps;
  if (cfg.stop_at_return) n["stop_at_return"] = format_number(*cfg.stop_at_return);
  n["jobs"] = cfg.jobs;

  YAML::Node t;
  t["gamma"] = format_number(cfg.train.gamma);
  t["clip"] = format_number(cfg.train.clip);
  t["epochs"] = cfg.train.epochs;
  t["batch_size"] = cfg.train.batch_size;
  t["minibatch_size"] = cfg.train.minibatch_size;
  t["lr_actor"] = format_number(cfg.train.lr_actor);
  t["lr_critic"] = format_number(cfg.train.lr_critic);
  t["lr_encoder"] = format_number(cfg.train.lr_encoder);
  t["advantage"] = cfg.train.advantage == AdvantageEstimator::kGae ? "gae" : "mc";
  t["gae_lambda"] = format_number(cfg.train.gae_lambda);
  t["entropy_coef"] = format_number(cfg.train.entropy_coef);
  t["standardize_advantages"] = cfg.train.standardize_advantages;
  t["contexts"] = to_yaml(cfg.train_contexts);
  n["train"] = t;

  YAML::Node net;
  auto hidden = flow_sequence();
  for (int w : cfg.network.hidden) hidden.push_back(w);
  auto enc_hidden = flow_sequence();
  for (int w : cfg.network.encoder_hidden) enc_hidden.push_back(w);
  net["hidden"] = hidden;
  net["encoder_hidden"] = enc_hidden;
  net["encoder_dim"] = cfg.network.encoder_dim;
  net["actor_encoder_dim"] = cfg.network.actor_encoder_dim;
  n["network"] = net;

  YAML::Node e;
  e["every_env_steps"] = cfg.eval_every;
  e["rollouts"] = cfg.eval_rollouts;
  e["resample_probability"] = format_number(cfg.resample_probability);
  e["contexts"] = to_yaml(cfg.eval_contexts);
  n["eval"] = e;

  YAML::Node o;
  o["dir"] = cfg.output_dir.generic_string();
  o["wall_clock"] = cfg.wall_clock;
  n["output"] = o;
  return n;
}

std::string dump_yaml(const YAML::Node& node) {
  YAML::Emitter out;
  out << node;
  std::string s = out.c_str();
  s += '\n';
  return s;
}

}  // namespace aacc::harness
