// Command-line entry point: train, eval, verify, sweep, export-plots.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "aacc/envs.hpp"
#include "aacc/harness.hpp"
#include "aacc/verify.hpp"

namespace {

using namespace aacc;
namespace fs = std::filesystem;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw harness::ConfigError("expected key=value, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_progress(const harness::EvalRecord& r) {
  std::fprintf(stderr, "seed %llu  iter %4d  steps %8ld  eval mean %9.3f  [%9.3f, %9.3f]\n",
               static_cast<unsigned long long>(r.seed), r.iteration, r.env_steps, r.mean, r.min,
               r.max);
}

int cmd_train(const std::string& config, const std::vector<std::string>& sets,
              const std::string& seeds, const std::string& output, int jobs, bool quiet) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& s : sets) overrides.push_back(split_assignment(s));
  if (!seeds.empty()) overrides.emplace_back("seeds", "[" + seeds + "]");
  if (!output.empty()) overrides.emplace_back("output.dir", output);
  if (jobs > 0) overrides.emplace_back("jobs", std::to_string(jobs));
  const auto cfg = harness::load_config(config, overrides);
  const fs::path dir = harness::resolve_output_dir(cfg.output_dir);
  const auto result = harness::run_experiment(cfg, quiet ? harness::ProgressFn{} : print_progress);
  harness::emit_results(result, dir);
  const auto rows = harness::aggregate(result.runs);
  std::cout << "wrote " << dir.string() << "\n"
            << "final mean " << harness::format_number(rows.back().mean) << " min "
            << harness::format_number(rows.back().min) << " max "
            << harness::format_number(rows.back().max) << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config, int rollouts,
             std::uint64_t seed, double resample, double threshold) {
  const auto cfg = harness::load_config(config);
  auto loaded = load_checkpoint(fs::path(checkpoint));
  if (loaded.env_id != cfg.env) {
    throw harness::ConfigError("checkpoint was trained on '" + loaded.env_id + "' but the config uses '" +
                               cfg.env + "'");
  }
  auto env = envs::make_environment(cfg.env);
  const int n = rollouts > 0 ? rollouts : cfg.eval_rollouts;
  const double p = resample >= 0.0 ? resample : cfg.resample_probability;
  Rng rng = make_rng(seed, "eval-cli");
  YAML::Node out;
  out["checkpoint"] = checkpoint;
  out["env"] = cfg.env;
  out["variant"] = std::string(to_string(loaded.agent.variant));
  out["eval_contexts"] = cfg.eval_contexts.fingerprint();
  out["rollouts"] = n;
  if (p > 0.0) {
    const auto res =
        harness::continuous_adaptation_eval(loaded.agent, *env, cfg.eval_contexts, p, n, rng, threshold);
    out["resample_probability"] = harness::format_number(p);
    out["success_ratio"] = harness::format_number(res.success_ratio);
    out["context_changes"] = res.context_changes;
    out["mean"] = harness::format_number(res.record.mean);
    out["min"] = harness::format_number(res.record.min);
    out["max"] = harness::format_number(res.record.max);
    out["std"] = harness::format_number(res.record.std);
  } else {
    const auto rec = harness::evaluate(loaded.agent, *env, cfg.eval_contexts, n, rng);
    out["mean"] = harness::format_number(rec.mean);
    out["min"] = harness::format_number(rec.min);
    out["max"] = harness::format_number(rec.max);
    out["std"] = harness::format_number(rec.std);
  }
  std::cout << harness::dump_yaml(out);
  return 0;
}

int cmd_verify(const verify::Options& options) {
  const auto report = verify::run_verification(options);
  std::cout << report.text();
  return report.passed() ? 0 : kExitFailure;
}

int cmd_sweep(const std::string& config, const std::string& vary, bool quiet) {
  const auto [key, values] = split_assignment(vary);
  const auto list = split_list(values);
  const auto points =
      harness::sweep(config, key, list, quiet ? harness::ProgressFn{} : print_progress);
  for (const auto& p : points) {
    std::cout << key << '=' << p.value << "  " << (p.dir / "aggregate.csv").string() << "  final mean "
              << harness::format_number(p.rows.back().mean) << "\n";
  }
  return 0;
}

int cmd_export(const std::string& run_dir) {
  for (const auto& f : harness::export_plots(run_dir)) std::cout << f.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymmetric actor-critic with a context-aware critic: training and evaluation"};
  app.require_subcommand(1);

  std::string config, checkpoint, seeds, output, vary, run_dir;
  std::vector<std::string> sets;
  int jobs = 0;
  bool quiet = false;

  auto* train = app.add_subcommand("train", "Train every seed of a config and write results");
  train->add_option("config", config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  train->add_option("--set", sets, "Override a config key, e.g. --set train.epochs=10");
  train->add_option("--seeds", seeds, "Comma-separated seeds replacing the config list");
  train->add_option("--output", output, "Output directory (relative to $AACC_OUTPUT_ROOT if set)");
  train->add_option("--jobs", jobs, "Seeds trained concurrently");
  train->add_flag("--quiet", quiet, "No per-evaluation progress");

  int rollouts = 0;
  std::uint64_t eval_seed = 0;
  double resample = -1.0;
  double threshold = harness::kWindySuccessHeadingError;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a config's eval distribution");
  eval->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("config", config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  eval->add_option("--rollouts", rollouts, "Episodes (default: config eval.rollouts)");
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--resample", resample, "Mid-episode context resampling probability");
  eval->add_option("--success-threshold", threshold, "Success threshold for the adaptation ratio");

  verify::Options vopts;
  auto* ver = app.add_subcommand("verify", "Run the tabular oracle and gradient checks");
  ver->add_option("--instances", vopts.instances, "Random tabular instances");
  ver->add_option("--seed", vopts.seed, "Instance seed");
  ver->add_option("--mc-episodes", vopts.mc_episodes, "Monte Carlo episodes per start (0 skips)");
  ver->add_option("--gradient-configs", vopts.gradient_configs, "Random network configurations");

  auto* sw = app.add_subcommand("sweep", "Train one experiment per value of a config key");
  sw->add_option("config", config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  sw->add_option("--vary", vary, "key=v1,v2,... e.g. network.encoder_dim=1,3,8")->required();
  sw->add_flag("--quiet", quiet, "No per-evaluation progress");

  auto* ex = app.add_subcommand("export-plots", "Write plot-ready CSVs for a run or sweep directory");
  ex->add_option("run-dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train(config, sets, seeds, output, jobs, quiet);
    if (*eval) return cmd_eval(checkpoint, config, rollouts, eval_seed, resample, threshold);
    if (*ver) return cmd_verify(vopts);
    if (*sw) return cmd_sweep(config, vary, quiet);
    if (*ex) return cmd_export(run_dir);
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
