#pragma once

// Experiment orchestration: YAML configs, seeded multi-run training with
// periodic evaluation, randomization schedules, continuous adaptation,
// result files and sweeps.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aacc/cmdp.hpp"
#include "aacc/ppo.hpp"

namespace aacc::harness {

/// Raised for invalid configurations; the CLI maps it to a usage exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string env;
  ArchVariant variant = ArchVariant::kAACC;
  TrainConfig train;
  NetworkShape network;
  std::vector<std::uint64_t> seeds;
  ContextSpec train_contexts;
  ContextSpec eval_contexts;
  long total_env_steps = 0;
  long eval_every = 0;       // env steps between evaluations
  int eval_rollouts = 30;
  double resample_probability = 0.0;  // mid-episode context resampling during eval
  std::optional<double> stop_at_return;  // stop a seed once an eval mean reaches this
  std::filesystem::path output_dir;
  bool wall_clock = false;  // record real wall time (breaks byte-identical output)
  int jobs = 1;             // seeds trained concurrently

  void validate() const;
};

// DistSpec <-> YAML: {gaussian: std}, {uniform: [lo, hi]},
// {truncated_normal: {mean, std, low, high}}, {set: [...]}, {fixed: v}.
DistSpec parse_distribution(const YAML::Node& node);
YAML::Node to_yaml(const DistSpec& dist);
// Applies per-factor overrides from a map {factor: dist, all: dist} to a
// schema; `all` is applied first.
ContextSpec apply_context_overrides(const ContextSpec& spec, const YAML::Node& node);
YAML::Node to_yaml(const ContextSpec& spec);

ExperimentConfig parse_config(const YAML::Node& root);
// Loads a config file, applying dotted-key overrides ("network.encoder_dim")
// before parsing.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});
YAML::Node to_yaml(const ExperimentConfig& cfg);
std::string dump_yaml(const YAML::Node& node);

// Output paths relative to $AACC_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

struct EvalRecord {
  std::uint64_t seed = 0;
  int iteration = 0;
  long env_steps = 0;
  long cadence_step = 0;  // evaluation boundary this record belongs to
  std::vector<double> returns;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // population
  double wall_time_s = 0.0;
  std::string context_fingerprint;  // distribution the contexts were drawn from
};

EvalRecord summarize_returns(std::vector<double> returns);

// n episodes with a fresh context per episode from `eval_dist` and
// stochastic actions.
EvalRecord evaluate(const Agent& agent, Environment& env, const ContextSpec& eval_dist,
                    int rollouts, Rng& rng);

// WindyPointMass only. Fix1, Fix2, Random1, Random2, Random3, Uniform.
std::vector<std::pair<std::string, DistSpec>> randomization_schedule(std::string_view name);
const std::vector<std::string>& schedule_names();
ContextSpec apply_schedule(const ContextSpec& windy_spec, std::string_view name);

struct AdaptationResult {
  EvalRecord record;
  std::vector<bool> success;
  double success_ratio = 0.0;
  long context_changes = 0;
};

// Default success threshold for the per-environment predicate (mean heading
// error for the windy task).
inline constexpr double kWindySuccessHeadingError = 0.1;

// Like evaluate, but after every step the context is resampled from
// `eval_dist` with probability p. Success: windy mean heading error below
// `success_threshold`; cartpole survives the horizon; acrobot reaches the
// goal; pendulum return at least `success_threshold`.
AdaptationResult continuous_adaptation_eval(const Agent& agent, Environment& env,
                                            const ContextSpec& eval_dist, double p, int rollouts,
                                            Rng& rng,
                                            double success_threshold = kWindySuccessHeadingError);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EvalRecord> records;
  std::optional<AdaptationResult> adaptation;
  Agent agent;
  long env_steps = 0;
  int iterations = 0;
  bool stopped_early = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRun> runs;
};

using ProgressFn = std::function<void(const EvalRecord&)>;

// Evaluates at step 0, after every iteration that crosses a cadence
// boundary, and once more at the end if the last iteration did not.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});
SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const ProgressFn& progress = {});

struct AggregateRow {
  long cadence_step = 0;
  int seeds = 0;
  double mean = 0.0;  // mean over seeds of eval_mean
  double min = 0.0;   // min over seeds of eval_mean
  double max = 0.0;
};
std::vector<AggregateRow> aggregate(const std::vector<SeedRun>& runs);

inline constexpr std::string_view kSeedCsvHeader =
    "iteration,env_steps,eval_mean,eval_min,eval_max,eval_std,wall_time_s";
inline constexpr std::string_view kAggregateCsvHeader = "cadence_step,seeds,mean,min,max";

std::string format_number(double value);
std::string seed_csv(const std::vector<EvalRecord>& records);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

// Writes seed_<s>/eval.csv, seed_<s>/checkpoint.txt, aggregate.csv and
// summary.yaml under `dir`. Throws std::runtime_error naming the path on
// I/O failure.
void emit_results(const ExperimentResult& result, const std::filesystem::path& dir);

struct SweepPoint {
  std::string value;
  std::filesystem::path dir;
  std::vector<AggregateRow> rows;
};

// One experiment per value of a dotted config key; each lands in
// <output>/<key>_<value>/, with sweep.csv summarizing final aggregates.
std::vector<SweepPoint> sweep(const std::filesystem::path& config_path, const std::string& key,
                              const std::vector<std::string>& values,
                              const ProgressFn& progress = {});

// Scans a run directory (or a sweep of them) and writes plot-ready CSVs into
// <run-dir>/plots. Returns the files written.
std::vector<std::filesystem::path> export_plots(const std::filesystem::path& run_dir);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace aacc::harness
