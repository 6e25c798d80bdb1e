#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "aacc/envs.hpp"
#include "aacc/harness.hpp"

namespace aacc::harness {

namespace fs = std::filesystem;

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const ProgressFn& progress) {
  cfg.validate();
  auto env = envs::make_environment(cfg.env);
  auto eval_env = env->clone();
  Rng init_rng = make_rng(seed, "init");
  Agent agent(cfg.variant, env->observation_dim(), env->action_space(), env->context_spec(),
              cfg.network, init_rng);
  PpoTrainer trainer(std::move(agent), cfg.train);
  Rng train_rng = make_rng(seed, "train");

  SeedRun run;
  run.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t eval_index = 0;
  auto do_eval = [&](long cadence_step) {
    Rng rng = make_rng(seed, "eval", eval_index++);
    EvalRecord rec = evaluate(trainer.agent(), *eval_env, cfg.eval_contexts, cfg.eval_rollouts, rng);
    rec.seed = seed;
    rec.iteration = trainer.iterations();
    rec.env_steps = trainer.env_steps();
    rec.cadence_step = cadence_step;
    if (cfg.wall_clock) {
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (cfg.stop_at_return && rec.mean >= *cfg.stop_at_return) run.stopped_early = true;
    if (progress) progress(rec);
    run.records.push_back(std::move(rec));
  };

  do_eval(0);
  long next_boundary = cfg.eval_every;
  bool evaluated_last = true;
  while (trainer.env_steps() < cfg.total_env_steps && !run.stopped_early) {
    trainer.train_iteration(*env, cfg.train_contexts, train_rng);
    evaluated_last = false;
    if (trainer.env_steps() >= next_boundary) {
      const long k = trainer.env_steps() / cfg.eval_every;
      do_eval(k * cfg.eval_every);
      next_boundary = (k + 1) * cfg.eval_every;
      evaluated_last = true;
    }
  }
  if (!evaluated_last) do_eval(std::max(cfg.total_env_steps, run.records.back().cadence_step + 1));

  if (cfg.resample_probability > 0.0) {
    Rng rng = make_rng(seed, "adaptation");
    run.adaptation = continuous_adaptation_eval(trainer.agent(), *eval_env, cfg.eval_contexts,
                                                cfg.resample_probability, cfg.eval_rollouts, rng);
  }
  run.env_steps = trainer.env_steps();
  run.iterations = trainer.iterations();
  run.agent = trainer.agent();
  return run;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.runs.resize(cfg.seeds.size());
  std::mutex progress_mutex;
  ProgressFn guarded;
  if (progress) {
    guarded = [&](const EvalRecord& r) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(r);
    };
  }
  const int workers = std::min<int>(cfg.jobs, static_cast<int>(cfg.seeds.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) result.runs[i] = run_seed(cfg, cfg.seeds[i], guarded);
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
        try {
          result.runs[i] = run_seed(cfg, cfg.seeds[i], guarded);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

// Each seed contributes its latest record at or before every evaluation
// boundary seen in any seed.
std::vector<AggregateRow> aggregate(const std::vector<SeedRun>& runs) {
  std::set<long> steps;
  for (const auto& r : runs) {
    for (const auto& rec : r.records) steps.insert(rec.cadence_step);
  }
  std::vector<AggregateRow> rows;
  for (long step : steps) {
    AggregateRow row;
    row.cadence_step = step;
    double sum = 0.0;
    for (const auto& r : runs) {
      const EvalRecord* latest = nullptr;
      for (const auto& rec : r.records) {
        if (rec.cadence_step <= step) latest = &rec;
      }
      if (latest == nullptr) continue;
      if (row.seeds == 0) {
        row.min = row.max = latest->mean;
      } else {
        row.min = std::min(row.min, latest->mean);
        row.max = std::max(row.max, latest->mean);
      }
      sum += latest->mean;
      ++row.seeds;
    }
    if (row.seeds == 0) continue;
    row.mean = std::clamp(sum / row.seeds, row.min, row.max);
    rows.push_back(row);
  }
  return rows;
}

std::string seed_csv(const std::vector<EvalRecord>& records) {
  std::string s(kSeedCsvHeader);
  s += '\n';
  for (const auto& r : records) {
    s += std::to_string(r.iteration) + ',' + std::to_string(r.env_steps) + ',' +
         format_number(r.mean) + ',' + format_number(r.min) + ',' + format_number(r.max) + ',' +
         format_number(r.std) + ',' + format_number(r.wall_time_s) + '\n';
  }
  return s;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string s(kAggregateCsvHeader);
  s += '\n';
  for (const auto& r : rows) {
    s += std::to_string(r.cadence_step) + ',' + std::to_string(r.seeds) + ',' +
         format_number(r.mean) + ',' + format_number(r.min) + ',' + format_number(r.max) + '\n';
  }
  return s;
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

YAML::Node stats_node(const EvalRecord& r) {
  YAML::Node n;
  n.SetStyle(YAML::EmitterStyle::Flow);
  n["mean"] = format_number(r.mean);
  n["min"] = format_number(r.min);
  n["max"] = format_number(r.max);
  n["std"] = format_number(r.std);
  return n;
}

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

}  // namespace

void emit_results(const ExperimentResult& result, const fs::path& dir) {
  if (result.runs.empty()) throw std::invalid_argument("emit_results needs at least one run");
  YAML::Node summary;
  summary["config"] = to_yaml(result.config);
  summary["train_contexts"] = result.config.train_contexts.fingerprint();
  summary["eval_contexts"] = result.config.eval_contexts.fingerprint();
  YAML::Node seeds(YAML::NodeType::Sequence);
  for (const auto& run : result.runs) {
    if (run.records.empty()) throw std::invalid_argument("emit_results: seed without records");
    const std::string sub = seed_dir_name(run.seed);
    write_text_file(dir / sub / "eval.csv", seed_csv(run.records));
    std::ostringstream ckpt;
    save_checkpoint(run.agent, result.config.env, ckpt);
    write_text_file(dir / sub / "checkpoint.txt", ckpt.str());

    YAML::Node s;
    s["seed"] = run.seed;
    s["env_steps"] = run.env_steps;
    s["iterations"] = run.iterations;
    s["evaluations"] = run.records.size();
    s["stopped_early"] = run.stopped_early;
    s["final"] = stats_node(run.records.back());
    double best = run.records.front().mean;
    for (const auto& r : run.records) best = std::max(best, r.mean);
    s["best_mean"] = format_number(best);
    s["csv"] = sub + "/eval.csv";
    s["checkpoint"] = sub + "/checkpoint.txt";
    if (run.adaptation) {
      YAML::Node a;
      a["resample_probability"] = format_number(result.config.resample_probability);
      a["success_ratio"] = format_number(run.adaptation->success_ratio);
      a["context_changes"] = run.adaptation->context_changes;
      a["returns"] = stats_node(run.adaptation->record);
      s["adaptation"] = a;
    }
    seeds.push_back(s);
  }
  summary["seeds"] = seeds;
  const auto rows = aggregate(result.runs);
  write_text_file(dir / "aggregate.csv", aggregate_csv(rows));
  summary["aggregate"] = "aggregate.csv";
  if (!rows.empty()) {
    YAML::Node f;
    f.SetStyle(YAML::EmitterStyle::Flow);
    f["cadence_step"] = rows.back().cadence_step;
    f["mean"] = format_number(rows.back().mean);
    f["min"] = format_number(rows.back().min);
    f["max"] = format_number(rows.back().max);
    summary["final_aggregate"] = f;
  }
  write_text_file(dir / "summary.yaml", dump_yaml(summary));
}

std::vector<SweepPoint> sweep(const fs::path& config_path, const std::string& key,
                              const std::vector<std::string>& values, const ProgressFn& progress) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const ExperimentConfig base = load_config(config_path);
  const std::string label = key.substr(key.find_last_of('.') + 1);
  std::vector<SweepPoint> points;
  std::string table = "value,final_mean,final_min,final_max\n";
  for (const auto& value : values) {
    ExperimentConfig cfg = load_config(config_path, {{key, value}});
    cfg.output_dir = base.output_dir / (label + "_" + value);
    const fs::path dir = resolve_output_dir(cfg.output_dir);
    ExperimentResult result = run_experiment(cfg, progress);
    emit_results(result, dir);
    SweepPoint p{value, dir, aggregate(result.runs)};
    const auto& last = p.rows.back();
    table += value + ',' + format_number(last.mean) + ',' + format_number(last.min) + ',' +
             format_number(last.max) + '\n';
    points.push_back(std::move(p));
  }
  write_text_file(resolve_output_dir(base.output_dir) / "sweep.csv", table);
  return points;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::vector<fs::path> export_plots(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw std::runtime_error("not a run directory: " + run_dir.string());
  std::vector<std::pair<std::string, fs::path>> runs;
  if (fs::exists(run_dir / "aggregate.csv")) runs.emplace_back("run", run_dir);
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "aggregate.csv")) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) runs.emplace_back(d.filename().string(), d);
  if (runs.empty()) throw std::runtime_error("no aggregate.csv under " + run_dir.string());

  const fs::path out_dir = run_dir / "plots";
  std::vector<fs::path> written;
  std::string finals = "run,cadence_step,final_mean,final_min,final_max\n";
  for (const auto& [name, dir] : runs) {
    const auto agg = read_csv(dir / "aggregate.csv");
    std::string band = "env_steps,mean,min,max\n";
    for (std::size_t i = 1; i < agg.size(); ++i) {
      if (agg[i].size() != 5) throw std::runtime_error("malformed aggregate.csv in " + dir.string());
      band += agg[i][0] + ',' + agg[i][2] + ',' + agg[i][3] + ',' + agg[i][4] + '\n';
    }
    if (agg.size() > 1) {
      const auto& last = agg.back();
      finals += name + ',' + last[0] + ',' + last[2] + ',' + last[3] + ',' + last[4] + '\n';
    }
    write_text_file(out_dir / (name + "_band.csv"), band);
    written.push_back(out_dir / (name + "_band.csv"));

    std::vector<fs::path> seed_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "eval.csv")) seed_dirs.push_back(entry.path());
    }
    std::sort(seed_dirs.begin(), seed_dirs.end());
    std::string curves = "seed,env_steps,eval_mean,eval_min,eval_max\n";
    for (const auto& sd : seed_dirs) {
      const std::string seed = sd.filename().string().substr(std::string("seed_").size());
      const auto rows = read_csv(sd / "eval.csv");
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 7) throw std::runtime_error("malformed eval.csv in " + sd.string());
        curves += seed + ',' + rows[i][1] + ',' + rows[i][2] + ',' + rows[i][3] + ',' + rows[i][4] + '\n';
      }
    }
    write_text_file(out_dir / (name + "_seeds.csv"), curves);
    written.push_back(out_dir / (name + "_seeds.csv"));
  }
  write_text_file(out_dir / "final_returns.csv", finals);
  written.push_back(out_dir / "final_returns.csv");
  if (fs::exists(run_dir / "sweep.csv")) {
    write_text_file(out_dir / "sweep.csv", read_text_file(run_dir / "sweep.csv"));
    written.push_back(out_dir / "sweep.csv");
  }
  return written;
}

}  // namespace aacc::harness
