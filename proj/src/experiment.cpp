#include "mcl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mcl/error.hpp"
#include "mcl/neural_policy.hpp"
#include "mcl/parallel.hpp"
#include "mcl/report.hpp"
#include "mcl/tabular_mdp.hpp"
#include "mcl/text_config.hpp"

namespace mcl {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) {
      out.push_back(item.substr(b, e - b + 1));
    }
  }
  return out;
}

int int_in(const TextConfig& cfg, const std::string& section, const std::string& key, int fallback,
           std::int64_t lo, std::int64_t hi) {
  const auto* e = cfg.find(section, key);
  if (e == nullptr) {
    return fallback;
  }
  const auto v = cfg.get_int(section, key);
  if (v < lo || v > hi) {
    cfg.fail(*e, "must be in " + std::to_string(lo) + ".." + std::to_string(hi));
  }
  return static_cast<int>(v);
}

double real_in(const TextConfig& cfg, const std::string& section, const std::string& key,
               double fallback, double lo, double hi, bool open_lo, bool open_hi) {
  const auto* e = cfg.find(section, key);
  if (e == nullptr) {
    return fallback;
  }
  const double v = cfg.get_double(section, key);
  const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
  if (!ok) {
    cfg.fail(*e, std::string("must lie in ") + (open_lo ? "(" : "[") + format_double(lo) + ", " +
                     format_double(hi) + (open_hi ? ")" : "]"));
  }
  return v;
}

void reject_unknown_sections(const TextConfig& cfg, const std::vector<std::string>& allowed) {
  for (const auto& e : cfg.entries()) {
    if (std::find(allowed.begin(), allowed.end(), e.section) == allowed.end()) {
      cfg.fail(e, e.section.empty() ? "key outside any section"
                                    : "unknown section [" + e.section + "]");
    }
  }
}

ExperimentConfig experiment_from_config(const TextConfig& cfg) {
  ExperimentConfig out;
  out.instance = instance_from_config(cfg, "instance");

  cfg.reject_unknown("mcl", {"generations", "samples", "explore_prob", "walks", "seed", "workers"});
  out.generations = int_in(cfg, "mcl", "generations", out.generations, 1, 1000);
  auto& col = out.collection;
  col.total_samples = int_in(cfg, "mcl", "samples", col.total_samples, 1, 100000000);
  col.explore_prob = real_in(cfg, "mcl", "explore_prob", col.explore_prob, 0.0, 1.0, false, false);
  col.walks = int_in(cfg, "mcl", "walks", col.walks, 1, 1000000);
  col.worker_count = int_in(cfg, "mcl", "workers", default_worker_count(1), 1, 4096);
  if (cfg.has("mcl", "seed")) {
    out.seed = cfg.get_u64("mcl", "seed");
  }

  cfg.reject_unknown("racing", {"n_min", "n_max", "epsilon"});
  auto& rc = col.racing;
  rc.n_min = int_in(cfg, "racing", "n_min", rc.n_min, 2, 100000000);
  rc.n_max = int_in(cfg, "racing", "n_max", rc.n_max, 2, 100000000);
  if (rc.n_max < rc.n_min) {
    cfg.fail(*cfg.find("racing", cfg.has("racing", "n_max") ? "n_max" : "n_min"),
             "n_max must be at least n_min");
  }
  rc.epsilon = real_in(cfg, "racing", "epsilon", rc.epsilon, 0.0, 0.5, true, true);

  cfg.reject_unknown("train", {"hidden", "minibatch_size", "test_fraction", "eval_every",
                               "patience", "max_epochs", "step_size", "beta1", "beta2",
                               "adam_epsilon"});
  auto& tc = out.train;
  if (const auto* e = cfg.find("train", "hidden")) {
    tc.hidden.clear();
    for (const auto& item : split_list(e->value)) {
      int width = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), width);
      if (ec != std::errc{} || ptr != item.data() + item.size() || width < 1) {
        cfg.fail(*e, "expected a comma-separated list of positive widths");
      }
      tc.hidden.push_back(width);
    }
  }
  tc.minibatch_size = int_in(cfg, "train", "minibatch_size", tc.minibatch_size, 1, 1000000);
  tc.test_fraction = real_in(cfg, "train", "test_fraction", tc.test_fraction, 0.0, 1.0, true, true);
  tc.eval_every = int_in(cfg, "train", "eval_every", tc.eval_every, 1, 1000000);
  tc.patience = int_in(cfg, "train", "patience", tc.patience, 1, 1000000);
  if (tc.patience % tc.eval_every != 0) {
    cfg.fail(*cfg.find("train", cfg.has("train", "patience") ? "patience" : "eval_every"),
             "patience must be a multiple of eval_every");
  }
  tc.max_epochs = int_in(cfg, "train", "max_epochs", tc.max_epochs, 1, 10000000);
  tc.adam.step_size =
      real_in(cfg, "train", "step_size", tc.adam.step_size, 0.0, 1e6, true, false);
  tc.adam.beta1 = real_in(cfg, "train", "beta1", tc.adam.beta1, 0.0, 1.0, false, true);
  tc.adam.beta2 = real_in(cfg, "train", "beta2", tc.adam.beta2, 0.0, 1.0, false, true);
  tc.adam.epsilon = real_in(cfg, "train", "adam_epsilon", tc.adam.epsilon, 0.0, 1.0, true, false);

  cfg.reject_unknown("solver", {"tol", "max_iterations"});
  out.solver.tol = real_in(cfg, "solver", "tol", out.solver.tol, 0.0, 1.0, true, false);
  out.solver.max_iterations =
      int_in(cfg, "solver", "max_iterations", out.solver.max_iterations, 1, 1000000000);
  out.solver.workers = col.worker_count;
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string gen_name(int g, const char* what) {
  return "gen" + std::to_string(g) + "_" + what;
}

void add_row(GapReport& report, const std::string& name, const std::string& detail, double gain) {
  report.rows.push_back({report.instance_id, name, detail, gain, report.optimal_gain,
                         gap_percent(gain, report.optimal_gain)});
}

void run_mcl_into(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log,
                  MclResult& result) {
  cfg.validate();
  auto& report = result.report;
  report.instance_id = instance_id(cfg.instance);
  report.instance_hash = instance_hash(cfg.instance);

  const bool persist = !out_dir.empty();
  const fs::path dir(out_dir);
  const auto flush = [&] {
    if (persist) {
      write_file(dir / "gap_report.csv", write_gap_csv({report}));
      write_file(dir / "timings.csv", write_timings_csv({report}));
    }
  };
  const auto say = [&](const std::string& line) {
    if (log != nullptr) {
      *log << "[" << report.instance_id << "] " << line << std::endl;
    }
  };

  if (persist) {
    fs::create_directories(dir);
    write_file(dir / "instance.txt", write_instance(cfg.instance));
    write_file(dir / "experiment.txt", write_experiment(cfg));
  }

  try {
    const LostSalesModel model(cfg.instance);
    Stopwatch clock;
    const LostSalesMdp mdp(model);
    const auto optimal = solve_optimal_average_cost(mdp, cfg.solver);
    report.optimal_gain = optimal.gain;
    report.timings.push_back({"solve_optimal", clock.seconds()});
    say("optimal gain " + format_double(optimal.gain) + " over " + std::to_string(mdp.size()) +
        " states");

    clock = Stopwatch();
    const auto bs = best_base_stock(mdp, cfg.solver);
    report.base_stock_level = bs.level;
    add_row(report, "best_base_stock", "S=" + std::to_string(bs.level), bs.gain);
    report.timings.push_back({"base_stock", clock.seconds()});
    say("best base-stock S=" + std::to_string(bs.level) + " gap " +
        format_double(report.rows.back().gap_percent) + "%");

    std::shared_ptr<const Policy> current = std::make_shared<LargestActionPolicy>(model);
    add_row(report, "pi0", "largest_order",
            evaluate_policy_average(mdp, tabulate(mdp, *current), cfg.solver));
    flush();

    const RngKey master(cfg.seed);
    double best_gain = std::numeric_limits<double>::infinity();
    for (int g = 1; g <= cfg.generations; ++g) {
      clock = Stopwatch();
      CollectionStats stats;
      const auto samples =
          collect(model, *current, cfg.collection, master.derive(1, static_cast<std::uint64_t>(g)),
                  g - 1, &stats);
      const double t_collect = clock.seconds();
      result.collection_stats.push_back(stats);
      if (persist) {
        write_file(dir / gen_name(g, "samples.csv"), write_samples_csv(samples));
        write_file(dir / gen_name(g, "samples.provenance.json"), write_provenance_json(samples));
      }
      say("generation " + std::to_string(g) + ": " + std::to_string(samples.samples.size()) +
          " samples, " + std::to_string(stats.rollouts) + " rollouts, " +
          std::to_string(stats.stopped_at_budget) + " races hit n_max, " +
          format_double(t_collect) + " s");

      clock = Stopwatch();
      auto trained =
          train(model, samples, cfg.train, master.derive(2, static_cast<std::uint64_t>(g)));
      const double t_train = clock.seconds();
      trained.artifact.instance_hash = report.instance_hash;
      auto artifact = std::make_shared<const NeuralPolicyArtifact>(std::move(trained.artifact));
      result.train_reports.push_back(trained.report);
      if (persist) {
        write_file(dir / gen_name(g, "policy.txt"), write_artifact(*artifact));
        write_file(dir / gen_name(g, "train.csv"), write_train_report_csv(trained.report));
      }
      say("generation " + std::to_string(g) + ": trained " +
          std::to_string(trained.report.epochs_run) + " epochs, best test loss " +
          format_double(trained.report.best_test_loss) + " at epoch " +
          std::to_string(trained.report.best_epoch) + ", " + format_double(t_train) + " s");

      clock = Stopwatch();
      auto policy = std::make_shared<const NeuralPolicy>(model, artifact);
      const double gain = evaluate_policy_average(mdp, tabulate(mdp, *policy), cfg.solver);
      const double t_eval = clock.seconds();
      add_row(report, "mcl_gen" + std::to_string(g), "generation=" + std::to_string(g), gain);
      report.timings.push_back({gen_name(g, "collect"), t_collect});
      report.timings.push_back({gen_name(g, "train"), t_train});
      report.timings.push_back({gen_name(g, "evaluate"), t_eval});
      say("generation " + std::to_string(g) + ": gain " + format_double(gain) + " gap " +
          format_double(report.rows.back().gap_percent) + "%");

      if (gain < best_gain) {
        best_gain = gain;
        report.best_generation = g;
        result.best = artifact;
      }
      current = policy;
      flush();
    }
    add_row(report, "mcl_best", "generation=" + std::to_string(report.best_generation),
            best_gain);
    if (persist) {
      write_file(dir / "best_policy.txt", write_artifact(*result.best));
    }
    flush();
  } catch (const std::exception& e) {
    report.error = e.what();
    flush();
    throw;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  instance.validate();
  if (generations < 1) {
    throw ValidationError("experiment: generations must be at least 1");
  }
  collection.validate();
  train.validate();
  if (!(solver.tol > 0.0) || solver.max_iterations < 1) {
    throw ValidationError("experiment: invalid solver options");
  }
}

void ExperimentConfig::set_workers(int workers) {
  if (workers < 1) {
    throw ValidationError("workers must be at least 1");
  }
  collection.worker_count = workers;
  solver.workers = workers;
}

ExperimentConfig parse_experiment(const std::string& text, const std::string& source) {
  const auto cfg = TextConfig::parse(text, source);
  reject_unknown_sections(cfg, {"instance", "mcl", "racing", "train", "solver"});
  return experiment_from_config(cfg);
}

ExperimentConfig load_experiment(const std::string& path) {
  const auto cfg = TextConfig::load(path);
  reject_unknown_sections(cfg, {"instance", "mcl", "racing", "train", "solver"});
  return experiment_from_config(cfg);
}

std::string write_experiment(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "# mcl experiment v1\n[instance]\n";
  const auto inst = write_instance(cfg.instance);
  out << inst.substr(inst.find('\n') + 1);
  const auto& col = cfg.collection;
  out << "\n[mcl]\n"
      << "generations = " << cfg.generations << "\n"
      << "samples = " << col.total_samples << "\n"
      << "explore_prob = " << format_double(col.explore_prob) << "\n"
      << "walks = " << col.walks << "\n"
      << "seed = " << cfg.seed << "\n";
  out << "\n[racing]\n"
      << "n_min = " << col.racing.n_min << "\n"
      << "n_max = " << col.racing.n_max << "\n"
      << "epsilon = " << format_double(col.racing.epsilon) << "\n";
  const auto& tc = cfg.train;
  out << "\n[train]\nhidden = ";
  for (std::size_t k = 0; k < tc.hidden.size(); ++k) {
    out << (k ? "," : "") << tc.hidden[k];
  }
  out << "\n"
      << "minibatch_size = " << tc.minibatch_size << "\n"
      << "test_fraction = " << format_double(tc.test_fraction) << "\n"
      << "eval_every = " << tc.eval_every << "\n"
      << "patience = " << tc.patience << "\n"
      << "max_epochs = " << tc.max_epochs << "\n"
      << "step_size = " << format_double(tc.adam.step_size) << "\n"
      << "beta1 = " << format_double(tc.adam.beta1) << "\n"
      << "beta2 = " << format_double(tc.adam.beta2) << "\n"
      << "adam_epsilon = " << format_double(tc.adam.epsilon) << "\n";
  out << "\n[solver]\n"
      << "tol = " << format_double(cfg.solver.tol) << "\n"
      << "max_iterations = " << cfg.solver.max_iterations << "\n";
  return out.str();
}

LostSalesConfig load_instance_any(const std::string& path) {
  const auto cfg = TextConfig::load(path);
  for (const auto& e : cfg.entries()) {
    if (e.section == "instance") {
      return instance_from_config(cfg, "instance");
    }
  }
  reject_unknown_sections(cfg, {""});
  return instance_from_config(cfg, "");
}

const GapRow* GapReport::find(const std::string& policy_name) const {
  for (const auto& row : rows) {
    if (row.policy_name == policy_name) {
      return &row;
    }
  }
  return nullptr;
}

MclResult run_mcl(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log) {
  MclResult result;
  run_mcl_into(cfg, out_dir, log, result);
  return result;
}

SolveResult solve_instance(const LostSalesConfig& instance, const SolverOptions& opts) {
  const LostSalesModel model(instance);
  const LostSalesMdp mdp(model);
  SolveResult out;
  out.states = mdp.size();
  out.optimal = solve_optimal_average_cost(mdp, opts);
  out.base_stock = best_base_stock(mdp, opts);
  return out;
}

double evaluate_artifact(const LostSalesConfig& instance, const NeuralPolicyArtifact& artifact,
                         const SolverOptions& opts) {
  if (artifact.instance_hash != instance_hash(instance)) {
    throw ValidationError("artifact was trained for instance " + artifact.instance_hash +
                          ", not " + instance_hash(instance));
  }
  const LostSalesModel model(instance);
  const LostSalesMdp mdp(model);
  const NeuralPolicy policy(model, std::make_shared<const NeuralPolicyArtifact>(artifact));
  return evaluate_policy_average(mdp, tabulate(mdp, policy), opts);
}

std::vector<LostSalesConfig> BenchConfig::instances() const {
  std::vector<LostSalesConfig> out;
  for (auto family : families) {
    for (double p : penalties) {
      for (int tau : lead_times) {
        LostSalesConfig c = experiment.instance;
        c.demand.family = family;
        c.penalty = p;
        c.lead_time = tau;
        out.push_back(c);
      }
    }
  }
  return out;
}

namespace {

BenchConfig bench_from_config(const TextConfig& cfg) {
  reject_unknown_sections(cfg, {"instance", "mcl", "racing", "train", "solver", "bench"});
  cfg.reject_unknown("bench", {"lead_times", "penalties", "families", "run_mcl"});
  BenchConfig out;
  out.experiment = experiment_from_config(cfg);
  if (const auto* e = cfg.find("bench", "lead_times")) {
    out.lead_times.clear();
    for (const auto& item : split_list(e->value)) {
      int tau = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), tau);
      if (ec != std::errc{} || ptr != item.data() + item.size() || tau < 1 || tau > 4) {
        cfg.fail(*e, "expected a comma-separated list of lead times in 1..4");
      }
      out.lead_times.push_back(tau);
    }
  }
  if (const auto* e = cfg.find("bench", "penalties")) {
    out.penalties.clear();
    for (const auto& item : split_list(e->value)) {
      double p = -1.0;
      try {
        p = parse_double(item);
      } catch (const ValidationError&) {
      }
      if (!(p >= 0.0)) {
        cfg.fail(*e, "expected a comma-separated list of nonnegative penalties");
      }
      out.penalties.push_back(p);
    }
  }
  if (const auto* e = cfg.find("bench", "families")) {
    out.families.clear();
    for (const auto& item : split_list(e->value)) {
      try {
        out.families.push_back(demand_family_from_string(item));
      } catch (const ValidationError& err) {
        cfg.fail(*e, err.what());
      }
    }
  }
  out.run_mcl = cfg.get_bool_or("bench", "run_mcl", false);
  if (out.lead_times.empty() || out.penalties.empty() || out.families.empty()) {
    throw ValidationError(cfg.source() + ": [bench] grid is empty");
  }
  return out;
}

}  // namespace

BenchConfig parse_bench(const std::string& text, const std::string& source) {
  return bench_from_config(TextConfig::parse(text, source));
}

BenchConfig load_bench(const std::string& path) { return bench_from_config(TextConfig::load(path)); }

std::vector<GapReport> run_benchmark(const std::vector<LostSalesConfig>& instances,
                                     const ExperimentConfig& tmpl, bool with_mcl,
                                     const std::string& out_dir, std::ostream* log) {
  std::vector<GapReport> reports;
  for (const auto& inst : instances) {
    ExperimentConfig cfg = tmpl;
    cfg.instance = inst;
    MclResult result;
    try {
      if (with_mcl) {
        const std::string dir =
            out_dir.empty() ? std::string() : (fs::path(out_dir) / instance_id(inst)).string();
        run_mcl_into(cfg, dir, log, result);
      } else {
        auto& report = result.report;
        report.instance_id = instance_id(inst);
        report.instance_hash = instance_hash(inst);
        Stopwatch clock;
        const LostSalesModel model(inst);
        const LostSalesMdp mdp(model);
        report.optimal_gain = solve_optimal_average_cost(mdp, cfg.solver).gain;
        report.timings.push_back({"solve_optimal", clock.seconds()});
        clock = Stopwatch();
        const auto bs = best_base_stock(mdp, cfg.solver);
        report.base_stock_level = bs.level;
        add_row(report, "best_base_stock", "S=" + std::to_string(bs.level), bs.gain);
        report.timings.push_back({"base_stock", clock.seconds()});
        add_row(report, "pi0", "largest_order",
                evaluate_policy_average(mdp, tabulate(mdp, LargestActionPolicy(model)), cfg.solver));
        if (log != nullptr) {
          *log << "[" << report.instance_id << "] optimal " << format_double(report.optimal_gain)
               << ", base-stock S=" << bs.level << " gap "
               << format_double(report.rows.front().gap_percent) << "%" << std::endl;
        }
      }
    } catch (const std::exception& e) {
      if (result.report.instance_id.empty()) {
        result.report.instance_id = instance_id(inst);
      }
      result.report.error = e.what();
      if (log != nullptr) {
        *log << "[" << result.report.instance_id << "] failed: " << e.what() << std::endl;
      }
    }
    reports.push_back(std::move(result.report));
  }
  return reports;
}

}  // namespace mcl
