#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mcl/collector.hpp"
#include "mcl/exact_solver.hpp"
#include "mcl/lost_sales.hpp"
#include "mcl/mlp.hpp"
#include "mcl/trainer.hpp"

namespace mcl {

/// Everything that determines an MCL run. Worker count affects speed only.
struct ExperimentConfig {
  LostSalesConfig instance;
  int generations = 4;
  CollectionConfig collection;
  TrainConfig train;
  SolverOptions solver;
  std::uint64_t seed = 1;

  void validate() const;
  [[nodiscard]] int workers() const { return collection.worker_count; }
  void set_workers(int workers);
};

/// Sections: [instance], [mcl], [racing], [train], [solver]. Errors name the
/// offending line.
ExperimentConfig parse_experiment(const std::string& text, const std::string& source = "<experiment>");
ExperimentConfig load_experiment(const std::string& path);
/// Canonical text; omits the worker count.
std::string write_experiment(const ExperimentConfig& cfg);

/// Reads an instance from either a bare instance file or the [instance]
/// section of an experiment file.
LostSalesConfig load_instance_any(const std::string& path);

struct GapRow {
  std::string instance_id;
  std::string policy_name;
  /// Free text such as "S=16" or "generation=3".
  std::string detail;
  double gain = 0.0;
  double optimal_gain = 0.0;
  double gap_percent = 0.0;
};

struct Timing {
  std::string phase;
  double seconds = 0.0;
};

struct GapReport {
  std::string instance_id;
  std::string instance_hash;
  double optimal_gain = 0.0;
  int base_stock_level = 0;
  /// 1-based; 0 when no generation finished.
  int best_generation = 0;
  std::vector<GapRow> rows;
  std::vector<Timing> timings;
  /// Empty on success.
  std::string error;

  [[nodiscard]] const GapRow* find(const std::string& policy_name) const;
};

struct MclResult {
  std::shared_ptr<const NeuralPolicyArtifact> best;
  GapReport report;
  std::vector<CollectionStats> collection_stats;
  std::vector<TrainReport> train_reports;
};

/// pi_0 = largest order; generation i collects K samples with pi_{i-1},
/// trains a fresh network and evaluates it exactly under average cost. The
/// best generation is the one with the lowest gain (earliest on ties).
///
/// When `out_dir` is nonempty every artifact is written there; a failing
/// generation still leaves the partial report on disk before rethrowing.
/// `log` receives progress lines and may be null.
MclResult run_mcl(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log);

/// Exact optimum and best base-stock for one instance.
struct SolveResult {
  AverageCostResult optimal;
  BaseStockResult base_stock;
  std::size_t states = 0;
};
SolveResult solve_instance(const LostSalesConfig& instance, const SolverOptions& opts);

/// Average-cost gain of a stored artifact on an instance. Throws
/// ValidationError if the artifact was trained for another instance.
double evaluate_artifact(const LostSalesConfig& instance, const NeuralPolicyArtifact& artifact,
                         const SolverOptions& opts);

struct BenchConfig {
  std::vector<int> lead_times{2, 3, 4};
  std::vector<double> penalties{4.0};
  std::vector<DemandFamily> families{DemandFamily::Poisson};
  /// Template for everything but lead time, penalty and family.
  ExperimentConfig experiment;
  bool run_mcl = false;

  [[nodiscard]] std::vector<LostSalesConfig> instances() const;
};

/// [bench] lead_times, penalties, families, run_mcl, plus the experiment
/// sections used as a template.
BenchConfig parse_bench(const std::string& text, const std::string& source = "<bench>");
BenchConfig load_bench(const std::string& path);

/// Runs each instance in order; failures are recorded in the instance's
/// report and do not stop the sweep. With out_dir set, each MCL run goes to
/// out_dir/<instance_id>.
std::vector<GapReport> run_benchmark(const std::vector<LostSalesConfig>& instances,
                                     const ExperimentConfig& tmpl, bool with_mcl,
                                     const std::string& out_dir, std::ostream* log);

}  // namespace mcl
