#pragma once

#include <span>
#include <vector>

#include "mcl/model.hpp"
#include "mcl/rng.hpp"

namespace mcl {

/// Phi^{-1}(p) for the standard normal.
double inverse_normal_cdf(double p);

struct RacingConfig {
  int n_min = 500;
  int n_max = 4000;
  double epsilon = 0.02;

  void validate() const;
  /// Phi^{-1}(1 - epsilon).
  [[nodiscard]] double z_threshold() const;
};

struct PairedStats {
  double mean_diff = 0.0;
  double std_err_diff = 0.0;
};

/// Mean of a_i - b_i and its standard error (sample sd / sqrt(n)). Throws
/// LengthMismatch unless both have the same length n >= 2.
PairedStats paired_stats(std::span<const double> samples_a, std::span<const double> samples_b);

/// Racing workspace for one state: every action's rollout costs indexed by
/// replication, plus running sums of pairwise differences so the statistics
/// against any incumbent cost O(1) per pair.
class SampleMatrix {
 public:
  explicit SampleMatrix(std::vector<Action> actions);

  [[nodiscard]] const std::vector<Action>& actions() const { return actions_; }
  /// Slots (indices into actions()) still in the race, ascending.
  [[nodiscard]] const std::vector<int>& survivors() const { return survivors_; }
  [[nodiscard]] int replications() const { return static_cast<int>(scenario_keys_.size()); }
  [[nodiscard]] std::span<const double> costs(int slot) const { return costs_[slot]; }
  [[nodiscard]] std::span<const RngKey> keys(int slot) const { return keys_[slot]; }
  [[nodiscard]] std::span<const RngKey> scenario_keys() const { return scenario_keys_; }

  /// Appends one replication; `costs` holds one value per survivor, in
  /// survivor order, all evaluated under `scenario`.
  void add_replication(RngKey scenario, std::span<const double> costs);

  [[nodiscard]] double mean(int slot) const;
  [[nodiscard]] PairedStats paired(int slot, int against) const;
  /// Survivor with the lowest mean cost; ties go to the smaller action.
  [[nodiscard]] int incumbent() const;
  /// Keeps survivors with mean(a - incumbent) <= se * z. Returns the incumbent.
  int eliminate(double z);

 private:
  [[nodiscard]] std::size_t pair_index(int a, int b) const {
    return static_cast<std::size_t>(a) * actions_.size() + static_cast<std::size_t>(b);
  }

  std::vector<Action> actions_;
  std::vector<int> survivors_;
  std::vector<std::vector<double>> costs_;
  std::vector<std::vector<RngKey>> keys_;
  std::vector<RngKey> scenario_keys_;
  std::vector<double> sum_;
  std::vector<double> diff_sum_;
  std::vector<double> diff_sq_sum_;
};

struct RacingDiagnostics {
  int replications = 0;
  int rollouts = 0;
  /// |A_{i+1}| after each elimination round, starting at i = n_min.
  std::vector<int> survivors_per_round;
};

struct RacingResult {
  Action action = 0;
  RacingDiagnostics diagnostics;
};

/// Simulation-based improvement pi^+(s) under common random numbers.
///
/// Scenario i (1-based) uses key.derive(i - 1). The first n_min scenarios are
/// run for every allowed action; afterwards the incumbent (lowest mean) is
/// kept along with every action whose paired difference to it satisfies
/// mean <= std_err * z_threshold, and one more scenario is run for those.
/// Stops with the incumbent when one action remains or n_max scenarios
/// have been drawn. `matrix_out`, when given, receives the final workspace.
RacingResult improved_action(const ExogenousModel& model, const Policy& policy,
                             std::span<const double> s, const RacingConfig& cfg, RngKey key,
                             SampleMatrix* matrix_out = nullptr);

}  // namespace mcl
