#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcl/model.hpp"
#include "mcl/racing.hpp"
#include "mcl/rng.hpp"

namespace mcl {

struct CollectionConfig {
  int total_samples = 4000;
  double explore_prob = 0.05;
  /// Number of independent walks K is split over. Fixed by configuration, not
  /// by thread count, so output does not depend on worker_count.
  int walks = 16;
  int worker_count = 1;
  RacingConfig racing;

  void validate() const;
  /// Samples assigned to walk w; shares differ by at most one and sum to K.
  [[nodiscard]] int walk_share(int w) const;
};

struct LabeledSample {
  State state;
  Action label = 0;
  int walk = 0;
  int step = 0;
  /// Key passed to improved_action for this state.
  RngKey scenario_key;
  /// Key of the stream that chose the next action and drew W.
  RngKey advance_key;
  /// Action actually taken and the W drawn to leave this state; 0 / 0 for the
  /// final state of a walk.
  Action taken = 0;
  double w = 0.0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct LabeledSampleSet {
  std::vector<LabeledSample> samples;
  int generation = 0;
  RngKey master_key;
  State initial_state;
  double explore_prob = 0.0;
  int walks = 0;
  RacingConfig racing;

  friend bool operator==(const LabeledSampleSet& a, const LabeledSampleSet& b) {
    return a.samples == b.samples && a.generation == b.generation &&
           a.master_key == b.master_key && a.initial_state == b.initial_state &&
           a.explore_prob == b.explore_prob && a.walks == b.walks &&
           a.racing.n_min == b.racing.n_min && a.racing.n_max == b.racing.n_max &&
           a.racing.epsilon == b.racing.epsilon;
  }
};

struct CollectionStats {
  std::int64_t rollouts = 0;
  std::int64_t replications = 0;
  int stopped_at_budget = 0;
};

/// Builds K labeled pairs (s_k, pi^+(s_k)) with beta-randomized walks started
/// at model.initial_state(). Walk w uses key.derive(w); within it step k labels
/// with walk_key.derive(k, 0) and advances with walk_key.derive(k, 1).
/// Output is ordered by (walk, step).
LabeledSampleSet collect(const ExogenousModel& model, const Policy& policy,
                         const CollectionConfig& cfg, RngKey key, int generation = 0,
                         CollectionStats* stats = nullptr);

/// CSV with a version line, then s1..sn,label,worker,step rows. `worker` is
/// the walk index.
std::string write_samples_csv(const LabeledSampleSet& set);
/// JSON record of every key and advance draw.
std::string write_provenance_json(const LabeledSampleSet& set);
LabeledSampleSet read_samples(const std::string& csv, const std::string& provenance_json);

}  // namespace mcl
