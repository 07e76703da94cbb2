#pragma once

#include <cstdint>
#include <vector>

#include "mcl/model.hpp"
#include "mcl/rng.hpp"

namespace mcl {

/// One composite draw xi = (T, W_1..W_T).
///
/// T is geometric on {1, 2, ...} with P(T >= k) = alpha^(k-1); it comes from
/// stream 0 of the scenario key. W_t comes from stream t, so every period has
/// its own counter space and values do not depend on the order in which
/// periods are queried. Values are cached on first access; a Scenario is
/// single-writer, call materialize() before sharing it between threads.
class Scenario {
 public:
  Scenario(const ExogenousModel& model, RngKey key);

  [[nodiscard]] int horizon() const { return horizon_; }
  [[nodiscard]] RngKey seed_key() const { return key_; }

  /// W_t for t in 1..horizon().
  double w_at(int t) const;

  /// Fills the cache for every period; afterwards w_at is read-only.
  void materialize() const;

 private:
  const ExogenousModel* model_;
  RngKey key_;
  int horizon_;
  mutable std::vector<double> w_;
  mutable std::vector<std::uint8_t> ready_;
};

Scenario draw_scenario(const ExogenousModel& model, RngKey key);

/// Geometric horizon from a single uniform u in [0, 1).
int geometric_horizon(double u, double alpha);

}  // namespace mcl
