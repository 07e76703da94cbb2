#include "mcl/racing.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "mcl/error.hpp"
#include "mcl/rollout.hpp"
#include "mcl/scenario.hpp"

namespace mcl {

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("inverse_normal_cdf: p must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

void RacingConfig::validate() const {
  if (n_min < 2) {
    throw ValidationError("racing: n_min must be at least 2");
  }
  if (n_max < n_min) {
    throw ValidationError("racing: n_max must be at least n_min");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ValidationError("racing: epsilon must lie in (0, 0.5)");
  }
}

double RacingConfig::z_threshold() const { return inverse_normal_cdf(1.0 - epsilon); }

PairedStats paired_stats(std::span<const double> samples_a, std::span<const double> samples_b) {
  if (samples_a.size() != samples_b.size()) {
    throw LengthMismatch("paired_stats: sample lists differ in length");
  }
  const std::size_t n = samples_a.size();
  if (n < 2) {
    throw LengthMismatch("paired_stats: need at least 2 paired samples");
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += samples_a[i] - samples_b[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = samples_a[i] - samples_b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

SampleMatrix::SampleMatrix(std::vector<Action> actions)
    : actions_(std::move(actions)),
      costs_(actions_.size()),
      keys_(actions_.size()),
      sum_(actions_.size(), 0.0),
      diff_sum_(actions_.size() * actions_.size(), 0.0),
      diff_sq_sum_(actions_.size() * actions_.size(), 0.0) {
  if (actions_.empty()) {
    throw ValidationError("racing: no allowed actions");
  }
  survivors_.resize(actions_.size());
  for (std::size_t k = 0; k < actions_.size(); ++k) {
    survivors_[k] = static_cast<int>(k);
  }
}

void SampleMatrix::add_replication(RngKey scenario, std::span<const double> costs) {
  if (costs.size() != survivors_.size()) {
    throw LengthMismatch("racing: one cost per survivor expected");
  }
  scenario_keys_.push_back(scenario);
  for (std::size_t u = 0; u < survivors_.size(); ++u) {
    const int a = survivors_[u];
    costs_[a].push_back(costs[u]);
    keys_[a].push_back(scenario);
    sum_[a] += costs[u];
    for (std::size_t w = u + 1; w < survivors_.size(); ++w) {
      const int b = survivors_[w];
      const double d = costs[u] - costs[w];
      diff_sum_[pair_index(a, b)] += d;
      diff_sq_sum_[pair_index(a, b)] += d * d;
    }
  }
}

double SampleMatrix::mean(int slot) const {
  return sum_[slot] / static_cast<double>(costs_[slot].size());
}

PairedStats SampleMatrix::paired(int slot, int against) const {
  if (slot == against) {
    return {};
  }
  const auto n = static_cast<double>(replications());
  // Sums are stored for (lower slot, higher slot); flip the sign otherwise.
  const bool flip = slot > against;
  const std::size_t idx = flip ? pair_index(against, slot) : pair_index(slot, against);
  const double mean = (flip ? -diff_sum_[idx] : diff_sum_[idx]) / n;
  const double ss = std::max(0.0, diff_sq_sum_[idx] - n * mean * mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

int SampleMatrix::incumbent() const {
  int best = survivors_.front();
  double best_mean = mean(best);
  for (int a : survivors_) {
    const double m = mean(a);
    if (m < best_mean) {
      best = a;
      best_mean = m;
    }
  }
  return best;
}

int SampleMatrix::eliminate(double z) {
  const int inc = incumbent();
  std::vector<int> keep;
  keep.reserve(survivors_.size());
  for (int a : survivors_) {
    if (a == inc) {
      keep.push_back(a);
      continue;
    }
    const auto st = paired(a, inc);
    if (st.mean_diff <= st.std_err_diff * z) {
      keep.push_back(a);
    }
  }
  survivors_ = std::move(keep);
  return inc;
}

RacingResult improved_action(const ExogenousModel& model, const Policy& policy,
                             std::span<const double> s, const RacingConfig& cfg, RngKey key,
                             SampleMatrix* matrix_out) {
  cfg.validate();
  const double z = cfg.z_threshold();
  SampleMatrix matrix(model.allowed_actions(s));
  RacingResult result;
  std::vector<double> costs;

  const auto run_replication = [&](int index) {
    const RngKey scenario_key = key.derive(static_cast<std::uint64_t>(index));
    const Scenario xi(model, scenario_key);
    costs.clear();
    for (int slot : matrix.survivors()) {
      costs.push_back(rollout_cost(model, policy, s, matrix.actions()[slot], xi));
    }
    result.diagnostics.rollouts += static_cast<int>(costs.size());
    matrix.add_replication(scenario_key, costs);
  };

  for (int i = 0; i < cfg.n_min; ++i) {
    run_replication(i);
  }
  int incumbent;
  while (true) {
    incumbent = matrix.eliminate(z);
    result.diagnostics.survivors_per_round.push_back(static_cast<int>(matrix.survivors().size()));
    if (matrix.survivors().size() == 1 || matrix.replications() >= cfg.n_max) {
      break;
    }
    run_replication(matrix.replications());
  }
  result.action = matrix.actions()[incumbent];
  result.diagnostics.replications = matrix.replications();
  if (matrix_out != nullptr) {
    *matrix_out = std::move(matrix);
  }
  return result;
}

}  // namespace mcl
