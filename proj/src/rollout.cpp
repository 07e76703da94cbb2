#include "mcl/rollout.hpp"

#include <cmath>
#include <vector>

#include "mcl/error.hpp"

namespace mcl {

double rollout_cost(const ExogenousModel& model, const Policy& policy, std::span<const double> s,
                    Action a, const Scenario& xi) {
  if (!model.is_allowed(s, a)) {
    throw ActionNotAllowed("rollout: action " + std::to_string(a) + " not allowed");
  }
  std::vector<double> current(s.begin(), s.end());
  std::vector<double> next(current.size());
  double total = 0.0;
  const int horizon = xi.horizon();
  for (int t = 1; t <= horizon; ++t) {
    const double w = xi.w_at(t);
    total += model.cost(current, a, w);
    if (t == horizon) {
      break;
    }
    model.transition(current, a, w, next);
    current.swap(next);
    a = policy.act(current);
  }
  return total;
}

MeanEstimate rollout_mean(const ExogenousModel& model, const Policy& policy,
                          std::span<const double> s, Action a, int n_scenarios, RngKey key) {
  if (n_scenarios < 2) {
    throw ValidationError("rollout_mean: need at least 2 scenarios");
  }
  // Welford: numerically stable for 1e5+ samples.
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n_scenarios; ++i) {
    const Scenario xi(model, key.derive(static_cast<std::uint64_t>(i)));
    const double x = rollout_cost(model, policy, s, a, xi);
    const double delta = x - mean;
    mean += delta / (i + 1);
    m2 += delta * (x - mean);
  }
  const double var = m2 / (n_scenarios - 1);
  return {mean, std::sqrt(var / n_scenarios)};
}

MeanEstimate discounted_return_check(const ExogenousModel& model, const Policy& policy,
                                     std::span<const double> s, int n_scenarios, RngKey key) {
  return rollout_mean(model, policy, s, policy.act(s), n_scenarios, key);
}

}  // namespace mcl
