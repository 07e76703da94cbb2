#pragma once

#include <span>

#include "mcl/model.hpp"
#include "mcl/rng.hpp"
#include "mcl/scenario.hpp"

namespace mcl {

/// Q_pi(s, a | xi): undiscounted sum of g over periods 1..T(xi), starting with
/// action a in s and following `policy` afterwards. Throws ActionNotAllowed.
double rollout_cost(const ExogenousModel& model, const Policy& policy, std::span<const double> s,
                    Action a, const Scenario& xi);

struct MeanEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

/// Mean and standard error of rollout_cost(s, policy.act(s)) over n_scenarios
/// scenarios keyed key.derive(i). Requires n_scenarios >= 2.
MeanEstimate discounted_return_check(const ExogenousModel& model, const Policy& policy,
                                     std::span<const double> s, int n_scenarios, RngKey key);

/// Same estimator with an explicit first action.
MeanEstimate rollout_mean(const ExogenousModel& model, const Policy& policy,
                          std::span<const double> s, Action a, int n_scenarios, RngKey key);

}  // namespace mcl
