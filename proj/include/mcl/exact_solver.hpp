#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcl/model.hpp"
#include "mcl/tabular_mdp.hpp"

namespace mcl {

/// One action per enumerated state.
struct TabularPolicy {
  std::vector<Action> actions;
};

enum class ValueKind { Discounted, Relative };

struct ValueTable {
  std::vector<double> v;
  ValueKind kind = ValueKind::Discounted;
};

/// Exposes a TabularPolicy as a Policy over raw states of the same model.
/// Throws ValidationError for states outside the enumeration.
class TabularPolicyView final : public Policy {
 public:
  TabularPolicyView(const TabularMdp& mdp, const TabularPolicy& policy)
      : mdp_(mdp), policy_(policy) {}
  [[nodiscard]] Action act(std::span<const double> s) const override;

 private:
  const TabularMdp& mdp_;
  const TabularPolicy& policy_;
};

/// Evaluates `policy` (any Policy over the same model) at every state.
TabularPolicy tabulate(const TabularMdp& mdp, const Policy& policy);

struct SolverOptions {
  double tol = 1e-9;
  int max_iterations = 200000;
  int workers = 1;
};

/// v_pi by value iteration, stopped once the sup-norm residual is at most
/// tol * (1 - alpha) / (2 * alpha), which bounds |v - v_pi| by tol.
ValueTable evaluate_policy_discounted(const TabularMdp& mdp, const TabularPolicy& policy,
                                      double alpha, const SolverOptions& opts = {});

/// Largest |T_pi v - v| over states.
double bellman_residual(const TabularMdp& mdp, const TabularPolicy& policy, const ValueTable& v,
                        double alpha);

/// q_pi(s_i, a) for each allowed action (by slot).
std::vector<double> q_values(const TabularMdp& mdp, const ValueTable& values, double alpha,
                             std::size_t i);

/// Greedy policy w.r.t. v_pi; ties go to the smallest action.
TabularPolicy improve_policy_exact(const TabularMdp& mdp, const TabularPolicy& policy, double alpha,
                                   const SolverOptions& opts = {});

/// Relative value iteration output.
struct AverageCostResult {
  double gain = 0.0;
  TabularPolicy policy;
  ValueTable relative;
  int iterations = 0;
  bool damped = false;
  /// Span of T h - h, most recent last (at most 200 entries).
  std::vector<double> span_tail;
};

/// Optimal long-run average cost and an optimal stationary policy. Throws
/// SolverError when the span does not reach opts.tol within the budget.
AverageCostResult solve_optimal_average_cost(const TabularMdp& mdp,
                                             const SolverOptions& opts = {});

/// Long-run average cost of a fixed policy. `warm_start` may carry relative
/// values from a similar policy.
AverageCostResult evaluate_policy_average_detailed(const TabularMdp& mdp,
                                                   const TabularPolicy& policy,
                                                   const SolverOptions& opts = {},
                                                   const std::vector<double>* warm_start = nullptr);
double evaluate_policy_average(const TabularMdp& mdp, const TabularPolicy& policy,
                               const SolverOptions& opts = {});

struct BaseStockResult {
  int level = 0;
  double gain = 0.0;
  /// gains[S] for S = 0..position_cap.
  std::vector<double> gains;
};

/// Best order-up-to level over 0..position_cap; ties go to the smaller level.
BaseStockResult best_base_stock(const LostSalesMdp& mdp, const SolverOptions& opts = {});

/// (C(pi) - C(pi*)) / C(pi*) * 100.
double gap_percent(double gain, double optimal_gain);

/// |optimal gain with both caps raised by `extra` - optimal gain as given|.
double cap_insensitivity(const LostSalesConfig& cfg, int extra = 5, const SolverOptions& opts = {});

// Artifacts: text with a versioned header and the instance hash embedded.
std::string write_value_table(const ValueTable& v, const std::string& instance_hash);
ValueTable read_value_table(const std::string& text, const std::string& expected_hash);
std::string write_tabular_policy(const TabularPolicy& p, const std::string& instance_hash);
TabularPolicy read_tabular_policy(const std::string& text, const std::string& expected_hash);

}  // namespace mcl
