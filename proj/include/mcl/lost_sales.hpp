#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcl/model.hpp"

namespace mcl {

class TextConfig;

enum class DemandFamily { Poisson, Geometric };

std::string to_string(DemandFamily family);
DemandFamily demand_family_from_string(const std::string& text);

/// Per-period demand on {0, 1, 2, ...}.
struct DemandDist {
  DemandFamily family = DemandFamily::Poisson;
  double mean = 5.0;  ///< lambda for Poisson, mu_D for Geometric

  /// Throws ValidationError if mean <= 0.
  void validate() const;
  /// Untruncated probability of k units.
  [[nodiscard]] double pmf(std::int64_t k) const;
};

double demand_pmf(const DemandDist& dist, std::int64_t k);

/// Demand pmf truncated at the 1 - tail quantile, residual mass folded into
/// the last point so the probabilities sum to one.
class TruncatedDemand {
 public:
  explicit TruncatedDemand(const DemandDist& dist, double tail = 1e-12);

  [[nodiscard]] std::int64_t max_demand() const { return static_cast<std::int64_t>(pmf_.size()) - 1; }
  [[nodiscard]] std::span<const double> pmf() const { return pmf_; }
  [[nodiscard]] double pmf(std::int64_t k) const;
  /// P(D >= k).
  [[nodiscard]] double tail_from(std::int64_t k) const;
  /// Inverse-CDF sample from a uniform in [0, 1).
  [[nodiscard]] std::int64_t sample(double u) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<double> tail_;
};

/// Smallest S with P(D_1 + ... + D_periods <= S) >= level, using the
/// truncated per-period pmf.
std::int64_t demand_quantile(const TruncatedDemand& demand, int periods, double level);

struct LostSalesConfig {
  int lead_time = 2;
  double holding_cost = 1.0;
  double penalty = 4.0;
  DemandDist demand{};
  std::optional<int> order_cap;     ///< nullopt = auto
  std::optional<int> position_cap;  ///< nullopt = auto
  double discount = 0.975;

  void validate() const;
};

struct ResolvedCaps {
  int order_cap = 0;
  int position_cap = 0;
};

/// Fills in `auto` caps. The position cap defaults to the p/(p+h) quantile of
/// demand over lead_time + 1 periods (no optimal policy raises the inventory
/// position above it); the order cap defaults to the position cap so that
/// order-up-to policies are never truncated.
ResolvedCaps resolve_caps(const LostSalesConfig& cfg);

/// Instance file: `key = value` lines; see write_instance for the canonical
/// form. Errors reference the offending line.
LostSalesConfig parse_instance(const std::string& text, const std::string& source = "<instance>");
LostSalesConfig load_instance(const std::string& path);
/// Reads instance keys from `section` of an already-parsed config.
LostSalesConfig instance_from_config(const TextConfig& cfg, const std::string& section);
std::string write_instance(const LostSalesConfig& cfg);
/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string instance_hash(const LostSalesConfig& cfg);
/// Short readable id, e.g. "ls_t2_p4_poisson5".
std::string instance_id(const LostSalesConfig& cfg);

// Lost-sales dynamics on integer-valued states (s_1 on hand, s_2..s_tau
// pipeline). `order` is the order quantity, not the 1-based MDP action.
void lost_sales_transition(std::span<const double> s, double order, double demand,
                           std::span<double> next);
double lost_sales_period_cost(std::span<const double> s, double demand, double holding,
                              double penalty);
/// Largest allowed order: min(order_cap, position_cap - sum(s)), clipped at 0.
int max_allowed_order(std::span<const double> s, int order_cap, int position_cap);

inline Action action_of_order(int order) { return order + 1; }
inline int order_of_action(Action a) { return a - 1; }

/// The lost-sales MDP as an ExogenousModel; W is the period demand.
class LostSalesModel final : public ExogenousModel {
 public:
  explicit LostSalesModel(LostSalesConfig cfg);

  [[nodiscard]] const LostSalesConfig& config() const { return cfg_; }
  [[nodiscard]] const ResolvedCaps& caps() const { return caps_; }
  [[nodiscard]] const TruncatedDemand& demand() const { return demand_; }

  [[nodiscard]] int state_dim() const override { return cfg_.lead_time; }
  [[nodiscard]] int action_count() const override { return caps_.order_cap + 1; }
  [[nodiscard]] double discount() const override { return cfg_.discount; }
  [[nodiscard]] std::vector<Action> allowed_actions(std::span<const double> s) const override;
  [[nodiscard]] bool is_allowed(std::span<const double> s, Action a) const override;
  double sample_w(RngStream& stream) const override;
  void transition(std::span<const double> s, Action a, double w,
                  std::span<double> next) const override;
  [[nodiscard]] double cost(std::span<const double> s, Action a, double w) const override;
  [[nodiscard]] State initial_state() const override;

 private:
  LostSalesConfig cfg_;
  ResolvedCaps caps_;
  TruncatedDemand demand_;
};

/// Order-up-to-S: orders min(order_cap, (S - sum(s))^+), further clipped to
/// the allowed set.
class BaseStockPolicy final : public Policy {
 public:
  BaseStockPolicy(const LostSalesModel& model, int level) : model_(model), level_(level) {}
  [[nodiscard]] Action act(std::span<const double> s) const override;
  [[nodiscard]] int level() const { return level_; }

 private:
  const LostSalesModel& model_;
  int level_;
};

}  // namespace mcl
