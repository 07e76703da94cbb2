#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcl/lost_sales.hpp"
#include "mcl/model.hpp"

namespace mcl {

/// A finite MDP with enumerated states. Each state has an ascending list of
/// actions addressed by slot 0..num_actions(i)-1.
class TabularMdp {
 public:
  virtual ~TabularMdp() = default;

  [[nodiscard]] virtual std::size_t size() const = 0;
  [[nodiscard]] virtual State state(std::size_t i) const = 0;
  [[nodiscard]] virtual std::optional<std::size_t> index_of(std::span<const double> s) const = 0;

  [[nodiscard]] virtual int num_actions(std::size_t i) const = 0;
  [[nodiscard]] virtual Action action_at(std::size_t i, int slot) const = 0;
  [[nodiscard]] virtual std::optional<int> slot_of(std::size_t i, Action a) const = 0;

  [[nodiscard]] virtual double expected_cost(std::size_t i, int slot) const = 0;
  /// Sparse row P(.|i, action at slot), merged by successor.
  [[nodiscard]] virtual std::vector<std::pair<std::size_t, double>> transitions(std::size_t i,
                                                                                int slot) const = 0;

  /// q[slot] = c(i, slot) + alpha * sum_j P(j|i, slot) v[j] for every slot.
  virtual void backup(std::size_t i, std::span<const double> v, double alpha,
                      std::span<double> q) const = 0;
  /// The same quantity for one slot.
  [[nodiscard]] virtual double backup_one(std::size_t i, int slot, std::span<const double> v,
                                          double alpha) const = 0;

  /// Reference state for relative value iteration.
  [[nodiscard]] virtual std::size_t reference_state() const { return 0; }
  /// Identifies the instance in serialized artifacts.
  [[nodiscard]] virtual std::string instance_hash() const = 0;

  [[nodiscard]] int max_actions() const;
};

/// General sparse MDP assembled state by state. Used for small hand-built
/// models.
class ExplicitMdp final : public TabularMdp {
 public:
  explicit ExplicitMdp(std::string hash = "explicit") : hash_(std::move(hash)) {}

  std::size_t add_state(State s);
  /// Actions of a state must be added in ascending order.
  void add_action(std::size_t i, Action a, double cost,
                  std::vector<std::pair<std::size_t, double>> row);

  [[nodiscard]] std::size_t size() const override { return states_.size(); }
  [[nodiscard]] State state(std::size_t i) const override { return states_[i]; }
  [[nodiscard]] std::optional<std::size_t> index_of(std::span<const double> s) const override;
  [[nodiscard]] int num_actions(std::size_t i) const override;
  [[nodiscard]] Action action_at(std::size_t i, int slot) const override;
  [[nodiscard]] std::optional<int> slot_of(std::size_t i, Action a) const override;
  [[nodiscard]] double expected_cost(std::size_t i, int slot) const override;
  [[nodiscard]] std::vector<std::pair<std::size_t, double>> transitions(std::size_t i,
                                                                        int slot) const override;
  void backup(std::size_t i, std::span<const double> v, double alpha,
              std::span<double> q) const override;
  [[nodiscard]] double backup_one(std::size_t i, int slot, std::span<const double> v,
                                  double alpha) const override;
  [[nodiscard]] std::string instance_hash() const override { return hash_; }

 private:
  struct ActionRow {
    Action action;
    double cost;
    std::vector<std::pair<std::size_t, double>> row;
  };
  std::string hash_;
  std::vector<State> states_;
  std::vector<std::vector<ActionRow>> actions_;
};

/// Exact lost-sales MDP.
///
/// States (s_1..s_tau) with s_1 <= position_cap, pipeline entries <= order_cap
/// and sum <= position_cap, enumerated lexicographically with the last
/// component fastest. The on-hand level after demand, j = (s_1 - d)^+, takes
/// s_1 + 1 values whatever the order, and the successor (j + s_2, s_3, .., a)
/// sits at index base(j) + a. Each state therefore stores one row of
/// (probability, base) pairs shared by all its actions.
class LostSalesMdp final : public TabularMdp {
 public:
  explicit LostSalesMdp(const LostSalesModel& model);

  [[nodiscard]] const LostSalesModel& model() const { return *model_; }

  [[nodiscard]] std::size_t size() const override { return states_.size() / dim_; }
  [[nodiscard]] State state(std::size_t i) const override;
  [[nodiscard]] std::span<const double> state_view(std::size_t i) const;
  [[nodiscard]] std::optional<std::size_t> index_of(std::span<const double> s) const override;
  [[nodiscard]] int num_actions(std::size_t i) const override { return num_actions_[i]; }
  [[nodiscard]] Action action_at(std::size_t, int slot) const override { return slot + 1; }
  [[nodiscard]] std::optional<int> slot_of(std::size_t i, Action a) const override;
  [[nodiscard]] double expected_cost(std::size_t i, int) const override { return cost_[i]; }
  [[nodiscard]] std::vector<std::pair<std::size_t, double>> transitions(std::size_t i,
                                                                        int slot) const override;
  void backup(std::size_t i, std::span<const double> v, double alpha,
              std::span<double> q) const override;
  [[nodiscard]] double backup_one(std::size_t i, int slot, std::span<const double> v,
                                  double alpha) const override;
  [[nodiscard]] std::string instance_hash() const override { return hash_; }

 private:
  struct Outcome {
    double prob;
    std::uint32_t base;
  };

  [[nodiscard]] std::int64_t dense_key(std::span<const double> s) const;

  const LostSalesModel* model_;
  std::string hash_;
  std::size_t dim_;
  std::vector<double> states_;
  std::vector<double> cost_;
  std::vector<int> num_actions_;
  std::vector<std::size_t> outcome_begin_;
  std::vector<Outcome> outcomes_;
  std::vector<std::int32_t> dense_;
  std::vector<std::int64_t> stride_;
};

}  // namespace mcl
