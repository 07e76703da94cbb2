#include "mcl/tabular_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mcl/error.hpp"

namespace mcl {

int TabularMdp::max_actions() const {
  int m = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    m = std::max(m, num_actions(i));
  }
  return m;
}

// ---------------------------------------------------------------------------
// ExplicitMdp

std::size_t ExplicitMdp::add_state(State s) {
  states_.push_back(std::move(s));
  actions_.emplace_back();
  return states_.size() - 1;
}

void ExplicitMdp::add_action(std::size_t i, Action a, double cost,
                             std::vector<std::pair<std::size_t, double>> row) {
  auto& list = actions_.at(i);
  if (!list.empty() && list.back().action >= a) {
    throw ValidationError("ExplicitMdp: actions must be added in ascending order");
  }
  list.push_back({a, cost, std::move(row)});
}

std::optional<std::size_t> ExplicitMdp::index_of(std::span<const double> s) const {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (std::equal(s.begin(), s.end(), states_[i].begin(), states_[i].end())) {
      return i;
    }
  }
  return std::nullopt;
}

int ExplicitMdp::num_actions(std::size_t i) const { return static_cast<int>(actions_[i].size()); }

Action ExplicitMdp::action_at(std::size_t i, int slot) const { return actions_[i][slot].action; }

std::optional<int> ExplicitMdp::slot_of(std::size_t i, Action a) const {
  const auto& list = actions_[i];
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (list[k].action == a) {
      return static_cast<int>(k);
    }
  }
  return std::nullopt;
}

double ExplicitMdp::expected_cost(std::size_t i, int slot) const { return actions_[i][slot].cost; }

std::vector<std::pair<std::size_t, double>> ExplicitMdp::transitions(std::size_t i,
                                                                     int slot) const {
  std::map<std::size_t, double> merged;
  for (const auto& [j, p] : actions_[i][slot].row) {
    merged[j] += p;
  }
  return {merged.begin(), merged.end()};
}

void ExplicitMdp::backup(std::size_t i, std::span<const double> v, double alpha,
                         std::span<double> q) const {
  for (int k = 0; k < num_actions(i); ++k) {
    q[k] = backup_one(i, k, v, alpha);
  }
}

double ExplicitMdp::backup_one(std::size_t i, int slot, std::span<const double> v,
                               double alpha) const {
  const auto& entry = actions_[i][slot];
  double expect = 0.0;
  for (const auto& [j, p] : entry.row) {
    expect += p * v[j];
  }
  return entry.cost + alpha * expect;
}

// ---------------------------------------------------------------------------
// LostSalesMdp

namespace {

void enumerate(int depth, int tau, int order_cap, int position_cap, int used,
               std::vector<double>& prefix, std::vector<double>& out) {
  if (depth == tau) {
    out.insert(out.end(), prefix.begin(), prefix.end());
    return;
  }
  const int top = depth == 0 ? position_cap : std::min(order_cap, position_cap - used);
  for (int x = 0; x <= top; ++x) {
    prefix[depth] = x;
    enumerate(depth + 1, tau, order_cap, position_cap, used + x, prefix, out);
  }
}

}  // namespace

LostSalesMdp::LostSalesMdp(const LostSalesModel& model)
    : model_(&model),
      hash_(mcl::instance_hash(model.config())),
      dim_(static_cast<std::size_t>(model.config().lead_time)) {
  const int tau = model.config().lead_time;
  const int order_cap = model.caps().order_cap;
  const int position_cap = model.caps().position_cap;
  const double h = model.config().holding_cost;
  const double p = model.config().penalty;
  const auto& demand = model.demand();

  stride_.assign(dim_, 1);
  for (int k = tau - 2; k >= 0; --k) {
    stride_[k] = stride_[k + 1] * (order_cap + 1);
  }
  const std::int64_t dense_size = stride_[0] * (position_cap + 1);
  if (dense_size > (std::int64_t{1} << 31)) {
    throw ValidationError("lost-sales state space too large for exact solution");
  }

  std::vector<double> prefix(dim_, 0.0);
  enumerate(0, tau, order_cap, position_cap, 0, prefix, states_);
  const std::size_t n = size();
  if (n >= (std::size_t{1} << 32)) {
    throw ValidationError("lost-sales state space too large for exact solution");
  }

  dense_.assign(static_cast<std::size_t>(dense_size), -1);
  for (std::size_t i = 0; i < n; ++i) {
    dense_[static_cast<std::size_t>(dense_key(state_view(i)))] = static_cast<std::int32_t>(i);
  }

  // Expected period cost depends on on-hand stock only.
  std::vector<double> cost_by_onhand(static_cast<std::size_t>(position_cap) + 1);
  for (int s1 = 0; s1 <= position_cap; ++s1) {
    double c = 0.0;
    for (std::int64_t d = 0; d <= demand.max_demand(); ++d) {
      const double x = static_cast<double>(s1 - d);
      c += demand.pmf(d) * (x > 0 ? h * x : -p * x);
    }
    cost_by_onhand[s1] = c;
  }

  cost_.resize(n);
  num_actions_.resize(n);
  outcome_begin_.resize(n + 1);
  std::vector<double> succ(dim_);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = state_view(i);
    const int s1 = static_cast<int>(s[0]);
    cost_[i] = cost_by_onhand[s1];
    num_actions_[i] = max_allowed_order(s, order_cap, position_cap) + 1;
    outcome_begin_[i] = outcomes_.size();
    for (int j = 0; j <= s1; ++j) {
      const double prob = j == 0 ? demand.tail_from(s1) : demand.pmf(s1 - j);
      if (prob <= 0.0) {
        continue;
      }
      if (tau == 1) {
        succ[0] = j;
      } else {
        succ[0] = j + s[1];
        for (std::size_t k = 1; k + 1 < dim_; ++k) {
          succ[k] = s[k + 1];
        }
        succ[dim_ - 1] = 0;
      }
      const auto base = dense_[static_cast<std::size_t>(dense_key(succ))];
      outcomes_.push_back({prob, static_cast<std::uint32_t>(base)});
    }
  }
  outcome_begin_[n] = outcomes_.size();
}

std::int64_t LostSalesMdp::dense_key(std::span<const double> s) const {
  if (s.size() != dim_) {
    return -1;
  }
  std::int64_t key = 0;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double x = s[k];
    const int top = k == 0 ? model_->caps().position_cap : model_->caps().order_cap;
    if (!(x >= 0.0) || x > top || x != std::floor(x)) {
      return -1;
    }
    key += static_cast<std::int64_t>(x) * stride_[k];
  }
  return key;
}

State LostSalesMdp::state(std::size_t i) const {
  const auto v = state_view(i);
  return {v.begin(), v.end()};
}

std::span<const double> LostSalesMdp::state_view(std::size_t i) const {
  return {states_.data() + i * dim_, dim_};
}

std::optional<std::size_t> LostSalesMdp::index_of(std::span<const double> s) const {
  const auto key = dense_key(s);
  if (key < 0 || dense_[static_cast<std::size_t>(key)] < 0) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(dense_[static_cast<std::size_t>(key)]);
}

std::optional<int> LostSalesMdp::slot_of(std::size_t i, Action a) const {
  const int slot = a - 1;
  if (slot < 0 || slot >= num_actions_[i]) {
    return std::nullopt;
  }
  return slot;
}

std::vector<std::pair<std::size_t, double>> LostSalesMdp::transitions(std::size_t i,
                                                                      int slot) const {
  std::map<std::size_t, double> merged;
  for (auto o = outcome_begin_[i]; o < outcome_begin_[i + 1]; ++o) {
    merged[outcomes_[o].base + static_cast<std::size_t>(slot)] += outcomes_[o].prob;
  }
  return {merged.begin(), merged.end()};
}

void LostSalesMdp::backup(std::size_t i, std::span<const double> v, double alpha,
                          std::span<double> q) const {
  const int k = num_actions_[i];
  std::fill_n(q.begin(), k, 0.0);
  for (auto o = outcome_begin_[i]; o < outcome_begin_[i + 1]; ++o) {
    const double prob = outcomes_[o].prob;
    const double* row = v.data() + outcomes_[o].base;
    for (int a = 0; a < k; ++a) {
      q[a] += prob * row[a];
    }
  }
  for (int a = 0; a < k; ++a) {
    q[a] = cost_[i] + alpha * q[a];
  }
}

double LostSalesMdp::backup_one(std::size_t i, int slot, std::span<const double> v,
                                double alpha) const {
  double expect = 0.0;
  for (auto o = outcome_begin_[i]; o < outcome_begin_[i + 1]; ++o) {
    expect += outcomes_[o].prob * v[outcomes_[o].base + static_cast<std::size_t>(slot)];
  }
  return cost_[i] + alpha * expect;
}

}  // namespace mcl
