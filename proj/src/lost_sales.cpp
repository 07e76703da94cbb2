#include "mcl/lost_sales.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcl/error.hpp"

namespace mcl {

std::string to_string(DemandFamily family) {
  return family == DemandFamily::Poisson ? "poisson" : "geometric";
}

DemandFamily demand_family_from_string(const std::string& text) {
  if (text == "poisson") {
    return DemandFamily::Poisson;
  }
  if (text == "geometric") {
    return DemandFamily::Geometric;
  }
  throw ValidationError("unknown demand family '" + text + "' (expected poisson or geometric)");
}

void DemandDist::validate() const {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw ValidationError("demand mean must be positive");
  }
}

double DemandDist::pmf(std::int64_t k) const {
  validate();
  if (k < 0) {
    return 0.0;
  }
  const auto kd = static_cast<double>(k);
  if (family == DemandFamily::Poisson) {
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
  }
  const double q = mean / (1.0 + mean);
  return (1.0 - q) * std::pow(q, kd);
}

double demand_pmf(const DemandDist& dist, std::int64_t k) { return dist.pmf(k); }

TruncatedDemand::TruncatedDemand(const DemandDist& dist, double tail) {
  dist.validate();
  double total = 0.0;
  for (std::int64_t k = 0; total < 1.0 - tail; ++k) {
    const double p = dist.pmf(k);
    pmf_.push_back(p);
    total += p;
    if (k > 1'000'000) {
      throw ValidationError("demand distribution tail too heavy to truncate");
    }
  }
  pmf_.back() += 1.0 - total;

  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  cdf_.back() = 1.0;

  tail_.assign(pmf_.size() + 1, 0.0);
  for (auto k = static_cast<std::ptrdiff_t>(pmf_.size()) - 1; k >= 0; --k) {
    tail_[k] = tail_[k + 1] + pmf_[k];
  }
}

double TruncatedDemand::pmf(std::int64_t k) const {
  return (k < 0 || k > max_demand()) ? 0.0 : pmf_[static_cast<std::size_t>(k)];
}

double TruncatedDemand::tail_from(std::int64_t k) const {
  if (k <= 0) {
    return 1.0;
  }
  return k > max_demand() ? 0.0 : tail_[static_cast<std::size_t>(k)];
}

std::int64_t TruncatedDemand::sample(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::int64_t>(it - cdf_.begin(), max_demand());
}

std::int64_t demand_quantile(const TruncatedDemand& demand, int periods, double level) {
  std::vector<double> dist{1.0};
  const auto one = demand.pmf();
  for (int p = 0; p < periods; ++p) {
    std::vector<double> next(dist.size() + one.size() - 1, 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      for (std::size_t j = 0; j < one.size(); ++j) {
        next[i + j] += dist[i] * one[j];
      }
    }
    dist.swap(next);
  }
  double cdf = 0.0;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    cdf += dist[s];
    if (cdf >= level) {
      return static_cast<std::int64_t>(s);
    }
  }
  return static_cast<std::int64_t>(dist.size()) - 1;
}

void LostSalesConfig::validate() const {
  if (lead_time < 1 || lead_time > 4) {
    throw ValidationError("lead_time must be in 1..4");
  }
  if (!(holding_cost > 0.0)) {
    throw ValidationError("holding_cost must be positive");
  }
  if (!(penalty >= 0.0)) {
    throw ValidationError("penalty must be nonnegative");
  }
  demand.validate();
  if (!(discount > 0.0 && discount < 1.0)) {
    throw ValidationError("discount must lie in (0, 1)");
  }
  if (order_cap && *order_cap < 1) {
    throw ValidationError("order_cap must be at least 1");
  }
  if (order_cap && position_cap && *position_cap < *order_cap) {
    throw ValidationError("position_cap must be at least order_cap");
  }
}

ResolvedCaps resolve_caps(const LostSalesConfig& cfg) {
  cfg.validate();
  ResolvedCaps caps;
  if (cfg.position_cap) {
    caps.position_cap = *cfg.position_cap;
  } else {
    const TruncatedDemand demand(cfg.demand);
    const double level = cfg.penalty / (cfg.penalty + cfg.holding_cost);
    caps.position_cap = static_cast<int>(demand_quantile(demand, cfg.lead_time + 1, level));
    if (cfg.order_cap) {
      caps.position_cap = std::max(caps.position_cap, *cfg.order_cap);
    }
  }
  caps.order_cap = cfg.order_cap ? *cfg.order_cap : caps.position_cap;
  caps.order_cap = std::max(caps.order_cap, 1);
  caps.position_cap = std::max(caps.position_cap, caps.order_cap);
  return caps;
}

void lost_sales_transition(std::span<const double> s, double order, double demand,
                           std::span<double> next) {
  const std::size_t tau = s.size();
  const double left = std::max(s[0] - demand, 0.0);
  if (tau == 1) {
    next[0] = left + order;
    return;
  }
  next[0] = left + s[1];
  for (std::size_t i = 1; i + 1 < tau; ++i) {
    next[i] = s[i + 1];
  }
  next[tau - 1] = order;
}

double lost_sales_period_cost(std::span<const double> s, double demand, double holding,
                              double penalty) {
  return holding * std::max(s[0] - demand, 0.0) + penalty * std::max(demand - s[0], 0.0);
}

int max_allowed_order(std::span<const double> s, int order_cap, int position_cap) {
  const double position = std::accumulate(s.begin(), s.end(), 0.0);
  const double room = static_cast<double>(position_cap) - position;
  return std::max(0, std::min(order_cap, static_cast<int>(std::floor(room))));
}

LostSalesModel::LostSalesModel(LostSalesConfig cfg)
    : cfg_(std::move(cfg)), caps_(resolve_caps(cfg_)), demand_(cfg_.demand) {}

std::vector<Action> LostSalesModel::allowed_actions(std::span<const double> s) const {
  const int top = max_allowed_order(s, caps_.order_cap, caps_.position_cap);
  std::vector<Action> out(static_cast<std::size_t>(top) + 1);
  std::iota(out.begin(), out.end(), action_of_order(0));
  return out;
}

bool LostSalesModel::is_allowed(std::span<const double> s, Action a) const {
  const int order = order_of_action(a);
  return order >= 0 && order <= max_allowed_order(s, caps_.order_cap, caps_.position_cap);
}

double LostSalesModel::sample_w(RngStream& stream) const {
  return static_cast<double>(demand_.sample(stream.uniform()));
}

void LostSalesModel::transition(std::span<const double> s, Action a, double w,
                                std::span<double> next) const {
  lost_sales_transition(s, order_of_action(a), w, next);
}

double LostSalesModel::cost(std::span<const double> s, Action, double w) const {
  return lost_sales_period_cost(s, w, cfg_.holding_cost, cfg_.penalty);
}

State LostSalesModel::initial_state() const {
  return State(static_cast<std::size_t>(cfg_.lead_time), 0.0);
}

Action BaseStockPolicy::act(std::span<const double> s) const {
  const double position = std::accumulate(s.begin(), s.end(), 0.0);
  const int want = std::max(0, level_ - static_cast<int>(position));
  const int top = max_allowed_order(s, model_.caps().order_cap, model_.caps().position_cap);
  return action_of_order(std::min(want, top));
}

}  // namespace mcl
