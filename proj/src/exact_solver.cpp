#include "mcl/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcl/error.hpp"
#include "mcl/parallel.hpp"
#include "mcl/text_config.hpp"

namespace mcl {
namespace {

std::vector<int> policy_slots(const TabularMdp& mdp, const TabularPolicy& policy) {
  if (policy.actions.size() != mdp.size()) {
    throw LengthMismatch("tabular policy size does not match the MDP");
  }
  std::vector<int> slots(mdp.size());
  for (std::size_t i = 0; i < mdp.size(); ++i) {
    const auto slot = mdp.slot_of(i, policy.actions[i]);
    if (!slot) {
      throw ActionNotAllowed("tabular policy picks a disallowed action at state " +
                             std::to_string(i));
    }
    slots[i] = *slot;
  }
  return slots;
}

struct MinMax {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
};

// Relative value iteration. With `slots` the operator is T_pi, otherwise the
// optimality operator (and `greedy` receives the minimizing slots).
AverageCostResult relative_value_iteration(const TabularMdp& mdp, const std::vector<int>* slots,
                                           const SolverOptions& opts,
                                           const std::vector<double>* warm_start) {
  constexpr double kDamping = 0.5;
  constexpr int kStallWindow = 1000;

  const std::size_t n = mdp.size();
  const std::size_t ref = mdp.reference_state();
  const int workers = std::max(1, opts.workers);
  const int max_actions = slots ? 0 : mdp.max_actions();

  std::vector<double> h = warm_start && warm_start->size() == n ? *warm_start
                                                                : std::vector<double>(n, 0.0);
  std::vector<double> th(n);
  std::vector<int> greedy(slots ? 0 : n);
  std::vector<MinMax> chunk(static_cast<std::size_t>(workers));
  std::vector<double> spans;

  AverageCostResult result;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end, int w) {
      MinMax mm;
      std::vector<double> q(static_cast<std::size_t>(max_actions));
      for (std::size_t i = begin; i < end; ++i) {
        double value;
        if (slots) {
          value = mdp.backup_one(i, (*slots)[i], h, 1.0);
        } else {
          mdp.backup(i, h, 1.0, q);
          const int k = mdp.num_actions(i);
          int best = 0;
          for (int a = 1; a < k; ++a) {
            if (q[a] < q[best]) {
              best = a;
            }
          }
          greedy[i] = best;
          value = q[best];
        }
        th[i] = value;
        const double d = value - h[i];
        mm.lo = std::min(mm.lo, d);
        mm.hi = std::max(mm.hi, d);
      }
      chunk[static_cast<std::size_t>(w)] = mm;
    });
    MinMax all;
    for (const auto& mm : chunk) {
      all.lo = std::min(all.lo, mm.lo);
      all.hi = std::max(all.hi, mm.hi);
    }
    std::fill(chunk.begin(), chunk.end(), MinMax{});
    const double span = all.hi - all.lo;
    spans.push_back(span);
    if (!std::isfinite(span)) {
      throw SolverError("relative value iteration diverged");
    }
    if (span <= opts.tol) {
      result.gain = 0.5 * (all.hi + all.lo);
      result.iterations = it;
      result.relative.v = h;
      result.relative.kind = ValueKind::Relative;
      if (!slots) {
        result.policy.actions.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          result.policy.actions[i] = mdp.action_at(i, greedy[i]);
        }
      }
      const auto keep = std::min<std::size_t>(spans.size(), 200);
      result.span_tail.assign(spans.end() - static_cast<std::ptrdiff_t>(keep), spans.end());
      return result;
    }
    // A periodic chain keeps the span from contracting; switch to the
    // aperiodicity transform, which has the same fixed point.
    if (!result.damped && it % kStallWindow == 0 && it > kStallWindow &&
        span > 0.99 * spans[spans.size() - 1 - kStallWindow]) {
      result.damped = true;
    }
    const double shift = result.damped ? (1.0 - kDamping) * h[ref] + kDamping * th[ref] : th[ref];
    for (std::size_t i = 0; i < n; ++i) {
      const double next = result.damped ? (1.0 - kDamping) * h[i] + kDamping * th[i] : th[i];
      h[i] = next - shift;
    }
  }
  throw SolverError("relative value iteration did not converge within " +
                    std::to_string(opts.max_iterations) + " iterations (span " +
                    format_double(spans.empty() ? 0.0 : spans.back()) + ")");
}

}  // namespace

Action TabularPolicyView::act(std::span<const double> s) const {
  const auto i = mdp_.index_of(s);
  if (!i) {
    throw ValidationError("state outside the enumerated state space");
  }
  return policy_.actions[*i];
}

TabularPolicy tabulate(const TabularMdp& mdp, const Policy& policy) {
  TabularPolicy out;
  out.actions.resize(mdp.size());
  for (std::size_t i = 0; i < mdp.size(); ++i) {
    out.actions[i] = policy.act(mdp.state(i));
  }
  return out;
}

ValueTable evaluate_policy_discounted(const TabularMdp& mdp, const TabularPolicy& policy,
                                      double alpha, const SolverOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("discount must lie in (0, 1)");
  }
  const auto slots = policy_slots(mdp, policy);
  const std::size_t n = mdp.size();
  const double target = opts.tol * (1.0 - alpha) / (2.0 * alpha);
  const int workers = std::max(1, opts.workers);
  std::vector<double> v(n, 0.0);
  std::vector<double> next(n);
  std::vector<double> chunk_residual(static_cast<std::size_t>(workers));
  for (int it = 0; it < opts.max_iterations; ++it) {
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end, int w) {
      double r = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        next[i] = mdp.backup_one(i, slots[i], v, alpha);
        r = std::max(r, std::abs(next[i] - v[i]));
      }
      chunk_residual[static_cast<std::size_t>(w)] = r;
    });
    const double residual = *std::max_element(chunk_residual.begin(), chunk_residual.end());
    std::fill(chunk_residual.begin(), chunk_residual.end(), 0.0);
    v.swap(next);
    if (residual <= target) {
      return {std::move(v), ValueKind::Discounted};
    }
  }
  throw SolverError("discounted policy evaluation did not converge");
}

double bellman_residual(const TabularMdp& mdp, const TabularPolicy& policy, const ValueTable& v,
                        double alpha) {
  const auto slots = policy_slots(mdp, policy);
  double r = 0.0;
  for (std::size_t i = 0; i < mdp.size(); ++i) {
    r = std::max(r, std::abs(mdp.backup_one(i, slots[i], v.v, alpha) - v.v[i]));
  }
  return r;
}

std::vector<double> q_values(const TabularMdp& mdp, const ValueTable& values, double alpha,
                             std::size_t i) {
  if (values.kind != ValueKind::Discounted) {
    throw ValidationError("q_values needs a discounted value table");
  }
  std::vector<double> q(static_cast<std::size_t>(mdp.num_actions(i)));
  mdp.backup(i, values.v, alpha, q);
  return q;
}

TabularPolicy improve_policy_exact(const TabularMdp& mdp, const TabularPolicy& policy, double alpha,
                                   const SolverOptions& opts) {
  const auto values = evaluate_policy_discounted(mdp, policy, alpha, opts);
  TabularPolicy out;
  out.actions.resize(mdp.size());
  std::vector<double> q(static_cast<std::size_t>(mdp.max_actions()));
  for (std::size_t i = 0; i < mdp.size(); ++i) {
    mdp.backup(i, values.v, alpha, q);
    int best = 0;
    for (int a = 1; a < mdp.num_actions(i); ++a) {
      if (q[a] < q[best]) {
        best = a;
      }
    }
    out.actions[i] = mdp.action_at(i, best);
  }
  return out;
}

AverageCostResult solve_optimal_average_cost(const TabularMdp& mdp, const SolverOptions& opts) {
  return relative_value_iteration(mdp, nullptr, opts, nullptr);
}

AverageCostResult evaluate_policy_average_detailed(const TabularMdp& mdp,
                                                   const TabularPolicy& policy,
                                                   const SolverOptions& opts,
                                                   const std::vector<double>* warm_start) {
  const auto slots = policy_slots(mdp, policy);
  auto result = relative_value_iteration(mdp, &slots, opts, warm_start);
  result.policy = policy;
  return result;
}

double evaluate_policy_average(const TabularMdp& mdp, const TabularPolicy& policy,
                               const SolverOptions& opts) {
  return evaluate_policy_average_detailed(mdp, policy, opts).gain;
}

BaseStockResult best_base_stock(const LostSalesMdp& mdp, const SolverOptions& opts) {
  const auto& model = mdp.model();
  BaseStockResult out;
  out.gain = std::numeric_limits<double>::infinity();
  std::vector<double> warm;
  for (int level = 0; level <= model.caps().position_cap; ++level) {
    const BaseStockPolicy policy(model, level);
    const auto r = evaluate_policy_average_detailed(mdp, tabulate(mdp, policy), opts,
                                                    warm.empty() ? nullptr : &warm);
    warm = r.relative.v;
    out.gains.push_back(r.gain);
    if (r.gain < out.gain) {
      out.gain = r.gain;
      out.level = level;
    }
  }
  return out;
}

double gap_percent(double gain, double optimal_gain) {
  if (optimal_gain == 0.0) {
    return gain == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (gain - optimal_gain) / optimal_gain * 100.0;
}

double cap_insensitivity(const LostSalesConfig& cfg, int extra, const SolverOptions& opts) {
  const LostSalesModel base(cfg);
  LostSalesConfig wider = cfg;
  wider.order_cap = base.caps().order_cap + extra;
  wider.position_cap = base.caps().position_cap + extra;
  const LostSalesModel grown(wider);
  const double g0 = solve_optimal_average_cost(LostSalesMdp(base), opts).gain;
  const double g1 = solve_optimal_average_cost(LostSalesMdp(grown), opts).gain;
  return std::abs(g1 - g0);
}

namespace {

std::istringstream expect_header(const std::string& text, const std::string& magic,
                                 const std::string& expected_hash) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != magic) {
    throw ValidationError("expected header '" + magic + "'");
  }
  std::string key;
  std::string hash;
  in >> key >> hash;
  if (key != "instance_hash") {
    throw ValidationError("missing instance_hash");
  }
  if (!expected_hash.empty() && hash != expected_hash) {
    throw ValidationError("artifact belongs to instance " + hash + ", expected " + expected_hash);
  }
  return in;
}

}  // namespace

std::string write_value_table(const ValueTable& v, const std::string& instance_hash) {
  std::ostringstream out;
  out << "mcl-value-table v1\n";
  out << "instance_hash " << instance_hash << "\n";
  out << "kind " << (v.kind == ValueKind::Discounted ? "discounted" : "relative") << "\n";
  out << "size " << v.v.size() << "\n";
  for (double x : v.v) {
    out << format_double(x) << "\n";
  }
  return out.str();
}

ValueTable read_value_table(const std::string& text, const std::string& expected_hash) {
  auto in = expect_header(text, "mcl-value-table v1", expected_hash);
  std::string key;
  std::string kind;
  std::size_t size = 0;
  in >> key >> kind;
  if (key != "kind" || (kind != "discounted" && kind != "relative")) {
    throw ValidationError("value table: bad kind line");
  }
  in >> key >> size;
  if (key != "size") {
    throw ValidationError("value table: bad size line");
  }
  ValueTable out;
  out.kind = kind == "discounted" ? ValueKind::Discounted : ValueKind::Relative;
  out.v.resize(size);
  for (auto& x : out.v) {
    std::string tok;
    if (!(in >> tok)) {
      throw ValidationError("value table: truncated");
    }
    x = parse_double(tok);
  }
  return out;
}

std::string write_tabular_policy(const TabularPolicy& p, const std::string& instance_hash) {
  std::ostringstream out;
  out << "mcl-tabular-policy v1\n";
  out << "instance_hash " << instance_hash << "\n";
  out << "size " << p.actions.size() << "\n";
  for (Action a : p.actions) {
    out << a << "\n";
  }
  return out.str();
}

TabularPolicy read_tabular_policy(const std::string& text, const std::string& expected_hash) {
  auto in = expect_header(text, "mcl-tabular-policy v1", expected_hash);
  std::string key;
  std::size_t size = 0;
  in >> key >> size;
  if (key != "size") {
    throw ValidationError("tabular policy: bad size line");
  }
  TabularPolicy out;
  out.actions.resize(size);
  for (auto& a : out.actions) {
    if (!(in >> a)) {
      throw ValidationError("tabular policy: truncated");
    }
  }
  return out;
}

}  // namespace mcl
