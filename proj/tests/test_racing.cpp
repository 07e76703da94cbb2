#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mcl/error.hpp"
#include "mcl/exact_solver.hpp"
#include "mcl/lost_sales.hpp"
#include "mcl/racing.hpp"
#include "mcl/tabular_mdp.hpp"
#include "test_models.hpp"

using namespace mcl;

namespace {

struct LeadTwo {
  LostSalesModel model{LostSalesConfig{}};
  LostSalesMdp mdp{model};
  AverageCostResult optimal = solve_optimal_average_cost(mdp);
  ValueTable v = evaluate_policy_discounted(mdp, optimal.policy, model.discount());
};

LeadTwo& lead_two() {
  static LeadTwo f;
  return f;
}

Action exact_argmin(const LeadTwo& f, std::size_t i) {
  const auto q = q_values(f.mdp, f.v, f.model.discount(), i);
  int best = 0;
  for (int k = 1; k < static_cast<int>(q.size()); ++k) {
    if (q[k] < q[best]) {
      best = k;
    }
  }
  return f.mdp.action_at(i, best);
}

}  // namespace

TEST(InverseNormal, MatchesReferenceQuantiles) {
  EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959963984540054, 1e-10);
  EXPECT_NEAR(inverse_normal_cdf(0.98), 2.053748910631823, 1e-10);
  EXPECT_NEAR(inverse_normal_cdf(0.5), 0.0, 1e-12);
  RacingConfig cfg;
  EXPECT_NEAR(cfg.z_threshold(), 2.053748910631823, 1e-8);
}

TEST(RacingConfig, Validation) {
  RacingConfig cfg;
  cfg.n_min = 1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.n_min = 10;
  cfg.n_max = 5;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.n_max = 10;
  cfg.epsilon = 0.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.epsilon = 0.1;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(PairedStats, HandExamples) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> zero{0, 0, 0};
  const auto st = paired_stats(a, zero);
  EXPECT_DOUBLE_EQ(st.mean_diff, 2.0);
  EXPECT_NEAR(st.std_err_diff, 1.0 / std::sqrt(3.0), 1e-15);

  const auto self = paired_stats(a, a);
  EXPECT_EQ(self.mean_diff, 0.0);
  EXPECT_EQ(self.std_err_diff, 0.0);

  const std::vector<double> b{0.5, 4, -1};
  const std::vector<double> a2{101, 102, 103};
  const std::vector<double> b2{100.5, 104, 99};
  const auto base = paired_stats(a, b);
  const auto shifted = paired_stats(a2, b2);
  EXPECT_NEAR(base.mean_diff, shifted.mean_diff, 1e-12);
  EXPECT_NEAR(base.std_err_diff, shifted.std_err_diff, 1e-12);

  EXPECT_THROW(paired_stats(a, std::vector<double>{1, 2}), LengthMismatch);
}

TEST(SampleMatrix, RunningSumsMatchStoredLists) {
  SampleMatrix m({1, 2, 3});
  RngStream s(RngKey(4), 0);
  for (int i = 0; i < 50; ++i) {
    const double common = 100 * s.uniform();
    const std::vector<double> costs{common + s.uniform(), common + 0.5 + s.uniform(),
                                    common + 2 * s.uniform()};
    m.add_replication(RngKey(static_cast<std::uint64_t>(i)), costs);
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) {
        continue;
      }
      const auto fast = m.paired(a, b);
      const auto ref = paired_stats(m.costs(a), m.costs(b));
      EXPECT_NEAR(fast.mean_diff, ref.mean_diff, 1e-10);
      EXPECT_NEAR(fast.std_err_diff, ref.std_err_diff, 1e-9);
    }
  }
}

TEST(SampleMatrix, ZeroVarianceRule) {
  SampleMatrix m({1, 2, 3});
  // Action 2 is always cheaper by exactly 1, action 3 ties with action 2.
  for (int i = 0; i < 5; ++i) {
    m.add_replication(RngKey(static_cast<std::uint64_t>(i)), std::vector<double>{i + 1.0, i + 0.0, i + 0.0});
  }
  EXPECT_EQ(m.incumbent(), 1);
  EXPECT_EQ(m.eliminate(2.0), 1);
  // Positive mean with zero spread is eliminated; zero mean survives.
  EXPECT_EQ(m.survivors(), (std::vector<int>{1, 2}));
}

TEST(Racing, SingleActionStopsAfterInitialBatch) {
  const mcl::testing::ConstantCostModel model(0.9, 1.0, 1);
  const mcl::testing::FixedActionPolicy pi(1);
  RacingConfig cfg;
  cfg.n_min = 20;
  cfg.n_max = 100;
  const auto r = improved_action(model, pi, State{0.0}, cfg, RngKey(1));
  EXPECT_EQ(r.action, 1);
  EXPECT_EQ(r.diagnostics.replications, 20);
  EXPECT_EQ(r.diagnostics.survivors_per_round, (std::vector<int>{1}));
}

TEST(Racing, DeterministicModelGivesExactArgmin) {
  const mcl::testing::DeterministicChoiceModel model(7, 4);
  const mcl::testing::FixedActionPolicy pi(1);
  RacingConfig cfg;
  cfg.n_min = 10;
  cfg.n_max = 50;
  const auto r = improved_action(model, pi, State{0.0}, cfg, RngKey(6));
  EXPECT_EQ(r.action, 4);
  EXPECT_EQ(r.diagnostics.replications, 10);
  EXPECT_EQ(r.diagnostics.rollouts, 70);
}

TEST(Racing, PairingAuditAndBudget) {
  auto& f = lead_two();
  const TabularPolicyView pi(f.mdp, f.optimal.policy);
  RacingConfig cfg;
  cfg.n_min = 50;
  cfg.n_max = 400;
  const State s{6, 4};
  SampleMatrix m({1});
  const RngKey key(31);
  const auto r = improved_action(f.model, pi, s, cfg, key, &m);
  const auto allowed = f.model.allowed_actions(s);

  EXPECT_LE(r.diagnostics.replications, cfg.n_max);
  EXPECT_LE(r.diagnostics.rollouts, cfg.n_max * static_cast<int>(allowed.size()));
  EXPECT_EQ(m.replications(), r.diagnostics.replications);
  // Monotone shrinking, never empty.
  for (std::size_t k = 1; k < r.diagnostics.survivors_per_round.size(); ++k) {
    EXPECT_LE(r.diagnostics.survivors_per_round[k], r.diagnostics.survivors_per_round[k - 1]);
    EXPECT_GE(r.diagnostics.survivors_per_round[k], 1);
  }
  // Survivors hold every replication, each under the scenario keyed by its index.
  for (int slot : m.survivors()) {
    ASSERT_EQ(static_cast<int>(m.keys(slot).size()), m.replications());
    for (int i = 0; i < m.replications(); ++i) {
      EXPECT_EQ(m.keys(slot)[i], key.derive(static_cast<std::uint64_t>(i)));
    }
  }
  // Every action shares the prefix of scenarios it took part in.
  for (std::size_t slot = 0; slot < allowed.size(); ++slot) {
    const auto keys = m.keys(static_cast<int>(slot));
    ASSERT_GE(static_cast<int>(keys.size()), cfg.n_min);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      EXPECT_EQ(keys[i], m.scenario_keys()[i]);
    }
  }
  EXPECT_EQ(std::count(m.survivors().begin(), m.survivors().end(),
                       static_cast<int>(std::find(allowed.begin(), allowed.end(), r.action) -
                                        allowed.begin())),
            1);
}

TEST(Racing, FixedKeyIsReproducible) {
  auto& f = lead_two();
  const TabularPolicyView pi(f.mdp, f.optimal.policy);
  RacingConfig cfg;
  cfg.n_min = 100;
  cfg.n_max = 500;
  const auto a = improved_action(f.model, pi, State{3, 5}, cfg, RngKey(99));
  const auto b = improved_action(f.model, pi, State{3, 5}, cfg, RngKey(99));
  EXPECT_EQ(a.action, b.action);
  EXPECT_EQ(a.diagnostics.survivors_per_round, b.diagnostics.survivors_per_round);
  EXPECT_EQ(a.diagnostics.rollouts, b.diagnostics.rollouts);
}

TEST(Racing, DisagreementShrinksWithTighterSettings) {
  auto& f = lead_two();
  const TabularPolicyView pi(f.mdp, f.optimal.policy);
  RngStream pick(RngKey(555), 0);
  std::vector<std::size_t> states;
  for (int k = 0; k < 40; ++k) {
    states.push_back(static_cast<std::size_t>(pick.below(f.mdp.size())));
  }
  // Counts disagreements with the exact greedy action and records the worst
  // relative regret q(chosen) / q(best) - 1.
  const auto disagreements = [&](RacingConfig cfg, double& worst_regret) {
    int bad = 0;
    worst_regret = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto s = f.mdp.state(states[k]);
      const auto r = improved_action(f.model, pi, s, cfg, RngKey(7).derive(k));
      const Action best = exact_argmin(f, states[k]);
      if (r.action != best) {
        ++bad;
        const auto q = q_values(f.mdp, f.v, f.model.discount(), states[k]);
        worst_regret = std::max(worst_regret, q[r.action - 1] / q[best - 1] - 1.0);
      }
    }
    return bad;
  };
  RacingConfig loose;
  loose.n_min = 10;
  loose.n_max = 20;
  loose.epsilon = 0.3;
  RacingConfig tight;
  tight.n_min = 300;
  tight.n_max = 2000;
  tight.epsilon = 0.01;
  double regret_loose = 0.0;
  double regret_tight = 0.0;
  const int bad_loose = disagreements(loose, regret_loose);
  const int bad_tight = disagreements(tight, regret_tight);
  EXPECT_LT(bad_tight, bad_loose);
  EXPECT_LT(regret_tight, regret_loose);
  // Remaining mistakes are near-ties the budget cannot resolve.
  EXPECT_LT(regret_tight, 1e-3);
}
