#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mcl/error.hpp"
#include "mcl/rng.hpp"

using mcl::RngKey;
using mcl::RngStream;

TEST(Philox, KnownAnswerVectors) {
  using Block = std::array<std::uint32_t, 4>;
  EXPECT_EQ(mcl::philox4x32({0, 0, 0, 0}, {0, 0}),
            (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(mcl::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            {0xffffffff, 0xffffffff}),
            (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(mcl::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            {0xa4093822, 0x299f31d0}),
            (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngKey, DeriveIsPureAndSeparatesChildren) {
  const RngKey root(42);
  EXPECT_EQ(root.derive(3, 1), root.derive(3, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 4; ++b) {
      seen.insert(root.derive(a, b).value());
    }
  }
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_NE(RngKey(1).derive(0), RngKey(2).derive(0));
}

TEST(RngKey, HexRoundTrip) {
  const RngKey k = RngKey(7).derive(11, 13);
  EXPECT_EQ(mcl::key_from_hex(mcl::to_hex(k)), k);
  EXPECT_EQ(mcl::to_hex(RngKey(0x1f)), "000000000000001f");
  EXPECT_THROW(mcl::key_from_hex("xyz"), mcl::ValidationError);
}

TEST(RngStream, SameCoordinatesSameValues) {
  RngStream a(RngKey(5), 3);
  RngStream b(RngKey(5), 3);
  RngStream c(RngKey(5), 4);
  int differ = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differ += x != c.next_u64() ? 1 : 0;
  }
  EXPECT_EQ(differ, 100);
}

TEST(RngStream, UniformMomentsAndRange) {
  RngStream s(RngKey(99), 0);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // sd of the mean is sqrt(1/12/n) ~ 6.5e-4.
  EXPECT_NEAR(mean, 0.5, 4 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(var, 1.0 / 12.0, 2e-3);
}

TEST(RngStream, BelowIsUniform) {
  RngStream s(RngKey(3), 1);
  const int n = 70000;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = s.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  double chi2 = 0.0;
  for (int c : counts) {
    chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  }
  // 6 degrees of freedom; 22.46 is the 0.999 quantile.
  EXPECT_LT(chi2, 22.46);
}

TEST(RngStream, DistinctScenarioKeysAreUncorrelated) {
  const RngKey root(2024);
  const int n = 1000000;
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    RngStream a(root.derive(static_cast<std::uint64_t>(i)), 1);
    RngStream b(root.derive(static_cast<std::uint64_t>(i + 1)), 1);
    const double x = a.uniform();
    const double y = b.uniform();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double rho = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(rho), 0.01);
}
