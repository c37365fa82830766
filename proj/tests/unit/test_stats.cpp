#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "clusterfdr/error.hpp"
#include "clusterfdr/rng.hpp"
#include "clusterfdr/stats.hpp"
#include "clusterfdr/tdist.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace clusterfdr;

namespace {

SubjectStack one_voxel(const std::vector<double>& values) {
  std::vector<Volume> subjects;
  for (double v : values) subjects.emplace_back(Dims{1, 1, 1}, std::vector<double>{v});
  return SubjectStack(std::move(subjects), Mask::full(Dims{1, 1, 1}));
}

}  // namespace

TEST(TMap, HandComputedExample) {
  const TMap t = one_sample_tmap(one_voxel({2, 4, 6, 8}));
  EXPECT_EQ(t.df, 3);
  EXPECT_NEAR(t.volume[0], 5.0 / (std::sqrt(20.0 / 3.0) / 2.0), 1e-12);
  EXPECT_NEAR(t.volume[0], 3.872983346, 1e-9);
  EXPECT_EQ(t.zero_variance_count, 0U);
}

TEST(TMap, ConstantSubjectsGiveZero) {
  const TMap t = one_sample_tmap(one_voxel({3.5, 3.5, 3.5, 3.5}));
  EXPECT_EQ(t.volume[0], 0.0);
  EXPECT_EQ(t.zero_variance_count, 1U);
}

TEST(TMap, OutOfMaskIsZero) {
  const Dims d{3, 1, 1};
  std::vector<Volume> subjects;
  for (int s = 0; s < 4; ++s) subjects.emplace_back(d, std::vector<double>{1.0 + s, 2.0 * s, 5.0 - s * s});
  const SubjectStack stack(std::move(subjects), Mask(d, {1, 0, 1}));
  const TMap t = one_sample_tmap(stack);
  EXPECT_EQ(t.volume[1], 0.0);
  EXPECT_NE(t.volume[0], 0.0);
}

TEST(TMap, MatchesTwoPassOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> n_dist(2, 12);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Dims d{3, 2, 2};
    const auto n = static_cast<std::size_t>(n_dist(rng));
    const SubjectStack stack = fixtures::random_stack(rng, d, n, shift(rng));
    std::vector<std::int8_t> signs(n);
    for (auto& s : signs) s = (rng() & 1) ? 1 : -1;
    const TMap t = one_sample_tmap(stack, signs);
    const auto values = fixtures::stack_values(stack);
    for (std::size_t v = 0; v < d.size(); ++v) {
      std::vector<double> col(n);
      for (std::size_t s = 0; s < n; ++s) col[s] = signs[s] * values[s][v];
      const double ref = oracle::two_pass_t(col);
      EXPECT_NEAR(t.volume[v], ref, 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(TMap, GlobalSignFlipIsExactNegation) {
  std::mt19937_64 rng(5);
  const SubjectStack stack = fixtures::random_stack(rng, Dims{4, 4, 4}, 9, 0.3);
  const auto s = sign_vector(99, 1, 9);
  std::vector<std::int8_t> neg(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) neg[i] = static_cast<std::int8_t>(-s[i]);
  const TMap a = one_sample_tmap(stack, s);
  const TMap b = one_sample_tmap(stack, neg);
  for (std::size_t v = 0; v < a.volume.size(); ++v) EXPECT_EQ(-a.volume[v], b.volume[v]);
}

TEST(TMap, WorkspaceAgreesWithFreeFunction) {
  std::mt19937_64 rng(8);
  const SubjectStack stack = fixtures::random_stack(rng, Dims{5, 3, 2}, 6);
  TMapWorkspace ws(stack);
  std::vector<double> out(stack.dims().size());
  const auto signs = sign_vector(3, 4, 6);
  ws.compute(signs, out);
  const TMap t = one_sample_tmap(stack, signs);
  for (std::size_t v = 0; v < out.size(); ++v) EXPECT_EQ(out[v], t.volume[v]);
}

TEST(TMap, RejectsBadSigns) {
  std::mt19937_64 rng(1);
  const SubjectStack stack = fixtures::random_stack(rng, Dims{2, 1, 1}, 3);
  const std::vector<std::int8_t> short_signs{1, 1};
  const std::vector<std::int8_t> zero_sign{1, 0, 1};
  EXPECT_THROW(one_sample_tmap(stack, short_signs), Error);
  EXPECT_THROW(one_sample_tmap(stack, zero_sign), Error);
}

TEST(TDist, QuadratureOracleAgreesWithClosedForms) {
  // df = 1 is Cauchy
  for (double t : {0.3, 1.0, 4.0, 12.706, 100.0}) {
    EXPECT_NEAR(oracle::t_upper_tail(t, 1), 0.5 - std::atan(t) / std::numbers::pi, 1e-11);
  }
  // df = 2 has tail 0.5 - t / (2 sqrt(2 + t^2))
  for (double t : {0.5, 2.0, 9.0}) {
    EXPECT_NEAR(oracle::t_upper_tail(t, 2), 0.5 - t / (2.0 * std::sqrt(2.0 + t * t)), 1e-11);
  }
}

TEST(TDist, QuantileMatchesOracle) {
  const double ref = oracle::t_upper_quantile(0.025, 9);
  EXPECT_NEAR(ref, 2.262157, 5e-7);
  EXPECT_NEAR(t_upper_quantile(0.025, 9), ref, 1e-9);
  for (double df : {1.0, 3.0, 9.0, 19.0, 60.0}) {
    for (double p : {0.2, 0.05, 0.01, 0.001}) {
      const double r = oracle::t_upper_quantile(p, df);
      EXPECT_NEAR(t_upper_quantile(p, df), r, 1e-7 * r) << "df " << df << " p " << p;
    }
  }
}

TEST(TDist, TailMatchesOracle) {
  for (double df : {1.0, 4.0, 19.0, 200.0}) {
    for (double t : {-2.0, 0.0, 0.7, 2.5, 6.0}) {
      EXPECT_NEAR(t_upper_tail(t, df), oracle::t_upper_tail(t, df), 1e-10) << df << " " << t;
    }
  }
}

TEST(TDist, CauchyExample) {
  EXPECT_NEAR(t_upper_tail(12.706, 1), 0.025, 1e-5);
  EXPECT_DOUBLE_EQ(t_upper_tail(0.0, 7), 0.5);
  EXPECT_EQ(t_upper_quantile(0.5, 10), 0.0);
}

TEST(TDist, NormalLimit) {
  const double z = oracle::normal_upper_quantile(0.001);
  EXPECT_NEAR(z, 3.090232, 1e-6);
  EXPECT_NEAR(t_upper_quantile(0.001, 1e6), 3.090245, 1e-4);
  EXPECT_NEAR(t_upper_quantile(0.001, 1e6), z, 1e-4);
}

TEST(TDist, InverseIdentity) {
  for (double df : {1.0, 2.0, 5.0, 9.0, 30.0, 100.0, 1e6}) {
    for (double p : {0.4, 0.1, 0.05, 0.01, 0.001, 1e-4, 1e-6}) {
      EXPECT_NEAR(t_upper_tail(t_upper_quantile(p, df), df), p, 1e-7 * std::max(p, 1e-3));
    }
  }
}

TEST(TDist, Monotonicity) {
  for (double df : {1.0, 5.0, 40.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {1e-5, 1e-4, 1e-3, 0.01, 0.05, 0.2, 0.45}) {
      const double q = t_upper_quantile(p, df);
      EXPECT_LT(q, prev);
      prev = q;
    }
    double prev_tail = 1.0;
    for (double t = -5.0; t <= 5.0; t += 0.25) {
      const double tail = t_upper_tail(t, df);
      EXPECT_LT(tail, prev_tail);
      prev_tail = tail;
    }
  }
  for (double p : {0.2, 0.05, 0.001}) {
    EXPECT_GT(t_upper_quantile(p, 3), t_upper_quantile(p, 10));
    EXPECT_GT(t_upper_quantile(p, 10), t_upper_quantile(p, 1000));
  }
}

TEST(TDist, RejectsBadArguments) {
  EXPECT_THROW(t_upper_quantile(0.0, 5), Error);
  EXPECT_THROW(t_upper_quantile(0.6, 5), Error);
  EXPECT_THROW(t_upper_quantile(0.05, 0.5), Error);
  EXPECT_THROW(t_upper_tail(1.0, 0), Error);
}

TEST(Rng, ReferenceSplitMix64) {
  std::uint64_t state = 0;
  const std::uint64_t first = oracle::splitmix64(state);
  EXPECT_EQ(first, 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(RngStream::from_state(0).next_u64(), first);
  auto r = RngStream::from_state(0);
  state = 0;
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(r.next_u64(), oracle::splitmix64(state));
}

TEST(Rng, StreamSeedingRule) {
  const std::uint64_t seed = 1234;
  const std::uint64_t idx = 17;
  std::uint64_t state = seed ^ ((idx + 1) * RngStream::kStreamMix);
  oracle::splitmix64(state);
  RngStream s(seed, idx);
  EXPECT_EQ(s.next_u64(), oracle::splitmix64(state));
  EXPECT_EQ(derive_seed(seed, idx), RngStream(seed, idx).next_u64());
}

TEST(Rng, Determinism) {
  RngStream a(42, 3);
  RngStream b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(sign_vector(9, 5, 30), sign_vector(9, 5, 30));
}

TEST(Rng, AdjacentStreamsDiffer) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t s = rng();
    const std::uint64_t idx = rng() % 100000;
    ASSERT_NE(RngStream(s, idx).next_u64(), RngStream(s, idx + 1).next_u64()) << s << " " << idx;
  }
}

TEST(Rng, SignVectorBalance) {
  constexpr std::size_t n = 20;
  std::vector<long> sums(n, 0);
  for (std::uint64_t r = 1; r <= 5000; ++r) {
    const auto s = sign_vector(2024, r, n);
    ASSERT_EQ(s.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_TRUE(s[i] == 1 || s[i] == -1);
      sums[i] += s[i];
    }
  }
  for (long v : sums) EXPECT_LE(std::abs(static_cast<double>(v) / 5000.0), 0.05);
}

TEST(Rng, SignVectorBitRule) {
  RngStream s(77, 4);
  const auto v = sign_vector(77, 4, 64);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], (s.next_u64() & 1) == 0 ? 1 : -1);
}

TEST(Rng, RealizationZeroIsReserved) {
  EXPECT_THROW(sign_vector(1, 0, 10), Error);
}

TEST(Rng, NormalMoments) {
  RngStream s(7, 0);
  double sum = 0.0;
  double sum2 = 0.0;
  constexpr int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double x = s.next_standard_normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n - mean * mean, 1.0, 0.02);
}

TEST(Rng, NormalIsAlwaysFinite) {
  RngStream s(123, 9);
  bool finite = true;
  for (int i = 0; i < 10000000; ++i) finite &= std::isfinite(s.next_standard_normal());
  EXPECT_TRUE(finite);
  auto zero = RngStream::from_state(0);
  const double u = zero.next_open_unit();
  EXPECT_GT(u, 0.0);
  EXPECT_LT(u, 1.0);
}
