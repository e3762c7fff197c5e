#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "tnss/error.hpp"
#include "tnss/rng.hpp"

using namespace tnss;
using tnss::test::bits_of;

namespace {

Qubo random_qubo(std::size_t n, SplitMix64& rng, long spread) {
  std::vector<BigInt> lin(n);
  Matrix<BigInt> quad(n, n, BigInt(0));
  for (auto& a : lin) a = static_cast<long>(rng.below(2 * spread + 1)) - spread;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) quad(i, j) = quad(j, i) = static_cast<long>(rng.below(2 * spread + 1)) - spread;
  return Qubo(BigInt(static_cast<long>(rng.below(100))), std::move(lin), std::move(quad));
}

}  // namespace

TEST(Qubo, OneQubitHandExpansion) {
  CvpInstance inst;
  inst.basis = BigMatrix(2, 1, BigInt(0));
  inst.basis(0, 0) = 1;
  inst.target = {1, 0};
  ReducedBasis red = lll_reduce(inst.basis);
  BabaiResult babai;
  babai.point = {0, 0};
  babai.coeffs = {0};
  babai.mu = {Rational(1)};
  babai.signs = {1};
  const auto h = build_hamiltonian(inst, red, babai);
  EXPECT_EQ(h.qubo.constant(), 1);
  EXPECT_EQ(h.qubo.linear()[0], -1);
  EXPECT_EQ(h.energy(Bits{0}), 1);
  EXPECT_EQ(h.energy(Bits{1}), 0);
  const auto spectrum = exact_low_energy_enum(h, 2);
  ASSERT_EQ(spectrum.size(), 2u);
  EXPECT_EQ(spectrum[0].bits, Bits{1});
  EXPECT_EQ(spectrum[0].energy, 0);
  EXPECT_EQ(spectrum[1].bits, Bits{0});
  EXPECT_EQ(spectrum[1].energy, 1);
}

TEST(Qubo, EnergyEqualsSquaredDistance) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto b = test::build(24, 6, 1.0 + 0.5 * static_cast<double>(seed % 3), seed);
    const auto& h = b.hamiltonian;
    EXPECT_EQ(h.energy(Bits(6, 0)), squared_distance(b.instance.target, b.babai.point));
    for (std::uint64_t mask = 0; mask < 64; ++mask) {
      const Bits x = bits_of(mask, 6);
      const auto lp = h.config_to_lattice_point(x);
      ASSERT_EQ(h.energy(x), squared_distance(b.instance.target, lp.point));
      ASSERT_EQ(mat_vec(b.instance.basis, std::span<const BigInt>(lp.coeffs)), lp.point);
    }
  }
}

TEST(Qubo, LatticePointOffsets) {
  const auto b = test::build(20, 5, 1.0, 3);
  const auto& h = b.hamiltonian;
  const auto zero = h.config_to_lattice_point(Bits(5, 0));
  EXPECT_EQ(zero.point, b.babai.point);
  EXPECT_EQ(zero.coeffs, mat_vec(b.reduced.transform, std::span<const BigInt>(b.babai.coeffs)));
  for (std::size_t j = 0; j < 5; ++j) {
    Bits x(5, 0);
    x[j] = 1;
    const auto lp = h.config_to_lattice_point(x);
    for (std::size_t r = 0; r < lp.point.size(); ++r)
      EXPECT_EQ(lp.point[r] - b.babai.point[r], b.babai.signs[j] * b.reduced.reduced(r, j));
  }
}

TEST(Qubo, TenQubitRandomStrings) {
  const auto b = test::build(40, 10, 2.0, 9);
  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Bits x = bits_of(rng.below(1024), 10);
    const auto lp = b.hamiltonian.config_to_lattice_point(x);
    EXPECT_EQ(b.hamiltonian.energy(x), squared_distance(b.instance.target, lp.point));
  }
}

TEST(Qubo, RejectsMalformedCouplings) {
  Matrix<BigInt> q(2, 2, BigInt(0));
  q(0, 1) = 3;
  EXPECT_THROW(Qubo(0, {1, 2}, q), Error);
  q(1, 0) = 3;
  q(0, 0) = 1;
  EXPECT_THROW(Qubo(0, {1, 2}, q), Error);
}

TEST(Qubo, Int64PathMatchesExact) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Qubo q = random_qubo(9, rng, 1000);
    ASSERT_TRUE(q.fits_int64());
    for (std::uint64_t mask = 0; mask < 512; ++mask) ASSERT_EQ(BigInt(static_cast<long>(q.energy64(mask))), q.energy(bits_of(mask, 9)));
  }
  Matrix<BigInt> big(1, 1, BigInt(0));
  EXPECT_FALSE(Qubo(BigInt(1) << 70, {1}, big).fits_int64());
}

TEST(Qubo, PermutedRelabels) {
  SplitMix64 rng(3);
  const Qubo q = random_qubo(6, rng, 50);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  const Qubo p = q.permuted(perm);
  for (std::uint64_t mask = 0; mask < 64; ++mask) {
    const Bits x = bits_of(mask, 6);
    Bits old(6);
    for (std::size_t k = 0; k < 6; ++k) old[perm[k]] = x[k];
    EXPECT_EQ(p.energy(x), q.energy(old));
  }
}

TEST(CoefficientMap, MatchesLatticePoints) {
  const auto b = test::build(30, 8, 1.5, 4);
  const CoefficientMap map(b.hamiltonian);
  for (std::uint64_t mask = 0; mask < 256; mask += 7) {
    const Bits x = bits_of(mask, 8);
    const auto expect = b.hamiltonian.config_to_lattice_point(x).coeffs;
    EXPECT_EQ(map.coeffs(x), expect);
    const auto fast = map.coeffs64(x);
    ASSERT_TRUE(fast);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(BigInt(static_cast<long>((*fast)[i])), expect[i]);
  }
}

TEST(ExactEnum, FullSpectrumSortedWithLexTies) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    // Small coefficients force many ties.
    const Qubo q = random_qubo(8, rng, 2);
    const auto all = exact_low_energy_enum(q, 256);
    ASSERT_EQ(all.size(), 256u);
    for (std::size_t i = 1; i < all.size(); ++i) {
      ASSERT_LE(all[i - 1].energy, all[i].energy);
      if (all[i - 1].energy == all[i].energy) {
        ASSERT_TRUE(lex_less(all[i - 1].bits, all[i].bits));
      }
    }
    for (const auto& c : all) EXPECT_EQ(c.energy, q.energy(c.bits));

    // A prefix request returns the prefix of the full spectrum.
    const auto top = exact_low_energy_enum(q, 37);
    for (std::size_t i = 0; i < top.size(); ++i) EXPECT_EQ(top[i].bits, all[i].bits);
  }
}

TEST(ExactEnum, MatchesBruteForceOnBigIntPath) {
  SplitMix64 rng(5);
  std::vector<BigInt> lin(7);
  Matrix<BigInt> quad(7, 7, BigInt(0));
  for (auto& a : lin) a = (BigInt(1) << 64) * (static_cast<long>(rng.below(9)) - 4);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = i + 1; j < 7; ++j) quad(i, j) = quad(j, i) = (BigInt(1) << 63) * static_cast<long>(rng.below(5));
  const Qubo q(BigInt(1) << 70, lin, quad);
  ASSERT_FALSE(q.fits_int64());
  std::vector<std::pair<BigInt, Bits>> brute;
  for (std::uint64_t m = 0; m < 128; ++m) brute.emplace_back(q.energy(bits_of(m, 7)), bits_of(m, 7));
  std::sort(brute.begin(), brute.end());
  const auto got = exact_low_energy_enum(q, 128);
  for (std::size_t i = 0; i < 128; ++i) {
    EXPECT_EQ(got[i].energy, brute[i].first);
    EXPECT_EQ(got[i].bits, brute[i].second);
  }
}

TEST(ExactEnum, GroundNotAboveBabai) {
  const auto b = test::build(40, 12, 1.0, 6);
  const auto best = exact_low_energy_enum(b.hamiltonian, 1);
  EXPECT_LE(best[0].energy, b.hamiltonian.energy(Bits(12, 0)));
}

TEST(ExactEnum, Limits) {
  SplitMix64 rng(6);
  const Qubo q = random_qubo(27, rng, 3);
  try {
    exact_low_energy_enum(q, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacity);
  }
  EXPECT_THROW(exact_low_energy_enum(random_qubo(3, rng, 3), 9), Error);
  EXPECT_TRUE(exact_low_energy_enum(random_qubo(3, rng, 3), 0).empty());
}
