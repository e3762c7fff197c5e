#include <gtest/gtest.h>

#include <algorithm>

#include "tnss/error.hpp"
#include "tnss/lattice.hpp"
#include "tnss/rng.hpp"

using namespace tnss;

namespace {

BigMatrix from_columns(const std::vector<std::vector<long>>& cols) {
  BigMatrix m(cols.front().size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < cols[c].size(); ++r) m(r, c) = cols[c][r];
  return m;
}

Rational det(RationalMatrix m) {
  const std::size_t n = m.rows();
  Rational d = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m(p, k), m(c, k));
      d = -d;
    }
    d *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Rational f = m(r, c) / m(c, c);
      for (std::size_t k = c; k < n; ++k) m(r, k) -= f * m(c, k);
    }
  }
  return d;
}

BigMatrix random_basis(std::size_t rows, std::size_t cols, SplitMix64& rng, long spread) {
  BigMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = static_cast<long>(rng.below(2 * spread + 1)) - spread;
  return m;
}

RationalMatrix gram(const BigMatrix& m) {
  RationalMatrix g(m.cols(), m.cols());
  for (std::size_t i = 0; i < m.cols(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      BigInt s = 0;
      for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
      g(i, j) = s;
    }
  return g;
}

}  // namespace

TEST(ScaledLog, Table) {
  EXPECT_EQ(scaled_log(2, 1), 7);
  EXPECT_EQ(scaled_log(3, 1), 11);
  EXPECT_EQ(scaled_log(5, 1), 16);
  EXPECT_EQ(scaled_log(77, 1), 43);
  EXPECT_EQ(scaled_log(2, 0), 1);
  EXPECT_EQ(scaled_log(3, 0), 1);
  EXPECT_EQ(scaled_log(5, 0), 2);
  EXPECT_EQ(scaled_log(7, 1.5), 62);
  EXPECT_EQ(scaled_log(137477, 1.5), 374);
  EXPECT_EQ(scaled_log(645181, 2), 1338);
  EXPECT_EQ(scaled_log(BigInt("791339171587617359026543582309"), 2), 6884);
  EXPECT_EQ(scaled_log(1, 3), 0);
  EXPECT_THROW(scaled_log(0, 1), Error);
}

TEST(RoundHalfUp, Ties) {
  EXPECT_EQ(round_half_up(Rational(1, 2)), 1);
  EXPECT_EQ(round_half_up(Rational(-1, 2)), 0);
  EXPECT_EQ(round_half_up(Rational(-3, 2)), -1);
  EXPECT_EQ(round_half_up(Rational(7, 3)), 2);
  EXPECT_EQ(round_half_up(Rational(-7, 3)), -2);
}

TEST(CvpInstance, SmallModulus) {
  const auto key = RsaKey::from_modulus(77);
  const auto inst = build_cvp_instance(key, PrimeBasis::first(3, false), 1.0, 5);
  ASSERT_EQ(inst.dimension(), 4u);
  ASSERT_EQ(inst.rank(), 3u);
  EXPECT_EQ(inst.basis(3, 0), 7);
  EXPECT_EQ(inst.basis(3, 1), 11);
  EXPECT_EQ(inst.basis(3, 2), 16);
  EXPECT_EQ(inst.target, (std::vector<BigInt>{0, 0, 0, 43}));
  auto diag = inst.diagonal;
  std::sort(diag.begin(), diag.end());
  EXPECT_EQ(diag, (std::vector<std::int64_t>{1, 1, 2}));
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(inst.basis(r, j), r == j ? BigInt(inst.diagonal[j]) : BigInt(0));

  const auto flat = build_cvp_instance(key, PrimeBasis::first(3, false), 0.0, 5);
  EXPECT_EQ(flat.basis(3, 0), 1);
  EXPECT_EQ(flat.basis(3, 1), 1);
  EXPECT_EQ(flat.basis(3, 2), 2);
}

TEST(CvpInstance, DiagonalIsSeededPermutation) {
  const auto key = generate_rsa_key(30, 1);
  const auto p1 = PrimeBasis::first(12, false);
  const auto a = build_cvp_instance(key, p1, 1.5, 8);
  const auto b = build_cvp_instance(key, p1, 1.5, 8);
  EXPECT_EQ(a.diagonal, b.diagonal);
  bool differs = false;
  for (std::uint64_t s = 9; s < 20 && !differs; ++s) differs = build_cvp_instance(key, p1, 1.5, s).diagonal != a.diagonal;
  EXPECT_TRUE(differs);
  auto sorted = a.diagonal;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 0; j < sorted.size(); ++j) EXPECT_EQ(sorted[j], static_cast<std::int64_t>((j + 2) / 2));
}

TEST(GramSchmidt, TwoByTwo) {
  const auto gs = gram_schmidt(from_columns({{1, 1}, {0, 1}}));
  EXPECT_EQ(gs.mu(1, 0), Rational(1, 2));
  Rational dot = 0;
  for (std::size_t r = 0; r < 2; ++r) dot += gs.vectors[0][r] * gs.vectors[1][r];
  EXPECT_EQ(dot, 0);
  EXPECT_EQ(gs.sq_norms[0], 2);
  EXPECT_EQ(gs.sq_norms[1], Rational(1, 2));
}

TEST(GramSchmidt, OrthogonalInputUnchanged) {
  const auto gs = gram_schmidt(from_columns({{2, 0, 0}, {0, 3, 0}, {0, 0, 5}}));
  EXPECT_EQ(gs.mu(1, 0), 0);
  EXPECT_EQ(gs.mu(2, 0), 0);
  EXPECT_EQ(gs.mu(2, 1), 0);
  EXPECT_EQ(gs.vectors[1][1], 3);
}

TEST(GramSchmidt, RejectsDependentColumns) {
  try {
    gram_schmidt(from_columns({{1, 2}, {2, 4}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateBasis);
  }
}

TEST(GramSchmidt, PairwiseOrthogonalProperty) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto gs = gram_schmidt(random_basis(6, 5, rng, 9));
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        Rational dot = 0;
        for (std::size_t r = 0; r < 6; ++r) dot += gs.vectors[i][r] * gs.vectors[j][r];
        EXPECT_EQ(dot, 0);
      }
  }
}

TEST(Lll, OrthogonalBasisUntouched) {
  const auto b = from_columns({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}});
  const auto red = lll_reduce(b);
  EXPECT_EQ(red.reduced, b);
  EXPECT_EQ(red.transform, BigMatrix::identity(3));
}

TEST(Lll, SkewedPlaneBasis) {
  for (long k : {7L, 100L, 12345L}) {
    const auto b = from_columns({{1, 0}, {k, 1}});
    const auto red = lll_reduce(b);
    // Shortest nonzero vector by brute force over a small coefficient box.
    BigInt best = -1;
    for (long e1 = -3; e1 <= 3; ++e1)
      for (long e2 = -3; e2 <= 3; ++e2) {
        if (e1 == 0 && e2 == 0) continue;
        const BigInt x = e1 + e2 * k;
        const BigInt y = e2;
        const BigInt n2 = x * x + y * y;
        if (best < 0 || n2 < best) best = n2;
      }
    const auto d0 = red.reduced.col(0);
    EXPECT_LE(d0[0] * d0[0] + d0[1] * d0[1], best);
  }
}

TEST(Lll, ReducedBasisProperties) {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    const auto b = random_basis(n + 1, n, rng, 50);
    ReducedBasis red;
    try {
      red = lll_reduce(b, 0.99);
    } catch (const Error&) {
      continue;  // dependent random columns
    }
    EXPECT_EQ(b * red.transform, red.reduced);
    RationalMatrix u(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) u(r, c) = red.transform(r, c);
    const Rational d = det(u);
    EXPECT_TRUE(d == 1 || d == -1);
    const auto& gs = red.gs;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) EXPECT_LE(abs(gs.mu(i, j)), Rational(1, 2));
      const Rational lhs = gs.sq_norms[i];
      const Rational rhs = (Rational(99, 100) - gs.mu(i, i - 1) * gs.mu(i, i - 1)) * gs.sq_norms[i - 1];
      EXPECT_GE(lhs, rhs);
    }
  }
}

TEST(Lll, RejectsBadDelta) {
  EXPECT_THROW(lll_reduce(from_columns({{1, 0}, {0, 1}}), 0.2), Error);
  EXPECT_THROW(lll_reduce(from_columns({{1, 0}, {0, 1}}), 1.5), Error);
}

TEST(Babai, OrthogonalIsExact) {
  const auto red = lll_reduce(from_columns({{2, 0, 0}, {0, 3, 0}, {0, 0, 5}}));
  const std::vector<BigInt> t{3, -4, 12};
  const auto res = babai_nearest_plane(red, t);
  // Coordinate-wise nearest multiples with halves rounded up.
  EXPECT_EQ(res.point, (std::vector<BigInt>{4, -3, 10}));
}

TEST(Babai, LatticeTargetIsFixed) {
  SplitMix64 rng(5);
  const auto b = random_basis(5, 4, rng, 20);
  const auto red = lll_reduce(b);
  const std::vector<BigInt> e{3, -1, 4, 1};
  const auto t = mat_vec(b, std::span<const BigInt>(e));
  const auto res = babai_nearest_plane(red, t);
  EXPECT_EQ(res.point, t);
  EXPECT_EQ(squared_distance(res.point, t), 0);
  EXPECT_EQ(mat_vec(red.reduced, std::span<const BigInt>(res.coeffs)), res.point);
}

TEST(Lll, PreservesVolume) {
  SplitMix64 rng(31);
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto b = random_basis(n + 1, n, rng, 50);
    const Rational before = det(gram(b));
    if (before == 0) continue;
    const auto red = lll_reduce(b);
    EXPECT_EQ(det(gram(red.reduced)), before) << "n=" << n;
  }
  // Instance bases carry huge log entries.
  for (std::size_t n : {4u, 8u, 12u}) {
    const auto inst = build_cvp_instance(generate_rsa_key(40, n), PrimeBasis::first(n, false), 1.5, n);
    EXPECT_EQ(det(gram(lll_reduce(inst.basis).reduced)), det(gram(inst.basis)));
  }
}

TEST(Babai, RankThreeAgainstBruteForce) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = random_basis(4, 3, rng, 50);
    ReducedBasis red;
    try {
      red = lll_reduce(b);
    } catch (const Error&) {
      continue;
    }
    std::vector<BigInt> t(4);
    for (auto& x : t) x = static_cast<long>(rng.below(301)) - 150;
    const auto res = babai_nearest_plane(red, t);
    // Coefficients over the original basis are exact integers reproducing the point.
    const auto coeffs = mat_vec(red.transform, std::span<const BigInt>(res.coeffs));
    EXPECT_EQ(mat_vec(b, std::span<const BigInt>(coeffs)), res.point);
    BigInt best = -1;
    for (long e1 = -12; e1 <= 12; ++e1)
      for (long e2 = -12; e2 <= 12; ++e2)
        for (long e3 = -12; e3 <= 12; ++e3) {
          const std::vector<BigInt> e{e1, e2, e3};
          const BigInt d = squared_distance(mat_vec(red.reduced, std::span<const BigInt>(e)), t);
          if (best < 0 || d < best) best = d;
        }
    EXPECT_GE(squared_distance(res.point, t), best);
  }
}

TEST(Babai, WithinBoundOfBruteForce) {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = random_basis(3, 2, rng, 15);
    ReducedBasis red;
    try {
      red = lll_reduce(b);
    } catch (const Error&) {
      continue;
    }
    std::vector<BigInt> t(3);
    for (auto& x : t) x = static_cast<long>(rng.below(201)) - 100;
    const auto res = babai_nearest_plane(red, t);
    BigInt best = -1;
    for (long e1 = -60; e1 <= 60; ++e1)
      for (long e2 = -60; e2 <= 60; ++e2) {
        const std::vector<BigInt> e{e1, e2};
        const auto p = mat_vec(red.reduced, std::span<const BigInt>(e));
        const BigInt d = squared_distance(p, t);
        if (best < 0 || d < best) best = d;
      }
    const BigInt got = squared_distance(res.point, t);
    EXPECT_GE(got, best);
    // Nearest plane guarantee with delta = 0.99: within 2^(n/2) of optimal, squared 2^n = 4.
    EXPECT_LE(got, best * 4 + 4);
  }
}

TEST(Babai, SignsRecordRoundingDirection) {
  SplitMix64 rng(13);
  const auto b = random_basis(5, 4, rng, 30);
  const auto red = lll_reduce(b);
  std::vector<BigInt> t{17, -5, 44, 3, 91};
  const auto res = babai_nearest_plane(red, t);
  for (std::size_t j = 0; j < res.signs.size(); ++j) {
    const Rational diff = res.mu[j] - Rational(res.coeffs[j]);
    EXPECT_LE(abs(diff), Rational(1, 2));
    EXPECT_EQ(res.signs[j], diff < 0 ? -1 : 1);
  }
}
