#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tnss/matrix.hpp"
#include "tnss/numtheory.hpp"

namespace tnss {

using BigMatrix = Matrix<BigInt>;
using RationalMatrix = Matrix<Rational>;

/// One N-related closest-vector problem: a (pi+1) x pi basis whose first pi
/// rows are a permuted diagonal f(j) of {ceil(j/2)} and whose last row holds
/// round(10^c ln p_j), plus the target (0, ..., 0, round(10^c ln N)).
struct CvpInstance {
  BigMatrix basis;
  std::vector<BigInt> target;
  double precision = 0.0;
  std::vector<std::int64_t> diagonal;
  PrimeBasis primes;
  std::uint64_t seed = 0;

  std::size_t rank() const noexcept { return basis.cols(); }
  std::size_t dimension() const noexcept { return basis.rows(); }
};

/// Nearest integer with halves rounded upwards: floor(x + 1/2), also for x < 0.
BigInt round_half_up(const Rational& x);

/// round_half_up(10^c * ln x), evaluated with MPFR at a precision wide enough
/// that the rounding decision is exact for the magnitudes used here.
BigInt scaled_log(const BigInt& x, double c);

CvpInstance build_cvp_instance(const RsaKey& key, const PrimeBasis& p1, double precision, std::uint64_t seed);

struct GramSchmidt {
  std::vector<std::vector<Rational>> vectors;  // g_j
  RationalMatrix mu;                           // mu(j, i) = <m_j, g_i> / <g_i, g_i>
  std::vector<Rational> sq_norms;              // <g_j, g_j>
};

/// Exact Gram-Schmidt of the columns of m. Throws kDegenerateBasis when the
/// columns are linearly dependent.
GramSchmidt gram_schmidt(const BigMatrix& m);

struct ReducedBasis {
  BigMatrix reduced;    // D, columns d_j
  BigMatrix transform;  // U with D = B * U, |det U| = 1
  GramSchmidt gs;       // of D
  Rational delta;
};

/// Integral LLL (Cohen, Alg. 2.6.7) with exact integer d_i / lambda_ij
/// bookkeeping and tracked unimodular transform. delta in (1/4, 1].
ReducedBasis lll_reduce(const BigMatrix& basis, double delta = 0.99);

struct BabaiResult {
  std::vector<BigInt> point;   // b_cl = sum_j c_j d_j
  std::vector<BigInt> coeffs;  // c_j = round(mu_j)
  std::vector<Rational> mu;    // nearest-plane coefficients
  std::vector<int> signs;      // sign(mu_j - c_j), +1 on exact ties
};

BabaiResult babai_nearest_plane(const ReducedBasis& reduced, std::span<const BigInt> target);

/// Squared Euclidean distance between integer vectors.
BigInt squared_distance(std::span<const BigInt> a, std::span<const BigInt> b);

}  // namespace tnss
