#include "tnss/lattice.hpp"

#include <mpfr.h>

#include <algorithm>
#include <memory>

#include "tnss/rng.hpp"

namespace tnss {

namespace {

struct MpfrValue {
  mpfr_t v;
  explicit MpfrValue(mpfr_prec_t prec) { mpfr_init2(v, prec); }
  ~MpfrValue() { mpfr_clear(v); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;
};

BigInt dot(const BigMatrix& m, std::size_t a, std::size_t b) {
  BigInt s = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, a) * m(r, b);
  return s;
}

}  // namespace

BigInt round_half_up(const Rational& x) {
  Rational shifted = x + Rational(1, 2);
  BigInt out;
  mpz_fdiv_q(out.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
  return out;
}

BigInt scaled_log(const BigInt& x, double c) {
  require(x >= 1, ErrorKind::kInvalidArgument, "logarithm of a non-positive integer");
  require(c >= 0.0, ErrorKind::kInvalidArgument, "precision parameter must be nonnegative");
  const auto prec = static_cast<mpfr_prec_t>(256 + mpz_sizeinbase(x.get_mpz_t(), 2));
  MpfrValue scale(prec);
  MpfrValue exponent(prec);
  MpfrValue log_x(prec);
  mpfr_set_d(exponent.v, c, MPFR_RNDN);
  mpfr_ui_pow(scale.v, 10, exponent.v, MPFR_RNDN);
  mpfr_set_z(log_x.v, x.get_mpz_t(), MPFR_RNDN);
  mpfr_log(log_x.v, log_x.v, MPFR_RNDN);
  mpfr_mul(log_x.v, log_x.v, scale.v, MPFR_RNDN);
  mpfr_add_d(log_x.v, log_x.v, 0.5, MPFR_RNDN);
  BigInt out;
  mpfr_get_z(out.get_mpz_t(), log_x.v, MPFR_RNDD);
  return out;
}

CvpInstance build_cvp_instance(const RsaKey& key, const PrimeBasis& p1, double precision, std::uint64_t seed) {
  require(p1.size() >= 1, ErrorKind::kInvalidArgument, "factoring basis must not be empty");
  require(precision >= 0.0, ErrorKind::kInvalidArgument, "precision parameter must be nonnegative");
  const std::size_t n = p1.size();

  CvpInstance inst;
  inst.precision = precision;
  inst.primes = p1;
  inst.seed = seed;
  inst.diagonal.resize(n);
  for (std::size_t j = 1; j <= n; ++j) inst.diagonal[j - 1] = static_cast<std::int64_t>((j + 1) / 2);
  SplitMix64 rng(seed);
  shuffle(std::span<std::int64_t>(inst.diagonal), rng);

  inst.basis = BigMatrix(n + 1, n, BigInt(0));
  for (std::size_t j = 0; j < n; ++j) {
    inst.basis(j, j) = inst.diagonal[j];
    inst.basis(n, j) = scaled_log(BigInt(static_cast<unsigned long>(p1[j])), precision);
  }
  inst.target.assign(n + 1, BigInt(0));
  inst.target[n] = scaled_log(key.n, precision);
  return inst;
}

GramSchmidt gram_schmidt(const BigMatrix& m) {
  const std::size_t n = m.cols();
  const std::size_t dim = m.rows();
  GramSchmidt gs;
  gs.vectors.resize(n);
  gs.mu = RationalMatrix(n, n, Rational(0));
  gs.sq_norms.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Rational> g(dim);
    for (std::size_t r = 0; r < dim; ++r) g[r] = m(r, j);
    for (std::size_t i = 0; i < j; ++i) {
      Rational ip = 0;
      for (std::size_t r = 0; r < dim; ++r) ip += Rational(m(r, j)) * gs.vectors[i][r];
      Rational coeff = ip / gs.sq_norms[i];
      gs.mu(j, i) = coeff;
      for (std::size_t r = 0; r < dim; ++r) g[r] -= coeff * gs.vectors[i][r];
    }
    Rational sq = 0;
    for (const auto& x : g) sq += x * x;
    if (sq == 0) raise(ErrorKind::kDegenerateBasis, "columns are linearly dependent");
    gs.mu(j, j) = 1;
    gs.sq_norms[j] = sq;
    gs.vectors[j] = std::move(g);
  }
  return gs;
}

ReducedBasis lll_reduce(const BigMatrix& basis, double delta) {
  require(delta > 0.25 && delta <= 1.0, ErrorKind::kInvalidArgument, "LLL delta must lie in (1/4, 1]");
  const std::size_t n = basis.cols();
  require(n >= 1, ErrorKind::kInvalidArgument, "empty basis");
  const Rational delta_q(delta);
  const BigInt& da = delta_q.get_num();
  const BigInt& db = delta_q.get_den();

  BigMatrix b = basis;
  BigMatrix u = BigMatrix::identity(n);
  // 1-based bookkeeping as in the textbook statement; index 0 is d_0 = 1.
  std::vector<BigInt> d(n + 1, BigInt(0));
  std::vector<std::vector<BigInt>> lam(n + 1, std::vector<BigInt>(n + 1, BigInt(0)));
  auto col = [](std::size_t k) { return k - 1; };

  auto red = [&](std::size_t k, std::size_t l) {
    if (2 * abs(lam[k][l]) <= d[l]) return;
    BigInt q;
    BigInt num = 2 * lam[k][l] + d[l];
    BigInt den = 2 * d[l];
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    b.sub_col_multiple(col(k), col(l), q);
    u.sub_col_multiple(col(k), col(l), q);
    lam[k][l] -= q * d[l];
    for (std::size_t i = 1; i < l; ++i) lam[k][i] -= q * lam[l][i];
  };

  std::size_t kmax = 1;
  d[0] = 1;
  d[1] = dot(b, 0, 0);
  if (d[1] == 0) raise(ErrorKind::kDegenerateBasis, "zero basis vector");

  auto swap_k = [&](std::size_t k) {
    b.swap_cols(col(k), col(k - 1));
    u.swap_cols(col(k), col(k - 1));
    for (std::size_t j = 1; j + 1 < k; ++j) std::swap(lam[k][j], lam[k - 1][j]);
    const BigInt lambda = lam[k][k - 1];
    BigInt bnew = (d[k - 2] * d[k] + lambda * lambda);
    mpz_divexact(bnew.get_mpz_t(), bnew.get_mpz_t(), d[k - 1].get_mpz_t());
    for (std::size_t i = k + 1; i <= kmax; ++i) {
      const BigInt t = lam[i][k];
      BigInt first = d[k] * lam[i][k - 1] - lambda * t;
      mpz_divexact(first.get_mpz_t(), first.get_mpz_t(), d[k - 1].get_mpz_t());
      lam[i][k] = first;
      BigInt second = bnew * t + lambda * lam[i][k];
      mpz_divexact(second.get_mpz_t(), second.get_mpz_t(), d[k].get_mpz_t());
      lam[i][k - 1] = second;
    }
    d[k - 1] = bnew;
  };

  std::size_t k = 2;
  while (k <= n) {
    if (k > kmax) {
      kmax = k;
      for (std::size_t j = 1; j <= k; ++j) {
        BigInt acc = dot(b, col(k), col(j));
        for (std::size_t i = 1; i < j; ++i) {
          acc = d[i] * acc - lam[k][i] * lam[j][i];
          mpz_divexact(acc.get_mpz_t(), acc.get_mpz_t(), d[i - 1].get_mpz_t());
        }
        if (j < k) {
          lam[k][j] = acc;
        } else {
          if (acc == 0) raise(ErrorKind::kDegenerateBasis, "columns are linearly dependent");
          d[k] = acc;
        }
      }
    }
    red(k, k - 1);
    // Lovasz test in integers: db * d_k d_{k-2} < da * d_{k-1}^2 - db * lambda^2.
    if (db * d[k] * d[k - 2] < da * d[k - 1] * d[k - 1] - db * lam[k][k - 1] * lam[k][k - 1]) {
      swap_k(k);
      k = std::max<std::size_t>(2, k - 1);
      continue;
    }
    for (std::size_t l = k - 1; l-- > 1;) red(k, l);
    ++k;
  }

  ReducedBasis out;
  out.gs = gram_schmidt(b);
  out.reduced = std::move(b);
  out.transform = std::move(u);
  out.delta = delta_q;
  return out;
}

BabaiResult babai_nearest_plane(const ReducedBasis& reduced, std::span<const BigInt> target) {
  const BigMatrix& d = reduced.reduced;
  const std::size_t n = d.cols();
  const std::size_t dim = d.rows();
  require(target.size() == dim, ErrorKind::kInvalidArgument, "target dimension does not match the lattice");
  require(reduced.gs.vectors.size() == n, ErrorKind::kInvalidArgument, "Gram-Schmidt data missing");

  BabaiResult res;
  res.coeffs.assign(n, BigInt(0));
  res.mu.assign(n, Rational(0));
  res.signs.assign(n, 1);
  std::vector<BigInt> residual(target.begin(), target.end());
  for (std::size_t j = n; j-- > 0;) {
    Rational ip = 0;
    const auto& g = reduced.gs.vectors[j];
    for (std::size_t r = 0; r < dim; ++r) {
      if (residual[r] == 0 || g[r] == 0) continue;
      ip += Rational(residual[r]) * g[r];
    }
    Rational mu = ip / reduced.gs.sq_norms[j];
    BigInt c = round_half_up(mu);
    for (std::size_t r = 0; r < dim; ++r) residual[r] -= c * d(r, j);
    res.signs[j] = (mu - Rational(c)) >= 0 ? 1 : -1;
    res.mu[j] = std::move(mu);
    res.coeffs[j] = std::move(c);
  }
  res.point.resize(dim);
  for (std::size_t r = 0; r < dim; ++r) res.point[r] = target[r] - residual[r];
  return res;
}

BigInt squared_distance(std::span<const BigInt> a, std::span<const BigInt> b) {
  require(a.size() == b.size(), ErrorKind::kInvalidArgument, "vector length mismatch");
  BigInt s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    BigInt diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace tnss
