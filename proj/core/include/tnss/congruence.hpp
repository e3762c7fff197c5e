#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tnss/sr_pair.hpp"

namespace tnss {

/// Dense GF(2) matrix packed into 64-bit words, one word-run per column.
/// Row 0 is the sign exponent, row j the exponent of p_j; column r is pair r.
class ParityMatrix {
 public:
  ParityMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool get(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, bool value);
  std::span<const std::uint64_t> column_words(std::size_t col) const;

  /// M * tau over GF(2) is zero.
  bool annihilates(std::span<const std::uint8_t> tau) const;

  /// One text line per row, '1'/'0' per column.
  void dump(std::ostream& os) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t words_per_col_;
  std::vector<std::uint64_t> bits_;
};

/// Parity of every pair's e_tilde over a smoothness basis of size pi2.
ParityMatrix build_parity_matrix(std::span<const SrPair> pairs, std::size_t pi2);

/// Basis of the GF(2) null space (empty when the kernel is trivial).
std::vector<std::vector<std::uint8_t>> kernel_basis(const ParityMatrix& m);

struct Squares {
  BigInt x;
  BigInt y;
};

/// X = prod_j p_j^{E_j/2} mod N and Y = prod_{r in tau} u_r mod N, where
/// E = sum_{r in tau} (e_u + e_w). Throws kInternalConsistency when some
/// combined exponent (sign included) is odd.
Squares assemble_squares(std::span<const std::uint8_t> tau, std::span<const SrPair> pairs, const BigInt& n,
                         const PrimeBasis& p2);

/// (gcd(X + Y, N), N / gcd) when nontrivial; absent when X = +-Y (mod N).
/// Throws kInvalidArgument when X^2 != Y^2 (mod N).
std::optional<std::pair<BigInt, BigInt>> extract_factors(const BigInt& x, const BigInt& y, const BigInt& n);

struct FactorResult {
  BigInt p;  // p <= q
  BigInt q;
  std::size_t kernel_vector_used = 0;
  std::size_t trials = 0;
};

struct ProcessOptions {
  std::size_t combination_budget = 10000;
};

/// Kernel basis vectors first, then sums of two basis vectors, until a
/// nontrivial congruence appears or the budget runs out.
std::optional<FactorResult> process(std::span<const SrPair> pairs, const BigInt& n, const PrimeBasis& p2,
                                    const ProcessOptions& options = {});

}  // namespace tnss
