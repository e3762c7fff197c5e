#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tnss {

using BigInt = mpz_class;
using Rational = mpq_class;

/// The first `size()` primes p_1 < ... < p_pi, plus an optional sign element
/// p_0 = -1 kept as a flag so prime indices line up with lattice coordinates.
class PrimeBasis {
 public:
  PrimeBasis() = default;

  /// Throws kInvalidArgument when count == 0.
  static PrimeBasis first(std::size_t count, bool include_sign);

  std::span<const std::uint64_t> primes() const noexcept { return primes_; }
  std::uint64_t operator[](std::size_t j) const { return primes_.at(j); }
  std::size_t size() const noexcept { return primes_.size(); }
  /// Element count when p_0 = -1 is counted as a basis element.
  std::size_t size_with_sign() const noexcept { return primes_.size() + (include_sign_ ? 1 : 0); }
  bool include_sign() const noexcept { return include_sign_; }
  /// Smoothness bound B = p_pi.
  std::uint64_t bound() const noexcept { return primes_.back(); }

  /// Same primes, possibly different sign flag.
  PrimeBasis with_sign(bool include_sign) const;

  /// True when every prime of `other` is a prefix of this basis.
  bool extends(const PrimeBasis& other) const noexcept;

 private:
  friend bool trial_divide_u64(std::uint64_t r, const PrimeBasis& basis, std::size_t j,
                               std::vector<std::int64_t>& e);

  std::vector<std::uint64_t> primes_;
  // For odd p: p^-1 mod 2^64 and floor((2^64 - 1) / p); x is divisible by p
  // iff x * inverse <= limit.
  std::vector<std::uint64_t> inverses_;
  std::vector<std::uint64_t> limits_;
  bool include_sign_ = false;
};

/// Prime multiplicities (-1)^sign * prod p_j^e_j. Entries of `exponents` may
/// be negative when the vector represents a ratio.
struct MultiplicityVector {
  int sign = 0;  // e_0 in {0, 1}
  std::vector<std::int64_t> exponents;

  friend bool operator==(const MultiplicityVector&, const MultiplicityVector&) = default;
};

/// Rebuilds (-1)^e0 * prod p_j^e_j; every exponent must be nonnegative.
BigInt reconstruct(const MultiplicityVector& mv, const PrimeBasis& basis);

/// Trial division of |x| over the basis. Absent when a cofactor > 1 remains.
/// Throws kInvalidArgument for x == 0 and kNotRepresentable for x < 0 on a
/// basis without the sign element.
std::optional<MultiplicityVector> smooth_decompose(const BigInt& x, const PrimeBasis& basis);

/// Euclid's algorithm on nonnegative inputs; throws when both are zero.
BigInt gcd(const BigInt& a, const BigInt& b);

/// Square-and-multiply base^exponent mod modulus, result in [0, modulus).
BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus);

/// floor(log2 N) + 1 for N >= 1.
std::size_t bit_length(const BigInt& n);

/// Miller-Rabin. Deterministic witness set below 2^64; `rounds` seeded random
/// witnesses above (at least 40 are always used).
bool is_probable_prime(const BigInt& n, int rounds = 40, std::uint64_t seed = 0x5eed);

struct RsaKey {
  BigInt n;
  std::size_t bits = 0;
  std::optional<BigInt> p;
  std::optional<BigInt> q;

  /// Key with unknown factors.
  static RsaKey from_modulus(const BigInt& n);
  /// Checks N = p*q, primality of p and q, and the recorded bit length.
  bool consistent() const;
};

/// N = p*q with p of ceil(bits/2) and q of floor(bits/2) bits, p != q, and N
/// of exactly `bits` bits. Deterministic per seed. Throws for bits < 8.
RsaKey generate_rsa_key(std::size_t bits, std::uint64_t seed);

}  // namespace tnss
