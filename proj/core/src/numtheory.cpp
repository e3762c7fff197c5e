#include "tnss/numtheory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "tnss/error.hpp"
#include "tnss/rng.hpp"

namespace tnss {

namespace {

std::uint64_t nth_prime_upper_bound(std::size_t n) {
  if (n < 6) return 13;
  const double x = static_cast<double>(n);
  // Rosser's bound p_n < n (ln n + ln ln n) for n >= 6.
  return static_cast<std::uint64_t>(x * (std::log(x) + std::log(std::log(x)))) + 1;
}

BigInt random_bits(std::size_t bits, SplitMix64& rng) {
  BigInt out = 0;
  std::size_t produced = 0;
  while (produced < bits) {
    const std::size_t take = std::min<std::size_t>(64, bits - produced);
    std::uint64_t word = rng.next();
    if (take < 64) word &= (std::uint64_t{1} << take) - 1;
    BigInt chunk;
    mpz_import(chunk.get_mpz_t(), 1, 1, sizeof(word), 0, 0, &word);
    out <<= take;
    out += chunk;
    produced += take;
  }
  return out;
}

BigInt random_prime(std::size_t bits, SplitMix64& rng) {
  const BigInt low = BigInt(1) << (bits - 1);
  for (;;) {
    BigInt candidate = random_bits(bits - 1, rng) + low;
    if (is_probable_prime(candidate, 40, rng.next())) return candidate;
  }
}

bool miller_rabin_round(const BigInt& n, const BigInt& a, const BigInt& d, std::size_t s) {
  const BigInt n_minus_1 = n - 1;
  BigInt x = mod_pow(a, d, n);
  if (x == 1 || x == n_minus_1) return true;
  for (std::size_t r = 1; r < s; ++r) {
    x = (x * x) % n;
    if (x == n_minus_1) return true;
  }
  return false;
}

}  // namespace

// Finishes trial division of r > 1 from prime index j on, with
// multiply-by-inverse divisibility tests.
bool trial_divide_u64(std::uint64_t r, const PrimeBasis& basis, std::size_t j, std::vector<std::int64_t>& e) {
  const auto& primes = basis.primes_;
  for (; j < primes.size() && r != 1; ++j) {
    const std::uint64_t p = primes[j];
    if (p == 2) {
      const int tz = std::countr_zero(r);
      e[j] += tz;
      r >>= tz;
    } else {
      const std::uint64_t inv = basis.inverses_[j];
      const std::uint64_t lim = basis.limits_[j];
      for (std::uint64_t q = r * inv; q <= lim; q = r * inv) {
        r = q;
        ++e[j];
      }
    }
    if (r != 1 && j + 1 < primes.size()) {
      const std::uint64_t next = primes[j + 1];
      if (r / next < next) {
        if (r > basis.bound()) return false;
        const auto it = std::lower_bound(primes.begin() + static_cast<std::ptrdiff_t>(j + 1), primes.end(), r);
        ++e[static_cast<std::size_t>(it - primes.begin())];
        return true;
      }
    }
  }
  return r == 1;
}

PrimeBasis PrimeBasis::first(std::size_t count, bool include_sign) {
  require(count >= 1, ErrorKind::kInvalidArgument, "prime basis size must be >= 1");
  const std::uint64_t limit = nth_prime_upper_bound(count);
  std::vector<bool> composite(limit + 1, false);
  PrimeBasis basis;
  basis.include_sign_ = include_sign;
  basis.primes_.reserve(count);
  for (std::uint64_t i = 2; i <= limit && basis.primes_.size() < count; ++i) {
    if (composite[i]) continue;
    basis.primes_.push_back(i);
    for (std::uint64_t k = i * i; k <= limit; k += i) composite[k] = true;
  }
  if (basis.primes_.size() != count) raise(ErrorKind::kInternalConsistency, "prime sieve bound too small");
  basis.inverses_.resize(count, 0);
  basis.limits_.resize(count, 0);
  for (std::size_t j = 0; j < count; ++j) {
    const std::uint64_t p = basis.primes_[j];
    if (p == 2) continue;
    std::uint64_t inv = p;  // Newton iteration, each step doubles the correct low bits
    for (int i = 0; i < 5; ++i) inv *= 2 - p * inv;
    basis.inverses_[j] = inv;
    basis.limits_[j] = ~std::uint64_t{0} / p;
  }
  return basis;
}

PrimeBasis PrimeBasis::with_sign(bool include_sign) const {
  PrimeBasis copy = *this;
  copy.include_sign_ = include_sign;
  return copy;
}

bool PrimeBasis::extends(const PrimeBasis& other) const noexcept {
  return other.size() <= size() && std::equal(other.primes_.begin(), other.primes_.end(), primes_.begin());
}

BigInt reconstruct(const MultiplicityVector& mv, const PrimeBasis& basis) {
  require(mv.exponents.size() == basis.size(), ErrorKind::kInvalidArgument,
          "multiplicity vector length differs from basis size");
  BigInt out = 1;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto e = mv.exponents[j];
    require(e >= 0, ErrorKind::kInvalidArgument, "cannot reconstruct an integer from negative exponents");
    if (e == 0) continue;
    BigInt power;
    mpz_ui_pow_ui(power.get_mpz_t(), basis[j], static_cast<unsigned long>(e));
    out *= power;
  }
  if (mv.sign != 0) out = -out;
  return out;
}

std::optional<MultiplicityVector> smooth_decompose(const BigInt& x, const PrimeBasis& basis) {
  require(x != 0, ErrorKind::kInvalidArgument, "cannot decompose zero");
  if (x < 0 && !basis.include_sign()) {
    raise(ErrorKind::kNotRepresentable, "negative integer on a basis without the sign element");
  }
  MultiplicityVector mv;
  mv.sign = x < 0 ? 1 : 0;
  mv.exponents.assign(basis.size(), 0);
  BigInt rest = abs(x);
  const auto primes = basis.primes();
  for (std::size_t j = 0; j < primes.size() && rest != 1; ++j) {
    if (mpz_fits_ulong_p(rest.get_mpz_t()) != 0 && sizeof(unsigned long) == 8) {
      if (!trial_divide_u64(rest.get_ui(), basis, j, mv.exponents)) return std::nullopt;
      return mv;
    }
    const unsigned long p = primes[j];
    while (mpz_divisible_ui_p(rest.get_mpz_t(), p) != 0) {
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
      ++mv.exponents[j];
    }
    // A cofactor below p^2 is prime (or one): finish without further division.
    if (rest != 1 && j + 1 < primes.size() && mpz_cmp_ui(rest.get_mpz_t(), p) > 0 &&
        mpz_fits_ulong_p(rest.get_mpz_t()) != 0) {
      const unsigned long r = rest.get_ui();
      const unsigned long next = primes[j + 1];
      if (r / next < next) {
        if (r > basis.bound()) return std::nullopt;
        const auto it = std::lower_bound(primes.begin() + static_cast<std::ptrdiff_t>(j + 1), primes.end(),
                                         static_cast<std::uint64_t>(r));
        ++mv.exponents[static_cast<std::size_t>(it - primes.begin())];
        rest = 1;
      }
    }
  }
  if (rest != 1) return std::nullopt;
  return mv;
}

BigInt gcd(const BigInt& a, const BigInt& b) {
  require(a >= 0 && b >= 0, ErrorKind::kInvalidArgument, "gcd expects nonnegative integers");
  require(a != 0 || b != 0, ErrorKind::kInvalidArgument, "gcd(0, 0) is undefined");
  BigInt x = a;
  BigInt y = b;
  while (y != 0) {
    BigInt r = x % y;
    x = std::move(y);
    y = std::move(r);
  }
  return x;
}

BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus) {
  require(modulus >= 2, ErrorKind::kInvalidArgument, "modulus must be >= 2");
  require(exponent >= 0, ErrorKind::kInvalidArgument, "exponent must be nonnegative");
  BigInt result = 1;
  BigInt acc = base % modulus;
  if (acc < 0) acc += modulus;
  const std::size_t bits = mpz_sizeinbase(exponent.get_mpz_t(), 2);
  for (std::size_t i = 0; i < bits; ++i) {
    if (mpz_tstbit(exponent.get_mpz_t(), i) != 0) result = (result * acc) % modulus;
    acc = (acc * acc) % modulus;
  }
  return result;
}

std::size_t bit_length(const BigInt& n) {
  require(n >= 1, ErrorKind::kInvalidArgument, "bit length needs a positive integer");
  return mpz_sizeinbase(n.get_mpz_t(), 2);
}

bool is_probable_prime(const BigInt& n, int rounds, std::uint64_t seed) {
  if (n < 2) return false;
  static constexpr unsigned kSmall[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (unsigned p : kSmall) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p) != 0) return false;
  }
  BigInt d = n - 1;
  std::size_t s = 0;
  while (mpz_even_p(d.get_mpz_t()) != 0) {
    d >>= 1;
    ++s;
  }
  // The first twelve prime bases are a deterministic witness set below 3.3e24.
  for (unsigned a : kSmall) {
    if (!miller_rabin_round(n, BigInt(a), d, s)) return false;
  }
  if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 64) return true;
  SplitMix64 rng(seed);
  const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  for (int r = 0; r < std::max(rounds, 40); ++r) {
    const BigInt a = random_bits(bits + 8, rng) % (n - 3) + 2;
    if (!miller_rabin_round(n, a, d, s)) return false;
  }
  return true;
}

RsaKey RsaKey::from_modulus(const BigInt& n) {
  require(n >= 2, ErrorKind::kInvalidArgument, "RSA modulus must be >= 2");
  RsaKey key;
  key.n = n;
  key.bits = bit_length(n);
  return key;
}

bool RsaKey::consistent() const {
  if (n < 1 || bits != bit_length(n)) return false;
  if (p.has_value() != q.has_value()) return false;
  if (!p) return true;
  return *p * *q == n && is_probable_prime(*p) && is_probable_prime(*q);
}

RsaKey generate_rsa_key(std::size_t bits, std::uint64_t seed) {
  require(bits >= 8, ErrorKind::kInvalidArgument, "RSA keys need at least 8 bits");
  SplitMix64 rng(seed);
  const std::size_t p_bits = (bits + 1) / 2;
  const std::size_t q_bits = bits / 2;
  for (;;) {
    BigInt p = random_prime(p_bits, rng);
    BigInt q = random_prime(q_bits, rng);
    if (p == q) continue;
    BigInt n = p * q;
    if (bit_length(n) != bits) continue;
    RsaKey key;
    key.n = std::move(n);
    key.bits = bits;
    key.p = std::move(p);
    key.q = std::move(q);
    return key;
  }
}

}  // namespace tnss
