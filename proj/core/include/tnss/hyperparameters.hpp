#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tnss/sieve.hpp"

namespace tnss {

enum class Pi2Policy {
  kTwoNEll,        // pi2 = 2 n ell
  kTwoPi1Squared,  // pi2 = 2 n^2
  kSublinear,      // n = pi2 = ell / log2 ell, rounded to nearest
  kExplicit,       // pi2 given
};

struct Hyperparameters {
  std::size_t n = 8;
  Pi2Policy pi2_policy = Pi2Policy::kTwoNEll;
  std::size_t pi2 = 0;  // used by kExplicit
  double gamma = 2.0;
  std::vector<double> c_schedule{1.0, 1.5, 2.0};
  std::size_t m = 8;
  std::size_t sweeps = 2;
  double alpha = 0.1;
  double p_stop = 0.999;
  std::size_t n_cvp = 500;
  SieveMode mode = SieveMode::kExactEnum;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::optional<std::size_t> budget;  // per-CVP sample count; default ceil(ell^gamma)
  double delta = 0.99;
  std::size_t combination_budget = 10000;
  std::size_t process_stride = 0;  // new sr-pairs between processing attempts; 0 = max(32, pi2 / 100)
};

const char* to_string(Pi2Policy policy) noexcept;
/// "two_n_ell", "two_pi1_squared", "sublinear", or "explicit:K" / "explicit(K)".
/// Returns the policy and, for explicit, K.
std::pair<Pi2Policy, std::size_t> parse_pi2_policy(const std::string& text);

/// ell / log2 ell rounded to the nearest integer.
std::size_t sublinear_rank(std::size_t ell);

struct BasisSizes {
  std::size_t pi1 = 0;
  std::size_t pi2 = 0;
};

/// Factoring and smoothness basis sizes for a key of `ell` bits.
BasisSizes resolve_sizes(const Hyperparameters& hp, std::size_t ell);

/// n log 2 / log ell: the largest gamma whose budget fits in 2^n.
double max_gamma(std::size_t n, std::size_t ell);

/// Per-CVP configuration budget (explicit budget, else ceil(ell^gamma)).
std::size_t resolve_budget(const Hyperparameters& hp, std::size_t ell);

/// Checks ranges and the gamma bound; throws kInvalidArgument.
void validate(const Hyperparameters& hp, std::size_t ell);

/// "key = value" lines; '#' starts a comment. Throws kInvalidArgument with
/// the line number on malformed input.
std::map<std::string, std::string> parse_config(std::istream& is);

/// Applies keys named after the Hyperparameters fields; unknown keys throw.
void apply_config(Hyperparameters& hp, const std::map<std::string, std::string>& kv);

}  // namespace tnss
