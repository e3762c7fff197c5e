#include "tnss/congruence.hpp"

#include <bit>
#include <ostream>

#include "tnss/error.hpp"

namespace tnss {

namespace {

constexpr std::size_t kWord = 64;

std::size_t words_for(std::size_t bits) { return (bits + kWord - 1) / kWord; }

// Row-reduction work row: parity part followed by the history (identity) part.
struct WorkRow {
  std::vector<std::uint64_t> words;
  bool test(std::size_t bit) const { return ((words[bit / kWord] >> (bit % kWord)) & 1U) != 0; }
  void flip(std::size_t bit) { words[bit / kWord] ^= std::uint64_t{1} << (bit % kWord); }
  void xor_with(const WorkRow& other) {
    for (std::size_t i = 0; i < words.size(); ++i) words[i] ^= other.words[i];
  }
};

}  // namespace

ParityMatrix::ParityMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_per_col_(words_for(rows)), bits_(cols * words_for(rows), 0) {}

bool ParityMatrix::get(std::size_t row, std::size_t col) const {
  require(row < rows_ && col < cols_, ErrorKind::kInvalidArgument, "parity matrix index out of range");
  return ((bits_[col * words_per_col_ + row / kWord] >> (row % kWord)) & 1U) != 0;
}

void ParityMatrix::set(std::size_t row, std::size_t col, bool value) {
  require(row < rows_ && col < cols_, ErrorKind::kInvalidArgument, "parity matrix index out of range");
  auto& word = bits_[col * words_per_col_ + row / kWord];
  const std::uint64_t mask = std::uint64_t{1} << (row % kWord);
  word = value ? (word | mask) : (word & ~mask);
}

std::span<const std::uint64_t> ParityMatrix::column_words(std::size_t col) const {
  return {bits_.data() + col * words_per_col_, words_per_col_};
}

bool ParityMatrix::annihilates(std::span<const std::uint8_t> tau) const {
  require(tau.size() == cols_, ErrorKind::kInvalidArgument, "kernel vector length differs from column count");
  std::vector<std::uint64_t> acc(words_per_col_, 0);
  for (std::size_t c = 0; c < cols_; ++c) {
    if (tau[c] == 0) continue;
    const auto w = column_words(c);
    for (std::size_t i = 0; i < words_per_col_; ++i) acc[i] ^= w[i];
  }
  for (auto w : acc)
    if (w != 0) return false;
  return true;
}

void ParityMatrix::dump(std::ostream& os) const {
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) os << (get(r, c) ? '1' : '0');
    os << '\n';
  }
}

ParityMatrix build_parity_matrix(std::span<const SrPair> pairs, std::size_t pi2) {
  ParityMatrix m(pi2 + 1, pairs.size());
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    const auto& e = pairs[c].e_tilde;
    require(e.exponents.size() == pi2, ErrorKind::kInvalidArgument,
            "sr-pair exponent vector is not indexed over the smoothness basis");
    m.set(0, c, (e.sign & 1) != 0);
    for (std::size_t j = 0; j < pi2; ++j) m.set(j + 1, c, (e.exponents[j] & 1) != 0);
  }
  return m;
}

std::vector<std::vector<std::uint8_t>> kernel_basis(const ParityMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  const std::size_t total_bits = rows + cols;
  const std::size_t words = words_for(total_bits);

  std::vector<WorkRow> work(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    work[c].words.assign(words, 0);
    const auto src = m.column_words(c);
    for (std::size_t r = 0; r < rows; ++r)
      if ((src[r / kWord] >> (r % kWord)) & 1U) work[c].flip(r);
    work[c].flip(rows + c);
  }

  std::vector<bool> is_pivot(cols, false);
  for (std::size_t bit = 0; bit < rows; ++bit) {
    std::size_t pivot = cols;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!is_pivot[c] && work[c].test(bit)) {
        pivot = c;
        break;
      }
    }
    if (pivot == cols) continue;
    is_pivot[pivot] = true;
    for (std::size_t c = 0; c < cols; ++c)
      if (!is_pivot[c] && work[c].test(bit)) work[c].xor_with(work[pivot]);
  }

  std::vector<std::vector<std::uint8_t>> basis;
  for (std::size_t c = 0; c < cols; ++c) {
    if (is_pivot[c]) continue;
    std::vector<std::uint8_t> tau(cols, 0);
    for (std::size_t r = 0; r < cols; ++r) tau[r] = work[c].test(rows + r) ? 1 : 0;
    basis.push_back(std::move(tau));
  }
  return basis;
}

Squares assemble_squares(std::span<const std::uint8_t> tau, std::span<const SrPair> pairs, const BigInt& n,
                         const PrimeBasis& p2) {
  require(tau.size() == pairs.size(), ErrorKind::kInvalidArgument, "selection length differs from pair count");
  require(n >= 2, ErrorKind::kInvalidArgument, "modulus must be >= 2");
  const std::size_t pi2 = p2.size();
  std::vector<std::int64_t> combined(pi2, 0);
  std::int64_t sign = 0;
  BigInt y = 1;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    if (tau[r] == 0) continue;
    const auto& pr = pairs[r];
    require(pr.e_u.exponents.size() == pi2 && pr.e_w.exponents.size() == pi2, ErrorKind::kInvalidArgument,
            "sr-pair exponent vector is not indexed over the smoothness basis");
    sign += pr.e_w.sign + pr.e_u.sign;
    for (std::size_t j = 0; j < pi2; ++j) {
      if (__builtin_add_overflow(combined[j], pr.e_u.exponents[j] + pr.e_w.exponents[j], &combined[j]))
        raise(ErrorKind::kInternalConsistency, "exponent accumulation overflow");
    }
    y = (y * pr.u) % n;
  }
  if (sign % 2 != 0) raise(ErrorKind::kInternalConsistency, "odd sign exponent in square assembly");
  BigInt x = 1;
  for (std::size_t j = 0; j < pi2; ++j) {
    if (combined[j] % 2 != 0) {
      raise(ErrorKind::kInternalConsistency, "odd combined exponent for prime " + std::to_string(p2[j]));
    }
    if (combined[j] == 0) continue;
    x = (x * mod_pow(BigInt(static_cast<unsigned long>(p2[j])), BigInt(static_cast<long>(combined[j] / 2)), n)) % n;
  }
  if (y < 0) y += n;
  return {x, y};
}

std::optional<std::pair<BigInt, BigInt>> extract_factors(const BigInt& x, const BigInt& y, const BigInt& n) {
  require(n >= 2, ErrorKind::kInvalidArgument, "modulus must be >= 2");
  if (mod_pow(x, 2, n) != mod_pow(y, 2, n)) {
    raise(ErrorKind::kInvalidArgument, "X^2 and Y^2 are not congruent modulo N");
  }
  BigInt xr = x % n;
  if (xr < 0) xr += n;
  BigInt yr = y % n;
  if (yr < 0) yr += n;
  BigInt sum = (xr + yr) % n;
  if (sum == 0 || xr == yr) return std::nullopt;
  const BigInt g = gcd(sum, n);
  if (g == 1 || g == n) return std::nullopt;
  return std::make_pair(g, BigInt(n / g));
}

std::optional<FactorResult> process(std::span<const SrPair> pairs, const BigInt& n, const PrimeBasis& p2,
                                    const ProcessOptions& options) {
  if (pairs.empty()) return std::nullopt;
  const auto matrix = build_parity_matrix(pairs, p2.size());
  const auto kernel = kernel_basis(matrix);
  if (kernel.empty()) return std::nullopt;

  std::size_t trials = 0;
  auto attempt = [&](std::span<const std::uint8_t> tau, std::size_t index) -> std::optional<FactorResult> {
    ++trials;
    const auto sq = assemble_squares(tau, pairs, n, p2);
    auto f = extract_factors(sq.x, sq.y, n);
    if (!f) return std::nullopt;
    FactorResult res;
    res.p = f->first < f->second ? f->first : f->second;
    res.q = f->first < f->second ? f->second : f->first;
    res.kernel_vector_used = index;
    res.trials = trials;
    return res;
  };

  for (std::size_t i = 0; i < kernel.size() && trials < options.combination_budget; ++i) {
    if (auto r = attempt(kernel[i], i)) return r;
  }
  std::size_t index = kernel.size();
  std::vector<std::uint8_t> combo(pairs.size());
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    for (std::size_t j = i + 1; j < kernel.size(); ++j, ++index) {
      if (trials >= options.combination_budget) return std::nullopt;
      for (std::size_t r = 0; r < combo.size(); ++r) combo[r] = kernel[i][r] ^ kernel[j][r];
      if (auto r = attempt(combo, index)) return r;
    }
  }
  return std::nullopt;
}

}  // namespace tnss
