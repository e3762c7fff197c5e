#include "tnss/cvp_model.hpp"

#include <algorithm>
#include <bit>
#include <queue>

namespace tnss {

namespace {

const BigInt kInt64Budget = BigInt(1) << 62;

std::uint64_t lex_key(std::uint64_t mask, std::size_t n) {
  std::uint64_t key = 0;
  for (std::size_t j = 0; j < n; ++j)
    if ((mask >> j) & 1U) key |= std::uint64_t{1} << (n - 1 - j);
  return key;
}

Bits mask_to_bits(std::uint64_t mask, std::size_t n) {
  Bits bits(n, 0);
  for (std::size_t j = 0; j < n; ++j) bits[j] = static_cast<std::uint8_t>((mask >> j) & 1U);
  return bits;
}

template <typename E>
struct Candidate {
  E energy;
  std::uint64_t key;
  std::uint64_t mask;
};

template <typename E>
bool candidate_less(const Candidate<E>& a, const Candidate<E>& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.key < b.key;
}

// Gray-code walk over all 2^n strings, keeping the k best in a max-heap.
template <typename E>
std::vector<Candidate<E>> enumerate_best(std::size_t n, std::size_t k, const E& constant,
                                         const std::vector<E>& linear, const std::vector<E>& quad) {
  auto cmp = [](const Candidate<E>& a, const Candidate<E>& b) { return candidate_less(a, b); };
  std::priority_queue<Candidate<E>, std::vector<Candidate<E>>, decltype(cmp)> heap(cmp);
  std::vector<E> field = linear;  // a_j + sum_i w_ij x_i
  E energy = constant;
  std::uint64_t mask = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  auto offer = [&](const E& e, std::uint64_t m) {
    Candidate<E> c{e, lex_key(m, n), m};
    if (heap.size() < k) {
      heap.push(std::move(c));
    } else if (candidate_less(c, heap.top())) {
      heap.pop();
      heap.push(std::move(c));
    }
  };
  offer(energy, mask);
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto j = static_cast<std::size_t>(std::countr_zero(step));
    const bool setting = ((mask >> j) & 1U) == 0;
    if (setting) {
      energy += field[j];
    } else {
      energy -= field[j];
    }
    mask ^= std::uint64_t{1} << j;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      if (setting) {
        field[i] += quad[i * n + j];
      } else {
        field[i] -= quad[i * n + j];
      }
    }
    offer(energy, mask);
  }
  std::vector<Candidate<E>> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

Qubo::Qubo(BigInt constant, std::vector<BigInt> linear, Matrix<BigInt> quad)
    : constant_(std::move(constant)), linear_(std::move(linear)), quad_(std::move(quad)) {
  const std::size_t n = linear_.size();
  require(quad_.rows() == n && quad_.cols() == n, ErrorKind::kInvalidArgument, "QUBO coupling matrix must be n x n");
  BigInt bound = abs(constant_);
  for (const auto& a : linear_) bound += abs(a);
  for (std::size_t i = 0; i < n; ++i) {
    require(quad_(i, i) == 0, ErrorKind::kInvalidArgument, "QUBO coupling diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      require(quad_(i, j) == quad_(j, i), ErrorKind::kInvalidArgument, "QUBO coupling matrix must be symmetric");
      bound += abs(quad_(i, j));
    }
  }
  fits_int64_ = bound < kInt64Budget;
  if (fits_int64_) {
    constant64_ = constant_.get_si();
    linear64_.resize(n);
    quad64_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      linear64_[i] = linear_[i].get_si();
      for (std::size_t j = 0; j < n; ++j) quad64_[i * n + j] = quad_(i, j).get_si();
    }
  }
}

BigInt Qubo::energy(std::span<const std::uint8_t> bits) const {
  const std::size_t n = size();
  require(bits.size() == n, ErrorKind::kInvalidArgument, "bit string length differs from qubit count");
  BigInt e = constant_;
  for (std::size_t i = 0; i < n; ++i) {
    if (bits[i] == 0) continue;
    e += linear_[i];
    for (std::size_t j = i + 1; j < n; ++j)
      if (bits[j] != 0) e += quad_(i, j);
  }
  return e;
}

std::int64_t Qubo::energy64(std::uint64_t mask) const {
  const std::size_t n = size();
  std::int64_t e = constant64_;
  for (std::size_t i = 0; i < n; ++i) {
    if (((mask >> i) & 1U) == 0) continue;
    e += linear64_[i];
    for (std::size_t j = i + 1; j < n; ++j)
      if ((mask >> j) & 1U) e += quad64_[i * n + j];
  }
  return e;
}

Qubo Qubo::permuted(std::span<const std::size_t> perm) const {
  const std::size_t n = size();
  require(perm.size() == n, ErrorKind::kInvalidArgument, "permutation length differs from qubit count");
  std::vector<BigInt> lin(n);
  Matrix<BigInt> q(n, n, BigInt(0));
  for (std::size_t a = 0; a < n; ++a) {
    lin[a] = linear_[perm[a]];
    for (std::size_t b = 0; b < n; ++b) q(a, b) = quad_(perm[a], perm[b]);
  }
  return Qubo(constant_, std::move(lin), std::move(q));
}

DiagonalCvpHamiltonian build_hamiltonian(const CvpInstance& instance, const ReducedBasis& reduced,
                                         const BabaiResult& babai) {
  const std::size_t n = instance.rank();
  const std::size_t dim = instance.dimension();
  require(reduced.reduced.cols() == n && reduced.reduced.rows() == dim, ErrorKind::kInvalidArgument,
          "reduced basis does not match the instance");
  require(babai.coeffs.size() == n && babai.point.size() == dim && babai.signs.size() == n,
          ErrorKind::kInvalidArgument, "Babai result does not match the instance");
  require(instance.target.size() == dim, ErrorKind::kInvalidArgument, "target dimension mismatch");

  DiagonalCvpHamiltonian h;
  h.n = n;
  h.residual.resize(dim);
  for (std::size_t r = 0; r < dim; ++r) h.residual[r] = instance.target[r] - babai.point[r];
  h.signed_directions = BigMatrix(dim, n, BigInt(0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t r = 0; r < dim; ++r) h.signed_directions(r, j) = babai.signs[j] * reduced.reduced(r, j);

  // ||g - sum_j x_j D_j||^2 expanded with x_j^2 = x_j.
  BigInt e0 = 0;
  for (const auto& g : h.residual) e0 += g * g;
  std::vector<BigInt> linear(n, BigInt(0));
  Matrix<BigInt> quad(n, n, BigInt(0));
  for (std::size_t j = 0; j < n; ++j) {
    BigInt gd = 0;
    BigInt dd = 0;
    for (std::size_t r = 0; r < dim; ++r) {
      gd += h.residual[r] * h.signed_directions(r, j);
      dd += h.signed_directions(r, j) * h.signed_directions(r, j);
    }
    linear[j] = dd - 2 * gd;
    for (std::size_t i = 0; i < j; ++i) {
      BigInt ij = 0;
      for (std::size_t r = 0; r < dim; ++r) ij += h.signed_directions(r, i) * h.signed_directions(r, j);
      quad(i, j) = 2 * ij;
      quad(j, i) = quad(i, j);
    }
  }
  h.qubo = Qubo(std::move(e0), std::move(linear), std::move(quad));
  h.babai_point = babai.point;
  h.transform = reduced.transform;
  h.babai_coeffs = babai.coeffs;
  h.signs = babai.signs;
  return h;
}

BigInt DiagonalCvpHamiltonian::energy(std::span<const std::uint8_t> bits) const {
  const BigInt e = qubo.energy(bits);
  if (e < 0) raise(ErrorKind::kInternalConsistency, "negative configuration energy");
  return e;
}

LatticePoint DiagonalCvpHamiltonian::config_to_lattice_point(std::span<const std::uint8_t> bits) const {
  require(bits.size() == n, ErrorKind::kInvalidArgument, "bit string length differs from qubit count");
  LatticePoint lp;
  lp.point = babai_point;
  std::vector<BigInt> shifted = babai_coeffs;
  for (std::size_t j = 0; j < n; ++j) {
    if (bits[j] == 0) continue;
    shifted[j] += signs[j];
    for (std::size_t r = 0; r < lp.point.size(); ++r) lp.point[r] += signed_directions(r, j);
  }
  lp.coeffs = mat_vec(transform, shifted);
  return lp;
}

CoefficientMap::CoefficientMap(const DiagonalCvpHamiltonian& h) {
  const std::size_t n = h.n;
  base_ = mat_vec(h.transform, h.babai_coeffs);
  columns_ = BigMatrix(n, n, BigInt(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) columns_(i, j) = h.signs[j] * h.transform(i, j);
  fits_int64_ = true;
  for (std::size_t i = 0; i < n && fits_int64_; ++i) {
    BigInt bound = abs(base_[i]);
    for (std::size_t j = 0; j < n; ++j) bound += abs(columns_(i, j));
    fits_int64_ = bound < kInt64Budget;
  }
  if (fits_int64_) {
    base64_.resize(n);
    columns64_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      base64_[i] = base_[i].get_si();
      for (std::size_t j = 0; j < n; ++j) columns64_[i * n + j] = columns_(i, j).get_si();
    }
  }
}

std::vector<BigInt> CoefficientMap::coeffs(std::span<const std::uint8_t> bits) const {
  const std::size_t n = base_.size();
  require(bits.size() == n, ErrorKind::kInvalidArgument, "bit string length differs from qubit count");
  std::vector<BigInt> e = base_;
  for (std::size_t j = 0; j < n; ++j) {
    if (bits[j] == 0) continue;
    for (std::size_t i = 0; i < n; ++i) e[i] += columns_(i, j);
  }
  return e;
}

std::optional<std::vector<std::int64_t>> CoefficientMap::coeffs64(std::span<const std::uint8_t> bits) const {
  if (!fits_int64_) return std::nullopt;
  const std::size_t n = base64_.size();
  require(bits.size() == n, ErrorKind::kInvalidArgument, "bit string length differs from qubit count");
  std::vector<std::int64_t> e = base64_;
  for (std::size_t j = 0; j < n; ++j) {
    if (bits[j] == 0) continue;
    for (std::size_t i = 0; i < n; ++i) e[i] += columns64_[i * n + j];
  }
  return e;
}

bool lex_less(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<Configuration> exact_low_energy_enum(const Qubo& qubo, std::size_t k) {
  const std::size_t n = qubo.size();
  if (n > kMaxEnumQubits) {
    raise(ErrorKind::kCapacity, "exact enumeration refuses n = " + std::to_string(n) + " > 26 qubits");
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  require(k <= total, ErrorKind::kInvalidArgument, "k exceeds 2^n");
  std::vector<Configuration> out;
  if (k == 0) return out;
  out.reserve(k);
  if (qubo.fits_int64()) {
    std::vector<std::int64_t> lin(qubo.linear64().begin(), qubo.linear64().end());
    std::vector<std::int64_t> quad(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) quad[i * n + j] = qubo.quad64(i, j);
    for (const auto& c : enumerate_best<std::int64_t>(n, k, qubo.constant64(), lin, quad))
      out.push_back({mask_to_bits(c.mask, n), BigInt(static_cast<long>(c.energy))});
  } else {
    std::vector<BigInt> quad(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) quad[i * n + j] = qubo.quad()(i, j);
    for (const auto& c : enumerate_best<BigInt>(n, k, qubo.constant(), qubo.linear(), quad))
      out.push_back({mask_to_bits(c.mask, n), c.energy});
  }
  return out;
}

std::vector<Configuration> exact_low_energy_enum(const DiagonalCvpHamiltonian& h, std::size_t k) {
  auto out = exact_low_energy_enum(h.qubo, k);
  for (const auto& c : out)
    if (c.energy < 0) raise(ErrorKind::kInternalConsistency, "negative configuration energy");
  return out;
}

}  // namespace tnss
