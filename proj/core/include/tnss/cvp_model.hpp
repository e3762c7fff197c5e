#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tnss/lattice.hpp"

namespace tnss {

/// Bit string x in {0,1}^n; x[j] = 1 applies the rounding correction of
/// coordinate j in the direction sign(mu_j - c_j).
using Bits = std::vector<std::uint8_t>;

/// Quadratic unconstrained binary form
///   E(x) = constant + sum_j linear_j x_j + sum_{i<j} quad(i, j) x_i x_j
/// with quad symmetric and zero on the diagonal. Coefficients are exact;
/// an int64 mirror is kept when a coefficient bound certifies it cannot
/// overflow.
class Qubo {
 public:
  Qubo() = default;
  Qubo(BigInt constant, std::vector<BigInt> linear, Matrix<BigInt> quad);

  std::size_t size() const noexcept { return linear_.size(); }
  const BigInt& constant() const noexcept { return constant_; }
  const std::vector<BigInt>& linear() const noexcept { return linear_; }
  const Matrix<BigInt>& quad() const noexcept { return quad_; }

  BigInt energy(std::span<const std::uint8_t> bits) const;

  /// True when every energy and partial sum fits comfortably in int64.
  bool fits_int64() const noexcept { return fits_int64_; }
  std::int64_t constant64() const noexcept { return constant64_; }
  std::span<const std::int64_t> linear64() const noexcept { return linear64_; }
  std::int64_t quad64(std::size_t i, std::size_t j) const noexcept { return quad64_[i * size() + j]; }
  /// Requires fits_int64(); bit j of mask is x_j.
  std::int64_t energy64(std::uint64_t mask) const;

  /// Relabels qubits: new qubit k is old qubit perm[k].
  Qubo permuted(std::span<const std::size_t> perm) const;

 private:
  BigInt constant_;
  std::vector<BigInt> linear_;
  Matrix<BigInt> quad_;
  bool fits_int64_ = false;
  std::int64_t constant64_ = 0;
  std::vector<std::int64_t> linear64_;
  std::vector<std::int64_t> quad64_;
};

struct LatticePoint {
  std::vector<BigInt> point;   // b = b_cl + sum_j sign_j x_j d_j
  std::vector<BigInt> coeffs;  // e = U (c + kappa), so B e = b
};

/// Diagonal spin-glass Hamiltonian whose energy at x is ||t - b(x)||^2, plus
/// everything needed to map x back onto the lattice.
struct DiagonalCvpHamiltonian {
  std::size_t n = 0;
  std::vector<BigInt> residual;  // g = t - b_cl
  BigMatrix signed_directions;   // column j: sign_j d_j
  Qubo qubo;

  std::vector<BigInt> babai_point;
  BigMatrix transform;  // U
  std::vector<BigInt> babai_coeffs;
  std::vector<int> signs;

  BigInt energy(std::span<const std::uint8_t> bits) const;
  LatticePoint config_to_lattice_point(std::span<const std::uint8_t> bits) const;
};

DiagonalCvpHamiltonian build_hamiltonian(const CvpInstance& instance, const ReducedBasis& reduced,
                                         const BabaiResult& babai);

/// Coefficient vectors e(x) = U c + sum_j x_j sign_j U_j, with an int64 path
/// when the entry bound allows it. Used when many configurations of one
/// Hamiltonian are mapped back.
class CoefficientMap {
 public:
  explicit CoefficientMap(const DiagonalCvpHamiltonian& h);

  std::vector<BigInt> coeffs(std::span<const std::uint8_t> bits) const;
  /// Absent when the int64 path is not certified.
  std::optional<std::vector<std::int64_t>> coeffs64(std::span<const std::uint8_t> bits) const;

 private:
  std::vector<BigInt> base_;
  BigMatrix columns_;
  bool fits_int64_ = false;
  std::vector<std::int64_t> base64_;
  std::vector<std::int64_t> columns64_;  // row-major n x n
};

struct Configuration {
  Bits bits;
  BigInt energy;
};

inline constexpr std::size_t kMaxEnumQubits = 26;

/// The k lowest-energy bit strings, energy ties broken by ascending
/// lexicographic order of (x_1, ..., x_n). Throws kCapacity when n > 26.
std::vector<Configuration> exact_low_energy_enum(const Qubo& qubo, std::size_t k);
std::vector<Configuration> exact_low_energy_enum(const DiagonalCvpHamiltonian& h, std::size_t k);

/// True when a precedes b in ascending lexicographic bit order.
bool lex_less(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept;

}  // namespace tnss
