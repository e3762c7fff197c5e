#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tnss/cvp_model.hpp"

namespace tnss {

/// Tensor of one tree node with legs (child 0, child 1, parent), stored
/// row-major: t[(a * d1 + b) * dp + p]. Leaves use leg 0 for the physical
/// index and a trivial leg 1 of size 1.
struct TtnNode {
  std::size_t d0 = 1;
  std::size_t d1 = 1;
  std::size_t dp = 1;
  std::vector<double> t;

  std::size_t size() const noexcept { return d0 * d1 * dp; }
  double& at(std::size_t a, std::size_t b, std::size_t p) { return t[(a * d1 + b) * dp + p]; }
  double at(std::size_t a, std::size_t b, std::size_t p) const { return t[(a * d1 + b) * dp + p]; }
};

/// Real binary tree tensor network over n qubits. Nodes use heap numbering:
/// root 1, children 2v and 2v+1, leaf k at n_padded() + k. Leaves k >= n are
/// dummy qubits pinned to |0> (physical dimension 1). Every tensor except the
/// one at center() is an isometry pointing towards the center.
class TtnState {
 public:
  TtnState() = default;

  std::size_t n() const noexcept { return n_; }
  std::size_t n_padded() const noexcept { return n_pad_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t bond_dim() const noexcept { return m_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t node_count() const noexcept { return 2 * n_pad_ - 1; }
  std::size_t center() const noexcept { return center_; }
  bool is_leaf(std::size_t v) const noexcept { return v >= n_pad_; }

  const TtnNode& node(std::size_t v) const { return nodes_.at(v); }
  TtnNode& node(std::size_t v) { return nodes_.at(v); }

  /// Largest link dimension in the tree.
  std::size_t max_bond() const;

  /// Squared norm, read off the center tensor.
  double norm_squared() const;
  void normalize();

  /// Moves the orthogonality center by QR along the tree path.
  void move_center(std::size_t target);
  /// One QR step from the center to a neighbouring node.
  void shift_center(std::size_t neighbour);

  /// Binary checkpoint: "TTN1", u32 version, u64 n, n_padded, m, seed,
  /// center, then for v = 1 .. 2 n_padded - 1 the u64 dims (d0, d1, dp)
  /// followed by d0*d1*dp little-endian doubles.
  void save(std::ostream& os) const;
  static TtnState load(std::istream& is);

  friend TtnState init_ttn(std::size_t n, std::size_t m, std::uint64_t seed);

 private:
  std::size_t n_ = 0;
  std::size_t n_pad_ = 0;
  std::size_t depth_ = 0;
  std::size_t m_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t center_ = 1;
  std::vector<TtnNode> nodes_;  // index 0 unused
};

/// Random isometric state with center at the root. Link dimension of the
/// parent leg of v is min(m, 2^(qubits below v), 2^(qubits outside v)).
TtnState init_ttn(std::size_t n, std::size_t m, std::uint64_t seed);

/// <x|psi> by bottom-up contraction.
double amplitude(const TtnState& state, std::span<const std::uint8_t> bits);

/// Transverse fields for H' = H + sum_j h_j X_j.
struct PerturbationSpec {
  std::vector<double> h;
  double alpha = 0.1;
  std::uint64_t seed = 0;
};

/// h_j uniform in [-alpha * med, alpha * med], med = median_j |a_j|.
PerturbationSpec make_perturbation(const Qubo& qubo, double alpha, std::uint64_t seed);

/// H' = E0 + sum_j a_j n_j + sum_{i<j} w_ij n_i n_j + sum_j h_j X_j in double
/// precision, with n = |1><1|.
class TtnOperator {
 public:
  TtnOperator() = default;
  TtnOperator(const Qubo& qubo, std::vector<double> h);

  std::size_t n() const noexcept { return linear_.size(); }
  double constant() const noexcept { return constant_; }
  std::span<const double> linear() const noexcept { return linear_; }
  double coupling(std::size_t i, std::size_t j) const { return quad_(i, j); }
  std::span<const double> transverse() const noexcept { return h_; }

  /// <x|H'|x>, equal to the unperturbed energy.
  double diagonal(std::span<const std::uint8_t> bits) const;

  /// Dense 2^n x 2^n matrix, basis index sum_j x_j 2^j; n <= 14.
  Eigen::MatrixXd dense() const;

 private:
  double constant_ = 0.0;
  std::vector<double> linear_;
  Eigen::MatrixXd quad_;
  std::vector<double> h_;
};

TtnOperator perturb(const DiagonalCvpHamiltonian& h, const PerturbationSpec& spec);

struct SweepOptions {
  std::size_t sweeps = 2;
  double tol = 1e-10;            // stop when a sweep lowers the energy by less (relative)
  double eig_tol = 1e-8;         // local residual, relative to max(1, |energy|)
  std::size_t max_matvecs = 4000;
};

struct GroundStateReport {
  std::vector<double> energies;  // after every local update
  double energy = 0.0;
  std::size_t sweeps_done = 0;
};

/// Single-tensor variational sweeps in depth-first pre-order. Throws
/// kConvergence naming the node when a local eigenproblem does not converge.
GroundStateReport ground_state_search(const TtnOperator& op, TtnState& state, const SweepOptions& options = {});

/// <psi|H'|psi> / <psi|psi> through the tree environments.
double expectation(const TtnOperator& op, const TtnState& state);

struct SampledConfig {
  Bits bits;
  double probability = 0.0;
  BigInt energy;  // filled by callers that hold the Hamiltonian
};

enum class SamplingOrder {
  kProportional,  // random descent weighted by remaining conditional mass
  kGreedy,        // always enter the child with the most remaining mass
};

struct SamplingOptions {
  std::size_t k = 1;
  double p_stop = 0.999;
  std::uint64_t seed = 0;
  SamplingOrder order = SamplingOrder::kProportional;
};

struct SamplingReport {
  std::vector<SampledConfig> samples;
  double accumulated = 0.0;
  bool support_exhausted = false;
  std::size_t trie_nodes = 0;
};

/// Distinct bit strings with their Born probabilities. Emitted strings are
/// removed from the distribution through a prefix trie that tracks removed
/// mass per prefix, so no string can be drawn twice. Stops at k strings,
/// accumulated probability >= p_stop, or an exhausted support. Throws
/// kCapacity when k > 2^n.
SamplingReport sample_distinct(const TtnState& state, const SamplingOptions& options);

}  // namespace tnss
