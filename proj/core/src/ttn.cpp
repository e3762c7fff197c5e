#include "tnss/ttn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "tnss/error.hpp"
#include "tnss/rng.hpp"
#include "ttn_internal.hpp"

namespace tnss {

using detail::apply_leg;
using detail::contract_leg;
using detail::Dims;
using detail::dims_of;
using detail::Mat;

namespace {

std::size_t pow2_capped(std::size_t k, std::size_t cap) {
  if (k >= 63) return cap;
  return static_cast<std::size_t>(std::min<std::uint64_t>(cap, std::uint64_t{1} << k));
}

// Matrix with the given leg as columns and the other two legs as rows.
Mat unfold(const TtnNode& node, int leg) {
  const Dims s = dims_of(node);
  const int x = leg == 0 ? 1 : 0;
  const int y = leg == 2 ? 1 : 2;
  Mat m(static_cast<Eigen::Index>(s.d[x] * s.d[y]), static_cast<Eigen::Index>(s.d[leg]));
  std::array<std::size_t, 3> idx{};
  for (idx[0] = 0; idx[0] < s.d[0]; ++idx[0])
    for (idx[1] = 0; idx[1] < s.d[1]; ++idx[1])
      for (idx[2] = 0; idx[2] < s.d[2]; ++idx[2])
        m(static_cast<Eigen::Index>(idx[x] * s.d[y] + idx[y]), static_cast<Eigen::Index>(idx[leg])) =
            node.at(idx[0], idx[1], idx[2]);
  return m;
}

void fold(TtnNode& node, int leg, const Mat& m) {
  const Dims s = dims_of(node);
  const int x = leg == 0 ? 1 : 0;
  const int y = leg == 2 ? 1 : 2;
  std::array<std::size_t, 3> idx{};
  for (idx[0] = 0; idx[0] < s.d[0]; ++idx[0])
    for (idx[1] = 0; idx[1] < s.d[1]; ++idx[1])
      for (idx[2] = 0; idx[2] < s.d[2]; ++idx[2])
        node.at(idx[0], idx[1], idx[2]) =
            m(static_cast<Eigen::Index>(idx[x] * s.d[y] + idx[y]), static_cast<Eigen::Index>(idx[leg]));
}

// Thin QR of the unfolding along `leg`; the node keeps Q, R is returned.
Mat split_qr(TtnNode& node, int leg) {
  const Mat m = unfold(node, leg);
  Eigen::HouseholderQR<Mat> qr(m);
  const auto cols = m.cols();
  Mat q = qr.householderQ() * Mat::Identity(m.rows(), cols);
  Mat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  fold(node, leg, q);
  return r;
}

void absorb(TtnNode& node, int leg, const Mat& r) {
  std::vector<double> out(node.size());
  apply_leg(r, node.t.data(), out.data(), dims_of(node), leg, false);
  node.t = std::move(out);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) raise(ErrorKind::kIo, "truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

}  // namespace

std::size_t TtnState::max_bond() const {
  std::size_t b = 1;
  for (std::size_t v = 2; v < nodes_.size(); ++v) b = std::max(b, nodes_[v].dp);
  return b;
}

double TtnState::norm_squared() const {
  double s = 0.0;
  for (double x : nodes_.at(center_).t) s += x * x;
  return s;
}

void TtnState::normalize() {
  const double nrm = std::sqrt(norm_squared());
  require(nrm > 0.0, ErrorKind::kInternalConsistency, "zero tree tensor network state");
  for (double& x : nodes_.at(center_).t) x /= nrm;
}

void TtnState::shift_center(std::size_t nb) {
  const std::size_t c = center_;
  if (c > 1 && nb == c / 2) {
    const Mat r = split_qr(nodes_[c], 2);
    absorb(nodes_[nb], static_cast<int>(c & 1U), r);
  } else if (!is_leaf(c) && nb / 2 == c) {
    const Mat r = split_qr(nodes_[c], static_cast<int>(nb & 1U));
    absorb(nodes_[nb], 2, r);
  } else {
    raise(ErrorKind::kInvalidArgument, "center can only move to a neighbouring node");
  }
  center_ = nb;
}

void TtnState::move_center(std::size_t target) {
  require(target >= 1 && target < nodes_.size(), ErrorKind::kInvalidArgument, "node index out of range");
  while (!detail::is_ancestor_or_self(center_, target)) shift_center(center_ / 2);
  while (center_ != target) {
    const std::size_t shift = detail::node_depth(target) - detail::node_depth(center_) - 1;
    shift_center(target >> shift);
  }
}

void TtnState::save(std::ostream& os) const {
  os.write("TTN1", 4);
  const std::uint32_t version = 1;
  unsigned char vb[4];
  for (int i = 0; i < 4; ++i) vb[i] = static_cast<unsigned char>(version >> (8 * i));
  os.write(reinterpret_cast<const char*>(vb), 4);
  write_u64(os, n_);
  write_u64(os, n_pad_);
  write_u64(os, m_);
  write_u64(os, seed_);
  write_u64(os, center_);
  for (std::size_t v = 1; v < nodes_.size(); ++v) {
    const auto& nd = nodes_[v];
    write_u64(os, nd.d0);
    write_u64(os, nd.d1);
    write_u64(os, nd.dp);
    for (double x : nd.t) write_u64(os, std::bit_cast<std::uint64_t>(x));
  }
  if (!os) raise(ErrorKind::kIo, "failed to write checkpoint");
}

TtnState TtnState::load(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TTN1", 4) != 0) raise(ErrorKind::kIo, "not a tree tensor network checkpoint");
  unsigned char vb[4];
  is.read(reinterpret_cast<char*>(vb), 4);
  if (!is || vb[0] != 1 || vb[1] != 0 || vb[2] != 0 || vb[3] != 0)
    raise(ErrorKind::kIo, "unsupported checkpoint version");
  TtnState s;
  s.n_ = read_u64(is);
  s.n_pad_ = read_u64(is);
  s.m_ = read_u64(is);
  s.seed_ = read_u64(is);
  s.center_ = read_u64(is);
  if (s.n_ < 2 || s.n_pad_ < s.n_ || !std::has_single_bit(s.n_pad_) || s.n_pad_ > (std::size_t{1} << 24) ||
      s.center_ < 1 || s.center_ >= 2 * s.n_pad_)
    raise(ErrorKind::kIo, "inconsistent checkpoint header");
  s.depth_ = static_cast<std::size_t>(std::countr_zero(s.n_pad_));
  s.nodes_.resize(2 * s.n_pad_);
  for (std::size_t v = 1; v < s.nodes_.size(); ++v) {
    auto& nd = s.nodes_[v];
    nd.d0 = read_u64(is);
    nd.d1 = read_u64(is);
    nd.dp = read_u64(is);
    if (nd.d0 == 0 || nd.d1 == 0 || nd.dp == 0 || nd.d0 > 4096 || nd.d1 > 4096 || nd.dp > 4096)
      raise(ErrorKind::kIo, "inconsistent checkpoint tensor shape");
    nd.t.resize(nd.size());
    for (double& x : nd.t) x = std::bit_cast<double>(read_u64(is));
  }
  return s;
}

TtnState init_ttn(std::size_t n, std::size_t m, std::uint64_t seed) {
  require(n >= 2, ErrorKind::kInvalidArgument, "tree tensor network needs at least two qubits");
  require(m >= 1, ErrorKind::kInvalidArgument, "bond dimension must be positive");
  TtnState s;
  s.n_ = n;
  s.n_pad_ = std::bit_ceil(n);
  s.depth_ = static_cast<std::size_t>(std::countr_zero(s.n_pad_));
  s.m_ = m;
  s.seed_ = seed;
  s.center_ = 1;
  s.nodes_.resize(2 * s.n_pad_);

  auto real_below = [&](std::size_t v) {
    const std::size_t shift = s.depth_ - detail::node_depth(v);
    const std::size_t lo = (v << shift) - s.n_pad_;
    const std::size_t hi = lo + (std::size_t{1} << shift);
    return lo >= n ? std::size_t{0} : std::min(hi, n) - lo;
  };
  auto link = [&](std::size_t v) {
    if (v == 1) return std::size_t{1};
    const std::size_t below = real_below(v);
    return std::min(pow2_capped(below, m), pow2_capped(n - below, m));
  };

  SplitMix64 rng(seed);
  for (std::size_t v = s.nodes_.size() - 1; v >= 1; --v) {
    auto& nd = s.nodes_[v];
    if (s.is_leaf(v)) {
      nd.d0 = (v - s.n_pad_) < n ? 2 : 1;
      nd.d1 = 1;
    } else {
      nd.d0 = link(2 * v);
      nd.d1 = link(2 * v + 1);
    }
    nd.dp = link(v);
    Mat g(static_cast<Eigen::Index>(nd.d0 * nd.d1), static_cast<Eigen::Index>(nd.dp));
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
    nd.t.assign(nd.size(), 0.0);
    Eigen::HouseholderQR<Mat> qr(g);
    const Mat q = qr.householderQ() * Mat::Identity(g.rows(), g.cols());
    fold(nd, 2, q);
  }
  return s;
}

double amplitude(const TtnState& state, std::span<const std::uint8_t> bits) {
  require(bits.size() == state.n(), ErrorKind::kInvalidArgument, "bit string length differs from qubit count");
  const std::size_t n_pad = state.n_padded();
  std::vector<std::vector<double>> phi(2 * n_pad);
  for (std::size_t v = 2 * n_pad - 1; v >= 1; --v) {
    const auto& nd = state.node(v);
    std::vector<double> out(nd.dp, 0.0);
    if (state.is_leaf(v)) {
      const std::size_t k = v - n_pad;
      const std::size_t b = k < state.n() ? bits[k] : 0;
      require(b < nd.d0, ErrorKind::kInvalidArgument, "bit values must be 0 or 1");
      for (std::size_t p = 0; p < nd.dp; ++p) out[p] = nd.at(b, 0, p);
    } else {
      const auto& l = phi[2 * v];
      const auto& r = phi[2 * v + 1];
      for (std::size_t a = 0; a < nd.d0; ++a) {
        if (l[a] == 0.0) continue;
        for (std::size_t b = 0; b < nd.d1; ++b) {
          const double w = l[a] * r[b];
          if (w == 0.0) continue;
          for (std::size_t p = 0; p < nd.dp; ++p) out[p] += w * nd.at(a, b, p);
        }
      }
      phi[2 * v].clear();
      phi[2 * v + 1].clear();
    }
    phi[v] = std::move(out);
  }
  return phi[1][0];
}

PerturbationSpec make_perturbation(const Qubo& qubo, double alpha, std::uint64_t seed) {
  require(alpha >= 0.0 && std::isfinite(alpha), ErrorKind::kInvalidArgument, "perturbation scale must be >= 0");
  const std::size_t n = qubo.size();
  std::vector<double> mags(n);
  for (std::size_t j = 0; j < n; ++j) mags[j] = std::fabs(qubo.linear()[j].get_d());
  std::sort(mags.begin(), mags.end());
  double med = 0.0;
  if (n > 0) med = n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
  PerturbationSpec spec;
  spec.alpha = alpha;
  spec.seed = seed;
  spec.h.resize(n);
  SplitMix64 rng(seed);
  const double bound = alpha * med;
  for (auto& h : spec.h) h = bound > 0.0 ? rng.uniform(-bound, bound) : 0.0;
  return spec;
}

TtnOperator::TtnOperator(const Qubo& qubo, std::vector<double> h) : h_(std::move(h)) {
  const std::size_t n = qubo.size();
  require(h_.size() == n, ErrorKind::kInvalidArgument, "transverse field count differs from qubit count");
  constant_ = qubo.constant().get_d();
  linear_.resize(n);
  for (std::size_t j = 0; j < n; ++j) linear_[j] = qubo.linear()[j].get_d();
  quad_ = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) quad_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = qubo.quad()(i, j).get_d();
}

double TtnOperator::diagonal(std::span<const std::uint8_t> bits) const {
  require(bits.size() == n(), ErrorKind::kInvalidArgument, "bit string length differs from qubit count");
  double e = constant_;
  for (std::size_t i = 0; i < n(); ++i) {
    if (!bits[i]) continue;
    e += linear_[i];
    for (std::size_t j = i + 1; j < n(); ++j)
      if (bits[j]) e += quad_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return e;
}

Mat TtnOperator::dense() const {
  require(n() <= 14, ErrorKind::kCapacity, "dense operator limited to 14 qubits");
  const std::size_t dim = std::size_t{1} << n();
  Mat m = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Bits bits(n());
  for (std::size_t idx = 0; idx < dim; ++idx) {
    for (std::size_t j = 0; j < n(); ++j) bits[j] = static_cast<std::uint8_t>((idx >> j) & 1U);
    const auto i = static_cast<Eigen::Index>(idx);
    m(i, i) = diagonal(bits);
    for (std::size_t j = 0; j < n(); ++j) m(static_cast<Eigen::Index>(idx ^ (std::size_t{1} << j)), i) += h_[j];
  }
  return m;
}

TtnOperator perturb(const DiagonalCvpHamiltonian& h, const PerturbationSpec& spec) {
  require(spec.h.size() == h.n, ErrorKind::kInvalidArgument, "perturbation size differs from qubit count");
  return TtnOperator(h.qubo, spec.h);
}

namespace {

// Operators of one side of a link, written in that link's basis.
struct Block {
  Mat h;
  std::vector<std::size_t> sites;
  std::vector<Mat> n;  // n_i = |1><1| on sites[i]

  std::size_t dim() const { return static_cast<std::size_t>(h.rows()); }
};

// Coupling of two blocks: sum_i n_i (x) f_i with f_i = sum_j w_ij n_j, iterated
// over whichever block has fewer sites.
struct Coupling {
  int leg_n = 0;
  int leg_f = 0;
  std::vector<const Mat*> n;
  std::vector<Mat> f;
};

Coupling couple(const TtnOperator& op, const Block& x, int leg_x, const Block& y, int leg_y) {
  Coupling c;
  if (x.sites.empty() || y.sites.empty()) return c;
  const bool swap = x.sites.size() > y.sites.size();
  const Block& s = swap ? y : x;
  const Block& o = swap ? x : y;
  c.leg_n = swap ? leg_y : leg_x;
  c.leg_f = swap ? leg_x : leg_y;
  for (std::size_t i = 0; i < s.sites.size(); ++i) {
    Mat f = Mat::Zero(static_cast<Eigen::Index>(o.dim()), static_cast<Eigen::Index>(o.dim()));
    for (std::size_t j = 0; j < o.sites.size(); ++j) {
      const double w = op.coupling(s.sites[i], o.sites[j]);
      if (w != 0.0) f += w * o.n[j];
    }
    c.n.push_back(&s.n[i]);
    c.f.push_back(std::move(f));
  }
  return c;
}

// Effective Hamiltonian on one node tensor given the blocks of its three legs.
class LocalOperator {
 public:
  LocalOperator(const TtnOperator& op, std::array<const Block*, 3> blocks, const Dims& dims)
      : blocks_(blocks), dims_(dims), constant_(op.constant()), scratch_(dims.size()) {
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        auto c = couple(op, *blocks_[a], a, *blocks_[b], b);
        if (!c.n.empty()) couplings_.push_back(std::move(c));
      }
  }

  std::size_t dim() const { return dims_.size(); }

  void apply(const double* x, double* y) const {
    const std::size_t sz = dims_.size();
    for (std::size_t i = 0; i < sz; ++i) y[i] = constant_ * x[i];
    for (int leg = 0; leg < 3; ++leg)
      if (!blocks_[leg]->sites.empty()) apply_leg(blocks_[leg]->h, x, y, dims_, leg, true);
    for (const auto& c : couplings_) {
      for (std::size_t i = 0; i < c.n.size(); ++i) {
        apply_leg(c.f[i], x, scratch_.data(), dims_, c.leg_f, false);
        apply_leg(*c.n[i], scratch_.data(), y, dims_, c.leg_n, true);
      }
    }
  }

  Eigen::VectorXd diagonal() const {
    Eigen::VectorXd d(static_cast<Eigen::Index>(dims_.size()));
    std::array<std::size_t, 3> idx{};
    std::size_t flat = 0;
    for (idx[0] = 0; idx[0] < dims_.d[0]; ++idx[0])
      for (idx[1] = 0; idx[1] < dims_.d[1]; ++idx[1])
        for (idx[2] = 0; idx[2] < dims_.d[2]; ++idx[2], ++flat) {
          double v = constant_;
          for (int leg = 0; leg < 3; ++leg) {
            const auto k = static_cast<Eigen::Index>(idx[leg]);
            v += blocks_[leg]->h(k, k);
          }
          for (const auto& c : couplings_) {
            const auto kn = static_cast<Eigen::Index>(idx[c.leg_n]);
            const auto kf = static_cast<Eigen::Index>(idx[c.leg_f]);
            for (std::size_t i = 0; i < c.n.size(); ++i) v += (*c.n[i])(kn, kn) * c.f[i](kf, kf);
          }
          d(static_cast<Eigen::Index>(flat)) = v;
        }
    return d;
  }

  Mat dense() const {
    const auto n = static_cast<Eigen::Index>(dim());
    Mat m(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd col(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e(j) = 1.0;
      apply(e.data(), col.data());
      m.col(j) = col;
      e(j) = 0.0;
    }
    return 0.5 * (m + m.transpose());
  }

 private:
  std::array<const Block*, 3> blocks_;
  Dims dims_;
  double constant_;
  std::vector<Coupling> couplings_;
  mutable std::vector<double> scratch_;
};

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
  bool converged = false;
};

Eigenpair dense_lowest(const LocalOperator& op) {
  Eigen::SelfAdjointEigenSolver<Mat> es(op.dense());
  if (es.info() != Eigen::Success) return {};
  return {es.eigenvalues()(0), es.eigenvectors().col(0), true};
}

// Davidson iteration with diagonal preconditioning, started from x0. The
// subspace always contains the previous Ritz vector, so the Ritz value never
// rises above the Rayleigh quotient of x0.
Eigenpair davidson_lowest(const LocalOperator& op, const Eigen::VectorXd& x0, double tol, std::size_t max_matvecs) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  const Eigen::Index max_basis = std::min<Eigen::Index>(n, 40);
  const Eigen::VectorXd diag = op.diagonal();

  Mat v(n, max_basis);
  Mat av(n, max_basis);
  Eigen::Index k = 0;
  std::size_t matvecs = 0;

  auto push = [&](Eigen::VectorXd t) -> bool {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < k; ++j) t -= v.col(j).dot(t) * v.col(j);
    const double nrm = t.norm();
    if (nrm < 1e-12) return false;
    v.col(k) = t / nrm;
    Eigen::VectorXd out(n);
    op.apply(v.col(k).data(), out.data());
    av.col(k) = out;
    ++k;
    ++matvecs;
    return true;
  };

  Eigen::VectorXd start = x0;
  if (start.norm() < 1e-300) start = Eigen::VectorXd::Ones(n);
  push(start);

  Eigenpair best;
  best.vector = v.col(0);
  Eigen::VectorXd prev_u;
  while (true) {
    const Mat proj = v.leftCols(k).transpose() * av.leftCols(k);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (proj + proj.transpose()));
    const double theta = es.eigenvalues()(0);
    const Eigen::VectorXd s = es.eigenvectors().col(0);
    Eigen::VectorXd u = v.leftCols(k) * s;
    const Eigen::VectorXd au = av.leftCols(k) * s;
    const double un = u.norm();
    u /= un;
    const Eigen::VectorXd r = au / un - theta * u;
    best.value = theta;
    best.vector = u;
    if (r.norm() <= tol * std::max(1.0, std::fabs(theta))) {
      best.converged = true;
      return best;
    }
    if (matvecs >= max_matvecs) return best;

    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double den = diag(i) - theta;
      if (std::fabs(den) < 1e-10 * std::max(1.0, std::fabs(theta))) den = den < 0 ? -1e-10 : 1e-10;
      t(i) = -r(i) / den;
    }
    if (k == max_basis) {
      // Restart on the current and previous Ritz vectors.
      Mat keep(n, 2);
      keep.col(0) = u;
      Eigen::Index kept = 1;
      if (prev_u.size() == n) {
        Eigen::VectorXd p = prev_u - u.dot(prev_u) * u;
        if (p.norm() > 1e-8) {
          keep.col(1) = p.normalized();
          kept = 2;
        }
      }
      k = 0;
      for (Eigen::Index j = 0; j < kept; ++j) push(keep.col(j));
    }
    prev_u = u;
    if (!push(t) && !push(r)) {
      Eigen::VectorXd rnd(n);
      SplitMix64 rng(0x9e37 + matvecs);
      for (Eigen::Index i = 0; i < n; ++i) rnd(i) = rng.normal();
      if (!push(rnd)) return best;
    }
  }
}

// Renormalized blocks for every link plus the node-local effective problem.
class Environment {
 public:
  Environment(const TtnOperator& op, TtnState& state) : op_(op), state_(state) {
    require(op.n() == state.n(), ErrorKind::kInvalidArgument, "operator and state have different qubit counts");
    const std::size_t n_pad = state.n_padded();
    trivial_.h = Mat::Zero(1, 1);
    phys_.resize(n_pad);
    for (std::size_t k = 0; k < n_pad; ++k) {
      if (k < state.n()) {
        auto& b = phys_[k];
        b.h = Mat::Zero(2, 2);
        b.h(0, 1) = b.h(1, 0) = op.transverse()[k];
        b.h(1, 1) = op.linear()[k];
        b.sites = {k};
        Mat nk = Mat::Zero(2, 2);
        nk(1, 1) = 1.0;
        b.n = {nk};
      } else {
        phys_[k] = trivial_;
      }
    }
    up_.resize(2 * n_pad);
    down_.resize(2 * n_pad);
    state_.move_center(1);
    for (std::size_t v = 2 * n_pad - 1; v >= 2; --v) up_[v] = renormalize(v, 2);
    down_[1] = trivial_;
  }

  void move_to(std::size_t target) {
    while (!detail::is_ancestor_or_self(state_.center(), target)) {
      const std::size_t c = state_.center();
      state_.shift_center(c / 2);
      up_[c] = renormalize(c, 2);
    }
    while (state_.center() != target) {
      const std::size_t c = state_.center();
      const std::size_t shift = detail::node_depth(target) - detail::node_depth(c) - 1;
      const std::size_t child = target >> shift;
      state_.shift_center(child);
      down_[child] = renormalize(c, static_cast<int>(child & 1U));
    }
  }

  LocalOperator local(std::size_t v) const {
    return LocalOperator(op_, {&leg_block(v, 0), &leg_block(v, 1), &down_[v]}, dims_of(state_.node(v)));
  }

 private:
  const Block& leg_block(std::size_t v, int leg) const {
    if (leg == 2) return down_[v];
    if (state_.is_leaf(v)) return leg == 0 ? phys_[v - state_.n_padded()] : trivial_;
    return up_[2 * v + static_cast<std::size_t>(leg)];
  }

  // Blocks of the two legs other than `keep`, merged into the basis of `keep`.
  Block renormalize(std::size_t v, int keep) const {
    const TtnNode& node = state_.node(v);
    const Dims dims = dims_of(node);
    const double* t = node.t.data();
    const int lx = keep == 0 ? 1 : 0;
    const int ly = keep == 2 ? 1 : 2;
    const Block& bx = leg_block(v, lx);
    const Block& by = leg_block(v, ly);

    std::vector<double> ht(node.size(), 0.0);
    std::vector<double> tmp(node.size());
    if (!bx.sites.empty()) apply_leg(bx.h, t, ht.data(), dims, lx, true);
    if (!by.sites.empty()) apply_leg(by.h, t, ht.data(), dims, ly, true);
    const Coupling c = couple(op_, bx, lx, by, ly);
    for (std::size_t i = 0; i < c.n.size(); ++i) {
      apply_leg(c.f[i], t, tmp.data(), dims, c.leg_f, false);
      apply_leg(*c.n[i], tmp.data(), ht.data(), dims, c.leg_n, true);
    }

    Block out;
    out.h = contract_leg(t, ht.data(), dims, keep);
    out.h = 0.5 * (out.h + out.h.transpose());
    for (const auto* b : {&bx, &by}) {
      const int leg = b == &bx ? lx : ly;
      for (std::size_t i = 0; i < b->sites.size(); ++i) {
        apply_leg(b->n[i], t, tmp.data(), dims, leg, false);
        Mat nm = contract_leg(t, tmp.data(), dims, keep);
        out.sites.push_back(b->sites[i]);
        out.n.push_back(0.5 * (nm + nm.transpose()));
      }
    }
    return out;
  }

  const TtnOperator& op_;
  TtnState& state_;
  Block trivial_;
  std::vector<Block> phys_;
  std::vector<Block> up_;    // subtree of v in the basis of v's parent leg
  std::vector<Block> down_;  // complement of v in the same basis
};

std::vector<std::size_t> preorder(const TtnState& s) {
  std::vector<std::size_t> order;
  std::vector<std::size_t> stack{1};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    order.push_back(v);
    if (!s.is_leaf(v)) {
      stack.push_back(2 * v + 1);
      stack.push_back(2 * v);
    }
  }
  return order;
}

}  // namespace

GroundStateReport ground_state_search(const TtnOperator& op, TtnState& state, const SweepOptions& options) {
  require(options.sweeps >= 1, ErrorKind::kInvalidArgument, "at least one sweep is required");
  Environment env(op, state);
  const auto order = preorder(state);
  GroundStateReport report;
  double sweep_start = expectation(op, state);
  for (std::size_t sweep = 0; sweep < options.sweeps; ++sweep) {
    double energy = sweep_start;
    for (const std::size_t v : order) {
      TtnNode& node = state.node(v);
      if (node.size() == 1) continue;
      env.move_to(v);
      const LocalOperator local = env.local(v);
      Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(node.t.data(), static_cast<Eigen::Index>(node.size()));
      Eigenpair ep;
      if (local.dim() <= 64) {
        ep = dense_lowest(local);
      } else {
        ep = davidson_lowest(local, x0, options.eig_tol, options.max_matvecs);
        if (!ep.converged && local.dim() <= 512) ep = dense_lowest(local);
      }
      if (!ep.converged) {
        raise(ErrorKind::kConvergence, "local eigensolver did not converge at node " + std::to_string(v) +
                                           " (depth " + std::to_string(detail::node_depth(v)) + ", dimension " +
                                           std::to_string(local.dim()) + ")");
      }
      Eigen::Map<Eigen::VectorXd>(node.t.data(), static_cast<Eigen::Index>(node.size())) = ep.vector.normalized();
      energy = ep.value;
      report.energies.push_back(energy);
    }
    report.sweeps_done = sweep + 1;
    report.energy = energy;
    const double drop = sweep_start - energy;
    sweep_start = energy;
    if (sweep > 0 && drop <= options.tol * std::max(1.0, std::fabs(energy))) break;
  }
  if (report.energies.empty()) report.energy = sweep_start;
  return report;
}

double expectation(const TtnOperator& op, const TtnState& state) {
  TtnState copy = state;
  Environment env(op, copy);
  const LocalOperator local = env.local(1);
  const auto& t = copy.node(1).t;
  std::vector<double> ht(t.size());
  local.apply(t.data(), ht.data());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += t[i] * ht[i];
    den += t[i] * t[i];
  }
  require(den > 0.0, ErrorKind::kInternalConsistency, "zero tree tensor network state");
  return num / den;
}

}  // namespace tnss
