#include <algorithm>
#include <bit>
#include <cmath>

#include "tnss/error.hpp"
#include "tnss/rng.hpp"
#include "tnss/ttn.hpp"
#include "ttn_internal.hpp"

namespace tnss {

using detail::Mat;

namespace {

constexpr std::uint32_t kNone = 0xffffffffU;

struct TrieNode {
  double mass = 0.0;     // Born probability of the prefix
  double removed = 0.0;  // mass of emitted strings below this prefix
  std::uint32_t child[2] = {kNone, kNone};
  bool exhausted = false;
};

// Marginals of a root-canonical state along one prefix. E[v] is the reduced
// density matrix on v's parent leg with the prefix bits to the left of v
// projected out and everything to the right traced; phi[v] is the contracted
// vector of a subtree whose leaves are all fixed by the prefix.
class Marginals {
 public:
  explicit Marginals(const TtnState& s)
      : s_(s), e_(2 * s.n_padded()), phi_(2 * s.n_padded()), e_ok_(2 * s.n_padded(), false),
        phi_ok_(2 * s.n_padded(), false), bits_(s.n(), 0) {
    const std::size_t nodes = 2 * s.n_padded();
    first_.resize(nodes);
    last_.resize(nodes);
    for (std::size_t v = 1; v < nodes; ++v) {
      const std::size_t shift = s.depth() - detail::node_depth(v);
      first_[v] = (v << shift) - s.n_padded();
      last_[v] = first_[v] + (std::size_t{1} << shift) - 1;
    }
  }

  // Makes the cache consistent with `prefix` (length k) and returns the joint
  // probabilities of prefix+0 and prefix+1.
  std::array<double, 2> next(std::span<const std::uint8_t> prefix) {
    const std::size_t k = prefix.size();
    std::size_t j = 0;
    const std::size_t common = std::min(k, known_);
    while (j < common && bits_[j] == prefix[j]) ++j;
    if (j < known_) invalidate(j);
    std::copy(prefix.begin(), prefix.end(), bits_.begin());
    known_ = k;

    const std::size_t leaf = s_.n_padded() + k;
    const Mat& e = env(leaf);
    const TtnNode& a = s_.node(leaf);
    std::array<double, 2> p{0.0, 0.0};
    for (std::size_t b = 0; b < a.d0; ++b) {
      double acc = 0.0;
      for (std::size_t x = 0; x < a.dp; ++x) {
        double row = 0.0;
        for (std::size_t y = 0; y < a.dp; ++y)
          row += e(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) * a.at(b, 0, y);
        acc += a.at(b, 0, x) * row;
      }
      p[b] = std::max(acc, 0.0);
    }
    return p;
  }

 private:
  void invalidate(std::size_t j) {
    for (std::size_t v = 1; v < e_ok_.size(); ++v) {
      if (first_[v] > j) e_ok_[v] = false;
      if (last_[v] >= j) phi_ok_[v] = false;
    }
  }

  const Mat& env(std::size_t v) {
    if (e_ok_[v]) return e_[v];
    if (v == 1) {
      e_[v] = Mat::Ones(1, 1);
    } else {
      const std::size_t u = v / 2;
      const TtnNode& t = s_.node(u);
      const Mat& eu = env(u);
      const auto d0 = static_cast<Eigen::Index>(t.d0);
      const auto d1 = static_cast<Eigen::Index>(t.d1);
      const auto dp = static_cast<Eigen::Index>(t.dp);
      detail::ConstRowMap tm(t.t.data(), d0 * d1, dp);
      if ((v & 1U) == 0) {
        // Right sibling untouched: isometric, traces to the identity.
        const detail::RowMat te = tm * eu;
        Mat r = Mat::Zero(d0, d0);
        for (Eigen::Index a = 0; a < d0; ++a)
          for (Eigen::Index a2 = 0; a2 < d0; ++a2)
            r(a, a2) = tm.middleRows(a * d1, d1).cwiseProduct(te.middleRows(a2 * d1, d1)).sum();
        e_[v] = r;
      } else {
        const std::vector<double>& left = phi(2 * u);
        detail::RowMat w = detail::RowMat::Zero(d1, dp);
        for (Eigen::Index a = 0; a < d0; ++a)
          if (left[static_cast<std::size_t>(a)] != 0.0) w += left[static_cast<std::size_t>(a)] * tm.middleRows(a * d1, d1);
        e_[v] = w * eu * w.transpose();
      }
    }
    e_ok_[v] = true;
    return e_[v];
  }

  const std::vector<double>& phi(std::size_t v) {
    if (phi_ok_[v]) return phi_[v];
    const TtnNode& t = s_.node(v);
    std::vector<double> out(t.dp, 0.0);
    if (s_.is_leaf(v)) {
      const std::size_t k = v - s_.n_padded();
      const std::size_t b = k < s_.n() ? bits_[k] : 0;
      for (std::size_t p = 0; p < t.dp; ++p) out[p] = t.at(b, 0, p);
    } else {
      const auto& l = phi(2 * v);
      const auto& r = phi(2 * v + 1);
      for (std::size_t a = 0; a < t.d0; ++a) {
        if (l[a] == 0.0) continue;
        for (std::size_t b = 0; b < t.d1; ++b) {
          const double w = l[a] * r[b];
          if (w == 0.0) continue;
          for (std::size_t p = 0; p < t.dp; ++p) out[p] += w * t.at(a, b, p);
        }
      }
    }
    phi_[v] = std::move(out);
    phi_ok_[v] = true;
    return phi_[v];
  }

  const TtnState& s_;
  std::vector<Mat> e_;
  std::vector<std::vector<double>> phi_;
  std::vector<bool> e_ok_;
  std::vector<bool> phi_ok_;
  std::vector<std::size_t> first_;
  std::vector<std::size_t> last_;
  Bits bits_;
  std::size_t known_ = 0;
};

}  // namespace

SamplingReport sample_distinct(const TtnState& state, const SamplingOptions& options) {
  const std::size_t n = state.n();
  require(options.k >= 1, ErrorKind::kInvalidArgument, "sample count must be positive");
  require(n >= 64 || options.k <= (std::uint64_t{1} << n), ErrorKind::kCapacity,
          "requested more distinct strings than the Hilbert space holds");

  TtnState s = state;
  s.move_center(1);
  s.normalize();
  Marginals marg(s);
  SplitMix64 rng(options.seed);

  std::vector<TrieNode> trie(1);
  trie[0].mass = 1.0;
  SamplingReport report;
  Bits prefix;
  prefix.reserve(n);
  std::vector<std::uint32_t> path;
  path.reserve(n + 1);

  while (report.samples.size() < options.k && report.accumulated < options.p_stop && !trie[0].exhausted) {
    prefix.clear();
    path.assign(1, 0);
    std::uint32_t cur = 0;
    for (std::size_t depth = 0; depth < n; ++depth) {
      if (trie[cur].child[0] == kNone) {
        const auto p = marg.next(prefix);
        for (int b = 0; b < 2; ++b) {
          TrieNode c;
          c.mass = p[static_cast<std::size_t>(b)];
          c.exhausted = !(c.mass > 0.0);
          trie[cur].child[b] = static_cast<std::uint32_t>(trie.size());
          trie.push_back(c);
        }
        require(trie.size() < kNone, ErrorKind::kCapacity, "sampling trie exceeds 2^32 nodes");
      }
      const TrieNode& c0 = trie[trie[cur].child[0]];
      const TrieNode& c1 = trie[trie[cur].child[1]];
      const double w0 = c0.exhausted ? 0.0 : std::max(c0.mass - c0.removed, 0.0);
      const double w1 = c1.exhausted ? 0.0 : std::max(c1.mass - c1.removed, 0.0);
      int b;
      if (c0.exhausted) {
        b = 1;
      } else if (c1.exhausted) {
        b = 0;
      } else if (w0 + w1 <= 0.0) {
        b = c1.mass > c0.mass ? 1 : 0;  // removed mass has eaten both up to rounding
      } else if (options.order == SamplingOrder::kGreedy) {
        b = w1 > w0 ? 1 : 0;
      } else {
        b = rng.uniform() * (w0 + w1) < w0 ? 0 : 1;
      }
      prefix.push_back(static_cast<std::uint8_t>(b));
      cur = trie[cur].child[b];
      path.push_back(cur);
    }

    const double prob = trie[cur].mass;
    report.samples.push_back({prefix, prob, BigInt(0)});
    report.accumulated += prob;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      TrieNode& node = trie[*it];
      node.removed += prob;
      if (it == path.rbegin()) {
        node.exhausted = true;
      } else {
        node.exhausted = trie[node.child[0]].exhausted && trie[node.child[1]].exhausted;
      }
    }
  }
  report.support_exhausted = trie[0].exhausted;
  report.trie_nodes = trie.size();
  return report;
}

}  // namespace tnss
