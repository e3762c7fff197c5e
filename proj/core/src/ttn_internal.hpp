#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

#include "tnss/ttn.hpp"

namespace tnss::detail {

using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

struct Dims {
  std::array<std::size_t, 3> d{1, 1, 1};
  std::size_t size() const noexcept { return d[0] * d[1] * d[2]; }
};

inline Dims dims_of(const TtnNode& node) { return Dims{{node.d0, node.d1, node.dp}}; }

// y (+)= op applied to leg `leg` of x. x and y must not alias.
inline void apply_leg(const Mat& op, const double* x, double* y, const Dims& s, int leg, bool accumulate) {
  const auto d0 = static_cast<Eigen::Index>(s.d[0]);
  const auto d1 = static_cast<Eigen::Index>(s.d[1]);
  const auto dp = static_cast<Eigen::Index>(s.d[2]);
  if (leg == 0) {
    ConstRowMap xm(x, d0, d1 * dp);
    RowMap ym(y, d0, d1 * dp);
    if (accumulate) ym.noalias() += op * xm;
    else ym.noalias() = op * xm;
  } else if (leg == 2) {
    ConstRowMap xm(x, d0 * d1, dp);
    RowMap ym(y, d0 * d1, dp);
    if (accumulate) ym.noalias() += xm * op.transpose();
    else ym.noalias() = xm * op.transpose();
  } else {
    for (Eigen::Index a = 0; a < d0; ++a) {
      ConstRowMap xm(x + a * d1 * dp, d1, dp);
      RowMap ym(y + a * d1 * dp, d1, dp);
      if (accumulate) ym.noalias() += op * xm;
      else ym.noalias() = op * xm;
    }
  }
}

// r[i, i'] = sum over the other legs of x[.. i ..] * y[.. i' ..].
inline Mat contract_leg(const double* x, const double* y, const Dims& s, int leg) {
  const auto d0 = static_cast<Eigen::Index>(s.d[0]);
  const auto d1 = static_cast<Eigen::Index>(s.d[1]);
  const auto dp = static_cast<Eigen::Index>(s.d[2]);
  if (leg == 0) {
    ConstRowMap xm(x, d0, d1 * dp);
    ConstRowMap ym(y, d0, d1 * dp);
    return xm * ym.transpose();
  }
  if (leg == 2) {
    ConstRowMap xm(x, d0 * d1, dp);
    ConstRowMap ym(y, d0 * d1, dp);
    return xm.transpose() * ym;
  }
  Mat r = Mat::Zero(d1, d1);
  for (Eigen::Index a = 0; a < d0; ++a) {
    ConstRowMap xm(x + a * d1 * dp, d1, dp);
    ConstRowMap ym(y + a * d1 * dp, d1, dp);
    r.noalias() += xm * ym.transpose();
  }
  return r;
}

inline std::size_t node_depth(std::size_t v) noexcept {
  std::size_t d = 0;
  while (v > 1) {
    v >>= 1;
    ++d;
  }
  return d;
}

inline bool is_ancestor_or_self(std::size_t a, std::size_t v) noexcept {
  while (v > a) v >>= 1;
  return v == a;
}

}  // namespace tnss::detail
