#pragma once

#include <cstdint>
#include <string>

#include "tnss/cvp_model.hpp"
#include "tnss/numtheory.hpp"

namespace tnss {

struct SrSource {
  std::uint64_t instance_id = 0;
  Bits bits;
  BigInt energy;
  double distance = 0.0;
};

/// Smooth-relation pair (u, w = u - vN): u, v and w all factor over the
/// smoothness basis. e_u and e_w index the same basis; e_tilde = e_w - e_u
/// carries w's sign bit.
struct SrPair {
  BigInt u;
  BigInt v;
  BigInt w;
  MultiplicityVector e_u;
  MultiplicityVector e_w;
  MultiplicityVector e_tilde;
  SrSource source;

  /// Dedup key "u:v".
  std::string key() const { return u.get_str() + ":" + v.get_str(); }
};

}  // namespace tnss
