#pragma once

#include "tnss/cvp_model.hpp"
#include "tnss/lattice.hpp"
#include "tnss/numtheory.hpp"

namespace tnss::test {

struct Built {
  CvpInstance instance;
  ReducedBasis reduced;
  BabaiResult babai;
  DiagonalCvpHamiltonian hamiltonian;
};

inline Built build(std::size_t ell, std::size_t n, double c, std::uint64_t seed) {
  Built b;
  const RsaKey key = generate_rsa_key(ell, seed);
  b.instance = build_cvp_instance(key, PrimeBasis::first(n, false), c, seed * 7 + 1);
  b.reduced = lll_reduce(b.instance.basis);
  b.babai = babai_nearest_plane(b.reduced, b.instance.target);
  b.hamiltonian = build_hamiltonian(b.instance, b.reduced, b.babai);
  return b;
}

inline Bits bits_of(std::uint64_t mask, std::size_t n) {
  Bits x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = static_cast<std::uint8_t>((mask >> j) & 1);
  return x;
}

}  // namespace tnss::test
