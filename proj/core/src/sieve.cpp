#include "tnss/sieve.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "tnss/error.hpp"
#include "tnss/lattice.hpp"
#include "tnss/parallel.hpp"
#include "tnss/rng.hpp"

namespace tnss {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BigInt prime_power(std::uint64_t p, std::uint64_t e) {
  BigInt out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
  return out;
}

// The u half of e is already factored over P1, a prefix of P2.
std::optional<SrPair> relation_with_known_u(BigInt u, BigInt v, MultiplicityVector e_u, const BigInt& n,
                                            const PrimeBasis& p2) {
  BigInt w = u - v * n;
  if (w == 0) raise(ErrorKind::kInternalConsistency, "u - vN vanished");
  auto e_w = smooth_decompose(w, p2.with_sign(true));
  if (!e_w) return std::nullopt;
  SrPair pair;
  pair.e_tilde.sign = e_w->sign;
  pair.e_tilde.exponents.resize(p2.size());
  for (std::size_t j = 0; j < p2.size(); ++j) pair.e_tilde.exponents[j] = e_w->exponents[j] - e_u.exponents[j];
  pair.u = std::move(u);
  pair.v = std::move(v);
  pair.w = std::move(w);
  pair.e_u = std::move(e_u);
  pair.e_w = std::move(*e_w);
  return pair;
}

std::string bit_string(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j]) s[j] = '1';
  return s;
}

struct Candidate {
  Bits bits;
  BigInt energy;
  std::optional<double> probability;
};

}  // namespace

std::pair<BigInt, BigInt> pair_from_coeffs(std::span<const BigInt> e, const PrimeBasis& p1) {
  require(e.size() == p1.size(), ErrorKind::kInvalidArgument, "coefficient vector length differs from basis size");
  BigInt u = 1;
  BigInt v = 1;
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (e[j] == 0) continue;
    require(mpz_fits_ulong_p(BigInt(abs(e[j])).get_mpz_t()) != 0, ErrorKind::kCapacity, "exponent too large");
    const auto mag = BigInt(abs(e[j])).get_ui();
    if (e[j] > 0) u *= prime_power(p1[j], mag);
    else v *= prime_power(p1[j], mag);
  }
  return {u, v};
}

std::optional<SrPair> check_smooth_relation(const BigInt& u, const BigInt& v, const BigInt& n, const PrimeBasis& p2) {
  require(u >= 1 && v >= 1, ErrorKind::kInvalidArgument, "u and v must be positive");
  if (u - v * n == 0) raise(ErrorKind::kInternalConsistency, "u - vN vanished");
  auto e_u = smooth_decompose(u, p2.with_sign(false));
  if (!e_u) return std::nullopt;
  return relation_with_known_u(u, v, std::move(*e_u), n, p2);
}

const char* to_string(SieveMode mode) noexcept {
  switch (mode) {
    case SieveMode::kBabaiOnly: return "babai-only";
    case SieveMode::kExactEnum: return "exact-enum";
    case SieveMode::kTtn: return "ttn";
  }
  return "unknown";
}

SieveMode parse_sieve_mode(const std::string& name) {
  if (name == "babai-only") return SieveMode::kBabaiOnly;
  if (name == "exact-enum") return SieveMode::kExactEnum;
  if (name == "ttn") return SieveMode::kTtn;
  raise(ErrorKind::kInvalidArgument, "unknown sieve mode '" + name + "'");
}

std::size_t default_budget(std::size_t ell, double gamma) {
  require(ell >= 1 && gamma >= 0.0, ErrorKind::kInvalidArgument, "budget needs ell >= 1 and gamma >= 0");
  const double k = std::ceil(std::pow(static_cast<double>(ell), gamma) - 1e-9);
  require(k < 1e18, ErrorKind::kCapacity, "sample budget overflows");
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

SieveOutcome sieve_cvp(const RsaKey& key, const PrimeBasis& p1, const PrimeBasis& p2, const InstanceParams& instance,
                       const SieveOptions& options) {
  require(p2.extends(p1), ErrorKind::kInvalidArgument, "smoothness basis must extend the factoring basis");
  require(options.budget >= 1, ErrorKind::kInvalidArgument, "budget must be positive");
  const std::size_t n = p1.size();
  SieveOutcome out;

  auto t0 = std::chrono::steady_clock::now();
  const CvpInstance cvp = build_cvp_instance(key, p1, instance.precision, instance.seed);
  const ReducedBasis reduced = lll_reduce(cvp.basis, options.delta);
  const BabaiResult babai = babai_nearest_plane(reduced, cvp.target);
  const DiagonalCvpHamiltonian h = build_hamiltonian(cvp, reduced, babai);
  out.babai_energy = h.qubo.constant();
  out.times.lattice_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<Candidate> candidates;
  switch (options.mode) {
    case SieveMode::kBabaiOnly:
      candidates.push_back({Bits(n, 0), h.qubo.constant(), std::nullopt});
      break;
    case SieveMode::kExactEnum: {
      require(n <= kMaxEnumQubits, ErrorKind::kCapacity, "exact enumeration limited to 26 qubits");
      const std::size_t k = std::min<std::size_t>(options.budget, std::size_t{1} << n);
      for (auto& c : exact_low_energy_enum(h, k)) candidates.push_back({std::move(c.bits), std::move(c.energy), std::nullopt});
      break;
    }
    case SieveMode::kTtn: {
      const auto spec = make_perturbation(h.qubo, options.ttn.alpha, derive_seed(instance.seed, 11, 0));
      const TtnOperator op = perturb(h, spec);
      TtnState state = init_ttn(n, options.ttn.bond_dim, derive_seed(instance.seed, 12, 0));
      SweepOptions sweep;
      sweep.sweeps = options.ttn.sweeps;
      out.ttn_energy = ground_state_search(op, state, sweep).energy;
      SamplingOptions so;
      so.k = n < 64 ? std::min<std::size_t>(options.budget, std::size_t{1} << n) : options.budget;
      so.p_stop = options.ttn.p_stop;
      so.seed = derive_seed(instance.seed, 13, 0);
      so.order = options.ttn.order;
      for (auto& s : sample_distinct(state, so).samples) {
        BigInt e = h.qubo.energy(s.bits);
        candidates.push_back({std::move(s.bits), std::move(e), s.probability});
      }
      break;
    }
  }
  out.times.search_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const CoefficientMap cmap(h);
  std::unordered_set<std::string> seen;
  for (const auto& cand : candidates) {
    ++out.counts.sampled;
    std::vector<BigInt> e;
    if (auto e64 = cmap.coeffs64(cand.bits)) {
      e.assign(e64->begin(), e64->end());
    } else {
      e = cmap.coeffs(cand.bits);
    }
    auto [u, v] = pair_from_coeffs(e, p1);

    ScatterRecord rec;
    rec.is_sr = false;
    if (u != 1) {
      const std::string key_uv = u.get_str() + ":" + v.get_str();
      if (seen.insert(key_uv).second) {
        ++out.counts.candidates;
        MultiplicityVector e_u;
        e_u.exponents.assign(p2.size(), 0);
        for (std::size_t j = 0; j < n; ++j)
          if (e[j] > 0) e_u.exponents[j] = e[j].get_si();
        const BigInt w = u - v * key.n;
        rec.bits_w = w == 0 ? 0 : bit_length(abs(w));
        if (auto pair = relation_with_known_u(u, v, std::move(e_u), key.n, p2)) {
          pair->source = SrSource{instance.instance_id, cand.bits, cand.energy, std::sqrt(cand.energy.get_d())};
          out.sr_pairs.push_back(std::move(*pair));
          ++out.counts.sr_hits;
          rec.is_sr = true;
          if (cand.probability && (!out.min_sr_probability || *cand.probability < *out.min_sr_probability))
            out.min_sr_probability = cand.probability;
        }
      }
    } else {
      rec.bits_w = bit_length(abs(BigInt(u - v * key.n)));
    }
    if (options.record_scatter) {
      rec.instance_id = instance.instance_id;
      rec.bitstring = bit_string(cand.bits);
      rec.energy = cand.energy;
      rec.distance = std::sqrt(cand.energy.get_d());
      rec.probability = cand.probability;
      out.scatter.push_back(std::move(rec));
    }
  }
  out.rho_contribution = out.sr_pairs.size();
  out.times.test_s = seconds_since(t0);
  return out;
}

void write_scatter_csv(std::ostream& os, std::span<const ScatterRecord> records, bool header) {
  if (header) os << "instance_id,bitstring,energy,distance,bits_w,is_sr,probability\n";
  char buf[64];
  for (const auto& r : records) {
    os << r.instance_id << ',' << r.bitstring << ',' << r.energy.get_str() << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.distance);
    os << buf << ',' << r.bits_w << ',' << (r.is_sr ? 1 : 0) << ',';
    if (r.probability) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.probability);
      os << buf;
    }
    os << '\n';
  }
}

AsrplStats estimate_asrpl(std::span<const RsaKey> keys, const AsrplOptions& options) {
  require(!keys.empty(), ErrorKind::kInvalidArgument, "no keys given");
  require(options.n >= 1 && options.pi2 >= options.n, ErrorKind::kInvalidArgument, "need 1 <= n <= pi2");
  require(options.n_cvp >= 1, ErrorKind::kInvalidArgument, "n_cvp must be positive");
  require(!options.c_schedule.empty(), ErrorKind::kInvalidArgument, "empty precision schedule");
  const std::size_t ell = keys.front().bits;
  for (const auto& k : keys) require(k.bits == ell, ErrorKind::kInvalidArgument, "keys must share one bit length");

  const PrimeBasis p1 = PrimeBasis::first(options.n, false);
  const PrimeBasis p2 = PrimeBasis::first(options.pi2, true);
  SieveOptions so = options.sieve;
  so.budget = options.fixed_budget ? *options.fixed_budget : default_budget(ell, options.gamma);
  so.record_scatter = false;

  const std::size_t jobs = keys.size() * options.n_cvp;
  std::vector<double> counts(jobs, 0.0);
  parallel_for(jobs, options.workers, [&](std::size_t job) {
    const std::size_t ki = job / options.n_cvp;
    const std::size_t i = job % options.n_cvp;
    InstanceParams ip;
    ip.precision = options.c_schedule[i % options.c_schedule.size()];
    ip.seed = derive_seed(options.master_seed, ki, i);
    ip.instance_id = i;
    counts[job] = static_cast<double>(sieve_cvp(keys[ki], p1, p2, ip, so).rho_contribution);
  });

  AsrplStats st;
  st.per_key.assign(keys.size(), 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < jobs; ++j) {
    st.per_key[j / options.n_cvp] += counts[j] / static_cast<double>(options.n_cvp);
    sum += counts[j];
  }
  st.mean = sum / static_cast<double>(jobs);
  double var_keys = 0.0;
  for (double v : st.per_key) var_keys += (v - st.mean) * (v - st.mean);
  st.stddev = keys.size() > 1 ? std::sqrt(var_keys / static_cast<double>(keys.size() - 1)) : 0.0;
  double var_all = 0.0;
  for (double c : counts) var_all += (c - st.mean) * (c - st.mean);
  st.std_error = jobs > 1 ? std::sqrt(var_all / static_cast<double>(jobs - 1) / static_cast<double>(jobs)) : 0.0;
  st.rescaled = st.mean / std::pow(static_cast<double>(ell), options.gamma);
  return st;
}

}  // namespace tnss
