// Desk-scale acceptance checks. One PASS/FAIL line per selected criterion;
// the exit status is nonzero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../unit/helpers.hpp"
#include "../unit/ttn_oracle.hpp"
#include "tnss/congruence.hpp"
#include "tnss/driver.hpp"
#include "tnss/error.hpp"
#include "tnss/parallel.hpp"
#include "tnss/rng.hpp"
#include "tnss/sieve.hpp"
#include "tnss/ttn.hpp"

using namespace tnss;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::uint64_t kKeySeed = 2024;

RsaKey key_for(std::size_t ell, std::size_t k) { return generate_rsa_key(ell, derive_seed(kKeySeed, ell, k)); }

// End-to-end exact-enum factoring with the raised ranks.
Verdict criterion1(std::size_t workers) {
  const std::vector<std::pair<std::size_t, std::size_t>> ranks{{10, 4}, {20, 7}, {30, 8}, {40, 10}};
  Verdict v{true, ""};
  for (const auto& [ell, n] : ranks) {
    Hyperparameters hp;
    hp.n = n;
    hp.pi2_policy = Pi2Policy::kTwoPi1Squared;
    hp.mode = SieveMode::kExactEnum;
    hp.budget = std::size_t{1} << n;
    hp.n_cvp = 500;
    hp.workers = workers;
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t ok = 0, cvps = 0;
    for (std::size_t k = 0; k < 20; ++k) {
      hp.seed = derive_seed(kKeySeed, 100 + ell, k);
      const RsaKey key = key_for(ell, k);
      const auto r = run_factor(key, hp);
      if (r.result && r.result->p * r.result->q == key.n) {
        ++ok;
        cvps += r.totals.cvps;
      }
    }
    const double wall = seconds_since(t0);
    const bool pass = ok >= 16 && wall < 1800.0;
    v.pass = v.pass && pass;
    v.detail += fmt("ell=%zu n=%zu %zu/20 mean_cvps=%.1f %.1fs; ", ell, n, ok, ok ? double(cvps) / ok : 0.0, wall);
  }
  return v;
}

// A 100-bit modulus, its factors, and a congruence constructed over them.
Verdict criterion2() {
  const BigInt n("791339171587617359026543582309");
  const BigInt p("428949705601033");
  const BigInt q("1844829734709373");
  const bool product = p * q == n;
  const BigInt a("31415926535897932384626");
  BigInt inv;
  mpz_invert(inv.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
  BigInt t = ((-2 * a) * inv) % q;
  if (t < 0) t += q;
  const BigInt y = (a + p * t) % n;
  const auto f = extract_factors(a % n, y, n);
  const bool recovered = f && std::min(f->first, f->second) == p && std::max(f->first, f->second) == q;
  return {product && recovered, fmt("p*q==N %s, recovered %s", product ? "yes" : "no", recovered ? "yes" : "no")};
}

// Babai-only at sublinear sizes factors nothing.
Verdict criterion3(const std::vector<std::size_t>& ells, std::size_t workers) {
  std::size_t factored = 0, keys = 0;
  std::string detail;
  for (std::size_t ell : ells) {
    Hyperparameters hp;
    hp.pi2_policy = Pi2Policy::kSublinear;
    hp.mode = SieveMode::kBabaiOnly;
    hp.n_cvp = 2000;
    hp.workers = workers;
    std::size_t here = 0;
    for (std::size_t k = 0; k < 10; ++k) {
      hp.seed = derive_seed(kKeySeed, 200 + ell, k);
      const auto r = run_factor(key_for(ell, k), hp);
      ++keys;
      if (r.result) ++here;
    }
    factored += here;
    if (here) detail += fmt("ell=%zu factored %zu; ", ell, here);
  }
  return {factored == 0, fmt("%zu/%zu keys factored over %zu bit lengths %s", factored, keys, ells.size(), detail.c_str())};
}

// Oracle equivalences.
Verdict criterion4() {
  std::string detail;
  bool pass = true;

  // (a) QUBO energy against the direct squared distance.
  std::size_t mismatches = 0;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const std::size_t n = 2 + s % 11;
    const std::size_t ell = 16 + 2 * (s % 12);
    const auto b = test::build(ell, n, 1.0 + 0.5 * static_cast<double>(s % 3), s);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      const Bits x = test::bits_of(m, n);
      if (b.hamiltonian.energy(x) != squared_distance(b.instance.target, b.hamiltonian.config_to_lattice_point(x).point))
        ++mismatches;
    }
  }
  pass = pass && mismatches == 0;
  detail += fmt("(a) %zu mismatches; ", mismatches);

  // (b) TTN amplitudes against a dense contraction.
  double worst = 0.0;
  for (std::size_t n = 2; n <= 16; ++n) {
    const TtnState st = init_ttn(n, 2 + n % 7, 900 + n);
    const auto psi = test::dense_state(st);
    for (std::uint64_t m = 0; m < psi.size(); ++m) worst = std::max(worst, std::abs(amplitude(st, test::bits_of(m, n)) - psi[m]));
  }
  pass = pass && worst <= 1e-8;
  detail += fmt("(b) max |diff| %.2e; ", worst);

  // (c) distinct samples and a full-support sum of one.
  std::size_t dups = 0;
  double worst_sum = 0.0;
  for (std::size_t n = 2; n <= 12; ++n) {
    const TtnState st = init_ttn(n, 4, 300 + n);
    SamplingOptions o;
    o.k = std::size_t{1} << n;
    o.p_stop = 1.0;
    o.seed = n;
    const auto r = sample_distinct(st, o);
    std::set<Bits> seen;
    double sum = 0.0;
    for (const auto& c : r.samples) {
      if (!seen.insert(c.bits).second) ++dups;
      sum += c.probability;
    }
    if (r.samples.size() != o.k) ++dups;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  pass = pass && dups == 0 && worst_sum <= 1e-6;
  detail += fmt("(c) %zu duplicates, max |sum-1| %.2e; ", dups, worst_sum);

  // (d) GF(2) kernels against exhaustive search.
  SplitMix64 rng(44);
  std::size_t bad = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t rows = 1 + rng.below(14);
    const std::size_t cols = 1 + rng.below(14);
    ParityMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rng.below(2) == 1);
    std::size_t brute = 0;
    std::vector<std::uint8_t> tau(cols);
    for (std::uint64_t t = 0; t < (std::uint64_t{1} << cols); ++t) {
      for (std::size_t j = 0; j < cols; ++j) tau[j] = static_cast<std::uint8_t>((t >> j) & 1);
      if (m.annihilates(tau)) ++brute;
    }
    const auto k = kernel_basis(m);
    bool ok = (std::size_t{1} << k.size()) == brute;
    // Independent nonzero kernel vectors: the span has 2^|k| elements.
    std::set<std::uint64_t> span{0};
    for (const auto& v : k) {
      ok = ok && m.annihilates(v);
      std::uint64_t mask = 0;
      for (std::size_t j = 0; j < cols; ++j) mask |= static_cast<std::uint64_t>(v[j]) << j;
      std::set<std::uint64_t> next = span;
      for (std::uint64_t x : span) next.insert(x ^ mask);
      span.swap(next);
    }
    ok = ok && span.size() == brute;
    if (!ok) ++bad;
  }
  pass = pass && bad == 0;
  detail += fmt("(d) %zu/60 kernels wrong", bad);
  return {pass, detail};
}

Hyperparameters rank32_params() {
  Hyperparameters hp;
  hp.n = 32;
  hp.pi2_policy = Pi2Policy::kTwoNEll;
  hp.mode = SieveMode::kTtn;
  hp.m = 8;
  hp.p_stop = 1.0;
  hp.gamma = 3.0;
  hp.seed = 1;
  return hp;
}

SieveOutcome rank32_instance(const RsaKey& key, const Hyperparameters& hp, std::size_t i) {
  const auto sizes = resolve_sizes(hp, key.bits);
  SieveOptions so;
  so.mode = hp.mode;
  so.budget = resolve_budget(hp, key.bits);
  so.ttn.bond_dim = hp.m;
  so.ttn.sweeps = hp.sweeps;
  so.ttn.alpha = hp.alpha;
  so.ttn.p_stop = hp.p_stop;
  return sieve_cvp(key, PrimeBasis::first(sizes.pi1, false), PrimeBasis::first(sizes.pi2, true), instance_params(hp, i),
                   so);
}

// ttn-mode sieving at ell = 70, rank 32, K = 70^3.
Verdict criterion5(std::size_t workers) {
  const RsaKey key = generate_rsa_key(70, 1);
  const Hyperparameters hp = rank32_params();
  std::vector<SieveOutcome> out(10);
  parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = rank32_instance(key, hp, i); });
  std::size_t in_band = 0;
  double min_p = 1.0;
  std::string counts;
  for (const auto& o : out) {
    if (o.rho_contribution >= 200 && o.rho_contribution <= 700) ++in_band;
    if (o.min_sr_probability) min_p = std::min(min_p, *o.min_sr_probability);
    counts += std::to_string(o.rho_contribution) + " ";
  }
  return {in_band >= 7 && min_p <= 1e-5,
          fmt("K=%zu rho_sr = %s(%zu/10 in [200,700]), min sr probability %.2e", resolve_budget(hp, 70), counts.c_str(),
              in_band, min_p)};
}

// Bond dimension 8 vs 16 on one instance.
Verdict criterion6() {
  const RsaKey key = generate_rsa_key(70, 1);
  Hyperparameters hp = rank32_params();
  const double r8 = static_cast<double>(rank32_instance(key, hp, 0).rho_contribution);
  hp.m = 16;
  const double r16 = static_cast<double>(rank32_instance(key, hp, 0).rho_contribution);
  const double rel = std::abs(r16 - r8) / std::max(r8, 1.0);
  return {r8 > 0 && rel < 0.2, fmt("rho_sr m=8: %.0f, m=16: %.0f, relative difference %.3f", r8, r16, rel)};
}

// Cost-model crossover between Babai and TTN terms.
Verdict criterion7() {
  const auto at = [](double gamma) {
    const double n = qubits_needed(1000, 1.0, gamma);
    return cost_model(n, 1000, gamma, default_bond_dim(n));
  };
  const auto c7 = at(7), c9 = at(9);
  return {c7.t1 > c7.t2 && c9.t2 > c9.t1,
          fmt("gamma=7: T1=%.3e T2=%.3e; gamma=9: T1=%.3e T2=%.3e", c7.t1, c7.t2, c9.t1, c9.t2)};
}

// Mean sr-pairs per lattice grows with the rank at fixed ell.
Verdict criterion8(std::size_t workers) {
  std::vector<RsaKey> keys;
  for (std::size_t k = 0; k < 10; ++k) keys.push_back(key_for(30, k));
  std::vector<AsrplStats> stats;
  std::string detail;
  for (std::size_t n : {8u, 10u, 12u}) {
    AsrplOptions ao;
    ao.n = n;
    ao.pi2 = 2 * n * n;
    ao.n_cvp = 50;
    ao.sieve.mode = SieveMode::kExactEnum;
    ao.fixed_budget = std::size_t{1} << n;
    ao.master_seed = derive_seed(kKeySeed, 300, n);
    ao.workers = workers;
    stats.push_back(estimate_asrpl(keys, ao));
    detail += fmt("n=%zu mean %.3f se %.3f; ", n, stats.back().mean, stats.back().std_error);
  }
  bool pass = true;
  for (std::size_t i = 1; i < stats.size(); ++i) {
    const double pooled = std::hypot(stats[i - 1].std_error, stats[i].std_error);
    if (stats[i].mean < stats[i - 1].mean - pooled) pass = false;
  }
  return {pass, detail};
}

std::vector<std::size_t> ell_range(std::size_t lo, std::size_t hi, std::size_t step) {
  std::vector<std::size_t> out;
  for (std::size_t e = lo; e <= hi; e += step) out.push_back(e);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tnss acceptance checks"};
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8};
  std::size_t workers = 1;
  std::size_t ell_step = 1;
  app.add_option("--criteria", criteria, "criteria to run")->delimiter(',');
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--sublinear-ell-step", ell_step, "bit-length step for criterion 3")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::function<Verdict()>> checks{
      {1, [&] { return criterion1(workers); }},
      {2, [] { return criterion2(); }},
      {3, [&] { return criterion3(ell_range(10, 60, ell_step), workers); }},
      {4, [] { return criterion4(); }},
      {5, [&] { return criterion5(workers); }},
      {6, [] { return criterion6(); }},
      {7, [] { return criterion7(); }},
      {8, [&] { return criterion8(workers); }},
  };

  int failed = 0;
  for (int c : criteria) {
    const auto it = checks.find(c);
    if (it == checks.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 1;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = it->second();
    } catch (const Error& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d: %s  %s [%.1fs]\n", c, v.pass ? "PASS" : "FAIL", v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
