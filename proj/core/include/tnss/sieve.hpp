#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tnss/sr_pair.hpp"
#include "tnss/ttn.hpp"

namespace tnss {

/// u = prod_{e_j >= 0} p_j^e_j, v = prod_{e_j < 0} p_j^-e_j.
std::pair<BigInt, BigInt> pair_from_coeffs(std::span<const BigInt> e, const PrimeBasis& p1);

/// SrPair for (u, v) when u and w = u - vN both factor over P2 (w with its
/// sign). Throws kInvalidArgument for u < 1 or v < 1 and kInternalConsistency
/// when w = 0.
std::optional<SrPair> check_smooth_relation(const BigInt& u, const BigInt& v, const BigInt& n, const PrimeBasis& p2);

enum class SieveMode { kBabaiOnly, kExactEnum, kTtn };

const char* to_string(SieveMode mode) noexcept;
SieveMode parse_sieve_mode(const std::string& name);

struct TtnParams {
  std::size_t bond_dim = 8;
  std::size_t sweeps = 2;
  double alpha = 0.1;
  double p_stop = 0.999;
  SamplingOrder order = SamplingOrder::kProportional;
};

struct SieveOptions {
  SieveMode mode = SieveMode::kExactEnum;
  std::size_t budget = 1;  // configurations tested per CVP
  double delta = 0.99;
  TtnParams ttn;
  bool record_scatter = false;
};

struct InstanceParams {
  double precision = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t instance_id = 0;
};

struct ScatterRecord {
  std::uint64_t instance_id = 0;
  std::string bitstring;
  BigInt energy;
  double distance = 0.0;
  std::size_t bits_w = 0;
  bool is_sr = false;
  std::optional<double> probability;
};

struct SieveCounts {
  std::size_t sampled = 0;
  std::size_t candidates = 0;
  std::size_t sr_hits = 0;
};

struct StageTimes {
  double lattice_s = 0.0;  // instance, LLL, Babai, Hamiltonian
  double search_s = 0.0;   // enumeration or TTN sweeps and sampling
  double test_s = 0.0;     // smoothness tests
};

struct SieveOutcome {
  std::vector<SrPair> sr_pairs;
  SieveCounts counts;
  std::vector<ScatterRecord> scatter;
  std::size_t rho_contribution = 0;
  std::optional<double> min_sr_probability;
  std::optional<double> ttn_energy;
  BigInt babai_energy;
  StageTimes times;
};

/// ceil(ell^gamma).
std::size_t default_budget(std::size_t ell, double gamma);

/// One CVP: build, reduce, Babai, then test Babai's point (babai-only), the
/// `budget` lowest configurations (exact-enum), or `budget` distinct TTN
/// samples (ttn). Pairs with u = 1 are skipped; sr-pairs are unique by (u, v).
SieveOutcome sieve_cvp(const RsaKey& key, const PrimeBasis& p1, const PrimeBasis& p2, const InstanceParams& instance,
                       const SieveOptions& options);

/// `instance_id,bitstring,energy,distance,bits_w,is_sr,probability`; the
/// probability column is empty outside ttn mode.
void write_scatter_csv(std::ostream& os, std::span<const ScatterRecord> records, bool header = true);

struct AsrplOptions {
  std::size_t n = 0;
  std::size_t pi2 = 0;
  double gamma = 1.0;
  std::size_t n_cvp = 50;
  std::vector<double> c_schedule{1.0, 1.5, 2.0};
  SieveOptions sieve;  // budget is overwritten with ceil(ell^gamma) unless fixed_budget
  std::optional<std::size_t> fixed_budget;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
};

struct AsrplStats {
  double mean = 0.0;
  double stddev = 0.0;    // across keys
  double std_error = 0.0; // of the mean over all lattices
  double rescaled = 0.0;  // mean / ell^gamma
  std::vector<double> per_key;
};

/// Mean sr-pair count per lattice over n_cvp instances for each key.
AsrplStats estimate_asrpl(std::span<const RsaKey> keys, const AsrplOptions& options);

}  // namespace tnss
