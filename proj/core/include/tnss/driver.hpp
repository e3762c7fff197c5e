#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnss/congruence.hpp"
#include "tnss/cost_model.hpp"
#include "tnss/hyperparameters.hpp"

namespace tnss {

struct RunTotals {
  std::size_t cvps = 0;
  std::size_t sampled = 0;
  std::size_t candidates = 0;
  std::size_t sr_hits = 0;      // per-CVP sr-pairs, summed
  std::size_t pool_size = 0;    // globally unique sr-pairs
  std::size_t process_attempts = 0;
  double wall_s = 0.0;
  double lattice_s = 0.0;
  double search_s = 0.0;
  double test_s = 0.0;
  double process_s = 0.0;

  double rho() const { return cvps == 0 ? 0.0 : static_cast<double>(sr_hits) / static_cast<double>(cvps); }
};

struct FactorReport {
  std::optional<FactorResult> result;
  RunTotals totals;
  BasisSizes sizes;
  std::size_t budget = 0;
};

/// Seed and precision of CVP number i of a run.
InstanceParams instance_params(const Hyperparameters& hp, std::size_t i);

/// Sieves CVP instances in index order, pooling sr-pairs globally by (u, v)
/// and running GF(2) processing each time the pool has grown by the stride.
/// Stops at the first verified factorization.
/// When `log` is given, writes one JSON line per CVP and a closing summary.
FactorReport run_factor(const RsaKey& key, const Hyperparameters& hp, std::ostream* log = nullptr);

enum class CompareSeries {
  kBabaiBeyond,     // babai-only, rank raised from the sublinear value, pi2 = 2 pi1^2
  kEnumSublinear,   // exact-enum at the sublinear sizes
  kEnumBeyond,      // exact-enum at the raised ranks, pi2 = 2 pi1^2
};

const char* to_string(CompareSeries s) noexcept;

struct CompareOptions {
  std::vector<std::size_t> ells;
  std::vector<CompareSeries> series{CompareSeries::kBabaiBeyond, CompareSeries::kEnumSublinear,
                                    CompareSeries::kEnumBeyond};
  Hyperparameters base;        // n_cvp, seed, c schedule, workers
  std::size_t keys_per_ell = 1;
  std::size_t max_rank_increase = 16;
  std::uint64_t key_seed = 0;
};

struct CompareRow {
  std::size_t ell = 0;
  CompareSeries series = CompareSeries::kBabaiBeyond;
  std::size_t n = 0;
  std::size_t pi2 = 0;
  std::size_t keys = 0;
  std::size_t factored = 0;
  double mean_n_cvp = 0.0;  // over factored keys
  double mean_rho = 0.0;    // sr-pairs per CVP over all runs
};

/// For each ell and series, factors `keys_per_ell` keys. Raised-rank series
/// start at the sublinear rank and add 1 until every key factors; the
/// exact-enum raised series starts from the rank the Babai series settled on.
std::vector<CompareRow> experiment_compare(const CompareOptions& options);

void write_compare_csv(std::ostream& os, std::span<const CompareRow> rows);

/// Cost sweep: for ell in [lo, hi], n = qubits_needed(ell, rho,
/// gamma), m = 6.6 n^0.42, then T1, T2, T3, T.
void write_cost_csv(std::ostream& os, std::size_t ell_lo, std::size_t ell_hi, std::size_t step, double gamma,
                    double rho, const ScalingParams& sp = {});

}  // namespace tnss
