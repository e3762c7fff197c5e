#include "tnss/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tnss/error.hpp"
#include "tnss/parallel.hpp"
#include "tnss/rng.hpp"

namespace tnss {

namespace {

constexpr std::uint64_t kInstanceStream = 0;

SieveOptions sieve_options(const Hyperparameters& hp, const BasisSizes& sizes, std::size_t ell) {
  SieveOptions so;
  so.mode = hp.mode;
  so.budget = resolve_budget(hp, ell);
  if (hp.mode == SieveMode::kExactEnum && sizes.pi1 < 63)
    so.budget = std::min<std::size_t>(so.budget, std::size_t{1} << sizes.pi1);
  so.delta = hp.delta;
  so.ttn.bond_dim = hp.m;
  so.ttn.sweeps = hp.sweeps;
  so.ttn.alpha = hp.alpha;
  so.ttn.p_stop = hp.p_stop;
  return so;
}

}  // namespace

InstanceParams instance_params(const Hyperparameters& hp, std::size_t i) {
  require(!hp.c_schedule.empty(), ErrorKind::kInvalidArgument, "empty precision schedule");
  InstanceParams ip;
  ip.precision = hp.c_schedule[i % hp.c_schedule.size()];
  ip.seed = derive_seed(hp.seed, kInstanceStream, i);
  ip.instance_id = i;
  return ip;
}

FactorReport run_factor(const RsaKey& key, const Hyperparameters& hp, std::ostream* log) {
  const auto t_start = std::chrono::steady_clock::now();
  validate(hp, key.bits);
  FactorReport report;
  report.sizes = resolve_sizes(hp, key.bits);
  const PrimeBasis p1 = PrimeBasis::first(report.sizes.pi1, false);
  const PrimeBasis p2 = PrimeBasis::first(report.sizes.pi2, true);
  const SieveOptions so = sieve_options(hp, report.sizes, key.bits);
  report.budget = so.budget;
  const std::size_t stride =
      hp.process_stride > 0 ? hp.process_stride : std::max<std::size_t>(32, report.sizes.pi2 / 100);
  ProcessOptions po;
  po.combination_budget = hp.combination_budget;

  std::vector<SrPair> pool;
  std::unordered_set<std::string> pool_keys;
  std::size_t fresh = 0;
  RunTotals& tot = report.totals;

  auto attempt = [&] {
    const auto t0 = std::chrono::steady_clock::now();
    ++tot.process_attempts;
    auto r = process(pool, key.n, p2, po);
    tot.process_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fresh = 0;
    if (!r) return false;
    if (r->p * r->q != key.n || r->p <= 1 || r->q <= 1)
      raise(ErrorKind::kInternalConsistency, "processing returned factors that do not multiply to N");
    report.result = std::move(r);
    return true;
  };

  const std::size_t workers = std::max<std::size_t>(1, hp.workers);
  bool done = false;
  for (std::size_t start = 0; start < hp.n_cvp && !done; start += workers) {
    const std::size_t batch = std::min(workers, hp.n_cvp - start);
    std::vector<SieveOutcome> outcomes(batch);
    parallel_for(batch, workers, [&](std::size_t j) {
      outcomes[j] = sieve_cvp(key, p1, p2, instance_params(hp, start + j), so);
    });
    for (std::size_t j = 0; j < batch && !done; ++j) {
      auto& out = outcomes[j];
      const std::size_t i = start + j;
      ++tot.cvps;
      tot.sampled += out.counts.sampled;
      tot.candidates += out.counts.candidates;
      tot.sr_hits += out.counts.sr_hits;
      tot.lattice_s += out.times.lattice_s;
      tot.search_s += out.times.search_s;
      tot.test_s += out.times.test_s;
      for (auto& pair : out.sr_pairs) {
        if (pool_keys.insert(pair.key()).second) {
          pool.push_back(std::move(pair));
          ++fresh;
        }
      }
      tot.pool_size = pool.size();
      if (fresh >= stride) done = attempt();
      if (log != nullptr) {
        const auto ip = instance_params(hp, i);
        nlohmann::json rec = {{"v", 1},
                              {"event", "cvp"},
                              {"index", i},
                              {"seed", ip.seed},
                              {"c", ip.precision},
                              {"sampled", out.counts.sampled},
                              {"candidates", out.counts.candidates},
                              {"sr", out.counts.sr_hits},
                              {"pool", pool.size()},
                              {"factored", done},
                              {"t_lattice", out.times.lattice_s},
                              {"t_search", out.times.search_s},
                              {"t_test", out.times.test_s}};
        *log << rec.dump() << '\n';
      }
    }
  }
  tot.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (log != nullptr) {
    nlohmann::json rec = {{"v", 1},
                          {"event", "summary"},
                          {"N", key.n.get_str()},
                          {"bits", key.bits},
                          {"mode", to_string(hp.mode)},
                          {"pi1", report.sizes.pi1},
                          {"pi2", report.sizes.pi2},
                          {"budget", report.budget},
                          {"cvps", tot.cvps},
                          {"sr_hits", tot.sr_hits},
                          {"pool", tot.pool_size},
                          {"rho", tot.rho()},
                          {"process_attempts", tot.process_attempts},
                          {"factored", report.result.has_value()},
                          {"wall_s", tot.wall_s}};
    if (report.result) {
      rec["p"] = report.result->p.get_str();
      rec["q"] = report.result->q.get_str();
    }
    *log << rec.dump() << '\n';
  }
  return report;
}

const char* to_string(CompareSeries s) noexcept {
  switch (s) {
    case CompareSeries::kBabaiBeyond: return "babai-beyond";
    case CompareSeries::kEnumSublinear: return "enum-sublinear";
    case CompareSeries::kEnumBeyond: return "enum-beyond";
  }
  return "unknown";
}

std::vector<CompareRow> experiment_compare(const CompareOptions& options) {
  require(options.keys_per_ell >= 1, ErrorKind::kInvalidArgument, "need at least one key per bit length");
  std::vector<CompareRow> rows;
  for (const std::size_t ell : options.ells) {
    std::vector<RsaKey> keys;
    for (std::size_t k = 0; k < options.keys_per_ell; ++k)
      keys.push_back(generate_rsa_key(ell, derive_seed(options.key_seed, ell, k)));

    auto run_rank = [&](CompareSeries series, std::size_t n) {
      Hyperparameters hp = options.base;
      CompareRow row;
      row.ell = ell;
      row.series = series;
      row.keys = keys.size();
      if (series == CompareSeries::kEnumSublinear) {
        hp.pi2_policy = Pi2Policy::kSublinear;
      } else {
        hp.pi2_policy = Pi2Policy::kTwoPi1Squared;
        hp.n = n;
      }
      hp.mode = series == CompareSeries::kBabaiBeyond ? SieveMode::kBabaiOnly : SieveMode::kExactEnum;
      const BasisSizes sizes = resolve_sizes(hp, ell);
      hp.budget = hp.mode == SieveMode::kExactEnum ? std::size_t{1} << sizes.pi1 : std::size_t{1};
      row.n = sizes.pi1;
      row.pi2 = sizes.pi2;
      double cvp_sum = 0.0;
      double rho_sum = 0.0;
      for (const auto& key : keys) {
        const FactorReport r = run_factor(key, hp);
        rho_sum += r.totals.rho();
        if (r.result) {
          ++row.factored;
          cvp_sum += static_cast<double>(r.totals.cvps);
        }
      }
      row.mean_n_cvp = row.factored > 0 ? cvp_sum / static_cast<double>(row.factored) : 0.0;
      row.mean_rho = rho_sum / static_cast<double>(keys.size());
      return row;
    };

    auto climb = [&](CompareSeries series, std::size_t from) {
      CompareRow row;
      const std::size_t cap = from + options.max_rank_increase;
      for (std::size_t n = from; n <= cap; ++n) {
        if (series == CompareSeries::kEnumBeyond && n > kMaxEnumQubits) break;
        row = run_rank(series, n);
        if (row.factored == row.keys) break;
      }
      return row;
    };

    const std::size_t sub = sublinear_rank(ell);
    std::optional<std::size_t> babai_rank;
    for (const auto series : options.series) {
      CompareRow row;
      switch (series) {
        case CompareSeries::kBabaiBeyond:
          row = climb(series, sub);
          if (row.factored == row.keys) babai_rank = row.n;
          break;
        case CompareSeries::kEnumSublinear:
          row = run_rank(series, sub);
          break;
        case CompareSeries::kEnumBeyond:
          row = climb(series, babai_rank.value_or(sub));
          break;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_compare_csv(std::ostream& os, std::span<const CompareRow> rows) {
  os << "ell,series,n,pi2,keys,factored,mean_n_cvp,mean_rho\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.ell << ',' << to_string(r.series) << ',' << r.n << ',' << r.pi2 << ',' << r.keys << ',' << r.factored
       << ',';
    std::snprintf(buf, sizeof buf, "%.6g,%.6g", r.mean_n_cvp, r.mean_rho);
    os << buf << '\n';
  }
}

void write_cost_csv(std::ostream& os, std::size_t ell_lo, std::size_t ell_hi, std::size_t step, double gamma,
                    double rho, const ScalingParams& sp) {
  require(ell_lo >= 1 && ell_lo <= ell_hi && step >= 1, ErrorKind::kInvalidArgument, "bad bit-length range");
  os << "ell,gamma,rho,n,m,t1,t2,t3,t\n";
  char buf[256];
  for (std::size_t ell = ell_lo; ell <= ell_hi; ell += step) {
    const double n = std::max(1.0, qubits_needed(static_cast<double>(ell), rho, gamma, sp));
    const double m = std::max(1.0, default_bond_dim(n));
    const CostBreakdown c = cost_model(n, static_cast<double>(ell), gamma, m);
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g,%.6g,%.6e,%.6e,%.6e,%.6e\n", ell, gamma, rho, n, m, c.t1, c.t2,
                  c.t3, c.t);
    os << buf;
  }
}

}  // namespace tnss
