#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tnss/cost_model.hpp"
#include "tnss/driver.hpp"
#include "tnss/error.hpp"
#include "tnss/hyperparameters.hpp"
#include "tnss/rng.hpp"
#include "tnss/serialization.hpp"
#include "tnss/sieve.hpp"

namespace {

using namespace tnss;

// Flags that override a Hyperparameters field of the same meaning.
struct HpFlags {
  std::string config;
  std::map<std::string, std::string> values;

  void add(CLI::App* app) {
    app->add_option("--config", config, "key = value file; flags below override it")->check(CLI::ExistingFile);
    flag(app, "--rank", "n", "lattice rank n = pi1");
    flag(app, "--pi2-policy", "pi2_policy", "two_n_ell | two_pi1_squared | sublinear | explicit:K");
    flag(app, "--gamma", "gamma", "per-CVP budget exponent, budget = ceil(ell^gamma)");
    flag(app, "--c-schedule", "c_schedule", "comma-separated precisions c cycled over instances");
    flag(app, "--mode", "mode", "babai-only | exact-enum | ttn");
    flag(app, "--bond-dim", "m", "TTN bond dimension");
    flag(app, "--sweeps", "sweeps", "TTN optimisation sweeps");
    flag(app, "--alpha", "alpha", "transverse perturbation strength");
    flag(app, "--p-stop", "p_stop", "stop sampling at this accumulated probability");
    flag(app, "--cvp-budget", "n_cvp", "maximum number of CVP instances");
    flag(app, "--samples", "budget", "configurations tested per CVP (overrides gamma)");
    flag(app, "--seed", "seed", "master seed");
    flag(app, "--workers", "workers", "worker threads");
    flag(app, "--delta", "delta", "LLL parameter");
    flag(app, "--combination-budget", "combination_budget", "kernel combinations tried per processing attempt");
    flag(app, "--process-stride", "process_stride", "new sr-pairs between processing attempts");
  }

  Hyperparameters resolve() const {
    Hyperparameters hp;
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) raise(ErrorKind::kIo, "cannot read " + config);
      apply_config(hp, parse_config(in));
    }
    apply_config(hp, values);
    return hp;
  }

 private:
  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(name, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

RsaKey read_key(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::kIo, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kInvalidArgument, path + ": " + e.what());
  }
  return rsa_key_from_json(j);
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) raise(ErrorKind::kIo, "cannot write " + path);
  return file;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) raise(ErrorKind::kInvalidArgument, "range must look like A:B");
  try {
    return {std::stoull(text.substr(0, colon)), std::stoull(text.substr(colon + 1))};
  } catch (const std::exception&) {
    raise(ErrorKind::kInvalidArgument, "range must look like A:B");
  }
}

int cmd_gen_key(std::size_t bits, std::uint64_t seed, const std::string& out) {
  std::ofstream file;
  open_out(out, file) << to_json(generate_rsa_key(bits, seed)).dump(2) << '\n';
  return 0;
}

int cmd_factor(const std::string& key_path, const HpFlags& flags, const std::string& log_path) {
  const RsaKey key = read_key(key_path);
  const Hyperparameters hp = flags.resolve();
  std::ofstream log_file;
  std::ostream* log = nullptr;
  if (!log_path.empty()) log = &open_out(log_path, log_file);
  const FactorReport r = run_factor(key, hp, log);
  nlohmann::json out = {{"N", key.n.get_str()},
                        {"bits", key.bits},
                        {"pi1", r.sizes.pi1},
                        {"pi2", r.sizes.pi2},
                        {"budget", r.budget},
                        {"cvps", r.totals.cvps},
                        {"sr_hits", r.totals.sr_hits},
                        {"pool", r.totals.pool_size},
                        {"rho", r.totals.rho()},
                        {"wall_s", r.totals.wall_s},
                        {"factored", r.result.has_value()}};
  if (r.result) out["result"] = to_json(*r.result);
  std::cout << out.dump(2) << '\n';
  return r.result ? 0 : 2;
}

int cmd_sieve_cvp(const std::string& key_path, const HpFlags& flags, std::size_t index, const std::string& out) {
  const RsaKey key = read_key(key_path);
  const Hyperparameters hp = flags.resolve();
  validate(hp, key.bits);
  const BasisSizes sizes = resolve_sizes(hp, key.bits);
  SieveOptions so;
  so.mode = hp.mode;
  so.budget = resolve_budget(hp, key.bits);
  so.delta = hp.delta;
  so.ttn = {hp.m, hp.sweeps, hp.alpha, hp.p_stop, SamplingOrder::kProportional};
  so.record_scatter = true;
  const SieveOutcome o = sieve_cvp(key, PrimeBasis::first(sizes.pi1, false), PrimeBasis::first(sizes.pi2, true),
                                   instance_params(hp, index), so);
  std::ofstream file;
  write_scatter_csv(open_out(out, file), o.scatter);
  std::cerr << "sampled " << o.counts.sampled << ", candidates " << o.counts.candidates << ", sr-pairs "
            << o.counts.sr_hits << '\n';
  return 0;
}

int cmd_asrpl(std::size_t ell, std::size_t keys, std::uint64_t key_seed, const std::vector<std::size_t>& ranks,
              const HpFlags& flags, const std::string& out) {
  std::vector<RsaKey> ks;
  for (std::size_t k = 0; k < keys; ++k) ks.push_back(generate_rsa_key(ell, derive_seed(key_seed, ell, k)));
  std::ofstream file;
  std::ostream& os = open_out(out, file);
  os << "ell,n,pi2,gamma,mode,keys,n_cvp,mean,stddev,std_error,rescaled,model\n";
  for (const std::size_t n : ranks) {
    Hyperparameters hp = flags.resolve();
    hp.n = n;
    validate(hp, ell);
    const BasisSizes sizes = resolve_sizes(hp, ell);
    AsrplOptions ao;
    ao.n = sizes.pi1;
    ao.pi2 = sizes.pi2;
    ao.gamma = hp.gamma;
    ao.n_cvp = hp.n_cvp;
    ao.c_schedule = hp.c_schedule;
    ao.sieve.mode = hp.mode;
    ao.sieve.delta = hp.delta;
    ao.sieve.ttn = {hp.m, hp.sweeps, hp.alpha, hp.p_stop, SamplingOrder::kProportional};
    ao.fixed_budget = hp.budget;
    ao.master_seed = hp.seed;
    ao.workers = hp.workers;
    const AsrplStats st = estimate_asrpl(ks, ao);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6g,%s,%zu,%zu,%.6g,%.6g,%.6g,%.6g,%.6g\n", ell, sizes.pi1,
                  sizes.pi2, hp.gamma, to_string(hp.mode), keys, hp.n_cvp, st.mean, st.stddev, st.std_error,
                  st.rescaled, scaling_rho(static_cast<double>(ell), static_cast<double>(sizes.pi1), hp.gamma));
    os << buf << std::flush;
  }
  return 0;
}

int cmd_compare(const std::vector<std::size_t>& ells, std::size_t keys, std::uint64_t key_seed,
                std::size_t max_increase, const std::vector<std::string>& series, const HpFlags& flags,
                const std::string& out) {
  CompareOptions co;
  co.ells = ells;
  co.base = flags.resolve();
  co.keys_per_ell = keys;
  co.key_seed = key_seed;
  co.max_rank_increase = max_increase;
  if (!series.empty()) {
    co.series.clear();
    for (const auto& s : series) {
      if (s == "babai-beyond") co.series.push_back(CompareSeries::kBabaiBeyond);
      else if (s == "enum-sublinear") co.series.push_back(CompareSeries::kEnumSublinear);
      else if (s == "enum-beyond") co.series.push_back(CompareSeries::kEnumBeyond);
      else raise(ErrorKind::kInvalidArgument, "unknown series '" + s + "'");
    }
  }
  const auto rows = experiment_compare(co);
  std::ofstream file;
  write_compare_csv(open_out(out, file), rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-network Schnorr sieving: lattice-based factoring of small RSA moduli"};
  app.require_subcommand(1);

  std::string out;

  auto* gen = app.add_subcommand("gen-key", "generate a seeded RSA key as JSON");
  std::size_t bits = 0;
  std::uint64_t seed = 0;
  gen->add_option("--bits", bits, "bit length of N")->required();
  gen->add_option("--seed", seed, "key seed");
  gen->add_option("--out,-o", out, "output file (default stdout)");

  std::string key_path;
  std::string log_path;
  HpFlags factor_flags;
  auto* factor = app.add_subcommand("factor", "run the sieve until N factors or the CVP budget is spent");
  factor->add_option("--n-file", key_path, "key JSON")->required()->check(CLI::ExistingFile);
  factor->add_option("--log", log_path, "JSON-lines run log (- for stdout)");
  factor_flags.add(factor);

  HpFlags sieve_flags;
  std::size_t index = 0;
  auto* sieve = app.add_subcommand("sieve-cvp", "sieve one CVP instance and emit the scatter CSV");
  sieve->add_option("--n-file", key_path, "key JSON")->required()->check(CLI::ExistingFile);
  sieve->add_option("--index", index, "instance index within the run (selects seed and c)");
  sieve->add_option("--out,-o", out, "output file (default stdout)");
  sieve_flags.add(sieve);

  auto* exp = app.add_subcommand("experiment", "statistical experiments emitting CSV");
  exp->require_subcommand(1);
  std::size_t keys = 10;
  std::uint64_t key_seed = 0;

  HpFlags asrpl_flags;
  std::size_t ell = 30;
  std::vector<std::size_t> ranks;
  auto* asrpl = exp->add_subcommand("asrpl", "mean sr-pairs per lattice for one bit length and several ranks");
  asrpl->add_option("--ell", ell, "bit length")->required();
  asrpl->add_option("--ranks", ranks, "lattice ranks")->delimiter(',')->required();
  asrpl->add_option("--keys", keys, "keys per rank");
  asrpl->add_option("--key-seed", key_seed, "seed for key generation");
  asrpl->add_option("--out,-o", out, "output file (default stdout)");
  asrpl_flags.add(asrpl);

  HpFlags cmp_flags;
  std::vector<std::size_t> ells;
  std::vector<std::string> series;
  std::size_t max_increase = 16;
  auto* cmp = exp->add_subcommand("compare", "Babai-only versus exact enumeration across bit lengths");
  cmp->add_option("--ells", ells, "bit lengths")->delimiter(',')->required();
  cmp->add_option("--series", series, "babai-beyond, enum-sublinear, enum-beyond")->delimiter(',');
  cmp->add_option("--keys", keys, "keys per bit length");
  cmp->add_option("--key-seed", key_seed, "seed for key generation");
  cmp->add_option("--max-rank-increase", max_increase, "ranks tried above the sublinear value");
  cmp->add_option("--out,-o", out, "output file (default stdout)");
  cmp_flags.add(cmp);

  std::string range;
  double gamma = 2.0;
  double rho = 1.0;
  std::size_t step = 10;
  auto* cost = app.add_subcommand("cost-model", "operation counts T1, T2, T3 against bit length");
  cost->add_option("--ell-range", range, "A:B")->required();
  cost->add_option("--gamma", gamma, "budget exponent")->required();
  cost->add_option("--rho", rho, "target sr-pairs per lattice");
  cost->add_option("--step", step, "bit-length step");
  cost->add_option("--out,-o", out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_key(bits, seed, out);
    if (*factor) return cmd_factor(key_path, factor_flags, log_path);
    if (*sieve) return cmd_sieve_cvp(key_path, sieve_flags, index, out);
    if (*asrpl) return cmd_asrpl(ell, keys, key_seed, ranks, asrpl_flags, out);
    if (*cmp) return cmd_compare(ells, keys, key_seed, max_increase, series, cmp_flags, out);
    if (*cost) {
      const auto [lo, hi] = parse_range(range);
      std::ofstream file;
      write_cost_csv(open_out(out, file), lo, hi, step, gamma, rho);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "tnss: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
