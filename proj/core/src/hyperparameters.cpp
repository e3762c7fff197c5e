#include "tnss/hyperparameters.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "tnss/error.hpp"

namespace tnss {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    raise(ErrorKind::kInvalidArgument, "'" + key + "' expects a nonnegative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) raise(ErrorKind::kInvalidArgument, "'" + key + "' expects a number, got '" + v + "'");
  return out;
}

}  // namespace

const char* to_string(Pi2Policy policy) noexcept {
  switch (policy) {
    case Pi2Policy::kTwoNEll: return "two_n_ell";
    case Pi2Policy::kTwoPi1Squared: return "two_pi1_squared";
    case Pi2Policy::kSublinear: return "sublinear";
    case Pi2Policy::kExplicit: return "explicit";
  }
  return "unknown";
}

std::pair<Pi2Policy, std::size_t> parse_pi2_policy(const std::string& text) {
  if (text == "two_n_ell") return {Pi2Policy::kTwoNEll, 0};
  if (text == "two_pi1_squared") return {Pi2Policy::kTwoPi1Squared, 0};
  if (text == "sublinear") return {Pi2Policy::kSublinear, 0};
  for (const char* prefix : {"explicit:", "explicit("}) {
    const std::string p(prefix);
    if (text.rfind(p, 0) == 0) {
      std::string num = text.substr(p.size());
      if (p.back() == '(') {
        if (num.empty() || num.back() != ')') break;
        num.pop_back();
      }
      return {Pi2Policy::kExplicit, to_u64("pi2_policy", num)};
    }
  }
  raise(ErrorKind::kInvalidArgument, "unknown pi2 policy '" + text + "'");
}

std::size_t sublinear_rank(std::size_t ell) {
  require(ell >= 2, ErrorKind::kInvalidArgument, "bit length must be >= 2");
  const double x = static_cast<double>(ell);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(x / std::log2(x))));
}

BasisSizes resolve_sizes(const Hyperparameters& hp, std::size_t ell) {
  BasisSizes s;
  switch (hp.pi2_policy) {
    case Pi2Policy::kSublinear:
      s.pi1 = s.pi2 = sublinear_rank(ell);
      return s;
    case Pi2Policy::kTwoNEll:
      s.pi1 = hp.n;
      s.pi2 = 2 * hp.n * ell;
      break;
    case Pi2Policy::kTwoPi1Squared:
      s.pi1 = hp.n;
      s.pi2 = 2 * hp.n * hp.n;
      break;
    case Pi2Policy::kExplicit:
      s.pi1 = hp.n;
      s.pi2 = hp.pi2;
      break;
  }
  require(s.pi1 >= 1, ErrorKind::kInvalidArgument, "lattice rank must be >= 1");
  require(s.pi2 >= s.pi1, ErrorKind::kInvalidArgument, "smoothness basis smaller than the factoring basis");
  return s;
}

double max_gamma(std::size_t n, std::size_t ell) {
  require(ell >= 2, ErrorKind::kInvalidArgument, "bit length must be >= 2");
  return static_cast<double>(n) * std::log(2.0) / std::log(static_cast<double>(ell));
}

std::size_t resolve_budget(const Hyperparameters& hp, std::size_t ell) {
  return hp.budget ? *hp.budget : default_budget(ell, hp.gamma);
}

void validate(const Hyperparameters& hp, std::size_t ell) {
  const BasisSizes s = resolve_sizes(hp, ell);
  require(hp.gamma >= 0.0, ErrorKind::kInvalidArgument, "gamma must be >= 0");
  require(hp.budget || hp.mode == SieveMode::kBabaiOnly || hp.gamma <= max_gamma(s.pi1, ell) + 1e-12, ErrorKind::kInvalidArgument,
          "gamma exceeds n log 2 / log ell: the budget would exceed the 2^n configurations");
  require(!hp.budget || *hp.budget >= 1, ErrorKind::kInvalidArgument, "budget must be positive");
  require(!hp.c_schedule.empty(), ErrorKind::kInvalidArgument, "empty precision schedule");
  for (double c : hp.c_schedule) require(c >= 0.0, ErrorKind::kInvalidArgument, "precision c must be >= 0");
  require(hp.m >= 1, ErrorKind::kInvalidArgument, "bond dimension must be >= 1");
  require(hp.sweeps >= 1, ErrorKind::kInvalidArgument, "at least one sweep is required");
  require(hp.alpha >= 0.0, ErrorKind::kInvalidArgument, "alpha must be >= 0");
  require(hp.p_stop > 0.0 && hp.p_stop <= 1.0, ErrorKind::kInvalidArgument, "p_stop must lie in (0, 1]");
  require(hp.n_cvp >= 1, ErrorKind::kInvalidArgument, "n_cvp must be >= 1");
  require(hp.workers >= 1, ErrorKind::kInvalidArgument, "workers must be >= 1");
  require(hp.delta > 0.25 && hp.delta <= 1.0, ErrorKind::kInvalidArgument, "delta must lie in (1/4, 1]");
  if (hp.mode == SieveMode::kExactEnum)
    require(s.pi1 <= kMaxEnumQubits, ErrorKind::kCapacity, "exact enumeration limited to 26 qubits");
  if (hp.mode == SieveMode::kTtn) require(s.pi1 >= 2, ErrorKind::kInvalidArgument, "ttn mode needs n >= 2");
}

std::map<std::string, std::string> parse_config(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorKind::kInvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      raise(ErrorKind::kInvalidArgument, "config line " + std::to_string(lineno) + ": empty key or value");
    kv[key] = value;
  }
  return kv;
}

void apply_config(Hyperparameters& hp, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "n") {
      hp.n = to_u64(key, value);
    } else if (key == "pi2_policy") {
      const auto [policy, k] = parse_pi2_policy(value);
      hp.pi2_policy = policy;
      if (policy == Pi2Policy::kExplicit) hp.pi2 = k;
    } else if (key == "pi2") {
      hp.pi2 = to_u64(key, value);
    } else if (key == "gamma") {
      hp.gamma = to_double(key, value);
    } else if (key == "c_schedule") {
      hp.c_schedule.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) hp.c_schedule.push_back(to_double(key, trim(item)));
    } else if (key == "m") {
      hp.m = to_u64(key, value);
    } else if (key == "sweeps") {
      hp.sweeps = to_u64(key, value);
    } else if (key == "alpha") {
      hp.alpha = to_double(key, value);
    } else if (key == "p_stop") {
      hp.p_stop = to_double(key, value);
    } else if (key == "n_cvp") {
      hp.n_cvp = to_u64(key, value);
    } else if (key == "mode") {
      hp.mode = parse_sieve_mode(value);
    } else if (key == "seed") {
      hp.seed = to_u64(key, value);
    } else if (key == "workers") {
      hp.workers = to_u64(key, value);
    } else if (key == "budget") {
      hp.budget = to_u64(key, value);
    } else if (key == "delta") {
      hp.delta = to_double(key, value);
    } else if (key == "combination_budget") {
      hp.combination_budget = to_u64(key, value);
    } else if (key == "process_stride") {
      hp.process_stride = to_u64(key, value);
    } else {
      raise(ErrorKind::kInvalidArgument, "unknown configuration key '" + key + "'");
    }
  }
}

}  // namespace tnss
