#include "tnss/serialization.hpp"

#include "tnss/error.hpp"

namespace tnss {

namespace {

BigInt parse_decimal(const nlohmann::json& j, const char* field) {
  if (!j.is_string()) raise(ErrorKind::kInvalidArgument, std::string("'") + field + "' must be a decimal string");
  BigInt out;
  if (out.set_str(j.get<std::string>(), 10) != 0)
    raise(ErrorKind::kInvalidArgument, std::string("'") + field + "' is not a decimal integer");
  return out;
}

nlohmann::json optional_decimal(const std::optional<BigInt>& x) {
  return x ? nlohmann::json(x->get_str()) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const RsaKey& key) {
  return {{"N", key.n.get_str()}, {"bits", key.bits}, {"p", optional_decimal(key.p)}, {"q", optional_decimal(key.q)}};
}

RsaKey rsa_key_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("N")) raise(ErrorKind::kInvalidArgument, "key JSON needs an \"N\" field");
  RsaKey key = RsaKey::from_modulus(parse_decimal(j.at("N"), "N"));
  if (j.contains("bits") && !j.at("bits").is_null()) {
    if (!j.at("bits").is_number_unsigned() || j.at("bits").get<std::size_t>() != key.bits)
      raise(ErrorKind::kInvalidArgument, "\"bits\" disagrees with N");
  }
  const bool has_p = j.contains("p") && !j.at("p").is_null();
  const bool has_q = j.contains("q") && !j.at("q").is_null();
  if (has_p != has_q) raise(ErrorKind::kInvalidArgument, "give both factors or neither");
  if (has_p) {
    key.p = parse_decimal(j.at("p"), "p");
    key.q = parse_decimal(j.at("q"), "q");
    if (*key.p * *key.q != key.n) raise(ErrorKind::kInvalidArgument, "p * q differs from N");
  }
  return key;
}

nlohmann::json to_json(const CvpInstance& instance) {
  nlohmann::json basis = nlohmann::json::array();
  for (std::size_t r = 0; r < instance.basis.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < instance.basis.cols(); ++c) row.push_back(instance.basis(r, c).get_str());
    basis.push_back(std::move(row));
  }
  nlohmann::json target = nlohmann::json::array();
  for (const auto& t : instance.target) target.push_back(t.get_str());
  nlohmann::json primes = nlohmann::json::array();
  for (auto p : instance.primes.primes()) primes.push_back(p);
  return {{"basis", std::move(basis)},     {"target", std::move(target)}, {"precision", instance.precision},
          {"diagonal", instance.diagonal}, {"primes", std::move(primes)}, {"seed", instance.seed}};
}

nlohmann::json to_json(const FactorResult& result) {
  return {{"p", result.p.get_str()},
          {"q", result.q.get_str()},
          {"kernel_vector_used", result.kernel_vector_used},
          {"trials", result.trials}};
}

}  // namespace tnss
