#pragma once

#include <nlohmann/json.hpp>

#include "tnss/congruence.hpp"
#include "tnss/lattice.hpp"
#include "tnss/numtheory.hpp"

namespace tnss {

/// {"N": "...", "bits": L, "p": "..." | null, "q": "..." | null}
nlohmann::json to_json(const RsaKey& key);
/// Accepts the layout above; "bits" is optional and checked when present.
RsaKey rsa_key_from_json(const nlohmann::json& j);

/// Matrices as row arrays of decimal strings.
nlohmann::json to_json(const CvpInstance& instance);

/// {"p": "...", "q": "...", "kernel_vector_used": i, "trials": t}
nlohmann::json to_json(const FactorResult& result);

}  // namespace tnss
