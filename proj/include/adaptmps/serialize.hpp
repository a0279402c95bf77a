#pragma once

// JSON documents for tensors, states and operators.
//   tensor: {legs: [{dir, sectors: [[charge, dim], ...]}],
//            blocks: [{key, shape, re, im}]}  (row-major block data)
//   chain:  manifest {format, version, length, conventions, center, policy,
//           spaces} plus one tensor record per site.
// Loading runs the same validation as construction.

#include <json.hpp>
#include <string>

#include "adaptmps/mps.hpp"

namespace adaptmps {

nlohmann::json tensor_to_json(const SymTensor& t);
SymTensor tensor_from_json(const nlohmann::json& j);

nlohmann::json space_to_json(const LocalSpace& s);
LocalSpace space_from_json(const nlohmann::json& j);

nlohmann::json mps_to_json(const AsMps& psi, const TruncationPolicy& policy = TruncationPolicy::exact());
AsMps mps_from_json(const nlohmann::json& j);
nlohmann::json mpo_to_json(const AsMpo& op);
AsMpo mpo_from_json(const nlohmann::json& j);

void save_mps(const AsMps& psi, const std::string& path, const TruncationPolicy& policy = TruncationPolicy::exact());
AsMps load_mps(const std::string& path);

}  // namespace adaptmps
