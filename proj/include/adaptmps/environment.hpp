#pragma once

// Environment tensors for sweeps.
//   left  env: (a' In, b Out, a Out), charge a' = b + a
//   right env: (a' Out, b In, a In)
// a' is the bra bond, b the operator bond, a the ket bond.

#include <vector>

#include "adaptmps/mps.hpp"

namespace adaptmps {

using EnvTensor = SymTensor;

enum class Side { Left, Right };

// One block (a + b, b, a) = 1 for every pair of boundary charges.
EnvTensor init_left_boundary(const std::vector<Charge>& ket_charges, const std::vector<Charge>& op_charges);
EnvTensor init_left_boundary(const AsMps& psi, const AsMpo& op);
EnvTensor init_right_boundary();

// Absorbs one site into the environment. The bra site is passed as stored
// in its MPS; it is conjugated here.
EnvTensor grow_env(const EnvTensor& env, const SymTensor& bra_site, const SymTensor& mpo_site,
                   const SymTensor& ket_site, Side side);

}  // namespace adaptmps
