#include "adaptmps/environment.hpp"

#include <set>

namespace adaptmps {

EnvTensor init_left_boundary(const std::vector<Charge>& ket_charges, const std::vector<Charge>& op_charges) {
  std::set<Charge> sums;
  for (Charge a : ket_charges)
    for (Charge b : op_charges) sums.insert(a + b);
  auto ones = [](const auto& charges) {
    std::vector<Sector> s;
    for (Charge c : charges) s.push_back({c, 1});
    return s;
  };
  EnvTensor env({Leg(Dir::In, ones(sums)), Leg(Dir::Out, ones(op_charges)), Leg(Dir::Out, ones(ket_charges))});
  for (Charge a : ket_charges)
    for (Charge b : op_charges) env.set_block({a + b, b, a}, Block({1, 1, 1}, {1.0}));
  return env;
}

EnvTensor init_left_boundary(const AsMps& psi, const AsMpo& op) {
  if (psi.length() != op.length()) throw LengthMismatch("state and operator differ in length");
  return init_left_boundary(psi.total_charges(), op.shift_charges());
}

EnvTensor init_right_boundary() {
  EnvTensor env({Leg(Dir::Out, {{0, 1}}), Leg(Dir::In, {{0, 1}}), Leg(Dir::In, {{0, 1}})});
  env.set_block({0, 0, 0}, Block({1, 1, 1}, {1.0}));
  return env;
}

EnvTensor grow_env(const EnvTensor& env, const SymTensor& bra_site, const SymTensor& mpo_site,
                   const SymTensor& ket_site, Side side) {
  if (env.rank() != 3 || bra_site.rank() != 3 || ket_site.rank() != 3 || mpo_site.rank() != 4)
    throw LegMismatch("grow_env expects rank-3 env/MPS sites and a rank-4 MPO site");
  constexpr auto common = SectorPolicy::Common;
  if (side == Side::Left) {
    auto t1 = contract(env, ket_site, {{2, 1}}, common);                         // (a', b, s, a+)
    auto t2 = contract(t1, mpo_site, {{1, 2}, {2, 0}}, common);                  // (a', a+, t, b+)
    auto t3 = contract(t2, conjugate(bra_site), {{0, 1}, {2, 0}}, common);       // (a+, b+, a'+)
    return transpose(t3, {2, 1, 0});
  }
  auto t1 = contract(ket_site, env, {{2, 2}}, common);                           // (s, a, a'+, b+)
  auto t2 = contract(t1, mpo_site, {{0, 0}, {3, 3}}, common);                    // (a, a'+, t, b)
  auto t3 = contract(t2, conjugate(bra_site), {{1, 2}, {2, 0}}, common);         // (a, b, a')
  return transpose(t3, {2, 1, 0});
}

}  // namespace adaptmps
