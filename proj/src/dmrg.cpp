#include "adaptmps/dmrg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <json.hpp>

#include "adaptmps/oracle.hpp"

namespace adaptmps {

void DmrgOptions::validate() const {
  if (max_bond < 1) throw InvalidParams("max_bond must be positive");
  if (svd_tolerance < 0) throw InvalidParams("svd_tolerance must be non-negative");
  if (max_sweeps < 1) throw InvalidParams("max_sweeps must be positive");
  if (!(energy_tolerance > 0)) throw InvalidParams("energy_tolerance must be positive");
  if (eigensolver.max_iterations < 1 || !(eigensolver.residual_tolerance > 0))
    throw InvalidParams("eigensolver settings must be positive");
}

std::string to_json_line(const SweepRecord& r) {
  nlohmann::json j{{"sweep", r.sweep}, {"energy", r.energy}, {"max_bond", r.max_bond},
                   {"discarded_weight", r.discarded_weight}};
  return j.dump();
}

namespace {

// Makes the legs of x equal to `legs` by widening sector lists.
SymTensor match_legs(const SymTensor& x, const std::vector<Leg>& legs) {
  if (x.legs() == legs) return x;
  if (x.rank() != legs.size()) throw LegMismatch("rank differs from target legs");
  SymTensor out = x;
  for (std::size_t i = 0; i < legs.size(); ++i)
    if (!(out.leg(i) == legs[i])) out = out.with_leg(i, legs[i]);
  return out;
}

}  // namespace

LanczosResult lanczos(const std::function<SymTensor(const SymTensor&)>& apply, const SymTensor& start,
                      const LanczosOptions& opts) {
  const double n0 = start.norm();
  if (!(n0 > 0)) throw ZeroNormInitial("Lanczos start vector is zero");
  SymTensor first = apply(start);
  std::vector<Leg> legs = first.legs();
  std::vector<SymTensor> basis{scale(match_legs(start, legs), 1.0 / n0)};
  std::vector<double> alpha, beta;
  LanczosResult res;
  Eigen::VectorXd y;
  SymTensor w = scale(match_legs(first, legs), 1.0 / n0);
  for (int k = 0;; ++k) {
    if (k > 0) w = match_legs(apply(basis.back()), legs);
    alpha.push_back(inner(basis.back(), w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) w = axpy(w, -inner(v, w), v);
    const double b = w.norm();
    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    res.value = es.eigenvalues()[0];
    y = es.eigenvectors().col(0);
    res.residual = b * std::abs(y[m - 1]);
    res.iterations = k + 1;
    const bool exhausted = b < 1e-14 * std::max(1.0, std::abs(res.value));
    if (res.residual < opts.residual_tolerance || exhausted) {
      res.converged = true;
      break;
    }
    if (k + 1 >= opts.max_iterations) break;
    beta.push_back(b);
    basis.push_back(scale(w, 1.0 / b));
  }
  SymTensor x(legs);
  for (std::size_t j = 0; j < basis.size() && j < static_cast<std::size_t>(y.size()); ++j)
    x = axpy(x, y[static_cast<Eigen::Index>(j)], basis[j]);
  x.prune();
  const double nx = x.norm();
  res.vector = nx > 0 ? scale(x, 1.0 / nx) : x;
  return res;
}

SymTensor effective_apply(const EnvTensor& env_left, const SymTensor& w_l, const SymTensor& w_l1,
                          const EnvTensor& env_right, const SymTensor& x) {
  constexpr auto C = SectorPolicy::Common;
  auto t = contract(env_left, x, {{2, 1}}, C);             // (a', b, s, s2, a2)
  t = contract(t, w_l, {{1, 2}, {2, 0}}, C);                // (a', s2, a2, t, bR)
  t = contract(t, w_l1, {{4, 2}, {1, 0}}, C);               // (a', a2, t, t2, bR2)
  t = contract(t, env_right, {{1, 2}, {4, 1}}, C);          // (a', t, t2, a2')
  return transpose(t, {1, 0, 2, 3});
}

SymTensor effective_apply_single(const EnvTensor& env_left, const SymTensor& w, const EnvTensor& env_right,
                                 const SymTensor& x) {
  constexpr auto C = SectorPolicy::Common;
  auto t = contract(env_left, x, {{2, 1}}, C);   // (a', b, s, a2)
  t = contract(t, w, {{1, 2}, {2, 0}}, C);        // (a', a2, t, bR)
  t = contract(t, env_right, {{1, 2}, {3, 1}}, C);  // (a', t, a2')
  return transpose(t, {1, 0, 2});
}

std::vector<Charge> reachable_charges(const std::vector<LocalSpace>& spaces, const std::vector<Charge>& initial,
                                      const std::vector<Charge>& shifts) {
  Charge lo = 0, hi = 0;
  for (const auto& s : spaces) {
    auto cs = s.sector_charges();
    lo += cs.front();
    hi += cs.back();
  }
  std::set<Charge> seen(initial.begin(), initial.end());
  std::vector<Charge> frontier(initial.begin(), initial.end());
  while (!frontier.empty()) {
    std::vector<Charge> next;
    for (Charge a : frontier)
      for (Charge b : shifts) {
        const Charge c = a + b;
        if (c < lo || c > hi || seen.count(c)) continue;
        seen.insert(c);
        next.push_back(c);
      }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

namespace {

std::vector<Sector> unit_sectors(const std::vector<Charge>& cs) {
  std::vector<Sector> s;
  for (Charge c : cs) s.push_back({c, 1});
  return s;
}

// Boundary env restricted to bra charges inside the ket charge set.
EnvTensor closed_left_boundary(const std::vector<Charge>& charges, const std::vector<Charge>& shifts) {
  const std::set<Charge> allowed(charges.begin(), charges.end());
  SymTensor env({Leg(Dir::In, unit_sectors(charges)), Leg(Dir::Out, unit_sectors(shifts)),
                 Leg(Dir::Out, unit_sectors(charges))});
  for (Charge a : charges)
    for (Charge b : shifts)
      if (allowed.count(a + b)) env.set_block({a + b, b, a}, Block({1, 1, 1}, {cplx(1.0)}));
  return env;
}

void check_hermitian(const AsMpo& op) {
  std::size_t dim = 1;
  for (const auto& s : op.spaces()) dim *= static_cast<std::size_t>(s.dim());
  if (op.length() > 4 || dim > 256) return;
  const DenseMatrix h = oracle::mpo_to_dense(op);
  const double scale_h = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale_h)
    throw InvalidParams("ground_state requires a Hermitian operator");
}

}  // namespace

DmrgResult ground_state(const AsMpo& op, const AsMps& initial, const DmrgOptions& opts,
                        const SweepCallback& on_sweep) {
  opts.validate();
  const std::size_t L = initial.length();
  if (op.length() != L) throw LengthMismatch("operator and state lengths differ");
  for (std::size_t l = 0; l < L; ++l)
    if (!(op.space(l) == initial.space(l))) throw PhysicalSectorMismatch("operator and state spaces differ");
  if (initial.is_zero() || !(norm2(initial) > 0)) throw ZeroNormInitial("initial state has zero norm");
  check_hermitian(op);

  // widen a_1 to every reachable total charge
  const auto shifts = op.shift_charges();
  const auto charges = reachable_charges(initial.spaces(), initial.total_charges(), shifts);
  AsMps psi = canonicalize(initial, 0);
  {
    auto s0 = psi.site(0).with_leg(1, Leg(Dir::In, unit_sectors(charges)));
    psi.set_site(0, s0);
    psi = scale(psi, 1.0 / std::sqrt(norm2(psi)));
    psi.set_center(0);
  }

  const TruncationPolicy policy{opts.max_bond, opts.svd_tolerance};
  std::vector<EnvTensor> left(L + 1), right(L + 1);
  left[0] = closed_left_boundary(charges, shifts);
  right[L] = init_right_boundary();
  for (std::size_t l = L; l-- > 1;) right[l] = grow_env(right[l + 1], psi.site(l), op.site(l), psi.site(l), Side::Right);

  DmrgResult result;
  result.energy = std::numeric_limits<double>::infinity();
  double previous = std::numeric_limits<double>::infinity();
  bool lanczos_ok = true;

  auto solve_pair = [&](std::size_t l, bool to_right, double& discarded) {
    auto theta = contract(psi.site(l), psi.site(l + 1), {{2, 1}});
    auto apply = [&](const SymTensor& x) {
      return effective_apply(left[l], op.site(l), op.site(l + 1), right[l + 2], x);
    };
    auto eig = lanczos(apply, theta, opts.eigensolver);
    lanczos_ok = lanczos_ok && eig.converged;
    auto svd = block_svd(eig.vector, {0, 1}, {2, 3}, policy);
    discarded += svd.discarded_weight;
    if (to_right) {
      psi.set_site(l, svd.u);
      psi.set_site(l + 1, transpose(absorb_left(svd.s, svd.v), {1, 0, 2}));
      psi.set_center(l + 1);
      left[l + 1] = grow_env(left[l], psi.site(l), op.site(l), psi.site(l), Side::Left);
    } else {
      psi.set_site(l, absorb_right(svd.u, svd.s));
      psi.set_site(l + 1, transpose(svd.v, {1, 0, 2}));
      psi.set_center(l);
      right[l + 1] = grow_env(right[l + 2], psi.site(l + 1), op.site(l + 1), psi.site(l + 1), Side::Right);
    }
    return eig.value;
  };

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double discarded = 0.0, energy = 0.0;
    lanczos_ok = true;
    if (L == 1) {
      auto apply = [&](const SymTensor& x) { return effective_apply_single(left[0], op.site(0), right[1], x); };
      auto eig = lanczos(apply, psi.site(0), opts.eigensolver);
      lanczos_ok = eig.converged;
      psi.set_site(0, eig.vector);
      energy = eig.value;
    } else {
      for (std::size_t l = 0; l + 1 < L; ++l) energy = solve_pair(l, true, discarded);
      for (std::size_t l = L - 1; l-- > 0;) energy = solve_pair(l, false, discarded);
    }
    SweepRecord rec{sweep, energy, psi.max_bond(), discarded};
    result.history.push_back(rec);
    if (on_sweep) on_sweep(rec);
    result.energy = energy;
    const bool settled = std::abs(energy - previous) < opts.energy_tolerance;
    previous = energy;
    if (settled && lanczos_ok) {
      result.converged = true;
      break;
    }
  }

  auto s0 = psi.site(0);
  s0.shrink_leg(1);
  psi.set_site(0, s0);
  psi.set_center(0);
  psi.validate();
  result.state = std::move(psi);
  return result;
}

}  // namespace adaptmps
