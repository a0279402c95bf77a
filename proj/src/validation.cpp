#include <chrono>
#include <cmath>
#include <functional>
#include <set>

#include "adaptmps/cli.hpp"
#include "adaptmps/dense_reference.hpp"
#include "adaptmps/oracle.hpp"

namespace adaptmps::cli {

using nlohmann::json;

namespace {

struct Check {
  std::string suite;
  std::string name;
  double tolerance;
  std::function<double()> measure;  // returns the error to compare with tolerance
};

double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ModelParams xyz(std::size_t L, double gamma, double delta, double h) {
  ModelParams p;
  p.L = L;
  p.gamma = gamma;
  p.delta = delta;
  p.h = h;
  return p;
}

ModelParams driven(std::size_t L, int d) {
  ModelParams p;
  p.L = L;
  p.d = d;
  p.j = 1.0;
  p.u = 4.0;
  p.lambda1 = 1.0;
  p.lambdaL = 1.0;
  p.nbar1 = 0.75;
  p.nbarL = 0.25;
  return p;
}

// Randomized contract/add/svd cases against dense loops; returns the worst
// relative error, or 1 when a block breaks the fusion rule.
double fusion_equivalence(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    const Leg shared = oracle::random_leg(rng, Dir::Out);
    auto a = oracle::random_tensor(rng, {oracle::random_leg(rng, Dir::In), oracle::random_leg(rng, Dir::Out), shared});
    auto b = oracle::random_tensor(rng, {shared.dual(), oracle::random_leg(rng, Dir::Out)});
    auto r = contract(a, b, {{2, 0}});
    if (!oracle::all_blocks_fuse(r)) return 1.0;
    if (!r.empty() || !a.empty()) {
      auto d = oracle::dense_contract(oracle::dense_of(a), oracle::dense_of(b), {{2, 0}});
      worst = std::max(worst, oracle::rel_diff(to_dense(r), d.data));
    }
    auto s = add(a, scale(a, 2.0));
    worst = std::max(worst, oracle::rel_diff(to_dense(s), to_dense(scale(a, 3.0))));
    if (!a.empty()) {
      auto svd = block_svd(a, {0, 1}, {2}, TruncationPolicy::exact());
      auto back = contract(absorb_right(svd.u, svd.s), svd.v, {{2, 0}});
      worst = std::max(worst, oracle::rel_diff(to_dense(back), to_dense(a)));
    }
  }
  return worst;
}

double fusion_rejected() {
  const Leg in(Dir::In, {{0, 1}, {1, 1}}), out(Dir::Out, {{0, 1}, {1, 1}});
  try {
    make_tensor({in, out}, {{{0, 1}, Block({1, 1}, {cplx(1.0)})}});
  } catch (const FusionViolation&) {
    return 0.0;
  }
  return 1.0;
}

AsMps three_site_state() {
  const double r = std::sqrt(0.5);
  auto s = spin_chain(3);
  return compress(add_mps(scale(basis_state(s, {1, 1, 0}), r), scale(basis_state(s, {1, 0, 0}), r)),
                  TruncationPolicy::exact())
      .first;
}

double ground_energy_error(const ModelParams& p, int max_bond, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Charge n = static_cast<Charge>(p.L / 2);
  auto init = random_state(spin_chain(p.L), {n}, 8, rng);
  DmrgOptions opts;
  opts.max_bond = max_bond;
  auto res = ground_state(mpo_xyz(p), init, opts);
  auto sectors = reachable_charges(spin_chain(p.L), {n}, mpo_xyz(p).shift_charges());
  const double exact =
      oracle::dense_ground(oracle::dense_xyz(p), std::set<Charge>(sectors.begin(), sectors.end())).first;
  return std::abs(res.energy - exact);
}

double quench_error(std::size_t L, double dt, double t_final) {
  auto pre = xyz(L, 0.0, 1.5, 0.5), post = xyz(L, 0.5, 1.5, 0.5);
  std::mt19937_64 rng(11);
  auto gs = ground_state(mpo_xyz(pre), random_state(spin_chain(L), {static_cast<Charge>(L / 2)}, 8, rng), {});
  EvolutionPlan plan;
  plan.dt = dt;
  plan.n_steps = static_cast<int>(std::lround(t_final / dt));
  plan.record_interval = std::max(1, plan.n_steps / 5);
  plan.policy = {64, 0.0};
  for (std::size_t l = 0; l < L; ++l)
    plan.observables.push_back({"sz" + std::to_string(l), mpo_site(spin_chain(L), l, ops::sigma_z()), 1});
  auto traj = evolve(plan, rk4_propagator(scale(mpo_xyz(post), cplx(0, -1))), gs.state);
  auto h = oracle::dense_xyz(post).matrix;
  auto v0 = oracle::mps_to_dense(gs.state);
  std::vector<int> dims(L, 2);
  double worst = 0;
  for (const auto& r : traj.records) {
    auto v = oracle::dense_evolve(h, v0, r.t);
    for (std::size_t l = 0; l < L; ++l) {
      auto z = oracle::kron_factors(dims, {{l, ops::sigma_z()}});
      worst = std::max(worst, std::abs(*r.observables.at("sz" + std::to_string(l)) - v.dot(z * v).real()));
    }
  }
  return worst;
}

// Worst |<n_l> - oracle| and trace deviation of the hybrid Lindblad scheme.
std::pair<double, double> lindblad_errors(std::size_t L, int d, double dt, double t_final) {
  auto p = driven(L, d);
  auto phys = boson_chain(L, d);
  std::mt19937_64 rng(12);
  auto gs = ground_state(mpo_bose_hubbard(p), random_state(phys, {static_cast<Charge>(L / 2)}, 8, rng), {});
  EvolutionPlan plan;
  plan.scheme = Scheme::HybridTrotter;
  plan.dt = dt;
  plan.n_steps = static_cast<int>(std::lround(t_final / dt));
  plan.record_interval = std::max(1, plan.n_steps / 10);
  plan.policy = {1024, 0.0};
  for (std::size_t l = 0; l < L; ++l)
    plan.observables.push_back({"n" + std::to_string(l), vectorized_observable(phys, {{l, ops::boson_number(d)}}), 1});
  auto traj = evolve(plan, lindblad_trotter_propagator(p, dt), vectorize_pure(gs.state));
  auto sys = oracle::dense_lindblad_bh(p);
  auto v = oracle::mps_to_dense(gs.state);
  DenseMatrix exact = v * v.adjoint();
  std::vector<int> dims(L, d);
  double worst = 0, trace_dev = 0, t_exact = 0;
  for (const auto& r : traj.records) {
    exact = oracle::dense_lindblad(sys, exact, r.t - t_exact);
    t_exact = r.t;
    for (std::size_t l = 0; l < L; ++l) {
      const double n = (oracle::kron_factors(dims, {{l, ops::boson_number(d)}}) * exact).trace().real();
      worst = std::max(worst, std::abs(*r.observables.at("n" + std::to_string(l)) - n));
    }
    trace_dev = std::max(trace_dev, std::abs(r.norm2 - 1.0));
  }
  return {worst, trace_dev};
}

std::vector<Check> build_checks(Level level) {
  std::vector<Check> c;
  // symtensor
  c.push_back({"fusion", "fusion_violation_rejected", 0.5, fusion_rejected});
  c.push_back({"fusion", "random_cases_match_dense", 1e-12,
               [level] { return fusion_equivalence(level == Level::Full ? 500 : 100, 7); }});
  // three-site fixtures
  c.push_back({"three_site", "state_amplitudes", 1e-14, [] {
                 auto v = oracle::mps_to_dense(three_site_state());
                 DenseVector e = DenseVector::Zero(8);
                 e[0b110] = e[0b100] = std::sqrt(0.5);
                 return (v - e).norm();
               }});
  c.push_back({"three_site", "xyz_mpo_matches_dense", 1e-12, [] {
                 auto p = xyz(3, 0.5, 1.5, 0.0);
                 return max_abs(oracle::mpo_to_dense(mpo_xyz(p)) - oracle::dense_xyz(p).matrix);
               }});
  c.push_back({"three_site", "shift_charge_sets", 0.5, [] {
                 auto a = mpo_xyz(xyz(3, 0.0, 1.5, 0.0)).shift_charges();
                 auto b = mpo_xyz(xyz(3, 0.5, 1.5, 0.0)).shift_charges();
                 return (a == std::vector<Charge>{0} && b == std::vector<Charge>{-2, 0, 2}) ? 0.0 : 1.0;
               }});
  // models
  c.push_back({"models", "bose_hubbard_matches_dense", 1e-12, [] {
                 ModelParams p;
                 p.L = 3;
                 p.d = 3;
                 p.u = 2.0;
                 return max_abs(oracle::mpo_to_dense(mpo_bose_hubbard(p)) - oracle::dense_bose_hubbard(p).matrix);
               }});
  c.push_back({"models", "lindblad_split_exact", 1e-12, [] {
                 auto p = driven(2, 3);
                 auto [s, a] = lindblad_mpo(p);
                 DenseMatrix total = oracle::mpo_to_dense(s) + oracle::mpo_to_dense(a);
                 return max_abs(total - oracle::lindblad_superoperator(oracle::dense_lindblad_bh(p)));
               }});
  c.push_back({"models", "parity_commutes", 1e-12, [] {
                 auto h = oracle::dense_xyz(xyz(4, 0.7, 1.5, 0.5)).matrix;
                 auto par = oracle::dense_parity(4);
                 return max_abs(h * par - par * h);
               }});
  // netops
  c.push_back({"netops", "apply_mpo_matches_dense", 1e-12, [] {
                 std::mt19937_64 rng(3);
                 auto psi = random_state(spin_chain(5), {2, 3}, 6, rng);
                 auto h = mpo_xyz(xyz(5, 0.5, 1.5, 0.5));
                 auto out = apply_mpo(h, psi, TruncationPolicy::exact());
                 DenseVector e = oracle::mpo_to_dense(h) * oracle::mps_to_dense(psi);
                 return (oracle::mps_to_dense(out) - e).norm() / e.norm();
               }});
  c.push_back({"netops", "compress_round_trip", 1e-12, [] {
                 std::mt19937_64 rng(4);
                 auto psi = random_state(boson_chain(4, 3), {3, 4}, 6, rng);
                 auto [out, w] = compress(psi, TruncationPolicy::exact());
                 return (oracle::mps_to_dense(out) - oracle::mps_to_dense(psi)).norm() + canonical_error(out);
               }});
  // oracle
  c.push_back({"oracle", "evolution_methods_agree", 1e-10, [] {
                 auto h = oracle::dense_xyz(xyz(5, 0.5, 1.5, 0.5)).matrix;
                 DenseVector v = DenseVector::Zero(32);
                 v[3] = 1.0;
                 return (oracle::dense_evolve(h, v, 0.8, oracle::EvolveMethod::Eigen) -
                         oracle::dense_evolve(h, v, 0.8, oracle::EvolveMethod::Taylor))
                     .norm();
               }});
  // dmrg
  c.push_back({"dmrg", "two_site_energy", 1e-12, [] {
                 auto res = ground_state(mpo_xyz(xyz(2, 0.0, 1.5, 0.0)), basis_state(spin_chain(2), {1, 0}), {});
                 return std::abs(res.energy + 3.5);
               }});
  c.push_back({"dmrg", "six_site_energy", 1e-8, [] { return ground_energy_error(xyz(6, 0.5, 1.5, 0.5), 64, 5); }});
  if (level == Level::Full)
    for (double g : {0.0, 0.1, 0.5, 1.0})
      c.push_back({"dmrg", "eight_site_energy_gamma_" + std::to_string(g).substr(0, 3), 1e-8,
                   [g] { return ground_energy_error(xyz(8, g, 1.5, 0.5), 64, 5); }});
  // tevo
  c.push_back({"tevo", "rk4_quench_small", 1e-8, [] { return quench_error(4, 0.005, 0.1); }});
  c.push_back({"tevo", "lindblad_hybrid_small", 1e-5, [] { return lindblad_errors(2, 3, 0.005, 0.2).first; }});
  c.push_back({"tevo", "lindblad_trace_small", 1e-10, [] { return lindblad_errors(2, 3, 0.005, 0.2).second; }});
  if (level == Level::Full) {
    c.push_back({"tevo", "rk4_quench_six_sites", 1e-6, [] { return quench_error(6, 1e-3, 0.5); }});
    c.push_back({"tevo", "lindblad_hybrid_three_sites", 1e-5, [] { return lindblad_errors(3, 4, 0.005, 1.0).first; }});
  }
  return c;
}

}  // namespace

json run_validate(Level level) {
  json checks = json::array();
  std::set<std::string> failed;
  bool all = true;
  for (const auto& c : build_checks(level)) {
    const auto t0 = std::chrono::steady_clock::now();
    double err = 0.0;
    std::string error_text;
    try {
      err = c.measure();
    } catch (const std::exception& e) {
      err = std::numeric_limits<double>::infinity();
      error_text = e.what();
    }
    const bool ok = std::isfinite(err) && err <= c.tolerance;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json entry{{"suite", c.suite}, {"name", c.name},    {"error", std::isfinite(err) ? json(err) : json("inf")},
               {"tolerance", c.tolerance}, {"passed", ok}, {"seconds", secs}};
    if (!error_text.empty()) entry["exception"] = error_text;
    checks.push_back(entry);
    if (!ok) {
      all = false;
      failed.insert(c.suite);
    }
  }
  return {{"level", level == Level::Full ? "full" : "fast"},
          {"passed", all},
          {"failed_suites", std::vector<std::string>(failed.begin(), failed.end())},
          {"checks", checks}};
}

}  // namespace adaptmps::cli
