// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "adaptmps/cli.hpp"
#include "adaptmps/dense_reference.hpp"
#include "adaptmps/oracle.hpp"

using namespace adaptmps;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ModelParams xyz(std::size_t L, double gamma) {
  ModelParams p;
  p.L = L;
  p.gamma = gamma;
  p.delta = 1.5;
  p.h = 0.5;
  return p;
}

ModelParams driven_bh() {
  ModelParams p;
  p.L = 3;
  p.d = 4;
  p.j = 1.0;
  p.u = 4.0;
  p.lambda1 = 1.0;
  p.lambdaL = 1.0;
  p.nbar1 = 0.75;
  p.nbarL = 0.25;
  return p;
}

DmrgResult xyz_ground(const ModelParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto init = random_state(spin_chain(p.L), {static_cast<Charge>(p.L / 2)}, 8, rng);
  DmrgOptions opts;
  opts.max_bond = 64;
  return ground_state(mpo_xyz(p), init, opts);
}

// ---------------------------------------------------------------------------
// 1. randomized contract / add / SVD against dense tensors

std::vector<Leg> random_legs(std::mt19937_64& rng, std::size_t rank, int max_total) {
  while (true) {
    std::vector<Leg> legs;
    int total = 1;
    for (std::size_t i = 0; i < rank; ++i) {
      legs.push_back(oracle::random_leg(rng, rng() % 2 ? Dir::In : Dir::Out));
      total *= legs.back().dim();
    }
    if (total <= max_total) return legs;
  }
}

int total_dim(const std::vector<Leg>& legs) {
  int n = 1;
  for (const auto& l : legs) n *= l.dim();
  return n;
}

Outcome fusion_equivalence() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int fusion_failures = 0, checked_blocks = 0;
  auto note_blocks = [&](const SymTensor& t) {
    checked_blocks += static_cast<int>(t.blocks().size());
    if (!oracle::all_blocks_fuse(t)) ++fusion_failures;
  };
  for (int c = 0; c < 500; ++c) {
    // contraction over one or two shared legs
    const std::size_t shared = 1 + rng() % 2;
    std::vector<Leg> a_legs, b_legs;
    do {
      a_legs = random_legs(rng, shared + 1 + rng() % 2, 64);
      b_legs.clear();
      for (std::size_t i = 0; i < shared; ++i) b_legs.push_back(a_legs[a_legs.size() - shared + i].dual());
      b_legs.push_back(oracle::random_leg(rng, rng() % 2 ? Dir::In : Dir::Out));
    } while (total_dim(b_legs) > 64);
    auto a = oracle::random_tensor(rng, a_legs, 0.8);
    auto b = oracle::random_tensor(rng, b_legs, 0.8);
    note_blocks(a);
    note_blocks(b);
    LegPairs pairs;
    for (std::size_t i = 0; i < shared; ++i) pairs.push_back({a_legs.size() - shared + i, i});
    auto r = contract(a, b, pairs);
    note_blocks(r);
    auto d = oracle::dense_contract(oracle::dense_of(a), oracle::dense_of(b), pairs);
    worst = std::max(worst, oracle::rel_diff(to_dense(r), d.data));

    // addition
    auto a2 = oracle::random_tensor(rng, a_legs, 0.8);
    const cplx coef = oracle::random_complex(rng);
    auto s = axpy(a, coef, a2);
    note_blocks(s);
    auto da = to_dense(a), da2 = to_dense(a2);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += coef * da2[i];
    worst = std::max(worst, oracle::rel_diff(to_dense(s), da));

    // SVD over a random row/column split
    if (a.empty()) continue;
    std::vector<std::size_t> perm(a.rank());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t n_rows = 1 + rng() % (a.rank() - 1);
    std::vector<std::size_t> rows(perm.begin(), perm.begin() + n_rows), cols(perm.begin() + n_rows, perm.end());
    auto svd = block_svd(a, rows, cols, TruncationPolicy::exact());
    note_blocks(svd.u);
    note_blocks(svd.v);
    auto back = contract(absorb_right(svd.u, svd.s), svd.v, {{n_rows, 0}});
    auto ordered = transpose(a, perm);
    worst = std::max(worst, oracle::rel_diff(to_dense(back), to_dense(ordered)));
    // singular values against the dense matrix
    const auto shape = dense_shape(ordered);
    Eigen::Index nr = 1, nc = 1;
    for (std::size_t i = 0; i < shape.size(); ++i) (i < n_rows ? nr : nc) *= shape[i];
    auto flat = to_dense(ordered);
    DenseMatrix m(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i)
      for (Eigen::Index j = 0; j < nc; ++j) m(i, j) = flat[static_cast<std::size_t>(i * nc + j)];
    Eigen::VectorXd dense_sv = Eigen::JacobiSVD<DenseMatrix>(m).singularValues();
    std::vector<double> block_sv;
    for (const auto& [q, vals] : svd.singular_values) block_sv.insert(block_sv.end(), vals.begin(), vals.end());
    std::sort(block_sv.rbegin(), block_sv.rend());
    const double scale_sv = dense_sv.size() ? dense_sv[0] : 1.0;
    for (Eigen::Index i = 0; i < dense_sv.size(); ++i) {
      const double got = static_cast<std::size_t>(i) < block_sv.size() ? block_sv[i] : 0.0;
      worst = std::max(worst, std::abs(got - dense_sv[i]) / scale_sv);
    }
  }
  return {worst <= 1e-12 && fusion_failures == 0,
          "500 cases, max rel err " + fmt(worst) + ", " + std::to_string(checked_blocks) + " blocks checked, " +
              std::to_string(fusion_failures) + " fusion violations"};
}

// ---------------------------------------------------------------------------
// 2. DMRG against the dense ground energy in the reachable sectors

Outcome dmrg_vs_exact() {
  double worst = 0.0;
  for (double g : {0.0, 0.1, 0.5, 1.0}) {
    auto p = xyz(8, g);
    auto res = xyz_ground(p, 5);
    auto sectors = reachable_charges(spin_chain(8), {4}, mpo_xyz(p).shift_charges());
    const double exact =
        oracle::dense_ground(oracle::dense_xyz(p), std::set<Charge>(sectors.begin(), sectors.end())).first;
    worst = std::max(worst, std::abs(res.energy - exact));
  }
  return {worst <= 1e-8, "L=8, gamma in {0,0.1,0.5,1}, max |dE| " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 3. sector structure of ground states

Outcome sector_structure() {
  std::ostringstream msg;
  bool ok = true;
  auto live = [](const SectorDecomposition& s, double cut) {
    std::vector<Charge> out;
    for (const auto& e : s.entries)
      if (e.weight > cut) out.push_back(e.charge);
    return out;
  };
  const std::size_t L = 12;
  auto s0 = sector_split(xyz_ground(xyz(L, 0.0), 5).state);
  const auto l0 = live(s0, 0.0);
  ok &= l0.size() == 1;
  msg << "gamma=0 sectors " << l0.size();
  int previous = 0;
  msg << "; spread";
  for (double g : {0.1, 0.4, 0.7, 1.0}) {
    auto s = sector_split(xyz_ground(xyz(L, g), 5).state);
    for (Charge q : live(s, 0.0)) ok &= ((q - static_cast<Charge>(L / 2)) % 2 == 0);  // S^z steps of 4
    const int spread = static_cast<int>(live(s, 1e-6).size());
    ok &= spread >= previous;
    previous = spread;
    msg << ' ' << spread;
  }
  msg << " for gamma 0.1,0.4,0.7,1.0";
  return {ok, msg.str()};
}

// ---------------------------------------------------------------------------
// 4. RK4 quench against dense evolution

Outcome quench_vs_exact() {
  const std::size_t L = 6;
  auto gs = xyz_ground(xyz(L, 0.0), 11);
  auto post = xyz(L, 0.5);
  EvolutionPlan plan;
  plan.dt = 1e-3;
  plan.n_steps = 500;
  plan.record_interval = 25;
  plan.policy = {64, 0.0};
  const auto spaces = spin_chain(L);
  for (std::size_t l = 0; l < L; ++l)
    plan.observables.push_back({"sz" + std::to_string(l), mpo_site(spaces, l, ops::sigma_z()), 1});
  plan.observables.push_back({"parity", mpo_parity(L), 1});
  auto traj = evolve(plan, rk4_propagator(scale(mpo_xyz(post), cplx(0, -1))), gs.state);

  const auto h = oracle::dense_xyz(post).matrix;
  const auto v0 = oracle::mps_to_dense(gs.state);
  const std::vector<int> dims(L, 2);
  double err = 0.0, parity_drift = 0.0;
  const double p0 = *traj.records.front().observables.at("parity");
  bool steps_of_four = true;
  std::set<Charge> support;
  for (const auto& r : traj.records) {
    auto v = oracle::dense_evolve(h, v0, r.t);
    for (std::size_t l = 0; l < L; ++l) {
      auto z = oracle::kron_factors(dims, {{l, ops::sigma_z()}});
      err = std::max(err, std::abs(*r.observables.at("sz" + std::to_string(l)) - v.dot(z * v).real()));
    }
    parity_drift = std::max(parity_drift, std::abs(*r.observables.at("parity") - p0));
    for (const auto& [q, w] : r.distribution)
      if (w > 1e-14) {
        support.insert(2 * q - static_cast<Charge>(L));
        steps_of_four &= (2 * q - static_cast<Charge>(L)) % 4 == 0;
      }
  }
  std::ostringstream sup;
  for (Charge s : support) sup << (sup.tellp() ? "," : "") << s;
  return {err <= 1e-6 && parity_drift <= 1e-6 && steps_of_four && support.size() > 1,
          "L=6 dt=1e-3 t=0.5, max sz err " + fmt(err) + ", parity drift " + fmt(parity_drift) + ", Sz support {" +
              sup.str() + "}"};
}

// ---------------------------------------------------------------------------
// 5/6. driven Bose-Hubbard chain against the dense Lindblad oracle

struct LindbladRun {
  double obs_err = 0.0;
  double trace_dev = 0.0;
  double odd = 0.0;
};

// Dense reference <n_l>(t) on a fixed time grid, stepped incrementally.
std::vector<std::vector<double>> dense_occupations(const ModelParams& p, const AsMps& gs, double spacing,
                                                   int points) {
  auto sys = oracle::dense_lindblad_bh(p);
  auto v = oracle::mps_to_dense(gs);
  DenseMatrix rho = v * v.adjoint();
  const std::vector<int> dims(p.L, p.d);
  std::vector<std::vector<double>> out;
  for (int k = 0; k <= points; ++k) {
    if (k > 0) rho = oracle::dense_lindblad(sys, rho, spacing);
    std::vector<double> n;
    for (std::size_t l = 0; l < p.L; ++l)
      n.push_back((oracle::kron_factors(dims, {{l, ops::boson_number(p.d)}}) * rho).trace().real());
    out.push_back(n);
  }
  return out;
}

AsMps bh_ground(const ModelParams& p) {
  ModelParams h = p;
  std::mt19937_64 rng(12);
  auto init = random_state(boson_chain(p.L, p.d), {static_cast<Charge>(p.L / 2)}, 8, rng);
  return ground_state(mpo_bose_hubbard(h), init, {}).state;
}

LindbladRun lindblad_run(const ModelParams& p, const AsMps& gs, Scheme scheme, double dt, double t_final,
                         const std::vector<std::vector<double>>& reference, double spacing) {
  EvolutionPlan plan;
  plan.scheme = scheme;
  plan.dt = dt;
  plan.n_steps = static_cast<int>(std::lround(t_final / dt));
  plan.record_interval = 1;
  plan.policy = {1024, 0.0};
  plan.renormalize = Renormalize::None;
  const int every = static_cast<int>(std::lround(spacing / dt));
  const auto phys = boson_chain(p.L, p.d);
  for (std::size_t l = 0; l < p.L; ++l)
    plan.observables.push_back(
        {"n" + std::to_string(l), vectorized_observable(phys, {{l, ops::boson_number(p.d)}}), every});
  Propagator prop;
  if (scheme == Scheme::HybridTrotter) {
    prop = lindblad_trotter_propagator(p, dt);
  } else {
    auto [sym, asym] = lindblad_mpo(p);
    prop = rk4_propagator(add_mpo(sym, asym));
  }
  auto traj = evolve(plan, prop, vectorize_pure(gs), {});
  LindbladRun out;
  for (const auto& r : traj.records) {
    out.trace_dev = std::max(out.trace_dev, std::abs(r.norm2 - 1.0));
    out.odd = std::max(out.odd, r.odd_weight);
    if (r.step % every != 0) continue;
    const auto& ref = reference.at(static_cast<std::size_t>(r.step / every));
    for (std::size_t l = 0; l < p.L; ++l)
      out.obs_err = std::max(out.obs_err, std::abs(*r.observables.at("n" + std::to_string(l)) - ref[l]));
  }
  return out;
}

struct LindbladFixture {
  ModelParams p = driven_bh();
  AsMps gs;
  std::vector<std::vector<double>> reference;  // every 0.1 up to t = 1
  LindbladFixture() : gs(bh_ground(p)), reference(dense_occupations(p, gs, 0.1, 10)) {}
};

const LindbladFixture& lindblad_fixture() {
  static const LindbladFixture f;
  return f;
}

Outcome lindblad_vs_exact() {
  const auto& f = lindblad_fixture();
  auto r = lindblad_run(f.p, f.gs, Scheme::HybridTrotter, 0.005, 1.0, f.reference, 0.1);
  return {r.obs_err <= 1e-5 && r.trace_dev <= 1e-8 && r.odd <= 1e-10,
          "L=3 d=4 dt=0.005 t=1, max n err " + fmt(r.obs_err) + ", trace dev " + fmt(r.trace_dev) +
              ", max odd-q weight " + fmt(r.odd)};
}

Outcome convergence_orders() {
  const auto& f = lindblad_fixture();
  auto h1 = lindblad_run(f.p, f.gs, Scheme::HybridTrotter, 0.01, 1.0, f.reference, 0.1).obs_err;
  auto h2 = lindblad_run(f.p, f.gs, Scheme::HybridTrotter, 0.005, 1.0, f.reference, 0.1).obs_err;
  auto r1 = lindblad_run(f.p, f.gs, Scheme::Rk4Mpo, 0.02, 1.0, f.reference, 0.1).obs_err;
  auto r2 = lindblad_run(f.p, f.gs, Scheme::Rk4Mpo, 0.01, 1.0, f.reference, 0.1).obs_err;
  const double hybrid = h1 / h2, rk4 = r1 / r2;
  return {hybrid >= 3.5 && rk4 >= 12.0, "hybrid dt 0.01/0.005 ratio " + fmt(hybrid) + " (" + fmt(h1) + " -> " +
                                            fmt(h2) + "), RK4 dt 0.02/0.01 ratio " + fmt(rk4) + " (" + fmt(r1) +
                                            " -> " + fmt(r2) + ")"};
}

// ---------------------------------------------------------------------------
// 7. single damped site relaxes to the bath occupation

Outcome single_site_thermalization() {
  ModelParams p;
  p.L = 1;
  p.d = 30;
  p.j = 0.0;
  p.u = 4.0;
  p.lambda1 = 1.0;
  p.nbar1 = 0.75;
  const auto phys = boson_chain(1, p.d);
  std::vector<AsMps> starts;
  for (int n : {0, 1, 5, 12}) starts.push_back(vectorize_pure(basis_state(phys, {n})));
  DenseVector coherent = DenseVector::Zero(p.d);
  for (int n = 0; n < 6; ++n) coherent[n] = std::pow(0.9, n) / std::sqrt(std::tgamma(n + 1.0));
  starts.push_back(vectorize_pure(product_state(phys, {coherent / coherent.norm()})));

  // with one site every term sits in the exact single-site exponential, so
  // the step size carries no splitting error
  const double dt = 0.1;
  EvolutionPlan plan;
  plan.scheme = Scheme::HybridTrotter;
  plan.dt = dt;
  plan.n_steps = static_cast<int>(std::lround(10.0 / p.lambda1 / dt));
  plan.record_interval = plan.n_steps;
  plan.policy = {1024, 0.0};
  plan.renormalize = Renormalize::None;
  plan.observables.push_back({"n", vectorized_observable(phys, {{0, ops::boson_number(p.d)}}), 1});
  double worst = 0.0;
  for (const auto& rho : starts) {
    auto traj = evolve(plan, lindblad_trotter_propagator(p, dt), rho);
    worst = std::max(worst, std::abs(*traj.records.back().observables.at("n") - p.nbar1));
  }
  return {worst <= 1e-6, "d=30, 5 initial states, max |<n> - nbar| at t=10/Lambda " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 8. three-site fixtures

DenseMatrix pauli(char which) {
  DenseMatrix m(2, 2);
  if (which == 'x') m << 0, 1, 1, 0;
  if (which == 'y') m << 0, cplx(0, -1), cplx(0, 1), 0;
  if (which == 'z') m << -1, 0, 0, 1;
  return m;
}

// Row (1x4) * middle (4x4) * column (4x1) of operator-valued matrices; the
// lower-left middle slot is the on-site field h * sigma^z.
DenseMatrix operator_valued_xyz(double gamma, double delta, double h) {
  const DenseMatrix I = DenseMatrix::Identity(2, 2), Z = DenseMatrix::Zero(2, 2);
  const DenseMatrix x = pauli('x'), y = pauli('y'), z = pauli('z');
  std::vector<DenseMatrix> first{(1 + gamma) * x, (1 - gamma) * y, delta * z, I};
  std::vector<std::vector<DenseMatrix>> mid{
      {x, Z, Z, Z}, {y, Z, Z, Z}, {z, Z, Z, Z}, {h * z, (1 + gamma) * x, (1 - gamma) * y, delta * z}};
  std::vector<DenseMatrix> last{I, x, y, z};
  DenseMatrix out = DenseMatrix::Zero(8, 8);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out += oracle::kron_factors({2, 2, 2}, {{0, first[i]}, {1, mid[i][j]}, {2, last[j]}});
  return out;
}

SymTensor fixture(std::vector<Leg> legs, std::vector<std::pair<Key, double>> entries) {
  BlockMap blocks;
  for (auto& [k, v] : entries) blocks.emplace(k, Block({1, 1, 1}, {cplx(v)}));
  return make_tensor(std::move(legs), std::move(blocks));
}

// Same charges on every bond leg, same block keys, and the same magnitudes.
bool same_structure(const SymTensor& got, const SymTensor& want, bool compare_physical) {
  for (std::size_t i = compare_physical ? 0 : 1; i < 3; ++i)
    if (!(got.leg(i) == want.leg(i))) return false;
  if (got.blocks().size() != want.blocks().size()) return false;
  for (const auto& [k, b] : want.blocks()) {
    const Block* g = got.find_block(k);
    if (!g || g->size() != 1 || std::abs(std::abs(g->data[0]) - std::abs(b.data[0])) > 1e-14) return false;
  }
  return true;
}

Outcome three_site_fixtures() {
  const double r = std::sqrt(0.5);
  const Leg s1(Dir::Out, {{1, 1}}), s01(Dir::Out, {{0, 1}, {1, 1}}), s0(Dir::Out, {{0, 1}});
  auto m1 = fixture({s1, Leg(Dir::In, {{1, 1}, {2, 1}}), s01}, {{{1, 1, 0}, r}, {{1, 2, 1}, r}});
  auto m2 = fixture({s01, s01.dual(), s0}, {{{0, 0, 0}, 1.0}, {{1, 1, 0}, 1.0}});
  auto m3 = fixture({s0, s0.dual(), s0}, {{{0, 0, 0}, 1.0}});

  auto spins = spin_chain(3);
  auto psi = compress(add_mps(scale(basis_state(spins, {1, 1, 0}), r), scale(basis_state(spins, {1, 0, 0}), r)),
                      TruncationPolicy::exact())
                 .first;
  // physical legs of the chain list every local charge; bond legs and blocks must match exactly
  bool tensors = same_structure(psi.site(0), m1, false) && same_structure(psi.site(1), m2, false) &&
                 same_structure(psi.site(2), m3, false);
  for (std::size_t l = 0; l < 3; ++l) tensors &= psi.site(l).leg(0).charges() == std::vector<Charge>{0, 1};
  DenseVector expected = DenseVector::Zero(8);
  expected[0b110] = expected[0b100] = r;
  const double state_err = (oracle::mps_to_dense(psi) - expected).norm();

  double mpo_err = 0.0;
  for (double h : {0.0, 0.7}) {
    auto p = xyz(3, 0.5);
    p.h = h;
    DenseMatrix want = operator_valued_xyz(0.5, 1.5, h);
    // the operator-valued product carries the field of the middle site only
    want += h * (oracle::kron_factors({2, 2, 2}, {{0, pauli('z')}}) + oracle::kron_factors({2, 2, 2}, {{2, pauli('z')}}));
    mpo_err = std::max(mpo_err, max_abs(oracle::mpo_to_dense(mpo_xyz(p)) - want));
  }
  auto b1 = [](double g) {
    auto v = mpo_xyz(xyz(3, g)).shift_charges();
    return std::set<Charge>(v.begin(), v.end());
  };
  const bool charges = b1(0.0) == std::set<Charge>{0} && b1(0.5) == std::set<Charge>{-2, 0, 2};
  return {tensors && state_err <= 1e-14 && mpo_err <= 1e-12 && charges,
          std::string("M1-M3 structure ") + (tensors ? "matches" : "differs") + ", state err " + fmt(state_err) +
              ", MPO err " + fmt(mpo_err) + ", b1 sets " + (charges ? "{0} and {-2,0,2}" : "wrong")};
}

// ---------------------------------------------------------------------------
// 9. byte-identical outputs for repeated runs

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "adaptmps_acceptance_determinism";
  fs::remove_all(root);
  auto with_dir = [&](json cfg, const std::string& name) {
    cfg["output"]["directory"] = (root / name).string();
    return cfg;
  };
  const json gs{{"model", {{"model", "xyz"}, {"l", 8}, {"gamma", 0.5}, {"delta", 1.5}, {"h", 0.5}}},
                {"gs", {{"max_bond", 32}}},
                {"seed", 17}};
  const json quench{{"model", {{"model", "xyz"}, {"l", 6}, {"gamma", 0.5}, {"delta", 1.5}, {"h", 0.5}}},
                    {"quench", {{"dt", 0.01}, {"n_steps", 30}}},
                    {"output", {{"record_interval", 5}}},
                    {"seed", 17}};
  const json lindblad{{"model",
                       {{"model", "lindblad_bh"}, {"l", 2}, {"d", 3}, {"u", 4.0}, {"lambda1", 1.0},
                        {"lambdaL", 1.0}, {"nbar1", 0.75}, {"nbarL", 0.25}}},
                      {"lindblad", {{"scheme", "hybrid_trotter"}, {"dt", 0.01}, {"n_steps", 30}}},
                      {"output", {{"record_interval", 5}}},
                      {"seed", 17}};
  bool same = true;
  int files = 0;
  for (const char* run : {"a", "b"}) {
    cli::run_gs(with_dir(gs, std::string("gs_") + run));
    cli::run_quench(with_dir(quench, std::string("quench_") + run));
    cli::run_lindblad(with_dir(lindblad, std::string("lindblad_") + run));
  }
  for (const auto& [name, file] : std::vector<std::pair<std::string, std::string>>{
           {"gs", "pn.csv"}, {"quench", "trajectory.csv"}, {"lindblad", "trajectory.csv"}}) {
    const auto a = slurp(root / (name + "_a") / file), b = slurp(root / (name + "_b") / file);
    same &= !a.empty() && a == b;
    ++files;
  }
  fs::remove_all(root);
  return {same, std::to_string(files) + " CSVs from gs/quench/lindblad compared byte for byte"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 fusion_dense_equivalence", fusion_equivalence},
      {"2 dmrg_vs_exact", dmrg_vs_exact},
      {"3 ground_state_sector_structure", sector_structure},
      {"4 quench_vs_exact", quench_vs_exact},
      {"5 lindblad_vs_exact", lindblad_vs_exact},
      {"6 convergence_orders", convergence_orders},
      {"7 single_site_thermalization", single_site_thermalization},
      {"8 three_site_fixtures", three_site_fixtures},
      {"9 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
