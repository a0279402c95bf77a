#include <gtest/gtest.h>

#include "adaptmps/dmrg.hpp"
#include "adaptmps/models.hpp"
#include "adaptmps/oracle.hpp"

using namespace adaptmps;

namespace {

ModelParams xyz(std::size_t L, double gamma, double h) {
  ModelParams p;
  p.L = L;
  p.gamma = gamma;
  p.delta = 1.5;
  p.h = h;
  return p;
}

// Lowest dense energy on the span of a set of total charges.
double dense_min(const ModelParams& p, const std::vector<Charge>& sectors) {
  return oracle::dense_ground(oracle::dense_xyz(p), std::set<Charge>(sectors.begin(), sectors.end())).first;
}

}  // namespace

TEST(Dmrg, ReachableCharges) {
  auto s = spin_chain(8);
  EXPECT_EQ(reachable_charges(s, {4}, {0}), (std::vector<Charge>{4}));
  EXPECT_EQ(reachable_charges(s, {4}, {-2, 0, 2}), (std::vector<Charge>{0, 2, 4, 6, 8}));
  EXPECT_EQ(reachable_charges(s, {3}, {-2, 0, 2}), (std::vector<Charge>{1, 3, 5, 7}));
}

TEST(Dmrg, LanczosMatchesDenseEigenvalue) {
  std::mt19937_64 rng(3);
  auto psi = random_state(spin_chain(4), {2}, 4, rng);
  auto h = mpo_xyz(xyz(4, 0.0, 0.5));
  auto theta = contract(psi.site(1), psi.site(2), {{2, 1}});
  psi = canonicalize(psi, 1);
  theta = contract(psi.site(1), psi.site(2), {{2, 1}});
  auto envL = grow_env(init_left_boundary(psi, h), psi.site(0), h.site(0), psi.site(0), Side::Left);
  auto envR = grow_env(init_right_boundary(), psi.site(3), h.site(3), psi.site(3), Side::Right);
  auto apply = [&](const SymTensor& x) { return effective_apply(envL, h.site(1), h.site(2), envR, x); };

  // dense matrix of the effective operator from basis vectors
  std::vector<std::pair<Key, std::size_t>> index;
  for (const auto& [k, b] : theta.blocks())
    for (std::size_t i = 0; i < b.size(); ++i) index.push_back({k, i});
  const auto n = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    SymTensor e(theta.legs());
    for (const auto& [k, b] : theta.blocks()) e.set_block(k, Block(b.shape));
    SymTensor basis = e;
    auto blk = *basis.find_block(index[c].first);
    blk.data[index[c].second] = 1.0;
    basis.set_block(index[c].first, blk);
    auto y = apply(basis);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Block* yb = y.find_block(index[r].first);
      m(r, c) = yb ? yb->data[index[r].second] : cplx{};
    }
  }
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  auto res = lanczos(apply, theta, {});
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.value, es.eigenvalues()[0], 1e-10);
  cplx rq = inner(theta, apply(theta));
  EXPECT_LT(std::abs(rq.imag()), 1e-12);
}

TEST(Dmrg, EffectiveApplyOfIdentityIsIdentity) {
  std::mt19937_64 rng(4);
  auto psi = canonicalize(random_state(spin_chain(5), {2, 3}, 4, rng), 2);
  auto id = identity_mpo(psi.spaces());
  auto envL = init_left_boundary(psi, id);
  for (std::size_t l = 0; l < 2; ++l) envL = grow_env(envL, psi.site(l), id.site(l), psi.site(l), Side::Left);
  auto envR = init_right_boundary();
  for (std::size_t l = 5; l-- > 4;) envR = grow_env(envR, psi.site(l), id.site(l), psi.site(l), Side::Right);
  auto x = contract(psi.site(2), psi.site(3), {{2, 1}});
  auto y = effective_apply(envL, id.site(2), id.site(3), envR, x);
  ASSERT_TRUE(y.legs() == x.legs());
  EXPECT_LT(axpy(y, -1.0, x).norm(), 1e-12);
}

TEST(Dmrg, TwoSiteXxzEnergy) {
  auto h = mpo_xyz(xyz(2, 0.0, 0.0));
  auto psi = basis_state(spin_chain(2), {1, 0});
  auto res = ground_state(h, psi, {});
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.energy, -3.5, 1e-12);
  EXPECT_EQ(res.state.total_charges(), (std::vector<Charge>{1}));
}

TEST(Dmrg, SingleSiteChain) {
  ModelParams p = xyz(1, 0.0, 0.5);
  DenseVector a(2);
  a << 1.0, 1.0;
  auto res = ground_state(mpo_xyz(p), product_state(spin_chain(1), {a}), {});
  EXPECT_NEAR(res.energy, -0.5, 1e-12);
  EXPECT_EQ(res.state.total_charges(), (std::vector<Charge>{0}));
}

TEST(Dmrg, XxzEightSitesStaysInSector) {
  auto p = xyz(8, 0.0, 0.5);
  std::mt19937_64 rng(5);
  auto init = random_state(spin_chain(8), {4}, 8, rng);
  std::vector<SweepRecord> seen;
  auto res = ground_state(mpo_xyz(p), init, {}, [&](const SweepRecord& r) { seen.push_back(r); });
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(seen.size(), res.history.size());
  EXPECT_NEAR(res.energy, dense_min(p, {4}), 1e-8);
  EXPECT_EQ(res.state.total_charges(), (std::vector<Charge>{4}));
  EXPECT_LT(canonical_error(res.state), 1e-12);
  for (std::size_t i = 1; i < res.history.size(); ++i)
    EXPECT_LE(res.history[i].energy, res.history[i - 1].energy + 1e-10);
  EXPECT_NEAR(expectation(res.state, mpo_xyz(p)).real(), res.energy, 1e-9);
}

TEST(Dmrg, XyzEightSitesAdaptsSectors) {
  for (double gamma : {0.1, 0.5, 1.0}) {
    auto p = xyz(8, gamma, 0.5);
    std::mt19937_64 rng(6);
    auto init = random_state(spin_chain(8), {4}, 8, rng);
    auto res = ground_state(mpo_xyz(p), init, {});
    EXPECT_TRUE(res.converged) << gamma;
    const double exact = dense_min(p, {0, 2, 4, 6, 8});
    EXPECT_NEAR(res.energy, exact, 1e-8) << gamma;
    EXPECT_GE(res.energy, exact - 1e-9);
    auto split = sector_split(res.state);
    for (const auto& e : split.entries) EXPECT_EQ((e.charge - 4) % 2, 0);
    EXPECT_GT(split.entries.size(), 1u);
  }
}

TEST(Dmrg, RejectsBadInputs) {
  auto h = mpo_xyz(xyz(3, 0.0, 0.0));
  auto zero = scale(basis_state(spin_chain(3), {1, 0, 0}), 0.0);
  EXPECT_THROW(ground_state(h, zero, {}), ZeroNormInitial);
  DmrgOptions bad;
  bad.energy_tolerance = 0;
  EXPECT_THROW(ground_state(h, basis_state(spin_chain(3), {1, 0, 0}), bad), InvalidParams);
  auto nonherm = product_mpo(spin_chain(3), {{0, ops::sigma_plus()}, {1, ops::sigma_minus()}});
  EXPECT_THROW(ground_state(nonherm, basis_state(spin_chain(3), {1, 0, 0}), {}), InvalidParams);
  EXPECT_NE(to_json_line({2, -1.5, 8, 1e-12}).find("\"sweep\":2"), std::string::npos);
}
