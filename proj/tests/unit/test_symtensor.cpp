#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "adaptmps/kernels.hpp"
#include "adaptmps/symtensor.hpp"
#include "test_support.hpp"

using namespace adaptmps;
using namespace adaptmps::testing;

namespace {

const double kHalf = std::sqrt(2.0) / 2.0;

Block scalar_block(cplx v, std::size_t rank) { return Block(std::vector<int>(rank, 1), {v}); }

SymTensor fixture_m1() {
  return make_tensor({Leg(Dir::Out, {{1, 1}}), Leg(Dir::In, {{1, 1}, {2, 1}}), Leg(Dir::Out, {{0, 1}, {1, 1}})},
                     {{{1, 1, 0}, scalar_block(kHalf, 3)}, {{1, 2, 1}, scalar_block(kHalf, 3)}});
}

SymTensor fixture_m2() {
  return make_tensor({Leg(Dir::Out, {{0, 1}, {1, 1}}), Leg(Dir::In, {{0, 1}, {1, 1}}), Leg(Dir::Out, {{0, 1}})},
                     {{{0, 0, 0}, scalar_block(1.0, 3)}, {{1, 1, 0}, scalar_block(1.0, 3)}});
}

SymTensor fixture_m3() {
  return make_tensor({Leg(Dir::Out, {{0, 1}}), Leg(Dir::In, {{0, 1}}), Leg(Dir::Out, {{0, 1}})},
                     {{{0, 0, 0}, scalar_block(1.0, 3)}});
}

SymTensor diag_matrix(std::map<Charge, double> values) {
  std::vector<Sector> s;
  for (auto [c, v] : values) s.push_back({c, 1});
  SymTensor t({Leg(Dir::In, s), Leg(Dir::Out, s)});
  for (auto [c, v] : values) t.set_block({c, c}, Block({1, 1}, {v}));
  return t;
}

}  // namespace

TEST(SymTensor, ThreeSiteTensorIsValid) {
  auto m1 = fixture_m1();
  EXPECT_EQ(m1.blocks().size(), 2u);
  EXPECT_TRUE(all_blocks_fuse(m1));
}

TEST(SymTensor, TrivialScalarLikeTensor) {
  auto t = make_tensor({Leg(Dir::In, {{0, 1}}), Leg(Dir::Out, {{0, 1}})}, {{{0, 0}, Block({1, 1}, {1.0})}});
  EXPECT_DOUBLE_EQ(t.norm(), 1.0);
}

TEST(SymTensor, RejectsFusionViolation) {
  auto legs = fixture_m1().legs();
  EXPECT_THROW(make_tensor(legs, {{{1, 1, 1}, scalar_block(1.0, 3)}}), FusionViolation);
}

TEST(SymTensor, RejectsShapeAndUnknownCharge) {
  auto legs = fixture_m1().legs();
  EXPECT_THROW(make_tensor(legs, {{{1, 1, 0}, Block({1, 2, 1})}}), ShapeMismatch);
  EXPECT_THROW(make_tensor(legs, {{{1, 3, 2}, scalar_block(1.0, 3)}}), UnknownCharge);
}

TEST(SymTensor, RejectsMalformedLegs) {
  EXPECT_THROW(Leg(Dir::In, {{1, 1}, {0, 1}}), InvalidLeg);
  EXPECT_THROW(Leg(Dir::In, {{0, 0}}), InvalidLeg);
}

TEST(SymTensor, ThreeSiteM2M3Contraction) {
  auto t = contract(fixture_m2(), fixture_m3(), {{2, 1}});
  // legs (s2, a2, s3, a4); a4 carries only charge 0
  ASSERT_EQ(t.rank(), 4u);
  EXPECT_EQ(t.blocks().size(), 2u);
  EXPECT_EQ(t.find_block({0, 0, 0, 0})->data[0], cplx(1.0));
  EXPECT_EQ(t.find_block({1, 1, 0, 0})->data[0], cplx(1.0));
}

TEST(SymTensor, ContractWithIdentityKeepsBlocks) {
  std::mt19937_64 rng(3);
  auto a = random_tensor(rng, {random_leg(rng, Dir::Out), random_leg(rng, Dir::In), random_leg(rng, Dir::Out)});
  const Leg& l = a.leg(2);
  SymTensor id({l.dual(), l});
  for (const auto& s : l.sectors()) {
    Block b({s.dim, s.dim});
    for (int i = 0; i < s.dim; ++i) b.data[i * s.dim + i] = 1.0;
    id.set_block({s.charge, s.charge}, b);
  }
  auto r = contract(a, id, {{2, 0}});
  EXPECT_LT(rel_diff(to_dense(r), to_dense(a)), 1e-15);
}

TEST(SymTensor, ThreeSiteStateNorm) {
  auto m1 = fixture_m1(), m2 = fixture_m2(), m3 = fixture_m3();
  auto psi = contract(contract(m1, m2, {{2, 1}}), m3, {{3, 1}});  // (s1, a1, s2, s3, a4)
  // Dense oracle: the state has two nonzero amplitudes
  std::vector<cplx> dense(8, 0.0);
  dense[0b110] = kHalf;
  dense[0b100] = kHalf;
  double dense_norm = 0;
  for (auto v : dense) dense_norm += std::norm(v);
  auto n = contract(conjugate(psi), psi, {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}});
  EXPECT_NEAR(n.scalar().real(), dense_norm, 1e-15);
  EXPECT_NEAR(n.scalar().real(), 1.0, 1e-15);
}

TEST(SymTensor, ConjugateFlipsAndConjugates) {
  auto t = make_tensor(fixture_m1().legs(), {{{1, 1, 0}, scalar_block(cplx(0, 1), 3)}});
  auto c = conjugate(t);
  EXPECT_EQ(c.find_block({1, 1, 0})->data[0], cplx(0, -1));
  EXPECT_EQ(c.leg(0).dir(), Dir::In);
  EXPECT_EQ(c.leg(1).dir(), Dir::Out);
  auto cc = conjugate(c);
  EXPECT_EQ(cc.legs(), t.legs());
  EXPECT_EQ(to_dense(cc), to_dense(t));
}

TEST(SymTensor, ConjugateM1GivesHalfIdentity) {
  auto m1 = fixture_m1();
  auto g = contract(conjugate(m1), m1, {{0, 0}, {2, 2}});  // (a1', a1)
  auto d = to_dense(g);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_NEAR(std::abs(d[0] - 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(d[3] - 0.5), 0, 1e-15);
  EXPECT_EQ(d[1], cplx{});
  EXPECT_EQ(d[2], cplx{});
}

TEST(SymTensor, FuseTwoOutLegs) {
  Leg l(Dir::Out, {{0, 1}, {1, 1}});
  SymTensor t({l, l, Leg(Dir::In, {{0, 1}, {1, 1}, {2, 1}})});
  auto [f, map] = fuse_legs(t, {{0, 1}, {2}});
  EXPECT_EQ(f.leg(0).sectors(), (std::vector<Sector>{{0, 1}, {1, 2}, {2, 1}}));
}

TEST(SymTensor, FuseSingleLegsIsIdentity) {
  auto m1 = fixture_m1();
  auto [f, map] = fuse_legs(m1, {{0}, {1}, {2}});
  EXPECT_EQ(f.legs(), m1.legs());
  EXPECT_EQ(to_dense(f), to_dense(m1));
  auto back = split_legs(f, map);
  EXPECT_EQ(back.legs(), m1.legs());
  EXPECT_EQ(to_dense(back), to_dense(m1));
}

TEST(SymTensor, FuseRoundTripRandom) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Leg> legs{random_leg(rng, Dir::Out), random_leg(rng, Dir::In), random_leg(rng, Dir::Out),
                          random_leg(rng, Dir::In)};
    auto t = random_tensor(rng, legs, 0.7);
    auto [f, map] = fuse_legs(t, {{0, 2}, {1, 3}});
    EXPECT_TRUE(all_blocks_fuse(f));
    auto back = split_legs(f, map);
    EXPECT_EQ(back.legs(), t.legs());
    EXPECT_EQ(to_dense(back), to_dense(t));
  }
}

TEST(SymTensor, FuseRejectsMixedDirections) {
  EXPECT_THROW(fuse_legs(fixture_m1(), {{0, 1}, {2}}), MixedDirectionGroup);
}

TEST(SymTensor, AddAndScale) {
  auto m1 = fixture_m1();
  EXPECT_TRUE(add(m1, scale(m1, -1.0)).empty());
  auto s = scale(m1, std::sqrt(2.0));
  EXPECT_NEAR(s.norm2(), 2.0, 1e-14);
  auto a = make_tensor(m1.legs(), {{{1, 1, 0}, scalar_block(1.0, 3)}});
  auto b = make_tensor(m1.legs(), {{{1, 2, 1}, scalar_block(2.0, 3)}});
  EXPECT_EQ(add(a, b).blocks().size(), 2u);
  EXPECT_THROW(add(m1, fixture_m2()), LegMismatch);
}

TEST(SymTensor, ContractChecksDirectionsAndSectors) {
  auto m1 = fixture_m1();
  EXPECT_THROW(contract(m1, m1, {{0, 0}}), DirectionMismatch);
  EXPECT_THROW(contract(m1, fixture_m3(), {{2, 1}}), SectorMismatch);
  EXPECT_NO_THROW(contract(m1, fixture_m3(), {{2, 1}}, SectorPolicy::Common));
}

TEST(SymTensor, SvdDiagonalSectors) {
  auto res = block_svd(diag_matrix({{0, 3.0}, {1, 4.0}}), {0}, {1}, {2, 0.0});
  EXPECT_EQ(res.singular_values.size(), 2u);
  EXPECT_DOUBLE_EQ(res.singular_values[1][0], 4.0);
  EXPECT_DOUBLE_EQ(res.singular_values[0][0], 3.0);
  EXPECT_DOUBLE_EQ(res.discarded_weight, 0.0);
}

TEST(SymTensor, SvdTruncatesToLargest) {
  auto res = block_svd(diag_matrix({{0, 3.0}, {1, 4.0}}), {0}, {1}, {1, 0.0});
  ASSERT_EQ(res.singular_values.size(), 1u);
  EXPECT_DOUBLE_EQ(res.singular_values.at(1)[0], 4.0);
  EXPECT_NEAR(res.discarded_weight, 9.0 / 25.0, 1e-15);
}

TEST(SymTensor, SvdTieKeepsSmallerCharge) {
  auto res = block_svd(diag_matrix({{-1, 2.0}, {3, 2.0}}), {0}, {1}, {1, 0.0});
  ASSERT_EQ(res.singular_values.size(), 1u);
  EXPECT_TRUE(res.singular_values.count(-1));
}

TEST(SymTensor, SvdRespectsTolerance) {
  auto res = block_svd(diag_matrix({{0, 3.0}, {1, 4.0}, {2, 0.1}}), {0}, {1}, {10, 1e-3});
  EXPECT_EQ(res.singular_values.size(), 2u);
  EXPECT_NEAR(res.discarded_weight, 0.01 / 25.01, 1e-15);
}

TEST(SymTensor, SvdOfThreeSiteFixturePair) {
  auto m12 = contract(fixture_m1(), fixture_m2(), {{2, 1}});  // (s1, a1, s2, a3)
  auto res = block_svd(m12, {0, 1}, {2, 3}, TruncationPolicy::exact());
  // Dense oracle: the 4x2 matrix (s1 a1) x (s2 a3)
  auto d = to_dense(m12);
  auto shape = dense_shape(m12);
  Eigen::MatrixXcd m(shape[0] * shape[1], shape[2] * shape[3]);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = d[r * m.cols() + c];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  std::vector<double> dense_sv;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12) dense_sv.push_back(svd.singularValues()[i]);
  ASSERT_EQ(dense_sv.size(), 2u);
  ASSERT_EQ(res.singular_values.size(), 2u);
  EXPECT_TRUE(res.singular_values.count(0) && res.singular_values.count(1));
  for (auto& [c, sv] : res.singular_values) {
    ASSERT_EQ(sv.size(), 1u);
    EXPECT_NEAR(sv[0], kHalf, 1e-15);
    EXPECT_NEAR(sv[0], dense_sv[0], 1e-14);
  }
}

TEST(SymTensor, SvdReconstructionBound) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Leg> legs{random_leg(rng, Dir::Out), random_leg(rng, Dir::In), random_leg(rng, Dir::Out)};
    auto t = random_tensor(rng, legs);
    if (t.empty()) continue;
    TruncationPolicy p{1 + trial % 4, trial % 3 == 0 ? 0.05 : 0.0};
    auto res = block_svd(t, {0, 1}, {2}, p);
    auto rec = contract(absorb_right(res.u, res.s), res.v, {{2, 0}});
    EXPECT_LE(rel_diff(to_dense(rec), to_dense(t)), std::sqrt(res.discarded_weight) + 1e-12);
    EXPECT_TRUE(all_blocks_fuse(res.u) && all_blocks_fuse(res.v) && all_blocks_fuse(res.s));
  }
}

TEST(SymTensor, SvdRejectsEmpty) {
  SymTensor t(fixture_m1().legs());
  EXPECT_THROW(block_svd(t, {0, 1}, {2}, {}), EmptyTensor);
}

TEST(SymTensor, ContractMatchesDenseOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Leg shared = random_leg(rng, Dir::Out);
    auto a = random_tensor(rng, {random_leg(rng, Dir::Out), random_leg(rng, Dir::In), shared}, 0.8);
    auto b = random_tensor(rng, {shared.dual(), random_leg(rng, Dir::Out)}, 0.8);
    auto r = contract(a, b, {{2, 0}});
    auto dr = dense_contract(dense_of(a), dense_of(b), {{2, 0}});
    EXPECT_LT(rel_diff(to_dense(r), dr.data), 1e-12);
    EXPECT_TRUE(all_blocks_fuse(r));
  }
}

TEST(SymTensor, ContractIsBilinear) {
  std::mt19937_64 rng(9);
  Leg shared = random_leg(rng, Dir::Out);
  std::vector<Leg> al{random_leg(rng, Dir::In), shared};
  auto a1 = random_tensor(rng, al), a2 = random_tensor(rng, al);
  auto b = random_tensor(rng, {shared.dual(), random_leg(rng, Dir::Out)});
  cplx c(0.3, -1.2);
  auto lhs = contract(axpy(a1, c, a2), b, {{1, 0}});
  auto rhs = axpy(contract(a1, b, {{1, 0}}), c, contract(a2, b, {{1, 0}}));
  EXPECT_LT(rel_diff(to_dense(lhs), to_dense(rhs)), 1e-13);
}

TEST(SymTensor, SerialAndParallelContractAreBitIdentical) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Leg shared(Dir::Out, {{-1, 5}, {0, 7}, {1, 6}, {2, 4}});
    Leg free(Dir::In, {{-1, 8}, {0, 9}, {1, 5}, {2, 3}});
    auto a = random_tensor(rng, {Leg(Dir::Out, {{0, 3}, {1, 2}}), free, shared});
    auto b = random_tensor(rng, {shared.dual(), Leg(Dir::Out, {{-1, 4}, {0, 6}, {1, 7}, {2, 2}, {3, 3}})});
    auto s = kernels::contract_serial(a, b, {{2, 0}}, SectorPolicy::Exact);
    auto p = kernels::contract_parallel(a, b, {{2, 0}}, SectorPolicy::Exact);
    ASSERT_EQ(s.blocks().size(), p.blocks().size());
    for (const auto& [k, blk] : s.blocks()) EXPECT_EQ(blk.data, p.find_block(k)->data);
  }
}

TEST(SymTensor, TransposeMatchesDense) {
  std::mt19937_64 rng(17);
  auto t = random_tensor(rng, {random_leg(rng, Dir::Out), random_leg(rng, Dir::In), random_leg(rng, Dir::Out)});
  auto tt = transpose(t, {2, 0, 1});
  auto d = to_dense(t), dt = to_dense(tt);
  auto sh = dense_shape(t);
  for (int i = 0; i < sh[0]; ++i)
    for (int j = 0; j < sh[1]; ++j)
      for (int k = 0; k < sh[2]; ++k) EXPECT_EQ(d[(i * sh[1] + j) * sh[2] + k], dt[(k * sh[0] + i) * sh[1] + j]);
}

TEST(SymTensor, DirectSumPlacesOperands) {
  Leg p(Dir::Out, {{0, 1}});
  auto a = make_tensor({p, Leg(Dir::In, {{0, 1}}), Leg(Dir::Out, {{0, 2}})}, {{{0, 0, 0}, Block({1, 1, 2}, {1.0, 2.0})}});
  auto b = make_tensor({p, Leg(Dir::In, {{0, 1}}), Leg(Dir::Out, {{0, 1}})}, {{{0, 0, 0}, Block({1, 1, 1}, {3.0})}});
  auto s = direct_sum(a, b, {2});
  EXPECT_EQ(s.leg(2).sector_dim(0), 3);
  EXPECT_EQ(s.find_block({0, 0, 0})->data, (std::vector<cplx>{1.0, 2.0, 3.0}));
}
