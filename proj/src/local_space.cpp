#include "adaptmps/local_space.hpp"

#include <cmath>
#include <set>

namespace adaptmps {

LocalSpace::LocalSpace(std::string kind, std::vector<Charge> charges, int base_dim)
    : kind_(std::move(kind)), charges_(std::move(charges)), base_dim_(base_dim) {
  if (charges_.empty()) throw InvalidParams("local space needs at least one state");
  for (int k = 0; k < dim(); ++k) by_charge_[charges_[k]].push_back(k);
  position_.assign(charges_.size(), 0);
  int pos = 0;
  for (const auto& [c, states] : by_charge_)
    for (int k : states) position_[k] = pos++;
}

LocalSpace LocalSpace::spin_half() { return LocalSpace("spin_half", {0, 1}, 2); }

LocalSpace LocalSpace::boson(int d) {
  if (d < 2) throw InvalidParams("boson cutoff d must be >= 2");
  std::vector<Charge> c(d);
  for (int n = 0; n < d; ++n) c[n] = n;
  return LocalSpace("boson", std::move(c), d);
}

LocalSpace LocalSpace::vectorized(const LocalSpace& physical) {
  const int d = physical.dim();
  std::vector<Charge> c(static_cast<std::size_t>(d) * d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) c[n + d * m] = physical.charge(n) + physical.charge(m);
  return LocalSpace("vectorized_" + physical.kind(), std::move(c), d);
}

Leg LocalSpace::leg(Dir d) const {
  std::vector<Sector> s;
  for (const auto& [c, states] : by_charge_) s.push_back({c, static_cast<int>(states.size())});
  return Leg(d, std::move(s));
}

const std::vector<int>& LocalSpace::states(Charge c) const {
  static const std::vector<int> none;
  auto it = by_charge_.find(c);
  return it == by_charge_.end() ? none : it->second;
}

std::vector<Charge> LocalSpace::sector_charges() const {
  std::vector<Charge> out;
  for (const auto& [c, s] : by_charge_) out.push_back(c);
  return out;
}

std::map<Charge, DenseMatrix> split_by_shift(const LocalSpace& space, const DenseMatrix& op, double tol) {
  if (op.rows() != space.dim() || op.cols() != space.dim()) throw ShapeMismatch("operator does not match local space");
  std::map<Charge, DenseMatrix> out;
  for (int s = 0; s < space.dim(); ++s)
    for (int t = 0; t < space.dim(); ++t) {
      if (std::abs(op(t, s)) <= tol) continue;
      Charge shift = space.charge(t) - space.charge(s);
      auto it = out.find(shift);
      if (it == out.end()) it = out.emplace(shift, DenseMatrix::Zero(space.dim(), space.dim())).first;
      it->second(t, s) = op(t, s);
    }
  return out;
}

std::optional<Charge> charge_shift(const LocalSpace& space, const DenseMatrix& op, double tol) {
  auto parts = split_by_shift(space, op, tol);
  if (parts.empty()) return Charge{0};
  if (parts.size() > 1) return std::nullopt;
  return parts.begin()->first;
}

SymTensor site_operator(const LocalSpace& space, const DenseMatrix& op, Charge right_charge) {
  auto shift = charge_shift(space, op);
  if (!shift) throw NonConservingTerm("site operator mixes charge shifts");
  const Charge left = right_charge + *shift;
  SymTensor t({space.leg(Dir::In), space.leg(Dir::Out), Leg(Dir::In, {{left, 1}}), Leg(Dir::Out, {{right_charge, 1}})});
  for (Charge cs : space.sector_charges()) {
    Charge ct = cs + *shift;
    const auto& in_states = space.states(cs);
    const auto& out_states = space.states(ct);
    if (out_states.empty()) continue;
    Block b({static_cast<int>(in_states.size()), static_cast<int>(out_states.size()), 1, 1});
    bool nonzero = false;
    for (std::size_t i = 0; i < in_states.size(); ++i)
      for (std::size_t j = 0; j < out_states.size(); ++j) {
        cplx v = op(out_states[j], in_states[i]);
        b.data[i * out_states.size() + j] = v;
        nonzero = nonzero || v != cplx{};
      }
    if (nonzero) t.set_block({cs, ct, left, right_charge}, std::move(b));
  }
  return t;
}

DenseMatrix dense_site_operator(const LocalSpace& space, const SymTensor& op) {
  if (op.rank() != 2 && op.rank() != 4) throw ShapeMismatch("site operator must have rank 2 or 4");
  DenseMatrix m = DenseMatrix::Zero(space.dim(), space.dim());
  for (const auto& [k, b] : op.blocks()) {
    const auto& in_states = space.states(k[0]);
    const auto& out_states = space.states(k[1]);
    for (std::size_t i = 0; i < in_states.size(); ++i)
      for (std::size_t j = 0; j < out_states.size(); ++j) m(out_states[j], in_states[i]) += b.data[i * out_states.size() + j];
  }
  return m;
}

namespace ops {

DenseMatrix identity(int d) { return DenseMatrix::Identity(d, d); }

DenseMatrix sigma_z() {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(0, 0) = -1.0;
  m(1, 1) = 1.0;
  return m;
}

DenseMatrix sigma_plus() {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

DenseMatrix sigma_minus() {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

DenseMatrix sigma_x() { return sigma_plus() + sigma_minus(); }

DenseMatrix sigma_y() { return cplx(0, -1) * (sigma_plus() - sigma_minus()); }

DenseMatrix boson_annihilation(int d) {
  DenseMatrix a = DenseMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

DenseMatrix boson_creation(int d) { return boson_annihilation(d).adjoint(); }

DenseMatrix boson_number(int d) {
  DenseMatrix n = DenseMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) n(i, i) = i;
  return n;
}

DenseMatrix superoperator(const DenseMatrix& left, const DenseMatrix& right) {
  // vec(L rho R) with k = n + d*m: element [(n',m'), (n,m)] = L[n',n] * R[m,m']
  const auto d = left.rows();
  DenseMatrix s = DenseMatrix::Zero(d * d, d * d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index n = 0; n < d; ++n)
      for (Eigen::Index mp = 0; mp < d; ++mp) {
        cplx r = right(m, mp);
        if (r == cplx{}) continue;
        for (Eigen::Index np = 0; np < d; ++np) s(np + d * mp, n + d * m) += left(np, n) * r;
      }
  return s;
}

}  // namespace ops

}  // namespace adaptmps
