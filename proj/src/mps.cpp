#include "adaptmps/mps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaptmps/environment.hpp"

namespace adaptmps {

namespace {

// Positions of the bond legs in a site tensor.
struct ChainLayout {
  std::size_t left;
  std::size_t right;
};
constexpr ChainLayout kMpsLayout{1, 2};
constexpr ChainLayout kMpoLayout{2, 3};

// Permutation taking (bond, other legs...) to the site order with the bond
// at position `left`.
std::vector<std::size_t> bond_first_to_site(std::size_t rank, std::size_t left) {
  std::vector<std::size_t> perm(rank);
  for (std::size_t i = 0; i < rank; ++i) perm[i] = i == left ? 0 : (i < left ? i + 1 : i);
  return perm;
}

double left_step(std::vector<SymTensor>& sites, std::size_t l, ChainLayout layout, const TruncationPolicy& policy) {
  const std::size_t rank = sites[l].rank();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < rank; ++i)
    if (i != layout.right) rows.push_back(i);
  auto res = block_svd(sites[l], rows, {layout.right}, policy);
  sites[l] = std::move(res.u);
  auto next = contract(absorb_left(res.s, res.v), sites[l + 1], {{1, layout.left}});
  auto perm = bond_first_to_site(sites[l + 1].rank(), layout.left);
  sites[l + 1] = transpose(next, perm);
  return res.discarded_weight;
}

double right_step(std::vector<SymTensor>& sites, std::size_t l, ChainLayout layout, const TruncationPolicy& policy) {
  const std::size_t rank = sites[l].rank();
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < rank; ++i)
    if (i != layout.left) cols.push_back(i);
  auto res = block_svd(sites[l], {layout.left}, cols, policy);
  auto perm = bond_first_to_site(rank, layout.left);
  sites[l] = transpose(res.v, perm);
  sites[l - 1] = contract(sites[l - 1], absorb_right(res.u, res.s), {{layout.right, 0}});
  return res.discarded_weight;
}

// Moves the orthogonality center from `from` (nullopt: unknown) to `to`.
double move_center(std::vector<SymTensor>& sites, std::optional<std::size_t> from, std::size_t to, ChainLayout layout,
                   const TruncationPolicy& policy) {
  double w = 0.0;
  const std::size_t L = sites.size();
  if (!from) {
    for (std::size_t l = 0; l < to; ++l) w += left_step(sites, l, layout, policy);
    for (std::size_t l = L - 1; l > to; --l) w += right_step(sites, l, layout, policy);
    return w;
  }
  for (std::size_t l = *from; l < to; ++l) w += left_step(sites, l, layout, policy);
  for (std::size_t l = *from; l > to; --l) w += right_step(sites, l, layout, policy);
  return w;
}

// Same chain with every block of site 0 removed.
AsMps zero_like(const AsMps& psi) {
  AsMps z = psi;
  z.set_site(0, SymTensor(psi.site(0).legs()));
  z.set_center(std::nullopt);
  return z;
}

void check_same_chain(const std::vector<LocalSpace>& a, const std::vector<LocalSpace>& b) {
  if (a.size() != b.size()) throw LengthMismatch("chains differ in length");
  for (std::size_t l = 0; l < a.size(); ++l)
    if (!(a[l] == b[l])) throw PhysicalSectorMismatch("site " + std::to_string(l) + " has a different local space");
}

// Summed bond legs for a direct sum of chains.
std::vector<std::size_t> summed_bonds(std::size_t l, std::size_t L, ChainLayout layout) {
  std::vector<std::size_t> s;
  if (l > 0) s.push_back(layout.left);
  if (l + 1 < L) s.push_back(layout.right);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------
// AsMps

AsMps::AsMps(std::vector<LocalSpace> spaces, std::vector<SymTensor> sites, std::optional<std::size_t> center)
    : spaces_(std::move(spaces)), sites_(std::move(sites)), center_(center) {
  validate();
}

void AsMps::validate() const {
  const std::size_t L = sites_.size();
  if (L == 0) throw EmptyChain("an MPS needs at least one site");
  if (spaces_.size() != L) throw LengthMismatch("one local space per site required");
  for (std::size_t l = 0; l < L; ++l) {
    const auto& t = sites_[l];
    if (t.rank() != 3) throw InvalidState("MPS site " + std::to_string(l) + " must have rank 3");
    if (t.leg(0).dir() != Dir::Out || t.leg(1).dir() != Dir::In || t.leg(2).dir() != Dir::Out)
      throw DirectionMismatch("MPS site " + std::to_string(l) + " has wrong leg directions");
    if (!(t.leg(0) == spaces_[l].leg(Dir::Out)))
      throw PhysicalSectorMismatch("MPS site " + std::to_string(l) + " physical leg differs from its local space");
    if (l + 1 < L && t.leg(2).sectors() != sites_[l + 1].leg(1).sectors())
      throw LegMismatch("MPS bond " + std::to_string(l + 1) + " legs differ");
    for (const auto& [k, b] : t.blocks())
      if (!t.key_fuses(k)) throw FusionViolation("MPS site " + std::to_string(l) + " block breaks fusion");
  }
  if (!(sites_.back().leg(2) == Leg(Dir::Out, {{0, 1}}))) throw InvalidState("rightmost MPS bond must be {0:1}");
  for (const auto& s : sites_.front().leg(1).sectors())
    if (s.dim != 1) throw InvalidState("leftmost MPS bond sectors must have dim 1");
  if (center_ && *center_ >= L) throw SiteOutOfRange("canonical center outside the chain");
}

int AsMps::max_bond() const {
  int d = 1;
  for (std::size_t l = 0; l + 1 < sites_.size(); ++l) d = std::max(d, sites_[l].leg(2).dim());
  return d;
}

bool AsMps::is_zero() const {
  return std::any_of(sites_.begin(), sites_.end(), [](const SymTensor& t) { return t.empty(); });
}

// ---------------------------------------------------------------------
// AsMpo

AsMpo::AsMpo(std::vector<LocalSpace> spaces, std::vector<SymTensor> sites)
    : spaces_(std::move(spaces)), sites_(std::move(sites)) {
  validate();
}

void AsMpo::validate() const {
  const std::size_t L = sites_.size();
  if (L == 0) throw EmptyChain("an MPO needs at least one site");
  if (spaces_.size() != L) throw LengthMismatch("one local space per site required");
  for (std::size_t l = 0; l < L; ++l) {
    const auto& t = sites_[l];
    if (t.rank() != 4) throw InvalidState("MPO site " + std::to_string(l) + " must have rank 4");
    if (!(t.leg(0) == spaces_[l].leg(Dir::In)) || !(t.leg(1) == spaces_[l].leg(Dir::Out)))
      throw PhysicalSectorMismatch("MPO site " + std::to_string(l) + " physical legs differ from its local space");
    if (t.leg(2).dir() != Dir::In || t.leg(3).dir() != Dir::Out)
      throw DirectionMismatch("MPO site " + std::to_string(l) + " has wrong bond directions");
    if (l + 1 < L && t.leg(3).sectors() != sites_[l + 1].leg(2).sectors())
      throw LegMismatch("MPO bond " + std::to_string(l + 1) + " legs differ");
    for (const auto& [k, b] : t.blocks())
      if (!t.key_fuses(k)) throw FusionViolation("MPO site " + std::to_string(l) + " block breaks fusion");
  }
  if (!(sites_.back().leg(3) == Leg(Dir::Out, {{0, 1}}))) throw InvalidState("rightmost MPO bond must be {0:1}");
  for (const auto& s : sites_.front().leg(2).sectors())
    if (s.dim != 1) throw InvalidState("leftmost MPO bond sectors must have dim 1");
}

int AsMpo::max_bond() const {
  int d = 1;
  for (std::size_t l = 0; l + 1 < sites_.size(); ++l) d = std::max(d, sites_[l].leg(3).dim());
  return d;
}

bool AsMpo::is_zero() const {
  return std::any_of(sites_.begin(), sites_.end(), [](const SymTensor& t) { return t.empty(); });
}

// ---------------------------------------------------------------------
// States

AsMps product_state(const std::vector<LocalSpace>& spaces, const std::vector<DenseVector>& amplitudes) {
  const std::size_t L = spaces.size();
  if (L == 0) throw EmptyChain("product_state on an empty chain");
  if (amplitudes.size() != L) throw LengthMismatch("one amplitude vector per site required");
  std::vector<SymTensor> sites(L);
  std::set<Charge> right{0};
  for (std::size_t l = L; l-- > 0;) {
    const auto& sp = spaces[l];
    const auto& amp = amplitudes[l];
    if (amp.size() != sp.dim()) throw ShapeMismatch("amplitude vector size differs from local dimension");
    std::vector<Charge> present;
    for (Charge p : sp.sector_charges()) {
      const auto& st = sp.states(p);
      if (std::any_of(st.begin(), st.end(), [&](int k) { return amp[k] != cplx{}; })) present.push_back(p);
    }
    if (present.empty()) throw InvalidState("site " + std::to_string(l) + " has a zero amplitude vector");
    std::set<Charge> left;
    for (Charge p : present)
      for (Charge c : right) left.insert(p + c);
    std::vector<Sector> ls, rs;
    for (Charge c : left) ls.push_back({c, 1});
    for (Charge c : right) rs.push_back({c, 1});
    SymTensor t({sp.leg(Dir::Out), Leg(Dir::In, ls), Leg(Dir::Out, rs)});
    for (Charge p : present) {
      const auto& st = sp.states(p);
      Block b({static_cast<int>(st.size()), 1, 1});
      for (std::size_t i = 0; i < st.size(); ++i) b.data[i] = amp[st[i]];
      for (Charge c : right) t.set_block({p, p + c, c}, b);
    }
    sites[l] = std::move(t);
    right = std::move(left);
  }
  return AsMps(spaces, std::move(sites));
}

AsMps basis_state(const std::vector<LocalSpace>& spaces, const std::vector<int>& config) {
  if (config.size() != spaces.size()) throw LengthMismatch("one basis index per site required");
  std::vector<DenseVector> amps;
  for (std::size_t l = 0; l < spaces.size(); ++l) {
    if (config[l] < 0 || config[l] >= spaces[l].dim()) throw InvalidState("basis index out of range");
    DenseVector v = DenseVector::Zero(spaces[l].dim());
    v[config[l]] = 1.0;
    amps.push_back(v);
  }
  return product_state(spaces, amps);
}

AsMps random_state(const std::vector<LocalSpace>& spaces, const std::set<Charge>& totals, int max_bond,
                   std::mt19937_64& rng) {
  const std::size_t L = spaces.size();
  if (L == 0) throw EmptyChain("random_state on an empty chain");
  if (totals.empty() || max_bond < 1) throw InvalidParams("random_state needs target charges and max_bond >= 1");
  constexpr double kCap = 1e12;
  using Counts = std::map<Charge, double>;
  auto extend = [&](const Counts& in, const LocalSpace& sp) {
    Counts out;
    for (auto [c, n] : in)
      for (Charge p : sp.sector_charges()) {
        double& v = out[c + p];
        v = std::min(kCap, v + n * static_cast<double>(sp.states(p).size()));
      }
    return out;
  };
  std::vector<Counts> right(L + 1), left(L + 1);
  right[L] = {{0, 1.0}};
  for (std::size_t l = L; l-- > 0;) right[l] = extend(right[l + 1], spaces[l]);
  left[0] = {{0, 1.0}};
  for (std::size_t l = 0; l < L; ++l) left[l + 1] = extend(left[l], spaces[l]);

  std::vector<std::map<Charge, int>> bonds(L + 1);
  for (Charge t : totals)
    if (right[0].count(t)) bonds[0][t] = 1;
  if (bonds[0].size() != totals.size()) throw InvalidState("a requested total charge is not reachable");
  bonds[L] = {{0, 1}};
  for (std::size_t l = 1; l < L; ++l)
    for (auto [c, n] : right[l]) {
      double lc = 0.0;
      for (Charge t : totals) {
        auto it = left[l].find(t - c);
        if (it != left[l].end()) lc += it->second;
      }
      if (lc > 0) bonds[l][c] = static_cast<int>(std::min({static_cast<double>(max_bond), n, lc}));
    }

  auto make_leg = [](Dir d, const std::map<Charge, int>& m) {
    std::vector<Sector> s;
    for (auto [c, n] : m) s.push_back({c, n});
    return Leg(d, s);
  };
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SymTensor> sites(L);
  for (std::size_t l = 0; l < L; ++l) {
    SymTensor t({spaces[l].leg(Dir::Out), make_leg(Dir::In, bonds[l]), make_leg(Dir::Out, bonds[l + 1])});
    for (Charge p : spaces[l].sector_charges())
      for (auto [c, n] : bonds[l]) {
        auto it = bonds[l + 1].find(c - p);
        if (it == bonds[l + 1].end()) continue;
        Block b({static_cast<int>(spaces[l].states(p).size()), n, it->second});
        for (auto& x : b.data) x = cplx(gauss(rng), gauss(rng));
        t.set_block({p, c, c - p}, std::move(b));
      }
    sites[l] = std::move(t);
  }
  AsMps psi(spaces, std::move(sites));
  auto [c, w] = compress(psi, {max_bond, 0.0});
  double n = norm2(c);
  if (!(n > 0)) throw InvalidState("random_state produced a zero state");
  return scale(c, 1.0 / std::sqrt(n));
}

AsMps scale(const AsMps& psi, cplx c) {
  AsMps out = psi;
  std::size_t l = psi.center().value_or(0);
  out.set_site(l, adaptmps::scale(psi.site(l), c));
  return out;
}

AsMps add_mps(const AsMps& psi, const AsMps& phi) {
  check_same_chain(psi.spaces(), phi.spaces());
  if (psi.is_zero()) return phi;
  if (phi.is_zero()) return psi;
  const std::size_t L = psi.length();
  std::vector<SymTensor> sites(L);
  for (std::size_t l = 0; l < L; ++l) sites[l] = direct_sum(psi.site(l), phi.site(l), summed_bonds(l, L, kMpsLayout));
  return AsMps(psi.spaces(), std::move(sites));
}

AsMps canonicalize(const AsMps& psi, std::size_t center) {
  if (center >= psi.length()) throw SiteOutOfRange("canonical center outside the chain");
  if (psi.is_zero()) return psi;
  auto sites = psi.sites();
  try {
    move_center(sites, psi.center(), center, kMpsLayout, TruncationPolicy::exact());
  } catch (const EmptyTensor&) {
    return zero_like(psi);  // everything cancelled
  }
  return AsMps(psi.spaces(), std::move(sites), center);
}

std::pair<AsMps, double> compress(const AsMps& psi, const TruncationPolicy& policy) {
  if (psi.is_zero()) return {psi, 0.0};
  const std::size_t L = psi.length();
  auto sites = psi.sites();
  double w = 0.0;
  try {
    move_center(sites, psi.center(), L - 1, kMpsLayout, TruncationPolicy::exact());
    for (std::size_t l = L - 1; l > 0; --l) w += right_step(sites, l, kMpsLayout, policy);
  } catch (const EmptyTensor&) {
    return {zero_like(psi), 0.0};
  }
  sites[0].shrink_leg(1);
  return {AsMps(psi.spaces(), std::move(sites), 0), w};
}

SymTensor collapse_leg(const SymTensor& t, std::size_t leg) {
  std::vector<Sector> ones;
  for (const auto& s : t.leg(leg).sectors()) ones.push_back({s.charge, 1});
  std::vector<Leg> legs = t.legs();
  legs[leg] = Leg(legs[leg].dir(), ones);
  SymTensor out(std::move(legs));
  for (const auto& [k, b] : t.blocks()) {
    std::vector<int> shape = b.shape;
    const std::size_t n = shape[leg];
    std::size_t inner = 1;
    for (std::size_t i = leg + 1; i < shape.size(); ++i) inner *= shape[i];
    shape[leg] = 1;
    Block dst(shape);
    for (std::size_t i = 0; i < b.data.size(); ++i) {
      std::size_t o = i / (n * inner), r = i % inner;
      dst.data[o * inner + r] += b.data[i];
    }
    out.set_block_trusted(k, std::move(dst));
  }
  out.prune();
  return out;
}

AsMps apply_mpo(const AsMpo& op, const AsMps& psi, const TruncationPolicy& policy, double* truncation) {
  check_same_chain(op.spaces(), psi.spaces());
  const std::size_t L = psi.length();
  std::vector<SymTensor> sites(L);
  for (std::size_t l = 0; l < L; ++l) {
    auto t = contract(op.site(l), psi.site(l), {{0, 0}});  // (tau, b, b+, a, a+)
    sites[l] = fuse_legs(t, {{0}, {1, 3}, {2, 4}}).first;
  }
  sites[0] = collapse_leg(sites[0], 1);
  AsMps out(psi.spaces(), std::move(sites));
  if (out.is_zero()) {
    if (truncation) *truncation = 0.0;
    return out;
  }
  auto [c, w] = compress(out, policy);
  if (truncation) *truncation = w;
  return c;
}

cplx overlap(const AsMps& psi, const AsMps& phi) {
  check_same_chain(psi.spaces(), phi.spaces());
  if (psi.is_zero() || phi.is_zero()) return 0.0;
  // T: (a' Out, a In) pairing bra and ket bonds
  SymTensor t({Leg(Dir::Out, {{0, 1}}), Leg(Dir::In, {{0, 1}})});
  t.set_block({0, 0}, Block({1, 1}, {1.0}));
  for (std::size_t l = psi.length(); l-- > 0;) {
    auto x = contract(phi.site(l), t, {{2, 1}}, SectorPolicy::Common);                       // (s, a, a'+)
    auto y = contract(x, conjugate(psi.site(l)), {{0, 0}, {2, 2}}, SectorPolicy::Common);  // (a, a')
    t = transpose(y, {1, 0});
  }
  cplx acc{};
  for (const auto& [k, b] : t.blocks())
    if (k[0] == k[1]) acc += b.data[0];
  return acc;
}

double norm2(const AsMps& psi) {
  if (psi.is_zero()) return 0.0;
  if (psi.center()) return psi.site(*psi.center()).norm2();
  return overlap(psi, psi).real();
}

cplx matrix_element(const AsMps& bra, const AsMpo& op, const AsMps& ket) {
  check_same_chain(bra.spaces(), ket.spaces());
  check_same_chain(op.spaces(), ket.spaces());
  if (bra.is_zero() || ket.is_zero() || op.is_zero()) return 0.0;
  EnvTensor r = init_right_boundary();
  for (std::size_t l = ket.length(); l-- > 0;) r = grow_env(r, bra.site(l), op.site(l), ket.site(l), Side::Right);
  auto left = init_left_boundary(ket, op);
  return contract(left, r, {{0, 0}, {1, 1}, {2, 2}}, SectorPolicy::Common).scalar();
}

cplx expectation(const AsMps& psi, const AsMpo& op) { return matrix_element(psi, op, psi); }

SectorDecomposition sector_split(const AsMps& psi) {
  SectorDecomposition out;
  if (psi.is_zero()) return out;
  AsMps c = canonicalize(psi, 0);
  const SymTensor& s0 = c.site(0);
  std::map<Charge, SymTensor> parts;
  for (const auto& [k, b] : s0.blocks()) {
    auto it = parts.find(k[1]);
    if (it == parts.end()) it = parts.emplace(k[1], SymTensor(s0.legs())).first;
    it->second.set_block_trusted(k, b);
  }
  for (auto& [charge, t] : parts) {
    t.shrink_leg(1);
    AsMps comp = c;
    comp.set_site(0, t);
    out.entries.push_back({charge, t.norm2(), comp});
  }
  return out;
}

double canonical_error(const AsMps& psi) {
  if (!psi.center()) return 0.0;
  const std::size_t c = *psi.center();
  double err = 0.0;
  auto deviation = [](const SymTensor& g) {
    double e = 0.0;
    for (const auto& s : g.leg(0).sectors()) {
      const Block* b = g.find_block({s.charge, s.charge});
      for (int i = 0; i < s.dim; ++i)
        for (int j = 0; j < s.dim; ++j) {
          cplx v = b ? b->data[i * s.dim + j] : cplx{};
          e = std::max(e, std::abs(v - (i == j ? 1.0 : 0.0)));
        }
    }
    return e;
  };
  for (std::size_t l = 0; l < c; ++l) {
    const auto& a = psi.site(l);
    err = std::max(err, deviation(contract(conjugate(a), a, {{0, 0}, {1, 1}})));
  }
  for (std::size_t l = c + 1; l < psi.length(); ++l) {
    const auto& a = psi.site(l);
    err = std::max(err, deviation(contract(conjugate(a), a, {{0, 0}, {2, 2}})));
  }
  return err;
}

// ---------------------------------------------------------------------
// Operators

AsMpo product_mpo(const std::vector<LocalSpace>& spaces, const std::map<std::size_t, DenseMatrix>& factors,
                  cplx coefficient) {
  const std::size_t L = spaces.size();
  if (L == 0) throw EmptyChain("product_mpo on an empty chain");
  for (const auto& [l, m] : factors)
    if (l >= L) throw SiteOutOfRange("operator factor on site " + std::to_string(l) + " outside the chain");
  std::vector<SymTensor> sites(L);
  Charge carry = 0;
  for (std::size_t l = L; l-- > 0;) {
    auto it = factors.find(l);
    DenseMatrix op = it == factors.end() ? ops::identity(spaces[l].dim()) : it->second;
    sites[l] = site_operator(spaces[l], op, carry);
    carry = sites[l].leg(2).sectors().front().charge;
  }
  sites[0] = adaptmps::scale(sites[0], coefficient);
  return AsMpo(spaces, std::move(sites));
}

AsMpo identity_mpo(const std::vector<LocalSpace>& spaces) { return product_mpo(spaces, {}); }

AsMpo scale(const AsMpo& op, cplx c) {
  auto sites = op.sites();
  sites[0] = adaptmps::scale(sites[0], c);
  return AsMpo(op.spaces(), std::move(sites));
}

AsMpo add_mpo(const AsMpo& a, const AsMpo& b) {
  check_same_chain(a.spaces(), b.spaces());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const std::size_t L = a.length();
  std::vector<SymTensor> sites(L);
  for (std::size_t l = 0; l < L; ++l) sites[l] = direct_sum(a.site(l), b.site(l), summed_bonds(l, L, kMpoLayout));
  return AsMpo(a.spaces(), std::move(sites));
}

AsMpo compress_mpo(const AsMpo& op, const TruncationPolicy& policy) {
  if (op.is_zero()) return op;
  const std::size_t L = op.length();
  auto sites = op.sites();
  try {
    move_center(sites, std::nullopt, L - 1, kMpoLayout, TruncationPolicy::exact());
    for (std::size_t l = L - 1; l > 0; --l) right_step(sites, l, kMpoLayout, policy);
  } catch (const EmptyTensor&) {
    sites = op.sites();
    sites[0] = SymTensor(sites[0].legs());
  }
  sites[0].shrink_leg(2);
  return AsMpo(op.spaces(), std::move(sites));
}

AsMpo multiply_mpo(const AsMpo& a, const AsMpo& b, const TruncationPolicy& policy) {
  check_same_chain(a.spaces(), b.spaces());
  const std::size_t L = a.length();
  std::vector<SymTensor> sites(L);
  for (std::size_t l = 0; l < L; ++l) {
    auto t = contract(a.site(l), b.site(l), {{0, 1}});  // (tau, ba, ba+, sigma, bb, bb+)
    t = transpose(t, {3, 0, 1, 4, 2, 5});
    sites[l] = fuse_legs(t, {{0}, {1}, {2, 3}, {4, 5}}).first;
  }
  sites[0] = collapse_leg(sites[0], 2);
  AsMpo out(a.spaces(), std::move(sites));
  return compress_mpo(out, policy);
}

}  // namespace adaptmps
