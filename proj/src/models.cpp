#include "adaptmps/models.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

namespace adaptmps {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParams(what);
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void add_term(std::vector<LocalTerm>& out, cplx c, std::vector<std::pair<std::size_t, DenseMatrix>> factors) {
  if (c == cplx{}) return;
  out.push_back({c, std::move(factors)});
}

AsMpo zero_mpo(const std::vector<LocalSpace>& spaces) { return scale(identity_mpo(spaces), 0.0); }

AsMpo sum_tree(std::vector<AsMpo> parts, const TruncationPolicy& policy) {
  while (parts.size() > 1) {
    std::vector<AsMpo> next;
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next.push_back(compress_mpo(add_mpo(parts[i], parts[i + 1]), policy));
    if (parts.size() % 2) next.push_back(parts.back());
    parts = std::move(next);
  }
  return compress_mpo(parts.front(), policy);
}

// Exponential of a charge-conserving generator, block by block. `charges`
// lists the charge of every basis index of the (product) space.
DenseMatrix blockwise_exp(const DenseMatrix& g, const std::vector<Charge>& charges, double tau) {
  std::map<Charge, std::vector<Eigen::Index>> sectors;
  for (std::size_t k = 0; k < charges.size(); ++k) sectors[charges[k]].push_back(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (g(i, j) != cplx{} && charges[i] != charges[j]) throw NonConservingTerm("gate generator changes the charge");
  DenseMatrix out = DenseMatrix::Zero(g.rows(), g.cols());
  for (const auto& [q, idx] : sectors) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    DenseMatrix sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = g(idx[i], idx[j]) * tau;
    DenseMatrix e = sub.exp();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) out(idx[i], idx[j]) = e(i, j);
  }
  return out;
}

// Two-site gate tensor (s1 In, s2 In, t1 Out, t2 Out) from a dense matrix
// on the product basis k1 * d2 + k2.
SymTensor two_site_tensor(const LocalSpace& s1, const LocalSpace& s2, const DenseMatrix& m) {
  SymTensor t({s1.leg(Dir::In), s2.leg(Dir::In), s1.leg(Dir::Out), s2.leg(Dir::Out)});
  const int d1 = s1.dim(), d2 = s2.dim();
  std::map<Key, Block> blocks;
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d2; ++b)
      for (int c = 0; c < d1; ++c)
        for (int e = 0; e < d2; ++e) {
          cplx v = m(c * d2 + e, a * d2 + b);
          if (v == cplx{}) continue;
          Key k{s1.charge(a), s2.charge(b), s1.charge(c), s2.charge(e)};
          auto it = blocks.find(k);
          if (it == blocks.end())
            it = blocks.emplace(k, Block(t.block_shape(k))).first;
          auto pos = [](const LocalSpace& s, int state) {
            const auto& st = s.states(s.charge(state));
            return static_cast<int>(std::find(st.begin(), st.end(), state) - st.begin());
          };
          const auto& sh = it->second.shape;
          std::size_t flat = ((static_cast<std::size_t>(pos(s1, a)) * sh[1] + pos(s2, b)) * sh[2] + pos(s1, c)) * sh[3] +
                             pos(s2, e);
          it->second.data[flat] = v;
        }
  for (auto& [k, b] : blocks) t.set_block(k, std::move(b));
  t.prune();
  return t;
}

SymTensor one_site_tensor(const LocalSpace& s, const DenseMatrix& m) {
  auto full = site_operator(s, m, 0);
  // drop the one-dimensional bond legs
  SymTensor t({s.leg(Dir::In), s.leg(Dir::Out)});
  for (const auto& [k, b] : full.blocks()) t.set_block({k[0], k[1]}, Block({b.shape[0], b.shape[1]}, b.data));
  return t;
}

Charge term_shift(const std::vector<LocalSpace>& spaces, const LocalTerm& term) {
  Charge total = 0;
  for (const auto& [l, op] : term.factors) {
    auto s = charge_shift(spaces.at(l), op);
    if (!s) throw NonConservingTerm("factor on site " + std::to_string(l) + " mixes charge shifts");
    total += *s;
  }
  return total;
}

}  // namespace

void ModelParams::validate_spin() const {
  require(L >= 1, "L must be >= 1");
  require(gamma >= 0, "gamma must be >= 0");
}

void ModelParams::validate_boson() const {
  require(L >= 1, "L must be >= 1");
  require(d >= 2, "d must be >= 2");
}

void ModelParams::validate_lindblad() const {
  validate_boson();
  require(lambda1 >= 0 && lambdaL >= 0, "dissipation rates must be >= 0");
  require(nbar1 >= 0 && nbarL >= 0, "bath occupations must be >= 0");
}

std::vector<LocalSpace> spin_chain(std::size_t L) { return std::vector<LocalSpace>(L, LocalSpace::spin_half()); }

std::vector<LocalSpace> boson_chain(std::size_t L, int d) { return std::vector<LocalSpace>(L, LocalSpace::boson(d)); }

std::vector<LocalSpace> vectorized_chain(const std::vector<LocalSpace>& physical) {
  std::vector<LocalSpace> out;
  for (const auto& s : physical) out.push_back(LocalSpace::vectorized(s));
  return out;
}

AsMpo mpo_from_terms(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& terms,
                     const TruncationPolicy& policy) {
  if (terms.empty()) throw InvalidParams("mpo_from_terms needs at least one term");
  std::vector<AsMpo> parts;
  for (const auto& t : terms) {
    std::map<std::size_t, DenseMatrix> f;
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      const auto site = t.factors[i].first;
      if (site >= spaces.size()) throw SiteOutOfRange("term factor on site " + std::to_string(site));
      if (i > 0 && site <= t.factors[i - 1].first) throw InvalidParams("term sites must be strictly increasing");
      f[site] = t.factors[i].second;
    }
    parts.push_back(product_mpo(spaces, f, t.coefficient));
  }
  return sum_tree(std::move(parts), policy);
}

std::vector<LocalTerm> xyz_terms(const ModelParams& p) {
  p.validate_spin();
  std::vector<LocalTerm> terms;
  const auto sp = ops::sigma_plus(), sm = ops::sigma_minus(), sz = ops::sigma_z();
  for (std::size_t l = 0; l + 1 < p.L; ++l) {
    add_term(terms, 2.0 * p.j_xy, {{l, sp}, {l + 1, sm}});
    add_term(terms, 2.0 * p.j_xy, {{l, sm}, {l + 1, sp}});
    add_term(terms, 2.0 * p.j_xy * p.gamma, {{l, sp}, {l + 1, sp}});
    add_term(terms, 2.0 * p.j_xy * p.gamma, {{l, sm}, {l + 1, sm}});
    add_term(terms, p.j_xy * p.delta, {{l, sz}, {l + 1, sz}});
  }
  for (std::size_t l = 0; l < p.L; ++l) add_term(terms, p.h, {{l, sz}});
  return terms;
}

AsMpo mpo_xyz(const ModelParams& p) {
  auto terms = xyz_terms(p);
  auto spaces = spin_chain(p.L);
  return terms.empty() ? zero_mpo(spaces) : mpo_from_terms(spaces, terms);
}

AsMpo mpo_parity(std::size_t L) {
  if (L < 1) throw InvalidParams("L must be >= 1");
  DenseMatrix p = DenseMatrix::Zero(2, 2);
  p(0, 0) = std::exp(cplx(0, -std::numbers::pi));
  p(1, 1) = std::exp(cplx(0, std::numbers::pi));
  std::map<std::size_t, DenseMatrix> f;
  for (std::size_t l = 0; l < L; ++l) f[l] = p;
  return product_mpo(spin_chain(L), f);
}

std::vector<LocalTerm> bose_hubbard_terms(const ModelParams& p) {
  p.validate_boson();
  std::vector<LocalTerm> terms;
  const auto a = ops::boson_annihilation(p.d), ad = ops::boson_creation(p.d), n = ops::boson_number(p.d);
  for (std::size_t l = 0; l + 1 < p.L; ++l) {
    add_term(terms, -p.j, {{l, a}, {l + 1, ad}});
    add_term(terms, -p.j, {{l, ad}, {l + 1, a}});
  }
  DenseMatrix onsite = n * (n - ops::identity(p.d));
  for (std::size_t l = 0; l < p.L; ++l) add_term(terms, p.u / 2.0, {{l, onsite}});
  return terms;
}

AsMpo mpo_bose_hubbard(const ModelParams& p) {
  auto terms = bose_hubbard_terms(p);
  auto spaces = boson_chain(p.L, p.d);
  return terms.empty() ? zero_mpo(spaces) : mpo_from_terms(spaces, terms);
}

AsMpo mpo_site_sum(const std::vector<LocalSpace>& spaces, const DenseMatrix& op) {
  std::vector<LocalTerm> terms;
  for (std::size_t l = 0; l < spaces.size(); ++l) terms.push_back({1.0, {{l, op}}});
  return mpo_from_terms(spaces, terms);
}

AsMpo mpo_site(const std::vector<LocalSpace>& spaces, std::size_t site, const DenseMatrix& op) {
  return product_mpo(spaces, {{site, op}});
}

std::vector<LocalTerm> unitary_generator(const std::vector<LocalTerm>& hamiltonian) {
  std::vector<LocalTerm> out = hamiltonian;
  for (auto& t : out) t.coefficient *= cplx(0, -1);
  return out;
}

LindbladTerms lindblad_terms(const ModelParams& p) {
  p.validate_lindblad();
  LindbladTerms out;
  const DenseMatrix id = ops::identity(p.d);
  for (const auto& t : bose_hubbard_terms(p)) {
    LocalTerm ket{cplx(0, -1) * t.coefficient, {}}, bra{cplx(0, 1) * t.coefficient, {}};
    for (const auto& [l, op] : t.factors) {
      ket.factors.push_back({l, ops::superoperator(op, id)});
      bra.factors.push_back({l, ops::superoperator(id, op)});
    }
    out.symmetric.push_back(ket);
    out.symmetric.push_back(bra);
  }
  const auto a = ops::boson_annihilation(p.d), ad = ops::boson_creation(p.d);
  const DenseMatrix ada = ad * a, aad = a * ad;
  auto edge = [&](std::size_t l, double lambda, double nbar) {
    if (lambda == 0.0) return;
    add_term(out.symmetric, -lambda * (nbar + 1), {{l, ops::superoperator(ada, id)}});
    add_term(out.symmetric, -lambda * (nbar + 1), {{l, ops::superoperator(id, ada)}});
    add_term(out.asymmetric, 2 * lambda * (nbar + 1), {{l, ops::superoperator(a, ad)}});
    if (nbar == 0.0) return;
    add_term(out.symmetric, -lambda * nbar, {{l, ops::superoperator(aad, id)}});
    add_term(out.symmetric, -lambda * nbar, {{l, ops::superoperator(id, aad)}});
    add_term(out.asymmetric, 2 * lambda * nbar, {{l, ops::superoperator(ad, a)}});
  };
  edge(0, p.lambda1, p.nbar1);
  if (p.L > 1) edge(p.L - 1, p.lambdaL, p.nbarL);
  return out;
}

std::pair<AsMpo, AsMpo> lindblad_mpo(const ModelParams& p) {
  auto terms = lindblad_terms(p);
  auto spaces = vectorized_chain(boson_chain(p.L, p.d));
  AsMpo sym = terms.symmetric.empty() ? zero_mpo(spaces) : mpo_from_terms(spaces, terms.symmetric);
  AsMpo asym = terms.asymmetric.empty() ? zero_mpo(spaces) : mpo_from_terms(spaces, terms.asymmetric);
  return {sym, asym};
}

// ---------------------------------------------------------------------
// Gates

GateSchedule trotter_gates(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& generator, double dt,
                           int order) {
  const std::size_t L = spaces.size();
  if (L == 0) throw EmptyChain("trotter_gates on an empty chain");
  if (order != 1 && order != 2) throw InvalidParams("Trotter order must be 1 or 2");
  for (const auto& t : generator) {
    if (t.factors.empty() || t.factors.size() > 2) throw InvalidParams("gate terms must act on one or two sites");
    for (const auto& [l, op] : t.factors)
      if (l >= L) throw SiteOutOfRange("gate term on site " + std::to_string(l));
    if (t.factors.size() == 2 && t.factors[1].first != t.factors[0].first + 1)
      throw InvalidParams("gate terms must be nearest-neighbour");
    if (term_shift(spaces, t) != 0) throw NonConservingTerm("gate term changes the total charge");
  }

  if (L == 1) {
    DenseMatrix g = DenseMatrix::Zero(spaces[0].dim(), spaces[0].dim());
    for (const auto& t : generator) g += t.coefficient * t.factors[0].second;
    GateSchedule s;
    s.layers.push_back({{0, 1, one_site_tensor(spaces[0], blockwise_exp(g, spaces[0].charges(), dt))}});
    return s;
  }

  // bond generators
  std::vector<DenseMatrix> bond(L - 1);
  for (std::size_t b = 0; b + 1 < L; ++b)
    bond[b] = DenseMatrix::Zero(spaces[b].dim() * spaces[b + 1].dim(), spaces[b].dim() * spaces[b + 1].dim());
  for (const auto& t : generator) {
    if (t.factors.size() == 2) {
      const auto b = t.factors[0].first;
      bond[b] += t.coefficient * kron(t.factors[0].second, t.factors[1].second);
      continue;
    }
    const auto [l, op] = t.factors[0];
    auto on_left = [&](std::size_t b, cplx w) { bond[b] += w * kron(op, ops::identity(spaces[b + 1].dim())); };
    auto on_right = [&](std::size_t b, cplx w) { bond[b] += w * kron(ops::identity(spaces[b].dim()), op); };
    if (l == 0) {
      on_left(0, t.coefficient);
    } else if (l == L - 1) {
      on_right(L - 2, t.coefficient);
    } else {
      on_right(l - 1, 0.5 * t.coefficient);
      on_left(l, 0.5 * t.coefficient);
    }
  }

  std::vector<std::pair<int, double>> plan;  // (parity, tau)
  if (order == 1) {
    plan = {{0, dt}, {1, dt}};
  } else {
    plan = {{0, dt / 2}, {1, dt}, {0, dt / 2}};
  }
  if (L == 2) plan = {{0, dt}};

  GateSchedule s;
  for (auto [parity, tau] : plan) {
    GateLayer layer;
    for (std::size_t b = parity; b + 1 < L; b += 2) {
      std::vector<Charge> q;
      for (int k1 = 0; k1 < spaces[b].dim(); ++k1)
        for (int k2 = 0; k2 < spaces[b + 1].dim(); ++k2) q.push_back(spaces[b].charge(k1) + spaces[b + 1].charge(k2));
      layer.push_back({b, 2, two_site_tensor(spaces[b], spaces[b + 1], blockwise_exp(bond[b], q, tau))});
    }
    s.layers.push_back(std::move(layer));
  }
  return s;
}

AsMpo product_mpo_general(const std::vector<LocalSpace>& spaces, const std::map<std::size_t, DenseMatrix>& factors) {
  const std::size_t L = spaces.size();
  if (L == 0) throw EmptyChain("product_mpo_general on an empty chain");
  std::vector<SymTensor> sites(L);
  std::set<Charge> right{0};
  for (std::size_t l = L; l-- > 0;) {
    auto it = factors.find(l);
    DenseMatrix op = it == factors.end() ? ops::identity(spaces[l].dim()) : it->second;
    const double tol = 1e-15 * op.cwiseAbs().maxCoeff();
    auto parts = split_by_shift(spaces[l], op, tol);
    std::set<Charge> left;
    for (Charge c : right)
      for (const auto& [delta, m] : parts) left.insert(c + delta);
    auto ones = [](const std::set<Charge>& cs) {
      std::vector<Sector> s;
      for (Charge c : cs) s.push_back({c, 1});
      return s;
    };
    SymTensor t({spaces[l].leg(Dir::In), spaces[l].leg(Dir::Out), Leg(Dir::In, ones(left)), Leg(Dir::Out, ones(right))});
    for (Charge c : right)
      for (const auto& [delta, m] : parts) {
        const auto piece = site_operator(spaces[l], m, c);
        for (const auto& [k, b] : piece.blocks()) t.set_block(k, b);
      }
    sites[l] = std::move(t);
    right = std::move(left);
  }
  return AsMpo(spaces, std::move(sites));
}

namespace {

// exp(m) through the connected components of m's sparsity graph: each
// component is an invariant block, so exponentiating blocks separately is
// exact and much cheaper for the large vectorized sites.
DenseMatrix block_exp(const DenseMatrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (m(i, j) != cplx(0.0)) parent[root(i)] = root(j);
  std::map<Eigen::Index, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < n; ++i) groups[root(i)].push_back(i);
  DenseMatrix out = DenseMatrix::Zero(n, n);
  for (const auto& [r, idx] : groups) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    DenseMatrix sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = m(idx[a], idx[b]);
    const DenseMatrix e = sub.exp();
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) out(idx[a], idx[b]) = e(a, b);
  }
  return out;
}

}  // namespace

AsMpo exp_asymmetric_mpo(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& generator, double dt) {
  std::map<std::size_t, DenseMatrix> g;
  for (const auto& t : generator) {
    if (t.factors.size() != 1) throw NonLocalAsymmetricTerm("asymmetric terms must act on a single site");
    const auto& [l, op] = t.factors[0];
    if (l >= spaces.size()) throw SiteOutOfRange("asymmetric term on site " + std::to_string(l));
    auto it = g.find(l);
    if (it == g.end()) it = g.emplace(l, DenseMatrix::Zero(op.rows(), op.cols())).first;
    it->second += t.coefficient * op;
  }
  std::map<std::size_t, DenseMatrix> factors;
  for (const auto& [l, m] : g) factors[l] = block_exp(m * dt);
  return product_mpo_general(spaces, factors);
}

// ---------------------------------------------------------------------
// Density operators

AsMps vectorize_pure(const AsMps& psi, const TruncationPolicy& policy) {
  const std::size_t L = psi.length();
  auto vspaces = vectorized_chain(psi.spaces());
  std::vector<SymTensor> sites(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& m = psi.site(l);
    auto outer = contract(m, conj_values(m), {});                  // (s, a, a+, s', a', a'+)
    auto fused = fuse_legs(outer, {{0}, {3}, {1, 4}, {2, 5}}).first;  // (s, s', A, A+)
    const auto& sp = psi.space(l);
    const auto& vs = vspaces[l];
    const int d = sp.dim();
    SymTensor t({vs.leg(Dir::Out), fused.leg(2), fused.leg(3)});
    std::map<Key, Block> blocks;
    for (const auto& [k, b] : fused.blocks()) {
      const Charge q = k[0] + k[1];
      const auto& vst = vs.states(q);
      Key nk{q, k[2], k[3]};
      auto it = blocks.find(nk);
      if (it == blocks.end()) it = blocks.emplace(nk, Block(t.block_shape(nk))).first;
      const auto& ns = sp.states(k[0]);
      const auto& ms = sp.states(k[1]);
      const std::size_t inner = static_cast<std::size_t>(b.shape[2]) * b.shape[3];
      for (std::size_t i = 0; i < ns.size(); ++i)
        for (std::size_t j = 0; j < ms.size(); ++j) {
          const int kk = ns[i] + d * ms[j];
          const auto pos = static_cast<std::size_t>(std::find(vst.begin(), vst.end(), kk) - vst.begin());
          for (std::size_t r = 0; r < inner; ++r)
            it->second.data[pos * inner + r] += b.data[(i * ms.size() + j) * inner + r];
        }
    }
    for (auto& [k, b] : blocks) t.set_block(k, std::move(b));
    sites[l] = std::move(t);
  }
  sites[0] = collapse_leg(sites[0], 1);
  AsMps rho(vspaces, std::move(sites));
  return compress(rho, policy).first;
}

AsMps trace_functional(const std::vector<LocalSpace>& physical, const std::map<std::size_t, DenseMatrix>& ops) {
  std::vector<LocalSpace> vspaces = vectorized_chain(physical);
  std::vector<DenseVector> amps;
  for (std::size_t l = 0; l < physical.size(); ++l) {
    const int d = physical[l].dim();
    auto it = ops.find(l);
    DenseMatrix o = it == ops.end() ? ops::identity(d) : it->second;
    DenseVector v = DenseVector::Zero(d * d);
    // <chi|rho> = sum conj(chi[n + d m]) rho[n][m] = sum O[m][n] rho[n][m]
    for (int n = 0; n < d; ++n)
      for (int m = 0; m < d; ++m) v[n + d * m] = std::conj(o(m, n));
    amps.push_back(v);
  }
  return product_state(vspaces, amps);
}

AsMps vectorized_identity(const std::vector<LocalSpace>& physical) { return trace_functional(physical, {}); }

bool is_vectorized(const std::vector<LocalSpace>& spaces) {
  for (const auto& s : spaces)
    if (s.kind().rfind("vectorized_", 0) != 0) return false;
  return !spaces.empty();
}

std::vector<LocalSpace> physical_spaces(const std::vector<LocalSpace>& vectorized) {
  std::vector<LocalSpace> physical;
  for (const auto& s : vectorized) {
    if (s.kind() == "vectorized_spin_half") {
      physical.push_back(LocalSpace::spin_half());
    } else if (s.kind() == "vectorized_boson") {
      physical.push_back(LocalSpace::boson(s.base_dim()));
    } else {
      throw InvalidState("expected a vectorized local space");
    }
  }
  return physical;
}

cplx trace(const AsMps& rho) { return overlap(vectorized_identity(physical_spaces(rho.spaces())), rho); }

AsMpo vectorized_observable(const std::vector<LocalSpace>& physical, const std::map<std::size_t, DenseMatrix>& ops) {
  std::map<std::size_t, DenseMatrix> factors;
  for (const auto& [l, op] : ops) {
    if (l >= physical.size()) throw SiteOutOfRange("observable on site " + std::to_string(l));
    factors[l] = ops::superoperator(op, ops::identity(physical[l].dim()));
  }
  return product_mpo(vectorized_chain(physical), factors);
}

std::map<Charge, double> number_distribution(const AsMps& rho, double* odd_weight) {
  std::map<Charge, double> out;
  double odd = 0.0;
  for (const auto& e : sector_split(rho).entries) {
    if (e.charge % 2 != 0) {
      odd += e.weight;
      continue;
    }
    out[e.charge / 2] = trace(e.component).real();
  }
  if (odd_weight) *odd_weight = odd;
  return out;
}

}  // namespace adaptmps
