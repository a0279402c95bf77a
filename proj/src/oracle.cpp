#include "adaptmps/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace adaptmps::oracle {

namespace {

std::size_t product_dim(const std::vector<int>& dims, std::size_t cap) {
  std::size_t n = 1;
  for (int d : dims) {
    n *= static_cast<std::size_t>(d);
    if (n > cap) throw DimensionCap("dense dimension exceeds cap " + std::to_string(cap));
  }
  return n;
}

std::vector<int> dims_of(const std::vector<LocalSpace>& spaces) {
  std::vector<int> d;
  for (const auto& s : spaces) d.push_back(s.dim());
  return d;
}

// Calls f(key, multi-index, value) for every stored element.
template <class F>
void for_each_element(const SymTensor& t, F&& f) {
  std::vector<int> idx;
  for (const auto& [k, b] : t.blocks()) {
    idx.assign(b.shape.size(), 0);
    for (std::size_t i = 0; i < b.data.size(); ++i) {
      if (b.data[i] != cplx{}) f(k, idx, b.data[i]);
      for (std::size_t p = b.shape.size(); p-- > 0;) {
        if (++idx[p] < b.shape[p]) break;
        idx[p] = 0;
      }
    }
  }
}


}  // namespace

std::size_t DenseSystem::dim() const { return product_dim(dims, kVectorizedCap); }

std::vector<Charge> DenseSystem::total_charges() const {
  const std::size_t n = dim();
  std::vector<Charge> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    Charge q = 0;
    for (std::size_t l = dims.size(); l-- > 0;) {
      q += charges[l][rem % dims[l]];
      rem /= dims[l];
    }
    out[i] = q;
  }
  return out;
}

DenseVector mps_to_dense(const AsMps& psi, std::size_t cap) {
  const auto dims = dims_of(psi.spaces());
  const std::size_t n = product_dim(dims, cap);
  DenseVector out = DenseVector::Zero(static_cast<Eigen::Index>(n));
  if (psi.is_zero()) return out;
  SymTensor chain = psi.site(0);  // (s0, a1, ..., a_last)
  for (std::size_t l = 1; l < psi.length(); ++l) chain = contract(chain, psi.site(l), {{chain.rank() - 1, 1}});
  // legs: s0, a1, s1, ..., s_{L-1}, a_{L+1}
  const std::size_t L = psi.length();
  for_each_element(chain, [&](const Key& k, const std::vector<int>& idx, cplx v) {
    std::size_t flat = 0;
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t leg = l == 0 ? 0 : l + 1;
      const int state = psi.space(l).states(k[leg])[idx[leg]];
      flat = flat * dims[l] + state;
    }
    out[static_cast<Eigen::Index>(flat)] += v;
  });
  return out;
}

DenseMatrix mpo_to_dense(const AsMpo& op, std::size_t cap) {
  const auto dims = dims_of(op.spaces());
  const std::size_t n = product_dim(dims, cap);
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (op.is_zero()) return out;
  SymTensor chain = op.site(0);  // (s0, t0, b1, b2)
  for (std::size_t l = 1; l < op.length(); ++l) chain = contract(chain, op.site(l), {{chain.rank() - 1, 2}});
  // legs: s0, t0, b1, s1, t1, ..., s_{L-1}, t_{L-1}, b_{L+1}
  const std::size_t L = op.length();
  for_each_element(chain, [&](const Key& k, const std::vector<int>& idx, cplx v) {
    std::size_t row = 0, col = 0;
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t s_leg = l == 0 ? 0 : 2 * l + 1;
      const std::size_t t_leg = s_leg + 1;
      col = col * dims[l] + op.space(l).states(k[s_leg])[idx[s_leg]];
      row = row * dims[l] + op.space(l).states(k[t_leg])[idx[t_leg]];
    }
    out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += v;
  });
  return out;
}

DenseMatrix kron_factors(const std::vector<int>& dims, const std::map<std::size_t, DenseMatrix>& factors,
                         std::size_t cap) {
  product_dim(dims, cap);
  DenseMatrix out = DenseMatrix::Ones(1, 1);
  for (std::size_t l = 0; l < dims.size(); ++l) {
    auto it = factors.find(l);
    DenseMatrix f = it == factors.end() ? DenseMatrix::Identity(dims[l], dims[l]) : it->second;
    DenseMatrix next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
    out = std::move(next);
  }
  return out;
}

DenseMatrix dense_site_sum(const std::vector<int>& dims, const DenseMatrix& op) {
  const std::size_t n = product_dim(dims, kStateCap);
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t l = 0; l < dims.size(); ++l) out += kron_factors(dims, {{l, op}});
  return out;
}

DenseSystem dense_xyz(const ModelParams& p) {
  p.validate_spin();
  DenseSystem sys;
  sys.dims.assign(p.L, 2);
  sys.charges.assign(p.L, {0, 1});
  DenseMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << -1, 0, 0, 1;  // |0> has sigma^z = -1
  const std::size_t n = product_dim(sys.dims, kStateCap);
  sys.matrix = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t l = 0; l + 1 < p.L; ++l) {
    sys.matrix += p.j_xy * (1 + p.gamma) * kron_factors(sys.dims, {{l, x}, {l + 1, x}});
    sys.matrix += p.j_xy * (1 - p.gamma) * kron_factors(sys.dims, {{l, y}, {l + 1, y}});
    sys.matrix += p.j_xy * p.delta * kron_factors(sys.dims, {{l, z}, {l + 1, z}});
  }
  for (std::size_t l = 0; l < p.L; ++l) sys.matrix += p.h * kron_factors(sys.dims, {{l, z}});
  return sys;
}

DenseSystem dense_bose_hubbard(const ModelParams& p) {
  p.validate_boson();
  DenseSystem sys;
  sys.dims.assign(p.L, p.d);
  std::vector<Charge> q(p.d);
  for (int i = 0; i < p.d; ++i) q[i] = i;
  sys.charges.assign(p.L, q);
  DenseMatrix a = DenseMatrix::Zero(p.d, p.d);
  for (int i = 1; i < p.d; ++i) a(i - 1, i) = std::sqrt(static_cast<double>(i));
  DenseMatrix ad = a.adjoint();
  DenseMatrix onsite = DenseMatrix::Zero(p.d, p.d);
  for (int i = 0; i < p.d; ++i) onsite(i, i) = 0.5 * p.u * i * (i - 1);
  const std::size_t n = product_dim(sys.dims, kStateCap);
  sys.matrix = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t l = 0; l + 1 < p.L; ++l) {
    DenseMatrix hop = kron_factors(sys.dims, {{l, a}, {l + 1, ad}});
    sys.matrix -= p.j * (hop + DenseMatrix(hop.adjoint()));
  }
  for (std::size_t l = 0; l < p.L; ++l) sys.matrix += kron_factors(sys.dims, {{l, onsite}});
  return sys;
}

DenseMatrix dense_parity(std::size_t L) {
  // exp(i pi S^z_T) is diagonal with phase exp(i pi sum sigma^z)
  std::vector<int> dims(L, 2);
  const std::size_t n = product_dim(dims, kStateCap);
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    int sz = 0;
    for (std::size_t l = 0; l < L; ++l) sz += ((i >> l) & 1) ? 1 : -1;
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::exp(cplx(0, M_PI * sz));
  }
  return out;
}

std::pair<double, DenseVector> dense_ground(const DenseSystem& sys, std::optional<Charge> sector) {
  if (!sector) return dense_ground(sys, std::set<Charge>{});
  return dense_ground(sys, std::set<Charge>{*sector});
}

std::pair<double, DenseVector> dense_ground(const DenseSystem& sys, const std::set<Charge>& sectors) {
  const std::size_t n = sys.dim();
  if (n > kStateCap) throw DimensionCap("dense_ground dimension exceeds cap");
  std::vector<Eigen::Index> basis;
  auto q = sys.total_charges();
  for (std::size_t i = 0; i < n; ++i)
    if (sectors.empty() || sectors.count(q[i])) basis.push_back(static_cast<Eigen::Index>(i));
  if (basis.empty()) throw InvalidParams("sector has no basis states");
  const auto m = static_cast<Eigen::Index>(basis.size());
  DenseMatrix sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = sys.matrix(basis[i], basis[j]);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sub);
  DenseVector v = DenseVector::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m; ++i) v[basis[i]] = es.eigenvectors()(i, 0);
  return {es.eigenvalues()[0], v};
}

DenseVector dense_evolve(const DenseMatrix& h, const DenseVector& v, double t, EvolveMethod method) {
  if (static_cast<std::size_t>(h.rows()) > kStateCap) throw DimensionCap("dense_evolve dimension exceeds cap");
  if (method == EvolveMethod::Taylor) return expm_multiply(cplx(0, -1) * h, v, t);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
  const auto& U = es.eigenvectors();
  DenseVector c = U.adjoint() * v;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::exp(cplx(0, -es.eigenvalues()[i] * t));
  return U * c;
}

DenseVector expm_multiply(const DenseMatrix& g, const DenseVector& v, double t) {
  const double norm = g.cwiseAbs().colwise().sum().maxCoeff() * std::abs(t);
  const int steps = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
  const double tau = t / steps;
  DenseVector x = v;
  for (int s = 0; s < steps; ++s) {
    DenseVector term = x, sum = x;
    for (int k = 1; k < 60; ++k) {
      term = (g * term) * (tau / k);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    x = sum;
  }
  return x;
}

DenseMatrix DenseLindblad::rhs(const DenseMatrix& rho) const {
  const cplx mi(0, -1);
  DenseMatrix out = mi * (h * rho - rho * h);
  for (const auto& c : jumps) {
    DenseMatrix cdc = c.adjoint() * c;
    out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
  }
  return out;
}

DenseLindblad dense_lindblad_bh(const ModelParams& p) {
  p.validate_lindblad();
  DenseLindblad sys;
  auto bh = dense_bose_hubbard(p);
  sys.dims = bh.dims;
  sys.h = bh.matrix;
  DenseMatrix a = DenseMatrix::Zero(p.d, p.d);
  for (int i = 1; i < p.d; ++i) a(i - 1, i) = std::sqrt(static_cast<double>(i));
  auto edge = [&](std::size_t l, double lambda, double nbar) {
    if (lambda <= 0) return;
    sys.jumps.push_back(std::sqrt(2 * lambda * (nbar + 1)) * kron_factors(sys.dims, {{l, a}}));
    if (nbar > 0) sys.jumps.push_back(std::sqrt(2 * lambda * nbar) * kron_factors(sys.dims, {{l, DenseMatrix(a.adjoint())}}));
  };
  edge(0, p.lambda1, p.nbar1);
  if (p.L > 1) edge(p.L - 1, p.lambdaL, p.nbarL);
  return sys;
}

DenseMatrix dense_lindblad(const DenseLindblad& sys, const DenseMatrix& rho0, double t) {
  const std::size_t n = static_cast<std::size_t>(sys.h.rows());
  if (n * n > kVectorizedCap) throw DimensionCap("dense_lindblad dimension exceeds cap");
  // generator norm bound: 2|H| + 2 sum |c|^2
  double bound = 2 * sys.h.cwiseAbs().colwise().sum().maxCoeff();
  for (const auto& c : sys.jumps) bound += 2 * std::pow(c.cwiseAbs().colwise().sum().maxCoeff(), 2);
  const int steps = std::max(1, static_cast<int>(std::ceil(bound * std::abs(t) / 0.5)));
  const double tau = t / steps;
  DenseMatrix rho = rho0;
  for (int s = 0; s < steps; ++s) {
    DenseMatrix term = rho, sum = rho;
    for (int k = 1; k < 60; ++k) {
      term = sys.rhs(term) * (tau / k);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    rho = sum;
  }
  return rho;
}

DenseVector vectorize(const DenseMatrix& rho, const std::vector<int>& dims) {
  const std::size_t n = static_cast<std::size_t>(rho.rows());
  DenseVector v = DenseVector::Zero(static_cast<Eigen::Index>(n * n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      // per-site digits of ket r and bra c, combined as k = n + d m
      std::size_t rr = r, cc = c, flat = 0, mult = 1;
      for (std::size_t l = dims.size(); l-- > 0;) {
        const std::size_t d = dims[l];
        flat += ((rr % d) + d * (cc % d)) * mult;
        mult *= d * d;
        rr /= d;
        cc /= d;
      }
      v[static_cast<Eigen::Index>(flat)] = rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  return v;
}

DenseMatrix unvectorize(const DenseVector& v, const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= d;
  DenseMatrix rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t rr = r, cc = c, flat = 0, mult = 1;
      for (std::size_t l = dims.size(); l-- > 0;) {
        const std::size_t d = dims[l];
        flat += ((rr % d) + d * (cc % d)) * mult;
        mult *= d * d;
        rr /= d;
        cc /= d;
      }
      rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[static_cast<Eigen::Index>(flat)];
    }
  return rho;
}

DenseMatrix lindblad_superoperator(const DenseLindblad& sys, std::size_t cap) {
  const std::size_t n = static_cast<std::size_t>(sys.h.rows());
  if (n * n > cap) throw DimensionCap("superoperator dimension exceeds cap");
  DenseMatrix out(static_cast<Eigen::Index>(n * n), static_cast<Eigen::Index>(n * n));
  for (std::size_t k = 0; k < n * n; ++k) {
    DenseVector e = DenseVector::Zero(static_cast<Eigen::Index>(n * n));
    e[static_cast<Eigen::Index>(k)] = 1.0;
    out.col(static_cast<Eigen::Index>(k)) = vectorize(sys.rhs(unvectorize(e, sys.dims)), sys.dims);
  }
  return out;
}

}  // namespace adaptmps::oracle
