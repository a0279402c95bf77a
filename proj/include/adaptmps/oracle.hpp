#pragma once

// Dense reference implementations used to validate the tensor-network code.
// Basis ordering: site 0 is the most significant digit; each site uses its
// basis index (not the charge-grouped leg order).

#include <optional>
#include <set>
#include <vector>

#include "adaptmps/models.hpp"

namespace adaptmps::oracle {

inline constexpr std::size_t kStateCap = 4096;
inline constexpr std::size_t kVectorizedCap = 16384;

struct DenseSystem {
  std::vector<int> dims;
  std::vector<std::vector<Charge>> charges;  // per site, per basis state
  DenseMatrix matrix;

  std::size_t dim() const;
  std::vector<Charge> total_charges() const;  // per global basis index
};

DenseVector mps_to_dense(const AsMps& psi, std::size_t cap = kStateCap);
DenseMatrix mpo_to_dense(const AsMpo& op, std::size_t cap = kStateCap);

// prod_l factors[l] with identities elsewhere.
DenseMatrix kron_factors(const std::vector<int>& dims, const std::map<std::size_t, DenseMatrix>& factors,
                         std::size_t cap = kStateCap);

DenseSystem dense_xyz(const ModelParams& p);
DenseSystem dense_bose_hubbard(const ModelParams& p);
DenseMatrix dense_parity(std::size_t L);
// Sum of one operator over all sites.
DenseMatrix dense_site_sum(const std::vector<int>& dims, const DenseMatrix& op);

// Lowest eigenpair, optionally within one total-charge sector (the vector
// is returned in the full space).
std::pair<double, DenseVector> dense_ground(const DenseSystem& sys, std::optional<Charge> sector = {});
// Restricted to the span of several sectors (all sectors when empty).
std::pair<double, DenseVector> dense_ground(const DenseSystem& sys, const std::set<Charge>& sectors);

enum class EvolveMethod { Eigen, Taylor };
// exp(-i H t) v
DenseVector dense_evolve(const DenseMatrix& h, const DenseVector& v, double t,
                         EvolveMethod method = EvolveMethod::Eigen);
// exp(G t) v by scaled Taylor steps (G arbitrary).
DenseVector expm_multiply(const DenseMatrix& g, const DenseVector& v, double t);

// d rho/dt = -i[H, rho] + sum_k (c_k rho c_k^+ - 1/2 {c_k^+ c_k, rho})
struct DenseLindblad {
  std::vector<int> dims;
  DenseMatrix h;
  std::vector<DenseMatrix> jumps;

  DenseMatrix rhs(const DenseMatrix& rho) const;
};
DenseLindblad dense_lindblad_bh(const ModelParams& p);
// rho(t) by scaled Taylor steps of the Lindblad generator.
DenseMatrix dense_lindblad(const DenseLindblad& sys, const DenseMatrix& rho0, double t);
// Superoperator matrix in the vectorized basis (per site k = n + d m, site 0
// most significant).
DenseMatrix lindblad_superoperator(const DenseLindblad& sys, std::size_t cap = 1024);
// Vectorized rho with the same layout, and the inverse.
DenseVector vectorize(const DenseMatrix& rho, const std::vector<int>& dims);
DenseMatrix unvectorize(const DenseVector& v, const std::vector<int>& dims);

}  // namespace adaptmps::oracle
