#pragma once

// Hamiltonians, Lindbladians and gate sets for the spin and boson chains.

#include <optional>
#include <vector>

#include "adaptmps/mps.hpp"

namespace adaptmps {

struct ModelParams {
  std::size_t L = 2;
  // XYZ chain
  double j_xy = 1.0;
  double gamma = 0.0;
  double delta = 0.0;
  double h = 0.0;
  // Bose-Hubbard chain and edge dissipation
  double j = 1.0;
  double u = 0.0;
  double lambda1 = 0.0;
  double lambdaL = 0.0;
  double nbar1 = 0.0;
  double nbarL = 0.0;
  int d = 2;

  void validate_spin() const;
  void validate_boson() const;
  void validate_lindblad() const;
};

// coefficient * prod factors; factors sorted by strictly increasing site.
struct LocalTerm {
  cplx coefficient = 1.0;
  std::vector<std::pair<std::size_t, DenseMatrix>> factors;
};

// Sum of product terms as an MPO. Terms are summed pairwise and compressed
// under `policy` after every merge.
AsMpo mpo_from_terms(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& terms,
                     const TruncationPolicy& policy = TruncationPolicy::exact());

std::vector<LocalSpace> spin_chain(std::size_t L);
std::vector<LocalSpace> boson_chain(std::size_t L, int d);
std::vector<LocalSpace> vectorized_chain(const std::vector<LocalSpace>& physical);

// Per bond: 2J[s+s- + s-s+] + 2J*gamma[s+s+ + s-s-] + J*delta szsz; plus h*sz per site.
std::vector<LocalTerm> xyz_terms(const ModelParams& p);
AsMpo mpo_xyz(const ModelParams& p);
// exp(i*pi*sigma^z) on every site.
AsMpo mpo_parity(std::size_t L);
// -J (a_l a+_{l+1} + a+_l a_{l+1}) + U/2 n(n-1)
std::vector<LocalTerm> bose_hubbard_terms(const ModelParams& p);
AsMpo mpo_bose_hubbard(const ModelParams& p);

// Sum of single-site operators, e.g. total S^z or N.
AsMpo mpo_site_sum(const std::vector<LocalSpace>& spaces, const DenseMatrix& op);
AsMpo mpo_site(const std::vector<LocalSpace>& spaces, std::size_t site, const DenseMatrix& op);

// Vectorized Lindbladian of the boundary-driven Bose-Hubbard chain, split
// into the part conserving q = n_ket + n_bra and the jump part.
struct LindbladTerms {
  std::vector<LocalTerm> symmetric;
  std::vector<LocalTerm> asymmetric;
};
LindbladTerms lindblad_terms(const ModelParams& p);
std::pair<AsMpo, AsMpo> lindblad_mpo(const ModelParams& p);

// Premultiplied generator terms of the unitary dynamics: -i * H.
std::vector<LocalTerm> unitary_generator(const std::vector<LocalTerm>& hamiltonian);

// ---------------------------------------------------------------------
// Gates

struct Gate {
  std::size_t site;  // first site
  int width;         // 1 or 2
  // width 2: (s1 In, s2 In, t1 Out, t2 Out); width 1: (s In, t Out)
  SymTensor tensor;
};
using GateLayer = std::vector<Gate>;
struct GateSchedule {
  std::vector<GateLayer> layers;
};

// Gates exp(G_bond * tau) for the premultiplied, charge-conserving,
// nearest-neighbour generator terms. Order 1: even(dt), odd(dt); order 2:
// even(dt/2), odd(dt), even(dt/2).
GateSchedule trotter_gates(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& generator, double dt,
                           int order);

// exp(G * dt) for single-site generator terms that may shift charge.
AsMpo exp_asymmetric_mpo(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& generator, double dt);

// Product of arbitrary single-site operators; each factor may mix charge
// shifts, giving one bond sector per threaded charge.
AsMpo product_mpo_general(const std::vector<LocalSpace>& spaces, const std::map<std::size_t, DenseMatrix>& factors);

// ---------------------------------------------------------------------
// Density operators

// |psi><psi| on the vectorized chain (k = n_ket + d * n_bra per site).
AsMps vectorize_pure(const AsMps& psi, const TruncationPolicy& policy = TruncationPolicy::exact());
// Vectorized identity as a product state; trace(rho) = <identity|rho>.
AsMps vectorized_identity(const std::vector<LocalSpace>& physical);
cplx trace(const AsMps& rho);
bool is_vectorized(const std::vector<LocalSpace>& spaces);
// Inverse of vectorized_chain.
std::vector<LocalSpace> physical_spaces(const std::vector<LocalSpace>& vectorized);
// O acting on the ket side of rho, so <identity| O |rho> = tr(O rho).
AsMpo vectorized_observable(const std::vector<LocalSpace>& physical, const std::map<std::size_t, DenseMatrix>& ops);
// Product state chi with <chi|rho> = tr(O rho) for O = prod of the given
// local operators (identity elsewhere).
AsMps trace_functional(const std::vector<LocalSpace>& physical, const std::map<std::size_t, DenseMatrix>& ops);
// P_N = tr of the q = 2N component of rho. The summed squared norm of the
// odd-q components is written to odd_weight.
std::map<Charge, double> number_distribution(const AsMps& rho, double* odd_weight = nullptr);

}  // namespace adaptmps
