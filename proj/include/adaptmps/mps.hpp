#pragma once

// Matrix product states and operators whose left boundary leg may carry
// several total charges at once.
//
// Site legs
//   MPS: (sigma Out, a_l In, a_{l+1} Out)              a_l = sigma + a_{l+1}
//   MPO: (sigma In, tau Out, b_l In, b_{l+1} Out)       b_l = b_{l+1} + tau - sigma
// The rightmost bond is always the single sector (0, dim 1), so the charge
// flows in from the right and a_1 (b_1) lists the total charges (shifts).
// Every sector of the leftmost bond has dimension 1.

#include <optional>
#include <random>
#include <set>
#include <vector>

#include "adaptmps/local_space.hpp"
#include "adaptmps/symtensor.hpp"

namespace adaptmps {

class AsMps {
 public:
  AsMps() = default;
  // Validates every chain invariant; throws on violation.
  AsMps(std::vector<LocalSpace> spaces, std::vector<SymTensor> sites, std::optional<std::size_t> center = {});

  std::size_t length() const { return sites_.size(); }
  const SymTensor& site(std::size_t l) const { return sites_.at(l); }
  const std::vector<SymTensor>& sites() const { return sites_; }
  const LocalSpace& space(std::size_t l) const { return spaces_.at(l); }
  const std::vector<LocalSpace>& spaces() const { return spaces_; }
  std::optional<std::size_t> center() const { return center_; }
  // Charges of the a_1 leg.
  std::vector<Charge> total_charges() const { return sites_.front().leg(1).charges(); }
  int max_bond() const;
  // True when some site has no blocks (the state is exactly zero).
  bool is_zero() const;

  // In-place updates for sweeping algorithms; the caller keeps bonds
  // consistent. validate() re-checks everything.
  void set_site(std::size_t l, SymTensor t) { sites_.at(l) = std::move(t); }
  void set_center(std::optional<std::size_t> c) { center_ = c; }
  void validate() const;

 private:
  std::vector<LocalSpace> spaces_;
  std::vector<SymTensor> sites_;
  std::optional<std::size_t> center_;
};

class AsMpo {
 public:
  AsMpo() = default;
  AsMpo(std::vector<LocalSpace> spaces, std::vector<SymTensor> sites);

  std::size_t length() const { return sites_.size(); }
  const SymTensor& site(std::size_t l) const { return sites_.at(l); }
  const std::vector<SymTensor>& sites() const { return sites_; }
  const LocalSpace& space(std::size_t l) const { return spaces_.at(l); }
  const std::vector<LocalSpace>& spaces() const { return spaces_; }
  // Charges of the b_1 leg: the total charge shifts the operator produces.
  std::vector<Charge> shift_charges() const { return sites_.front().leg(2).charges(); }
  int max_bond() const;
  bool is_zero() const;
  void validate() const;

 private:
  std::vector<LocalSpace> spaces_;
  std::vector<SymTensor> sites_;
};

// ---------------------------------------------------------------------
// States

// Product state with one amplitude vector (over the basis states) per site.
// Sites with amplitude on several charges give several a_1 sectors.
AsMps product_state(const std::vector<LocalSpace>& spaces, const std::vector<DenseVector>& amplitudes);
// Single basis configuration.
AsMps basis_state(const std::vector<LocalSpace>& spaces, const std::vector<int>& config);
// Normalized random state restricted to the given total charges, with at
// most max_bond states per bond.
AsMps random_state(const std::vector<LocalSpace>& spaces, const std::set<Charge>& totals, int max_bond,
                   std::mt19937_64& rng);

AsMps scale(const AsMps& psi, cplx c);
AsMps add_mps(const AsMps& psi, const AsMps& phi);

AsMps canonicalize(const AsMps& psi, std::size_t center);
// Left-to-right sweep then truncating right-to-left sweep; result is
// canonical at site 0. The second member is the accumulated discarded weight.
std::pair<AsMps, double> compress(const AsMps& psi, const TruncationPolicy& policy);
AsMps apply_mpo(const AsMpo& op, const AsMps& psi, const TruncationPolicy& policy, double* truncation = nullptr);

cplx overlap(const AsMps& psi, const AsMps& phi);  // <psi|phi>
double norm2(const AsMps& psi);
cplx matrix_element(const AsMps& bra, const AsMpo& op, const AsMps& ket);
cplx expectation(const AsMps& psi, const AsMpo& op);

struct SectorEntry {
  Charge charge;
  double weight;
  AsMps component;
};
struct SectorDecomposition {
  std::vector<SectorEntry> entries;  // ascending charge
};
SectorDecomposition sector_split(const AsMps& psi);

// Checks the left/right canonical conditions around the recorded center;
// returns the largest deviation from identity.
double canonical_error(const AsMps& psi);

// ---------------------------------------------------------------------
// Operators

AsMpo identity_mpo(const std::vector<LocalSpace>& spaces);
// coefficient * prod_l factors[l] with identities elsewhere. Each factor
// must have a single charge shift (NonConservingTerm otherwise).
AsMpo product_mpo(const std::vector<LocalSpace>& spaces, const std::map<std::size_t, DenseMatrix>& factors,
                  cplx coefficient = 1.0);
AsMpo scale(const AsMpo& op, cplx c);
AsMpo add_mpo(const AsMpo& a, const AsMpo& b);
AsMpo compress_mpo(const AsMpo& op, const TruncationPolicy& policy);
// Operator product a*b (b acts first).
AsMpo multiply_mpo(const AsMpo& a, const AsMpo& b, const TruncationPolicy& policy);

// Sums each block over the listed leg's index within every sector so the leg
// becomes one-dimensional per charge (used on the leftmost bond).
SymTensor collapse_leg(const SymTensor& t, std::size_t leg);

}  // namespace adaptmps
