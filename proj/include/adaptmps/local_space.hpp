#pragma once

// Single-site Hilbert spaces and the dense <-> block-sparse glue for
// site operators.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptmps/symtensor.hpp"

namespace adaptmps {

using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

// Basis states are indexed 0..dim-1; each carries a charge. Inside the
// block-sparse leg, states are grouped by charge (ascending) and keep
// their basis order within a sector.
class LocalSpace {
 public:
  LocalSpace() = default;
  LocalSpace(std::string kind, std::vector<Charge> charges, int base_dim = 0);

  // |0> -> 0, |1> -> 1; sigma^z = diag(-1, +1).
  static LocalSpace spin_half();
  // |n> -> n for 0 <= n < d.
  static LocalSpace boson(int d);
  // Density-operator site: basis k = n_ket + d * n_bra, charge c(n_ket) + c(n_bra).
  static LocalSpace vectorized(const LocalSpace& physical);

  const std::string& kind() const { return kind_; }
  int base_dim() const { return base_dim_; }
  int dim() const { return static_cast<int>(charges_.size()); }
  Charge charge(int k) const { return charges_.at(k); }
  const std::vector<Charge>& charges() const { return charges_; }
  Leg leg(Dir d) const;
  // Index of basis state k inside the dense leg.
  int leg_position(int k) const { return position_.at(k); }
  // Basis states of one charge, in leg order.
  const std::vector<int>& states(Charge c) const;
  std::vector<Charge> sector_charges() const;

  bool operator==(const LocalSpace& o) const { return kind_ == o.kind_ && charges_ == o.charges_; }

 private:
  std::string kind_;
  std::vector<Charge> charges_;
  int base_dim_ = 0;
  std::vector<int> position_;
  std::map<Charge, std::vector<int>> by_charge_;
};

// Charge shift tau - sigma shared by every nonzero element of op; nullopt
// if op mixes shifts. A zero matrix reports shift 0.
std::optional<Charge> charge_shift(const LocalSpace& space, const DenseMatrix& op, double tol = 0.0);

// Decomposes op into components with a uniform charge shift each.
std::map<Charge, DenseMatrix> split_by_shift(const LocalSpace& space, const DenseMatrix& op, double tol = 0.0);

// Site tensor with legs (sigma In, tau Out, b_left In, b_right Out) whose
// bond legs are one-dimensional: b_right = right_charge and
// b_left = right_charge + shift. Element [s, t] holds <t|op|s>.
// Throws NonConservingTerm if op mixes charge shifts.
SymTensor site_operator(const LocalSpace& space, const DenseMatrix& op, Charge right_charge = 0);

// Dense (basis-index ordered) matrix of a rank-2 (sigma In, tau Out) or
// rank-4 one-dimensional-bond site operator; the inverse of site_operator.
DenseMatrix dense_site_operator(const LocalSpace& space, const SymTensor& op);

namespace ops {
DenseMatrix identity(int d);
DenseMatrix sigma_z();
DenseMatrix sigma_plus();   // |1><0|
DenseMatrix sigma_minus();  // |0><1|
DenseMatrix sigma_x();
DenseMatrix sigma_y();
DenseMatrix boson_annihilation(int d);
DenseMatrix boson_creation(int d);
DenseMatrix boson_number(int d);
// Superoperator on the vectorized site for rho -> left * rho * right.
DenseMatrix superoperator(const DenseMatrix& left, const DenseMatrix& right);
}  // namespace ops

}  // namespace adaptmps
