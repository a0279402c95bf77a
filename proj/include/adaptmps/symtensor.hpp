#pragma once

// Block-sparse tensors with an additive U(1) charge on every leg.
//
// A block is stored only if its charge key obeys the fusion rule
//   sum(charges on In legs) - sum(charges on Out legs) == 0.
// Absent keys are exact zeros. Charges are plain integers; a Z2 (or any
// other subgroup) structure shows up only through which charges occur.

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "adaptmps/errors.hpp"

namespace adaptmps {

using cplx = std::complex<double>;
using Charge = int;

enum class Dir : std::int8_t { In, Out };

inline Dir flip(Dir d) { return d == Dir::In ? Dir::Out : Dir::In; }
// +1 for In, -1 for Out: the sign a leg charge enters the fusion rule with.
inline int sign(Dir d) { return d == Dir::In ? 1 : -1; }

struct Sector {
  Charge charge = 0;
  int dim = 1;
  bool operator==(const Sector&) const = default;
};

class Leg {
 public:
  Leg() = default;
  // Throws InvalidLeg unless charges are strictly ascending and dims >= 1.
  Leg(Dir dir, std::vector<Sector> sectors);

  Dir dir() const { return dir_; }
  const std::vector<Sector>& sectors() const { return sectors_; }
  std::size_t num_sectors() const { return sectors_.size(); }
  int dim() const;
  std::optional<std::size_t> find(Charge c) const;
  // 0 when the charge is absent.
  int sector_dim(Charge c) const;
  // Position of the first element of sector `index` in the dense leg.
  int offset(std::size_t index) const;
  std::vector<Charge> charges() const;
  Leg dual() const { return Leg(flip(dir_), sectors_); }
  Leg with_dir(Dir d) const { return Leg(d, sectors_); }

  bool operator==(const Leg&) const = default;

 private:
  Dir dir_ = Dir::Out;
  std::vector<Sector> sectors_;
};

struct Block {
  std::vector<int> shape;
  std::vector<cplx> data;  // row-major

  Block() = default;
  explicit Block(std::vector<int> s);
  Block(std::vector<int> s, std::vector<cplx> d);
  std::size_t size() const { return data.size(); }
  double norm2() const;
};

using Key = std::vector<Charge>;
using BlockMap = std::map<Key, Block>;

// Blocks whose Frobenius norm falls below this after an operation are
// dropped so that the set of live charges stays minimal.
inline constexpr double kPruneTolerance = 1e-14;

class SymTensor {
 public:
  SymTensor() = default;
  // Zero tensor on the given legs.
  explicit SymTensor(std::vector<Leg> legs);

  // Validating constructor (make_tensor).
  static SymTensor make(std::vector<Leg> legs, BlockMap blocks);

  std::size_t rank() const { return legs_.size(); }
  const std::vector<Leg>& legs() const { return legs_; }
  const Leg& leg(std::size_t i) const { return legs_.at(i); }
  const BlockMap& blocks() const { return blocks_; }
  const Block* find_block(const Key& key) const;
  bool empty() const { return blocks_.empty(); }

  // Validated insertion; replaces an existing block with the same key.
  void set_block(const Key& key, Block block);
  // Adds into an existing block or inserts. Validated.
  void accumulate_block(const Key& key, const Block& block);
  // Kernel-side insertion for keys already known to be valid.
  void set_block_trusted(Key key, Block block) { blocks_.insert_or_assign(std::move(key), std::move(block)); }

  double norm2() const;
  double norm() const;
  // Value of a rank-0 tensor (0 if it has no block).
  cplx scalar() const;

  // Drops blocks with Frobenius norm below tol.
  void prune(double tol = kPruneTolerance);
  // Removes leg sectors that no block references (boundary legs only
  // make sense to shrink; callers choose).
  void shrink_leg(std::size_t leg_index);

  std::vector<int> block_shape(const Key& key) const;
  // Throws FusionViolation / UnknownCharge / ShapeMismatch.
  void validate_key(const Key& key) const;
  bool key_fuses(const Key& key) const;

  // Replaces a leg by one with a superset of its sectors (same dims on
  // the shared charges). Blocks are kept.
  SymTensor with_leg(std::size_t i, const Leg& leg) const;

 private:
  std::vector<Leg> legs_;
  BlockMap blocks_;
};

SymTensor make_tensor(std::vector<Leg> legs, BlockMap blocks);

// How contract treats paired legs whose sector lists differ.
enum class SectorPolicy {
  Exact,   // sector lists must be identical (SectorMismatch otherwise)
  Common,  // charges present in both legs must agree in dim; others drop out
};

using LegPairs = std::vector<std::pair<std::size_t, std::size_t>>;

// Result legs: unpaired legs of a, then unpaired legs of b, in order.
SymTensor contract(const SymTensor& a, const SymTensor& b, const LegPairs& pairs,
                   SectorPolicy policy = SectorPolicy::Exact);

// Element-wise conjugate with every leg direction reversed.
SymTensor conjugate(const SymTensor& a);
// Element-wise conjugate, directions untouched.
SymTensor conj_values(const SymTensor& a);

SymTensor add(const SymTensor& a, const SymTensor& b);
SymTensor scale(const SymTensor& a, cplx c);
// a + c*b
SymTensor axpy(const SymTensor& a, cplx c, const SymTensor& b);
// Sum of conj(a)*b over all elements; legs must match.
cplx inner(const SymTensor& a, const SymTensor& b);

// New leg order: result.leg(i) = a.leg(perm[i]).
SymTensor transpose(const SymTensor& a, std::span<const std::size_t> perm);
SymTensor transpose(const SymTensor& a, std::initializer_list<std::size_t> perm);

// Adds `offset` to every charge of leg i (keys follow). Used to re-thread
// bond charges; the caller is responsible for keeping fusion valid, so
// typically two legs of opposite sign are shifted together.
SymTensor shift_charges(const SymTensor& a, std::span<const std::size_t> legs_to_shift, Charge offset);

// Places `a` into a tensor on `target` legs. For every leg the sector
// dims in `target` must be at least those of `a`, and `offsets[i]` gives
// per-charge starting positions inside the target sector (missing
// charges start at 0).
using LegOffsets = std::map<Charge, int>;
SymTensor embed(const SymTensor& a, const std::vector<Leg>& target, const std::vector<LegOffsets>& offsets);

// Direct sum on the legs listed in `summed`; the other legs are merged
// by charge union and must agree in dim where both have a charge.
SymTensor direct_sum(const SymTensor& a, const SymTensor& b, const std::vector<std::size_t>& summed);

// Dense embedding: legs expanded to their full dimension with sectors in
// ascending charge order.
std::vector<cplx> to_dense(const SymTensor& a);
std::vector<int> dense_shape(const SymTensor& a);

// ---------------------------------------------------------------------
// Leg fusion

struct FuseGroup {
  std::vector<std::size_t> members;   // leg indices in the source tensor
  std::vector<Leg> member_legs;
  Leg fused;
  // per fused charge: member charge tuples (lexicographic) with offset/size
  struct Entry {
    Key charges;
    int offset;
    int size;
  };
  std::map<Charge, std::vector<Entry>> layout;
};

struct FuseMap {
  std::size_t source_rank = 0;
  std::vector<FuseGroup> groups;
};

// Fuses each group (single direction per group) into one leg whose charge
// is the sum of member charges. Result legs follow group order.
std::pair<SymTensor, FuseMap> fuse_legs(const SymTensor& a, const std::vector<std::vector<std::size_t>>& groups);
// Exact inverse of fuse_legs; restores the original leg order.
SymTensor split_legs(const SymTensor& fused, const FuseMap& map);

namespace detail {
// Mutation hook for the validation suite: when disabled, validated block
// insertion stops rejecting keys that break the fusion rule.
void set_fusion_check_enabled(bool on);
bool fusion_check_enabled();

// Fusion with an explicit fused direction per group; member charges enter
// with sign(member)/sign(fused), so mixed-direction groups are allowed.
std::pair<SymTensor, FuseMap> fuse_general(const SymTensor& a, const std::vector<std::vector<std::size_t>>& groups,
                                           const std::vector<Dir>& dirs);
}  // namespace detail

// ---------------------------------------------------------------------
// Blockwise SVD

struct TruncationPolicy {
  int max_bond = std::numeric_limits<int>::max();
  double tolerance = 0.0;  // relative discarded weight

  static TruncationPolicy exact() { return {}; }
};

// Relative weight floor below which singular values are treated as zero
// even when tolerance == 0 (sigma ~ 1e-14 * sqrt(total)).
inline constexpr double kSvdWeightFloor = 1e-28;

struct SvdResult {
  SymTensor u;  // row legs..., bond(Out)
  SymTensor s;  // bond(In), bond(Out), real diagonal
  SymTensor v;  // bond(In), col legs...
  double discarded_weight = 0.0;
  // kept singular values per bond charge, descending
  std::map<Charge, std::vector<double>> singular_values;
};

SvdResult block_svd(const SymTensor& a, const std::vector<std::size_t>& row_legs,
                    const std::vector<std::size_t>& col_legs, const TruncationPolicy& policy);

// Multiplies the bond leg of u (last) or v (first) by the diagonal s.
SymTensor absorb_right(const SymTensor& u, const SymTensor& s);
SymTensor absorb_left(const SymTensor& s, const SymTensor& v);

}  // namespace adaptmps
