#include "adaptmps/symtensor.hpp"

#include <atomic>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "adaptmps/kernels.hpp"

namespace adaptmps {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string key_str(const Key& k) {
  std::string s = "(";
  for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
  return s + ")";
}

void check_partition(const std::vector<std::vector<std::size_t>>& groups, std::size_t rank) {
  std::vector<int> seen(rank, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidLeg("empty leg group");
    for (auto i : g) {
      if (i >= rank) throw InvalidLeg("leg index out of range");
      ++seen[i];
    }
  }
  for (int c : seen)
    if (c != 1) throw InvalidLeg("leg groups must partition the tensor legs");
}

FuseGroup singleton_group(const Leg& leg, std::size_t index) {
  FuseGroup g;
  g.members = {index};
  g.member_legs = {leg};
  g.fused = leg;
  for (const auto& s : leg.sectors()) g.layout[s.charge].push_back({Key{s.charge}, 0, s.dim});
  return g;
}

}  // namespace

// ---------------------------------------------------------------------
// Leg

Leg::Leg(Dir dir, std::vector<Sector> sectors) : dir_(dir), sectors_(std::move(sectors)) {
  for (std::size_t i = 0; i < sectors_.size(); ++i) {
    if (sectors_[i].dim < 1) throw InvalidLeg("sector dim must be >= 1");
    if (i > 0 && sectors_[i - 1].charge >= sectors_[i].charge)
      throw InvalidLeg("sector charges must be distinct and ascending");
  }
}

int Leg::dim() const {
  int d = 0;
  for (const auto& s : sectors_) d += s.dim;
  return d;
}

std::optional<std::size_t> Leg::find(Charge c) const {
  auto it = std::lower_bound(sectors_.begin(), sectors_.end(), c,
                             [](const Sector& s, Charge v) { return s.charge < v; });
  if (it == sectors_.end() || it->charge != c) return std::nullopt;
  return static_cast<std::size_t>(it - sectors_.begin());
}

int Leg::sector_dim(Charge c) const {
  auto i = find(c);
  return i ? sectors_[*i].dim : 0;
}

int Leg::offset(std::size_t index) const {
  int off = 0;
  for (std::size_t i = 0; i < index; ++i) off += sectors_[i].dim;
  return off;
}

std::vector<Charge> Leg::charges() const {
  std::vector<Charge> out;
  out.reserve(sectors_.size());
  for (const auto& s : sectors_) out.push_back(s.charge);
  return out;
}

// ---------------------------------------------------------------------
// Block

Block::Block(std::vector<int> s) : shape(std::move(s)), data(kernels::product(shape)) {}

Block::Block(std::vector<int> s, std::vector<cplx> d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != kernels::product(shape)) throw ShapeMismatch("block data size does not match shape");
}

double Block::norm2() const {
  double acc = 0.0;
  for (const auto& x : data) acc += std::norm(x);
  return acc;
}

// ---------------------------------------------------------------------
// SymTensor

SymTensor::SymTensor(std::vector<Leg> legs) : legs_(std::move(legs)) {}

SymTensor SymTensor::make(std::vector<Leg> legs, BlockMap blocks) {
  SymTensor t(std::move(legs));
  for (auto& [k, b] : blocks) t.set_block(k, std::move(b));
  return t;
}

SymTensor make_tensor(std::vector<Leg> legs, BlockMap blocks) { return SymTensor::make(std::move(legs), std::move(blocks)); }

const Block* SymTensor::find_block(const Key& key) const {
  auto it = blocks_.find(key);
  return it == blocks_.end() ? nullptr : &it->second;
}

namespace {
std::atomic<bool> g_fusion_check{true};
}  // namespace

void detail::set_fusion_check_enabled(bool on) { g_fusion_check = on; }
bool detail::fusion_check_enabled() { return g_fusion_check; }

bool SymTensor::key_fuses(const Key& key) const {
  long total = 0;
  for (std::size_t i = 0; i < key.size(); ++i) total += static_cast<long>(sign(legs_[i].dir())) * key[i];
  return total == 0;
}

void SymTensor::validate_key(const Key& key) const {
  if (key.size() != legs_.size()) throw ShapeMismatch("key rank " + std::to_string(key.size()) + " != tensor rank");
  for (std::size_t i = 0; i < key.size(); ++i)
    if (!legs_[i].find(key[i]))
      throw UnknownCharge("charge " + std::to_string(key[i]) + " absent from leg " + std::to_string(i));
  if (detail::fusion_check_enabled() && !key_fuses(key))
    throw FusionViolation("key " + key_str(key) + " breaks the fusion rule");
}

std::vector<int> SymTensor::block_shape(const Key& key) const {
  std::vector<int> shape(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) shape[i] = legs_[i].sector_dim(key[i]);
  return shape;
}

void SymTensor::set_block(const Key& key, Block block) {
  validate_key(key);
  if (block.shape != block_shape(key)) throw ShapeMismatch("block " + key_str(key) + " has the wrong shape");
  if (block.data.size() != kernels::product(block.shape)) throw ShapeMismatch("block data size mismatch");
  blocks_.insert_or_assign(key, std::move(block));
}

void SymTensor::accumulate_block(const Key& key, const Block& block) {
  auto it = blocks_.find(key);
  if (it == blocks_.end()) {
    set_block(key, block);
    return;
  }
  if (block.shape != it->second.shape) throw ShapeMismatch("block " + key_str(key) + " has the wrong shape");
  for (std::size_t i = 0; i < block.data.size(); ++i) it->second.data[i] += block.data[i];
}

double SymTensor::norm2() const {
  double acc = 0.0;
  for (const auto& [k, b] : blocks_) acc += b.norm2();
  return acc;
}

double SymTensor::norm() const { return std::sqrt(norm2()); }

cplx SymTensor::scalar() const {
  if (!legs_.empty()) throw ShapeMismatch("scalar() on a tensor of rank " + std::to_string(legs_.size()));
  auto it = blocks_.find(Key{});
  return it == blocks_.end() ? cplx{} : it->second.data.at(0);
}

void SymTensor::prune(double tol) {
  std::erase_if(blocks_, [tol](const auto& kv) { return std::sqrt(kv.second.norm2()) < tol; });
}

void SymTensor::shrink_leg(std::size_t leg_index) {
  std::set<Charge> used;
  for (const auto& [k, b] : blocks_) used.insert(k[leg_index]);
  std::vector<Sector> kept;
  for (const auto& s : legs_[leg_index].sectors())
    if (used.count(s.charge)) kept.push_back(s);
  legs_[leg_index] = Leg(legs_[leg_index].dir(), std::move(kept));
}

SymTensor SymTensor::with_leg(std::size_t i, const Leg& leg) const {
  if (leg.dir() != legs_.at(i).dir()) throw LegMismatch("with_leg cannot change direction");
  for (const auto& s : legs_[i].sectors()) {
    int d = leg.sector_dim(s.charge);
    if (d != s.dim) {
      // only sectors actually referenced need to survive
      bool referenced = std::any_of(blocks_.begin(), blocks_.end(), [&](const auto& kv) { return kv.first[i] == s.charge; });
      if (referenced) throw LegMismatch("with_leg drops or resizes a used sector");
    }
  }
  SymTensor out(legs_);
  out.legs_[i] = leg;
  out.blocks_ = blocks_;
  return out;
}

// ---------------------------------------------------------------------
// Elementwise operations

SymTensor contract(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy) {
  if (kernels::execution() == kernels::Execution::Parallel) return kernels::contract_parallel(a, b, pairs, policy);
  return kernels::contract_serial(a, b, pairs, policy);
}

SymTensor conjugate(const SymTensor& a) {
  std::vector<Leg> legs;
  for (const auto& l : a.legs()) legs.push_back(l.dual());
  SymTensor out(std::move(legs));
  for (const auto& [k, b] : a.blocks()) {
    Block c = b;
    for (auto& x : c.data) x = std::conj(x);
    out.set_block_trusted(k, std::move(c));
  }
  return out;
}

SymTensor conj_values(const SymTensor& a) {
  SymTensor out(a.legs());
  for (const auto& [k, b] : a.blocks()) {
    Block c = b;
    for (auto& x : c.data) x = std::conj(x);
    out.set_block_trusted(k, std::move(c));
  }
  return out;
}

SymTensor axpy(const SymTensor& a, cplx c, const SymTensor& b) {
  if (a.legs() != b.legs()) throw LegMismatch("add requires identical legs");
  SymTensor out(a.legs());
  for (const auto& [k, blk] : a.blocks()) out.set_block_trusted(k, blk);
  for (const auto& [k, blk] : b.blocks()) {
    const Block* existing = out.find_block(k);
    if (existing) {
      Block sum = *existing;
      for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += c * blk.data[i];
      out.set_block_trusted(k, std::move(sum));
    } else {
      Block sc = blk;
      for (auto& x : sc.data) x *= c;
      out.set_block_trusted(k, std::move(sc));
    }
  }
  out.prune();
  return out;
}

SymTensor add(const SymTensor& a, const SymTensor& b) { return axpy(a, 1.0, b); }

SymTensor scale(const SymTensor& a, cplx c) {
  SymTensor out(a.legs());
  if (c == cplx{}) return out;
  for (const auto& [k, b] : a.blocks()) {
    Block sc = b;
    for (auto& x : sc.data) x *= c;
    out.set_block_trusted(k, std::move(sc));
  }
  return out;
}

cplx inner(const SymTensor& a, const SymTensor& b) {
  if (a.legs() != b.legs()) throw LegMismatch("inner requires identical legs");
  cplx acc{};
  for (const auto& [k, blk] : a.blocks()) {
    const Block* other = b.find_block(k);
    if (!other) continue;
    for (std::size_t i = 0; i < blk.data.size(); ++i) acc += std::conj(blk.data[i]) * other->data[i];
  }
  return acc;
}

SymTensor transpose(const SymTensor& a, std::span<const std::size_t> perm) {
  if (perm.size() != a.rank()) throw LegMismatch("transpose permutation has wrong length");
  std::vector<bool> seen(a.rank(), false);
  for (auto p : perm) {
    if (p >= a.rank() || seen[p]) throw LegMismatch("transpose argument is not a permutation");
    seen[p] = true;
  }
  std::vector<Leg> legs;
  for (auto p : perm) legs.push_back(a.leg(p));
  SymTensor out(std::move(legs));
  for (const auto& [k, b] : a.blocks()) {
    Key nk(perm.size());
    std::vector<int> ns(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      nk[i] = k[perm[i]];
      ns[i] = b.shape[perm[i]];
    }
    out.set_block_trusted(std::move(nk), Block(std::move(ns), kernels::permute_array(b.data, b.shape, perm)));
  }
  return out;
}

SymTensor transpose(const SymTensor& a, std::initializer_list<std::size_t> perm) {
  std::vector<std::size_t> p(perm);
  return transpose(a, std::span<const std::size_t>(p));
}

SymTensor shift_charges(const SymTensor& a, std::span<const std::size_t> legs_to_shift, Charge offset) {
  std::vector<Leg> legs = a.legs();
  std::vector<bool> shifted(a.rank(), false);
  for (auto i : legs_to_shift) {
    shifted.at(i) = true;
    std::vector<Sector> s = legs[i].sectors();
    for (auto& x : s) x.charge += offset;
    legs[i] = Leg(legs[i].dir(), std::move(s));
  }
  SymTensor out(std::move(legs));
  for (const auto& [k, b] : a.blocks()) {
    Key nk = k;
    for (std::size_t i = 0; i < nk.size(); ++i)
      if (shifted[i]) nk[i] += offset;
    if (!out.key_fuses(nk)) throw FusionViolation("shift_charges breaks the fusion rule");
    out.set_block_trusted(std::move(nk), b);
  }
  return out;
}

SymTensor embed(const SymTensor& a, const std::vector<Leg>& target, const std::vector<LegOffsets>& offsets) {
  if (target.size() != a.rank() || offsets.size() != a.rank()) throw LegMismatch("embed rank mismatch");
  SymTensor out(target);
  for (const auto& [k, b] : a.blocks()) {
    std::vector<int> off(k.size(), 0);
    for (std::size_t i = 0; i < k.size(); ++i) {
      auto it = offsets[i].find(k[i]);
      if (it != offsets[i].end()) off[i] = it->second;
      if (off[i] + b.shape[i] > target[i].sector_dim(k[i])) throw LegMismatch("embed target sector too small");
    }
    Block dst(out.block_shape(k));
    kernels::insert_subarray(b.data, b.shape, dst.data, dst.shape, off);
    out.set_block_trusted(k, std::move(dst));
  }
  return out;
}

SymTensor direct_sum(const SymTensor& a, const SymTensor& b, const std::vector<std::size_t>& summed) {
  if (a.rank() != b.rank()) throw LegMismatch("direct_sum rank mismatch");
  std::vector<bool> is_summed(a.rank(), false);
  for (auto i : summed) is_summed.at(i) = true;
  std::vector<Leg> legs;
  std::vector<LegOffsets> off_a(a.rank()), off_b(a.rank());
  for (std::size_t i = 0; i < a.rank(); ++i) {
    const Leg& la = a.leg(i);
    const Leg& lb = b.leg(i);
    if (la.dir() != lb.dir()) throw LegMismatch("direct_sum legs differ in direction");
    std::map<Charge, int> dims;
    for (const auto& s : la.sectors()) dims[s.charge] = s.dim;
    for (const auto& s : lb.sectors()) {
      auto it = dims.find(s.charge);
      if (it == dims.end()) {
        dims[s.charge] = s.dim;
      } else if (is_summed[i]) {
        off_b[i][s.charge] = it->second;
        it->second += s.dim;
      } else if (it->second != s.dim) {
        throw LegMismatch("direct_sum: unsummed leg " + std::to_string(i) + " differs in dim");
      }
    }
    std::vector<Sector> sectors;
    for (auto [c, d] : dims) sectors.push_back({c, d});
    legs.emplace_back(la.dir(), std::move(sectors));
  }
  return add(embed(a, legs, off_a), embed(b, legs, off_b));
}

std::vector<int> dense_shape(const SymTensor& a) {
  std::vector<int> shape;
  for (const auto& l : a.legs()) shape.push_back(l.dim());
  return shape;
}

std::vector<cplx> to_dense(const SymTensor& a) {
  auto shape = dense_shape(a);
  std::vector<cplx> dense(kernels::product(shape));
  for (const auto& [k, b] : a.blocks()) {
    std::vector<int> off(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) off[i] = a.leg(i).offset(*a.leg(i).find(k[i]));
    kernels::insert_subarray(b.data, b.shape, dense, shape, off);
  }
  return dense;
}

// ---------------------------------------------------------------------
// Fusion

namespace detail {

std::pair<SymTensor, FuseMap> fuse_general(const SymTensor& a, const std::vector<std::vector<std::size_t>>& groups,
                                           const std::vector<Dir>& dirs) {
  check_partition(groups, a.rank());
  if (dirs.size() != groups.size()) throw InvalidLeg("one direction per group required");
  FuseMap map;
  map.source_rank = a.rank();
  std::vector<std::size_t> perm;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    FuseGroup grp;
    grp.members = groups[g];
    for (auto i : groups[g]) {
      grp.member_legs.push_back(a.leg(i));
      perm.push_back(i);
    }
    // enumerate member sector combos in lexicographic order
    const std::size_t m = grp.members.size();
    std::map<Charge, int> totals;
    bool any_empty = std::any_of(grp.member_legs.begin(), grp.member_legs.end(),
                                 [](const Leg& l) { return l.num_sectors() == 0; });
    std::vector<std::size_t> idx(m, 0);
    bool done = any_empty;
    while (!done) {
      Key charges(m);
      long fused = 0;
      int size = 1;
      for (std::size_t j = 0; j < m; ++j) {
        const auto& s = grp.member_legs[j].sectors()[idx[j]];
        charges[j] = s.charge;
        fused += static_cast<long>(sign(grp.member_legs[j].dir()) * sign(dirs[g])) * s.charge;
        size *= s.dim;
      }
      int& total = totals[static_cast<Charge>(fused)];
      grp.layout[static_cast<Charge>(fused)].push_back({std::move(charges), total, size});
      total += size;
      done = true;
      for (std::size_t j = m; j-- > 0;) {
        if (++idx[j] < grp.member_legs[j].num_sectors()) {
          done = false;
          break;
        }
        idx[j] = 0;
      }
    }
    std::vector<Sector> sectors;
    for (auto [c, d] : totals) sectors.push_back({c, d});
    grp.fused = Leg(dirs[g], std::move(sectors));
    map.groups.push_back(std::move(grp));
  }

  std::vector<Leg> fused_legs;
  for (const auto& g : map.groups) fused_legs.push_back(g.fused);
  SymTensor out(std::move(fused_legs));
  const std::size_t G = map.groups.size();
  for (const auto& [k, b] : a.blocks()) {
    Key fk(G);
    std::vector<int> sub_shape(G), off(G);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < G; ++g) {
      const auto& grp = map.groups[g];
      Key mc;
      long fused = 0;
      int size = 1;
      for (std::size_t j = 0; j < grp.members.size(); ++j, ++pos) {
        mc.push_back(k[grp.members[j]]);
        fused += static_cast<long>(sign(grp.member_legs[j].dir()) * sign(dirs[g])) * k[grp.members[j]];
        size *= b.shape[grp.members[j]];
      }
      fk[g] = static_cast<Charge>(fused);
      const auto& list = grp.layout.at(fk[g]);
      auto it = std::lower_bound(list.begin(), list.end(), mc,
                                 [](const FuseGroup::Entry& e, const Key& v) { return e.charges < v; });
      off[g] = it->offset;
      sub_shape[g] = size;
    }
    auto permuted = kernels::permute_array(b.data, b.shape, perm);
    const Block* existing = out.find_block(fk);
    Block dst = existing ? *existing : Block(out.block_shape(fk));
    kernels::insert_subarray(permuted, sub_shape, dst.data, dst.shape, off);
    out.set_block_trusted(fk, std::move(dst));
  }
  return {std::move(out), std::move(map)};
}

}  // namespace detail

std::pair<SymTensor, FuseMap> fuse_legs(const SymTensor& a, const std::vector<std::vector<std::size_t>>& groups) {
  check_partition(groups, a.rank());
  std::vector<Dir> dirs;
  for (const auto& g : groups) {
    Dir d = a.leg(g.front()).dir();
    for (auto i : g)
      if (a.leg(i).dir() != d) throw MixedDirectionGroup("fused legs must share a direction");
    dirs.push_back(d);
  }
  return detail::fuse_general(a, groups, dirs);
}

SymTensor split_legs(const SymTensor& fused, const FuseMap& map) {
  const std::size_t G = map.groups.size();
  if (fused.rank() != G) throw LegMismatch("split_legs: fuse map does not match tensor rank");
  std::vector<Leg> legs(map.source_rank);
  std::vector<std::size_t> grouped_order;  // grouped position -> original index
  for (const auto& g : map.groups)
    for (std::size_t j = 0; j < g.members.size(); ++j) {
      legs[g.members[j]] = g.member_legs[j];
      grouped_order.push_back(g.members[j]);
    }
  // inverse permutation: original index -> grouped position
  std::vector<std::size_t> inv(map.source_rank);
  for (std::size_t p = 0; p < grouped_order.size(); ++p) inv[grouped_order[p]] = p;

  SymTensor out(legs);
  for (const auto& [fk, b] : fused.blocks()) {
    std::vector<const std::vector<FuseGroup::Entry>*> lists(G);
    for (std::size_t g = 0; g < G; ++g) {
      auto it = map.groups[g].layout.find(fk[g]);
      if (it == map.groups[g].layout.end()) throw LegMismatch("split_legs: fused charge missing from map");
      lists[g] = &it->second;
    }
    std::vector<std::size_t> sel(G, 0);
    while (true) {
      std::vector<int> sub_shape(G), off(G), member_shape;
      Key grouped_key;
      for (std::size_t g = 0; g < G; ++g) {
        const auto& e = (*lists[g])[sel[g]];
        sub_shape[g] = e.size;
        off[g] = e.offset;
        for (std::size_t j = 0; j < e.charges.size(); ++j) {
          grouped_key.push_back(e.charges[j]);
          member_shape.push_back(map.groups[g].member_legs[j].sector_dim(e.charges[j]));
        }
      }
      auto sub = kernels::extract_subarray(b.data, b.shape, sub_shape, off);
      bool nonzero = std::any_of(sub.begin(), sub.end(), [](const cplx& x) { return x != cplx{}; });
      if (nonzero) {
        Key k(map.source_rank);
        std::vector<int> shape(map.source_rank);
        for (std::size_t p = 0; p < grouped_order.size(); ++p) {
          k[grouped_order[p]] = grouped_key[p];
          shape[grouped_order[p]] = member_shape[p];
        }
        out.set_block_trusted(std::move(k), Block(std::move(shape), kernels::permute_array(sub, member_shape, inv)));
      }
      std::size_t g = G;
      bool done = true;
      while (g-- > 0) {
        if (++sel[g] < lists[g]->size()) {
          done = false;
          break;
        }
        sel[g] = 0;
      }
      if (done) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------
// SVD

SvdResult block_svd(const SymTensor& a, const std::vector<std::size_t>& row_legs,
                    const std::vector<std::size_t>& col_legs, const TruncationPolicy& policy) {
  if (a.empty()) throw EmptyTensor("block_svd on a tensor without blocks");
  if (policy.max_bond < 1 || policy.tolerance < 0) throw InvalidParams("truncation policy requires D >= 1, eps >= 0");
  auto [mat, map] = detail::fuse_general(a, {row_legs, col_legs}, {Dir::In, Dir::Out});

  struct SectorSvd {
    Charge charge;
    RowMat u;
    Eigen::VectorXd s;
    RowMat vh;
  };
  std::vector<const std::pair<const Key, Block>*> entries;
  for (const auto& kv : mat.blocks()) entries.push_back(&kv);
  std::vector<SectorSvd> sectors(entries.size());
  const bool parallel = kernels::execution() == kernels::Execution::Parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(entries.size()); ++n) {
    const auto& [k, b] = *entries[n];
    Eigen::Map<const RowMat> m(b.data.data(), b.shape[0], b.shape[1]);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sectors[n].charge = k[0];
    sectors[n].u = svd.matrixU();
    sectors[n].s = svd.singularValues();
    sectors[n].vh = svd.matrixV().adjoint();
  }

  struct Pooled {
    double sigma;
    Charge charge;
    int index;
  };
  std::vector<Pooled> pooled;
  double total = 0.0;
  for (const auto& sec : sectors)
    for (int i = 0; i < sec.s.size(); ++i) {
      pooled.push_back({sec.s[i], sec.charge, i});
      total += sec.s[i] * sec.s[i];
    }
  if (!(total > 0.0)) throw EmptyTensor("block_svd on a zero tensor");
  std::sort(pooled.begin(), pooled.end(), [](const Pooled& x, const Pooled& y) {
    if (x.sigma != y.sigma) return x.sigma > y.sigma;
    if (x.charge != y.charge) return x.charge < y.charge;
    return x.index < y.index;
  });
  const double eps = std::max(policy.tolerance, kSvdWeightFloor);
  // smallest k whose tail weight is within eps * total
  std::size_t keep = pooled.size();
  double tail = 0.0;
  while (keep > 1) {
    double next = tail + pooled[keep - 1].sigma * pooled[keep - 1].sigma;
    if (next > eps * total) break;
    tail = next;
    --keep;
  }
  keep = std::min<std::size_t>(keep, static_cast<std::size_t>(policy.max_bond));
  std::map<Charge, int> kept_count;
  for (std::size_t i = 0; i < keep; ++i) ++kept_count[pooled[i].charge];
  double dropped = 0.0;
  for (std::size_t i = pooled.size(); i-- > keep;) dropped += pooled[i].sigma * pooled[i].sigma;

  SvdResult res;
  res.discarded_weight = dropped / total;
  std::vector<Sector> bond_sectors;
  for (auto [c, n] : kept_count) bond_sectors.push_back({c, n});
  Leg bond_out(Dir::Out, bond_sectors);
  Leg bond_in(Dir::In, bond_sectors);
  SymTensor uf({map.groups[0].fused, bond_out});
  SymTensor vf({bond_in, map.groups[1].fused});
  SymTensor s({bond_in, bond_out});
  for (const auto& sec : sectors) {
    auto it = kept_count.find(sec.charge);
    if (it == kept_count.end()) continue;
    const int k = it->second;  // singular values are sorted within a sector
    const int rows = static_cast<int>(sec.u.rows());
    const int cols = static_cast<int>(sec.vh.cols());
    Block ub({rows, k});
    Eigen::Map<RowMat>(ub.data.data(), rows, k) = sec.u.leftCols(k);
    Block vb({k, cols});
    Eigen::Map<RowMat>(vb.data.data(), k, cols) = sec.vh.topRows(k);
    Block sb({k, k});
    auto& sv = res.singular_values[sec.charge];
    for (int i = 0; i < k; ++i) {
      sb.data[static_cast<std::size_t>(i) * k + i] = sec.s[i];
      sv.push_back(sec.s[i]);
    }
    uf.set_block_trusted({sec.charge, sec.charge}, std::move(ub));
    vf.set_block_trusted({sec.charge, sec.charge}, std::move(vb));
    s.set_block_trusted({sec.charge, sec.charge}, std::move(sb));
  }

  FuseMap umap;
  umap.source_rank = row_legs.size() + 1;
  FuseGroup rows = map.groups[0];
  rows.members.resize(row_legs.size());
  std::iota(rows.members.begin(), rows.members.end(), 0);
  umap.groups = {rows, singleton_group(bond_out, row_legs.size())};
  res.u = split_legs(uf, umap);

  FuseMap vmap;
  vmap.source_rank = col_legs.size() + 1;
  FuseGroup cols = map.groups[1];
  cols.members.resize(col_legs.size());
  std::iota(cols.members.begin(), cols.members.end(), 1);
  vmap.groups = {singleton_group(bond_in, 0), cols};
  res.v = split_legs(vf, vmap);
  res.s = std::move(s);
  return res;
}

SymTensor absorb_right(const SymTensor& u, const SymTensor& s) { return contract(u, s, {{u.rank() - 1, 0}}); }

SymTensor absorb_left(const SymTensor& s, const SymTensor& v) { return contract(s, v, {{1, 0}}); }

}  // namespace adaptmps
