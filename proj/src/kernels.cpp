#include "adaptmps/kernels.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <numeric>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace adaptmps::kernels {

namespace {

#ifdef _OPENMP
std::atomic<Execution> g_execution{Execution::Parallel};
#else
std::atomic<Execution> g_execution{Execution::Serial};
#endif

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<std::size_t> row_major_strides(std::span<const int> shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * static_cast<std::size_t>(shape[i]);
  return strides;
}

struct PreparedBlock {
  Key free_key;
  Key contracted_key;
  int rows = 1;
  int cols = 1;
  std::vector<cplx> data;
};

struct Plan {
  std::vector<Leg> out_legs;
  std::vector<PreparedBlock> a_blocks;
  std::vector<PreparedBlock> b_blocks;
  std::vector<Key> out_keys;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> tasks;
  std::vector<std::vector<int>> out_shapes;
};

void check_pairs(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy) {
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  for (auto [ia, ib] : pairs) {
    if (ia >= a.rank() || ib >= b.rank() || used_a[ia] || used_b[ib])
      throw LegMismatch("invalid contraction pair (" + std::to_string(ia) + "," + std::to_string(ib) + ")");
    used_a[ia] = used_b[ib] = true;
    const Leg& la = a.leg(ia);
    const Leg& lb = b.leg(ib);
    if (la.dir() == lb.dir())
      throw DirectionMismatch("paired legs " + std::to_string(ia) + "," + std::to_string(ib) + " share a direction");
    if (policy == SectorPolicy::Exact) {
      if (la.sectors() != lb.sectors())
        throw SectorMismatch("paired legs " + std::to_string(ia) + "," + std::to_string(ib) + " differ in sectors");
    } else {
      for (const auto& s : la.sectors()) {
        int other = lb.sector_dim(s.charge);
        if (other != 0 && other != s.dim)
          throw SectorMismatch("charge " + std::to_string(s.charge) + " has dims " + std::to_string(s.dim) +
                               " and " + std::to_string(other));
      }
    }
  }
}

PreparedBlock prepare(const Key& key, const Block& blk, const std::vector<std::size_t>& perm, std::size_t n_free,
                      bool free_first) {
  PreparedBlock p;
  std::vector<int> new_shape(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) new_shape[i] = blk.shape[perm[i]];
  p.data = permute_array(blk.data, blk.shape, perm);
  int free_size = 1, c_size = 1;
  if (free_first) {
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (i < n_free) {
        p.free_key.push_back(key[perm[i]]);
        free_size *= new_shape[i];
      } else {
        p.contracted_key.push_back(key[perm[i]]);
        c_size *= new_shape[i];
      }
    }
    p.rows = free_size;
    p.cols = c_size;
  } else {
    std::size_t n_c = perm.size() - n_free;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (i < n_c) {
        p.contracted_key.push_back(key[perm[i]]);
        c_size *= new_shape[i];
      } else {
        p.free_key.push_back(key[perm[i]]);
        free_size *= new_shape[i];
      }
    }
    p.rows = c_size;
    p.cols = free_size;
  }
  return p;
}

Plan make_plan(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy, bool parallel) {
  check_pairs(a, b, pairs, policy);
  Plan plan;
  std::vector<bool> paired_a(a.rank(), false), paired_b(b.rank(), false);
  for (auto [ia, ib] : pairs) paired_a[ia] = paired_b[ib] = true;
  std::vector<std::size_t> perm_a, perm_b, free_a, free_b;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!paired_a[i]) free_a.push_back(i);
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!paired_b[i]) free_b.push_back(i);
  perm_a = free_a;
  for (auto [ia, ib] : pairs) {
    perm_a.push_back(ia);
    perm_b.push_back(ib);
  }
  perm_b.insert(perm_b.end(), free_b.begin(), free_b.end());

  for (auto i : free_a) plan.out_legs.push_back(a.leg(i));
  for (auto i : free_b) plan.out_legs.push_back(b.leg(i));

  std::vector<std::pair<const Key*, const Block*>> src_a, src_b;
  for (const auto& [k, blk] : a.blocks()) src_a.emplace_back(&k, &blk);
  for (const auto& [k, blk] : b.blocks()) src_b.emplace_back(&k, &blk);
  plan.a_blocks.resize(src_a.size());
  plan.b_blocks.resize(src_b.size());

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(src_a.size()); ++i)
    plan.a_blocks[i] = prepare(*src_a[i].first, *src_a[i].second, perm_a, free_a.size(), true);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(src_b.size()); ++i)
    plan.b_blocks[i] = prepare(*src_b[i].first, *src_b[i].second, perm_b, free_b.size(), false);

  std::map<Key, std::vector<std::size_t>> b_by_contracted;
  for (std::size_t j = 0; j < plan.b_blocks.size(); ++j) b_by_contracted[plan.b_blocks[j].contracted_key].push_back(j);

  std::map<Key, std::vector<std::pair<std::size_t, std::size_t>>> grouped;
  for (std::size_t i = 0; i < plan.a_blocks.size(); ++i) {
    auto it = b_by_contracted.find(plan.a_blocks[i].contracted_key);
    if (it == b_by_contracted.end()) continue;
    for (auto j : it->second) {
      Key out = plan.a_blocks[i].free_key;
      out.insert(out.end(), plan.b_blocks[j].free_key.begin(), plan.b_blocks[j].free_key.end());
      grouped[out].emplace_back(i, j);
    }
  }
  for (auto& [k, t] : grouped) {
    std::vector<int> shape;
    shape.reserve(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) shape.push_back(plan.out_legs[i].sector_dim(k[i]));
    plan.out_keys.push_back(k);
    plan.tasks.push_back(std::move(t));
    plan.out_shapes.push_back(std::move(shape));
  }
  return plan;
}

Block compute_block(const Plan& plan, std::size_t n) {
  Block out(plan.out_shapes[n]);
  const auto& tasks = plan.tasks[n];
  const int rows = plan.a_blocks[tasks.front().first].rows;
  const int cols = plan.b_blocks[tasks.front().second].cols;
  Eigen::Map<RowMat> c(out.data.data(), rows, cols);
  for (auto [i, j] : tasks) {
    const auto& pa = plan.a_blocks[i];
    const auto& pb = plan.b_blocks[j];
    Eigen::Map<const RowMat> ma(pa.data.data(), pa.rows, pa.cols);
    Eigen::Map<const RowMat> mb(pb.data.data(), pb.rows, pb.cols);
    c.noalias() += ma * mb;
  }
  return out;
}

SymTensor run(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy, bool parallel) {
  Plan plan = make_plan(a, b, pairs, policy, parallel);
  std::vector<Block> results(plan.out_keys.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(results.size()); ++n) results[n] = compute_block(plan, n);
  SymTensor out(plan.out_legs);
  for (std::size_t n = 0; n < results.size(); ++n) {
    if (std::sqrt(results[n].norm2()) < kPruneTolerance) continue;
    out.set_block_trusted(std::move(plan.out_keys[n]), std::move(results[n]));
  }
  return out;
}

}  // namespace

void set_execution(Execution e) { g_execution.store(e); }
Execution execution() { return g_execution.load(); }

void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::size_t product(std::span<const int> shape) {
  std::size_t p = 1;
  for (int s : shape) p *= static_cast<std::size_t>(s);
  return p;
}

std::vector<cplx> permute_array(std::span<const cplx> src, std::span<const int> shape,
                                std::span<const std::size_t> perm) {
  const std::size_t n = shape.size();
  std::vector<cplx> dst(src.size());
  if (src.empty()) return dst;
  bool identity = true;
  for (std::size_t i = 0; i < n; ++i) identity = identity && perm[i] == i;
  if (identity) {
    std::copy(src.begin(), src.end(), dst.begin());
    return dst;
  }
  auto src_strides = row_major_strides(shape);
  std::vector<int> new_shape(n);
  std::vector<std::size_t> step(n);
  for (std::size_t i = 0; i < n; ++i) {
    new_shape[i] = shape[perm[i]];
    step[i] = src_strides[perm[i]];
  }
  std::vector<int> idx(n, 0);
  std::size_t src_off = 0;
  for (std::size_t lin = 0; lin < dst.size(); ++lin) {
    dst[lin] = src[src_off];
    for (std::size_t d = n; d-- > 0;) {
      if (++idx[d] < new_shape[d]) {
        src_off += step[d];
        break;
      }
      src_off -= step[d] * static_cast<std::size_t>(new_shape[d] - 1);
      idx[d] = 0;
    }
  }
  return dst;
}

void insert_subarray(std::span<const cplx> src, std::span<const int> src_shape, std::span<cplx> dst,
                     std::span<const int> dst_shape, std::span<const int> offsets) {
  const std::size_t n = src_shape.size();
  if (src.empty()) return;
  if (n == 0) {
    dst[0] = src[0];
    return;
  }
  auto dst_strides = row_major_strides(dst_shape);
  std::size_t base = 0;
  for (std::size_t i = 0; i < n; ++i) base += dst_strides[i] * static_cast<std::size_t>(offsets[i]);
  const int inner = src_shape[n - 1];
  std::vector<int> idx(n, 0);
  std::size_t src_off = 0;
  const std::size_t rows = src.size() / static_cast<std::size_t>(inner);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t off = base;
    for (std::size_t d = 0; d + 1 < n; ++d) off += dst_strides[d] * static_cast<std::size_t>(idx[d]);
    std::copy(src.begin() + src_off, src.begin() + src_off + inner, dst.begin() + off);
    src_off += inner;
    for (std::size_t d = n - 1; d-- > 0;) {
      if (++idx[d] < src_shape[d]) break;
      idx[d] = 0;
    }
  }
}

std::vector<cplx> extract_subarray(std::span<const cplx> src, std::span<const int> src_shape,
                                   std::span<const int> sub_shape, std::span<const int> offsets) {
  const std::size_t n = sub_shape.size();
  std::vector<cplx> out(product(sub_shape));
  if (out.empty()) return out;
  if (n == 0) {
    out[0] = src[0];
    return out;
  }
  auto src_strides = row_major_strides(src_shape);
  std::size_t base = 0;
  for (std::size_t i = 0; i < n; ++i) base += src_strides[i] * static_cast<std::size_t>(offsets[i]);
  const int inner = sub_shape[n - 1];
  std::vector<int> idx(n, 0);
  std::size_t out_off = 0;
  const std::size_t rows = out.size() / static_cast<std::size_t>(inner);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t off = base;
    for (std::size_t d = 0; d + 1 < n; ++d) off += src_strides[d] * static_cast<std::size_t>(idx[d]);
    std::copy(src.begin() + off, src.begin() + off + inner, out.begin() + out_off);
    out_off += inner;
    for (std::size_t d = n - 1; d-- > 0;) {
      if (++idx[d] < sub_shape[d]) break;
      idx[d] = 0;
    }
  }
  return out;
}

SymTensor contract_serial(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy) {
  return run(a, b, pairs, policy, false);
}

SymTensor contract_parallel(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy) {
  return run(a, b, pairs, policy, true);
}

}  // namespace adaptmps::kernels
