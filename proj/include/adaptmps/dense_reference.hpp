#pragma once

// Dense references for block-sparse tensors: random fusion-respecting
// tensors and contraction by explicit index loops.

#include <algorithm>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "adaptmps/symtensor.hpp"

namespace adaptmps::oracle {


inline cplx random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

inline Leg random_leg(std::mt19937_64& rng, Dir dir, int max_sectors = 3, int max_dim = 2, int charge_lo = -2,
                      int charge_hi = 2) {
  std::vector<int> pool(charge_hi - charge_lo + 1);
  std::iota(pool.begin(), pool.end(), charge_lo);
  std::shuffle(pool.begin(), pool.end(), rng);
  int n = std::uniform_int_distribution<int>(1, std::min<int>(max_sectors, pool.size()))(rng);
  std::vector<int> chosen(pool.begin(), pool.begin() + n);
  std::sort(chosen.begin(), chosen.end());
  std::vector<Sector> s;
  for (int c : chosen) s.push_back({c, std::uniform_int_distribution<int>(1, max_dim)(rng)});
  return Leg(dir, s);
}

// Fills every fusion-allowed block of the given legs with Gaussian entries,
// each block kept with probability `fill`.
inline SymTensor random_tensor(std::mt19937_64& rng, const std::vector<Leg>& legs, double fill = 1.0) {
  SymTensor t(legs);
  std::vector<std::size_t> idx(legs.size(), 0);
  std::bernoulli_distribution keep(fill);
  if (legs.empty()) {
    t.set_block(Key{}, Block(std::vector<int>{}, std::vector<cplx>{random_complex(rng)}));
    return t;
  }
  while (true) {
    Key k(legs.size());
    std::vector<int> shape(legs.size());
    for (std::size_t i = 0; i < legs.size(); ++i) {
      k[i] = legs[i].sectors()[idx[i]].charge;
      shape[i] = legs[i].sectors()[idx[i]].dim;
    }
    if (t.key_fuses(k) && keep(rng)) {
      Block b(shape);
      for (auto& v : b.data) v = random_complex(rng);
      t.set_block(k, b);
    }
    std::size_t p = 0;
    while (p < legs.size() && ++idx[p] == legs[p].num_sectors()) idx[p++] = 0;
    if (p == legs.size()) break;
  }
  return t;
}

// Row-major strides of a shape.
inline std::vector<std::size_t> strides_of(const std::vector<int>& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * shape[i + 1];
  return s;
}

// Dense tensor contraction by explicit index loops.
struct DenseTensor {
  std::vector<int> shape;
  std::vector<cplx> data;
};

inline DenseTensor dense_contract(const DenseTensor& a, const DenseTensor& b,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<bool> a_paired(a.shape.size(), false), b_paired(b.shape.size(), false);
  for (auto [i, j] : pairs) a_paired[i] = b_paired[j] = true;
  std::vector<std::size_t> a_free, b_free;
  for (std::size_t i = 0; i < a.shape.size(); ++i)
    if (!a_paired[i]) a_free.push_back(i);
  for (std::size_t j = 0; j < b.shape.size(); ++j)
    if (!b_paired[j]) b_free.push_back(j);
  DenseTensor out;
  for (auto i : a_free) out.shape.push_back(a.shape[i]);
  for (auto j : b_free) out.shape.push_back(b.shape[j]);
  std::size_t out_size = 1;
  for (int s : out.shape) out_size *= s;
  out.data.assign(out_size, cplx{});
  std::size_t sum_size = 1;
  for (auto [i, j] : pairs) sum_size *= a.shape[i];
  auto as = strides_of(a.shape), bs = strides_of(b.shape), os = strides_of(out.shape);
  std::vector<int> oi(out.shape.size(), 0);
  for (std::size_t o = 0; o < out_size; ++o) {
    std::size_t rem = o;
    for (std::size_t k = 0; k < out.shape.size(); ++k) {
      oi[k] = static_cast<int>(rem / os[k]);
      rem %= os[k];
    }
    std::size_t abase = 0, bbase = 0;
    for (std::size_t k = 0; k < a_free.size(); ++k) abase += oi[k] * as[a_free[k]];
    for (std::size_t k = 0; k < b_free.size(); ++k) bbase += oi[a_free.size() + k] * bs[b_free[k]];
    cplx acc{};
    for (std::size_t c = 0; c < sum_size; ++c) {
      std::size_t r = c, ao = abase, bo = bbase;
      for (int p = static_cast<int>(pairs.size()) - 1; p >= 0; --p) {
        int dim = a.shape[pairs[p].first];
        int v = static_cast<int>(r % dim);
        r /= dim;
        ao += v * as[pairs[p].first];
        bo += v * bs[pairs[p].second];
      }
      acc += a.data[ao] * b.data[bo];
    }
    out.data[o] = acc;
  }
  return out;
}

inline DenseTensor dense_of(const SymTensor& t) { return {dense_shape(t), to_dense(t)}; }

inline double rel_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

inline bool all_blocks_fuse(const SymTensor& t) {
  for (const auto& [k, b] : t.blocks())
    if (!t.key_fuses(k)) return false;
  return true;
}

}  // namespace adaptmps::oracle
