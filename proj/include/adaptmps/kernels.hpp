#pragma once

// Dense building blocks behind SymTensor plus the block-contraction kernel.
//
// The contraction kernel exists twice: a serial reference and an OpenMP
// version that distributes output blocks over threads. Every output block
// is accumulated by exactly one thread in a fixed order, so both paths
// produce bit-identical tensors.

#include <span>
#include <vector>

#include "adaptmps/symtensor.hpp"

namespace adaptmps::kernels {

enum class Execution { Serial, Parallel };

// Process-wide default used by contract() and block_svd().
void set_execution(Execution e);
Execution execution();

// Caps the OpenMP worker pool (no-op without OpenMP).
void set_num_threads(int n);
int num_threads();

std::size_t product(std::span<const int> shape);

// result shape[i] = shape[perm[i]]
std::vector<cplx> permute_array(std::span<const cplx> src, std::span<const int> shape,
                                std::span<const std::size_t> perm);

// Copies src (shape src_shape) into dst (shape dst_shape) starting at offsets.
void insert_subarray(std::span<const cplx> src, std::span<const int> src_shape, std::span<cplx> dst,
                     std::span<const int> dst_shape, std::span<const int> offsets);
// Inverse of insert_subarray.
std::vector<cplx> extract_subarray(std::span<const cplx> src, std::span<const int> src_shape,
                                   std::span<const int> sub_shape, std::span<const int> offsets);

SymTensor contract_serial(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy);
SymTensor contract_parallel(const SymTensor& a, const SymTensor& b, const LegPairs& pairs, SectorPolicy policy);

}  // namespace adaptmps::kernels
