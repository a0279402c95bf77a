#pragma once

// Test-side names for the dense tensor references.

#include "adaptmps/dense_reference.hpp"

namespace adaptmps::testing {

using oracle::all_blocks_fuse;
using oracle::dense_contract;
using oracle::dense_of;
using oracle::DenseTensor;
using oracle::random_complex;
using oracle::random_leg;
using oracle::random_tensor;
using oracle::rel_diff;
using oracle::strides_of;

}  // namespace adaptmps::testing
