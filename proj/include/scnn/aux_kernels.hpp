#pragma once

#include <cstdint>
#include <optional>

#include "scnn/model.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

/// Throughput accounting for the LRN/POOL/MemWrite kernels: one output
/// element per cycle (these kernels hold minimum resources and only need to
/// stay off the critical path).
struct AuxStats {
  std::int64_t cycles = 0;  // == output element count
  std::int64_t bytes_in = 0;
  std::int64_t bytes_out = 0;
};

struct AuxResult {
  Tensor out;
  AuxStats stats;
};

// Functional result equals maxpool_ref exactly (max is reassociation-free).
AuxResult simulate_pool(const Tensor& ifm, const LayerDescriptor& layer);

// Single-precision LRN; matches lrn_ref within single/double rounding.
AuxResult simulate_lrn(const Tensor& ifm, const LayerDescriptor& layer);

/// MemWrite kernel: optional element-wise sum with `b`, optional fused ReLU,
/// write-back byte accounting.
AuxResult simulate_memwrite(const Tensor& a, const Tensor* b, bool apply_relu);

}  // namespace scnn
