#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scnn/arch.hpp"
#include "scnn/memrd.hpp"
#include "scnn/model.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

struct CycleStats {
  std::int64_t total_cycles = 0;
  std::int64_t load_cycles = 0;     // MemRD event count (II = 1)
  std::int64_t compute_cycles = 0;  // partial-IP pipeline occupancy
  std::int64_t drain_cycles = 0;    // adder-tree depth + 1, documented constant
  std::int64_t macs_performed = 0;  // real MACs, inactive lanes excluded
  std::int64_t ifm_bytes = 0;
  std::int64_t weight_bytes = 0;
  std::int64_t ofm_bytes = 0;
};

struct ConvSimResult {
  Tensor ofm;
  CycleStats stats;
};

struct FcSimResult {
  std::vector<std::vector<float>> outputs;  // one vector per image in the batch
  CycleStats stats;
};

/// Balanced pairwise adder tree over `lanes` (single precision). This is the
/// fixed summation order of a partial inner product; the sequential
/// accumulator then adds partials in schedule order.
float adder_tree_sum(std::span<const float> lanes);

/// Event-driven simulation of one conv layer on the 1-D systolic array:
/// walks the MemRD schedule, shifts each vector through the PEs, accumulates
/// vec_fac-wide partial IPs per IP unit, drains with bias (+ fused ReLU) at
/// tile boundaries. Functionally equivalent to conv_ref up to float
/// reassociation; grouped convs run as one pass per group.
ConvSimResult simulate_conv(const Tensor& ifm, const std::vector<Tensor>& filters,
                            const std::vector<float>& bias, const LayerDescriptor& layer,
                            const ArchConfig& cfg);

/// Batch-mode fully connected pass: each of the reuse_fac IP units computes
/// the same output neuron for a different image, sharing one weight stream.
/// batch must be <= reuse_fac.
FcSimResult simulate_fc(const std::vector<std::vector<float>>& inputs, const Matrix& weights,
                        const std::vector<float>& bias, const ArchConfig& cfg, int batch,
                        bool apply_relu = false);

struct PEArrival {
  std::int64_t cycle = 0;
  std::size_t event_index = 0;
};

/// Arrival log of every schedule vector at every PE: PE n sees the vector PE 0
/// saw at cycle t exactly at cycle t + n.
std::vector<std::vector<PEArrival>> shift_trace(const ArchConfig& cfg,
                                                const LoadSchedule& schedule);

std::int64_t adder_tree_depth(int vec_fac);

}  // namespace scnn
