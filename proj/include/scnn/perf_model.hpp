#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scnn/arch.hpp"
#include "scnn/model.hpp"

namespace scnn {

enum class Bound { kCompute, kIfmLoad, kWeightMemory };
const char* bound_name(Bound b);

/// Closed-form latency of one layer: the layer takes
/// max(compute, load, weight) cycles at f_clk, no overlap across layers.
struct LayerLatency {
  std::string name;
  std::int64_t compute_cycles = 0;
  std::int64_t load_cycles = 0;
  std::int64_t weight_cycles = 0;
  Bound bound = Bound::kCompute;
  double seconds = 0.0;

  std::int64_t bounding_cycles() const;
};

struct ResourceReport {
  double dsp_used = 0.0;
  double dsp_utilization = 0.0;  // dsp_used / dsp_count; > 1 means infeasible
  bool feasible = true;
  double peak_gflops = 0.0;  // 2 * pe_num * vec_fac * reuse_fac * f_clk / 1e9
};

struct ConvCycles {
  std::int64_t compute_cycles = 0;
  std::int64_t load_cycles = 0;
};

/// Analytic twin of the simulator's counters; must equal them exactly:
///   compute = ceil(op/pe) * oH * ceil(oW/r) * ceil(ic/vec) * c * c
///   load    = ceil(op/pe) * oH * ceil(oW/r) * ceil(ic/vec) * row_slides * col_slides
/// Grouped convs sum one pass per group over the per-group dimensions.
ConvCycles conv_cycles(const LayerDescriptor& layer, const Shape& ifm_shape,
                       const ArchConfig& cfg);

LayerLatency conv_latency(const LayerDescriptor& layer, const Shape& ifm_shape,
                          const ArchConfig& cfg, const FpgaSpec& fpga);

/// FC latency with batch amortization of the weight stream. The weight stream
/// sustains one word per PE per cycle (pe_num parallel LSUs), capped by the
/// memory burst width and by the off-chip bandwidth.
LayerLatency fc_latency(const LayerDescriptor& layer, const ArchConfig& cfg,
                        const FpgaSpec& fpga, int batch);

// Effective weight-stream bandwidth in bytes/cycle.
double weight_stream_bytes_per_cycle_fc(const ArchConfig& cfg, const FpgaSpec& fpga);
double weight_stream_bytes_per_cycle_conv(const FpgaSpec& fpga);

ResourceReport dsp_usage(const ArchConfig& cfg, const FpgaSpec& fpga);

struct ModelLatency {
  std::vector<LayerLatency> layers;  // execution order
  double total_seconds = 0.0;
  double effective_gflops = 0.0;  // model FLOPs / total seconds / 1e9
  double efficiency = 0.0;        // effective_gflops / peak_gflops
  ResourceReport resources;
};

/// Per-layer latencies plus totals for a whole model; layers execute
/// sequentially (each kernel is invoked exactly once per layer).
ModelLatency model_latency(const ModelDescriptor& model, const ArchConfig& cfg,
                           const FpgaSpec& fpga, int batch);

}  // namespace scnn
