#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "scnn/arch.hpp"
#include "scnn/model.hpp"
#include "scnn/oracle.hpp"
#include "scnn/pe_array.hpp"
#include "scnn/perf_model.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

enum class RunMode { kSimulate, kModelOnly };

struct RunOptions {
  RunMode mode = RunMode::kSimulate;
  int batch = 1;  // FC batch; must be <= cfg.reuse_fac
  ArchConfig cfg;
  const FpgaSpec* fpga = nullptr;  // required for model-only mode
  std::uint32_t seed = 1;          // synthetic weight/input generation
};

struct LayerReport {
  std::string name;
  std::string kind;
  Shape output_shape;
  std::string checksum;  // FNV-1a 64 over the output bytes (simulate mode)
  CycleStats cycles;     // simulate mode
  LayerLatency latency;  // model-only mode
};

struct RunReport {
  std::string model_name;
  ArchConfig config;
  RunMode mode = RunMode::kSimulate;
  int batch = 1;
  std::uint32_t seed = 1;
  std::vector<LayerReport> layers;  // execution order, one entry per layer
  CycleStats totals;                // simulate mode
  double total_seconds = 0.0;       // model-only mode
  double effective_gflops = 0.0;    // model-only mode, annotation vs peak
  double efficiency = 0.0;          // model-only mode
  ResourceReport resources;         // model-only mode
};

// ---- descriptor / spec JSON ----------------------------------------------

ModelDescriptor load_model(const std::string& path);
ModelDescriptor parse_model_json(const std::string& text, const std::string& origin);

FpgaSpec load_fpga(const std::string& path);
FpgaSpec parse_fpga_json(const std::string& text, const std::string& origin);

// ---- weight binary ---------------------------------------------------------
// Format: magic "SCNN", version byte 1, then per-tensor records:
//   u32 name length, name bytes,
//   u32 rank, u32 dims[rank]            (little endian)
//   f32 payload[prod(dims)]             (little endian, row-major,
//                                        channel-major outer order)
// Conv layers store a rank-4 record (out_ch, in_ch/groups, k, k) under the
// layer name plus a rank-1 bias record under "<name>.bias"; fc layers store
// rank-2 (out_ch, in_ch) plus bias.

WeightMap load_weights(const std::string& path, const ModelDescriptor& model);
void save_weights(const std::string& path, const ModelDescriptor& model,
                  const WeightMap& weights);

/// Seeded uniform(-0.1, 0.1) weights for every parameterized layer. The
/// mapping from mt19937 draws to floats is fixed, so a seed pins the store
/// bit-exactly.
WeightMap synthesize_weights(const ModelDescriptor& model, std::uint32_t seed);
Tensor synthesize_input(const ModelDescriptor& model, std::uint32_t seed);

// ---- inference -------------------------------------------------------------

/// Executes the model layer by layer (each kernel invoked exactly once),
/// routing intermediate tensors by producer name, conv/fc on the PE array and
/// pool/lrn/eltwise/relu on the aux kernels. The ArchConfig is never written:
/// the same options can run structurally different models back to back.
RunReport run_inference(const ModelDescriptor& model, const WeightMap& weights,
                        const Tensor& input, const RunOptions& opts);

/// As run_inference, and also returns the per-layer activations (used by
/// oracle-comparison tests and the CLI digest).
RunReport run_inference_with_outputs(const ModelDescriptor& model, const WeightMap& weights,
                                     const Tensor& input, const RunOptions& opts,
                                     std::map<std::string, Tensor>* outputs);

std::string report_json(const RunReport& report);

std::string fnv1a_checksum(const Tensor& t);

}  // namespace scnn
