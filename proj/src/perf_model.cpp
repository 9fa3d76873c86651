#include "scnn/perf_model.hpp"

#include <algorithm>
#include <cmath>

#include "scnn/errors.hpp"
#include "scnn/memrd.hpp"

namespace scnn {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t ceil_to_cycles(double bytes, double bytes_per_cycle) {
  return static_cast<std::int64_t>(std::ceil(bytes / bytes_per_cycle));
}

void finish_latency(LayerLatency& lat, const FpgaSpec& fpga) {
  std::int64_t m = lat.compute_cycles;
  lat.bound = Bound::kCompute;
  if (lat.load_cycles > m) {
    m = lat.load_cycles;
    lat.bound = Bound::kIfmLoad;
  }
  if (lat.weight_cycles > m) {
    m = lat.weight_cycles;
    lat.bound = Bound::kWeightMemory;
  }
  lat.seconds = static_cast<double>(m) / fpga.f_clk_hz;
}

}  // namespace

const char* bound_name(Bound b) {
  switch (b) {
    case Bound::kCompute: return "compute";
    case Bound::kIfmLoad: return "ifm_load";
    case Bound::kWeightMemory: return "weight_memory";
  }
  return "?";
}

std::int64_t LayerLatency::bounding_cycles() const {
  return std::max({compute_cycles, load_cycles, weight_cycles});
}

ConvCycles conv_cycles(const LayerDescriptor& layer, const Shape& ifm_shape,
                       const ArchConfig& cfg) {
  require_valid(cfg);
  if (!layer.is_conv())
    throw ValidationError("conv_cycles: layer '" + layer.name + "' is not conv");

  // Per-group sub-layer; the closed forms below match the event-driven
  // simulator's counters exactly, per group.
  LayerDescriptor sub = layer;
  sub.in_channels = layer.group_in_channels();
  sub.out_channels = layer.out_channels / layer.groups;
  sub.groups = 1;

  const Shape out = conv_output_shape(ifm_shape, layer);
  const auto slides = tile_slide_counts(sub, cfg);
  const std::int64_t tiles = ceil_div(sub.out_channels, cfg.pe_num) * out.height *
                             ceil_div(out.width, cfg.reuse_fac);
  const std::int64_t cgs = ceil_div(sub.in_channels, cfg.vec_fac);
  const std::int64_t c = layer.kernel_size;

  ConvCycles cycles;
  cycles.compute_cycles = layer.groups * tiles * cgs * c * c;
  cycles.load_cycles = layer.groups * tiles * cgs * slides.row_slides * slides.col_slides;
  return cycles;
}

double weight_stream_bytes_per_cycle_conv(const FpgaSpec& fpga) {
  // Weights are preloaded one PE at a time (sequential LSUs), so the stream
  // runs at one burst per cycle, capped by the off-chip bandwidth.
  return std::min(fpga.bytes_per_cycle(), static_cast<double>(fpga.burst_words() * kDataBytes));
}

double weight_stream_bytes_per_cycle_fc(const ArchConfig& cfg, const FpgaSpec& fpga) {
  // FC weights stream continuously: one word per PE per cycle in parallel,
  // capped by the burst width and the off-chip bandwidth.
  const double words = std::min(cfg.pe_num, fpga.burst_words());
  return std::min(fpga.bytes_per_cycle(), words * kDataBytes);
}

LayerLatency conv_latency(const LayerDescriptor& layer, const Shape& ifm_shape,
                          const ArchConfig& cfg, const FpgaSpec& fpga) {
  require_valid(fpga);
  LayerLatency lat;
  lat.name = layer.name;
  const auto cycles = conv_cycles(layer, ifm_shape, cfg);
  lat.compute_cycles = cycles.compute_cycles;
  lat.load_cycles = cycles.load_cycles;
  const double weight_bytes = static_cast<double>(layer.out_channels) *
                              layer.group_in_channels() * layer.kernel_size *
                              layer.kernel_size * kDataBytes;
  lat.weight_cycles = ceil_to_cycles(weight_bytes, weight_stream_bytes_per_cycle_conv(fpga));
  finish_latency(lat, fpga);
  return lat;
}

LayerLatency fc_latency(const LayerDescriptor& layer, const ArchConfig& cfg,
                        const FpgaSpec& fpga, int batch) {
  require_valid(cfg);
  require_valid(fpga);
  if (!layer.is_fc())
    throw ValidationError("fc_latency: layer '" + layer.name + "' is not fc");
  if (batch < 1 || batch > cfg.reuse_fac)
    throw ValidationError("fc_latency: batch " + std::to_string(batch) +
                          " violates batch <= reuse_fac (reuse_fac = " +
                          std::to_string(cfg.reuse_fac) + ")");

  LayerLatency lat;
  lat.name = layer.name;
  lat.compute_cycles = ceil_div(layer.out_channels, cfg.pe_num) *
                       ceil_div(layer.in_channels, cfg.vec_fac);
  lat.load_cycles = static_cast<std::int64_t>(batch) * ceil_div(layer.in_channels, cfg.vec_fac);
  const double weight_bytes = static_cast<double>(layer.out_channels) * layer.in_channels *
                              kDataBytes / batch;  // shared across the batch
  lat.weight_cycles = ceil_to_cycles(weight_bytes, weight_stream_bytes_per_cycle_fc(cfg, fpga));
  finish_latency(lat, fpga);
  return lat;
}

ResourceReport dsp_usage(const ArchConfig& cfg, const FpgaSpec& fpga) {
  require_valid(cfg);
  require_valid(fpga);
  ResourceReport r;
  r.dsp_used = static_cast<double>(cfg.pe_num) * cfg.reuse_fac *
               (cfg.vec_fac * fpga.dsp_per_lane + fpga.dsp_overhead_per_ip_unit);
  r.dsp_utilization = r.dsp_used / fpga.dsp_count;
  r.feasible = r.dsp_utilization <= 1.0 + 1e-9;
  r.peak_gflops = 2.0 * static_cast<double>(cfg.total_parallelism()) * fpga.f_clk_hz / 1e9;
  return r;
}

ModelLatency model_latency(const ModelDescriptor& model, const ArchConfig& cfg,
                           const FpgaSpec& fpga, int batch) {
  require_valid(cfg);
  require_valid(fpga);
  require_valid(model);
  if (batch < 1 || batch > cfg.reuse_fac)
    throw ValidationError("model_latency: batch " + std::to_string(batch) +
                          " violates batch <= reuse_fac");

  auto shapes = infer_shapes(model);
  auto producer_shape = [&](const LayerDescriptor& l) -> const Shape& {
    const std::string& src = l.inputs.at(0);
    return src == kModelInputName ? model.input_shape : shapes.at(src);
  };

  ModelLatency out;
  out.layers.reserve(model.layers.size());
  for (const auto& l : model.layers) {
    LayerLatency lat;
    switch (l.kind) {
      case LayerKind::kConv:
        lat = conv_latency(l, producer_shape(l), cfg, fpga);
        break;
      case LayerKind::kFc:
        lat = fc_latency(l, cfg, fpga, batch);
        break;
      default: {
        // Aux kernels process one output element per cycle.
        lat.name = l.name;
        lat.compute_cycles = shapes.at(l.name).elements();
        finish_latency(lat, fpga);
        break;
      }
    }
    out.total_seconds += lat.seconds;
    out.layers.push_back(std::move(lat));
  }

  out.resources = dsp_usage(cfg, fpga);
  const double flops = static_cast<double>(flop_count(model));
  if (out.total_seconds > 0.0) {
    out.effective_gflops = flops / out.total_seconds / 1e9;
    out.efficiency = out.effective_gflops / out.resources.peak_gflops;
  }
  return out;
}

}  // namespace scnn
