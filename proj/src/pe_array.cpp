#include "scnn/pe_array.hpp"

#include <algorithm>
#include <cmath>

#include "scnn/errors.hpp"

namespace scnn {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void check_conv_shapes(const Tensor& ifm, const std::vector<Tensor>& filters,
                       const std::vector<float>& bias, const LayerDescriptor& layer) {
  if (ifm.channels != layer.in_channels)
    throw ValidationError("simulate_conv: ifm channels " + std::to_string(ifm.channels) +
                          " != layer '" + layer.name + "' in_channels " +
                          std::to_string(layer.in_channels));
  if (static_cast<int>(filters.size()) != layer.out_channels)
    throw ValidationError("simulate_conv: filter count mismatch for layer '" + layer.name + "'");
  const int icg = layer.group_in_channels();
  for (const auto& f : filters)
    if (f.channels != icg || f.height != layer.kernel_size || f.width != layer.kernel_size)
      throw ValidationError("simulate_conv: filter shape " + f.shape_str() +
                            " mismatch for layer '" + layer.name + "'");
  if (static_cast<int>(bias.size()) != layer.out_channels)
    throw ValidationError("simulate_conv: bias size mismatch for layer '" + layer.name + "'");
}

// Single-group simulation core; `layer` has groups == 1.
ConvSimResult simulate_conv_single(const Tensor& ifm, const std::vector<Tensor>& filters,
                                   const std::vector<float>& bias, const LayerDescriptor& layer,
                                   const ArchConfig& cfg) {
  const Shape ifm_shape{ifm.channels, ifm.height, ifm.width};
  const Shape out_shape = conv_output_shape(ifm_shape, layer);
  const LoadSchedule sched = generate_schedule(layer, cfg, ifm_shape);

  const int c = layer.kernel_size, s = layer.stride, p = layer.padding;
  const int ic = layer.in_channels;
  const int tiles_per_row = static_cast<int>(ceil_div(out_shape.width, cfg.reuse_fac));

  Tensor ofm(out_shape.channels, out_shape.height, out_shape.width);
  CycleStats stats;
  stats.load_cycles = static_cast<std::int64_t>(sched.events.size());
  stats.ifm_bytes = sched.bytes_loaded;
  stats.weight_bytes =
      static_cast<std::int64_t>(layer.out_channels) * ic * c * c * kDataBytes;
  stats.ofm_bytes = out_shape.elements() * kDataBytes;
  stats.drain_cycles = adder_tree_depth(cfg.vec_fac) + 1;

  // acc[n][k]: accumulator of IP unit k in PE n, reset between output pixels.
  std::vector<std::vector<float>> acc(cfg.pe_num, std::vector<float>(cfg.reuse_fac, 0.f));
  std::vector<float> lanes(cfg.vec_fac);

  auto drain_tile = [&](int og, int tile) {
    const int oy = tile / tiles_per_row;
    const int tx = tile % tiles_per_row;
    for (int n = 0; n < cfg.pe_num; ++n) {
      const int oc = og * cfg.pe_num + n;
      if (oc >= layer.out_channels) break;
      for (int k = 0; k < cfg.reuse_fac; ++k) {
        const int ox = tx * cfg.reuse_fac + k;
        if (ox >= out_shape.width) break;
        float v = acc[n][k] + bias[oc];
        if (layer.apply_relu) v = std::max(0.f, v);
        ofm.at(oc, oy, ox) = v;
        acc[n][k] = 0.f;
      }
    }
  };

  int cur_og = -1, cur_tile = -1;
  for (const auto& ev : sched.events) {
    if (ev.ofm_group != cur_og || ev.tile != cur_tile) {
      if (cur_tile >= 0) drain_tile(cur_og, cur_tile);
      cur_og = ev.ofm_group;
      cur_tile = ev.tile;
    }
    const int oy = ev.tile / tiles_per_row;
    const int tx = ev.tile % tiles_per_row;
    const int ky = ev.row - (oy * s - p);
    const int slide = ev.col - (s * tx * cfg.reuse_fac - p);
    // Partial-IP pipeline occupancy: each (tile, channel group) keeps the IP
    // units busy for c*c initiations.
    if (slide == 0 && ky == 0) stats.compute_cycles += static_cast<std::int64_t>(c) * c;

    const int ch0 = ev.channel_group * cfg.vec_fac;
    const int real_lanes = std::clamp(ic - ch0, 0, cfg.vec_fac);
    // The vector shifts through the array; every PE of the group sees it one
    // cycle after its predecessor and feeds the IP units whose kernel column
    // aligns with this slide position.
    for (int n = 0; n < cfg.pe_num; ++n) {
      const int oc = cur_og * cfg.pe_num + n;
      if (oc >= layer.out_channels) break;
      const Tensor& w = filters[oc];
      for (int k = 0; k < cfg.reuse_fac; ++k) {
        const int kx = slide - s * k;
        if (kx < 0 || kx >= c) continue;
        const int ox = tx * cfg.reuse_fac + k;
        if (ox >= out_shape.width) continue;
        for (int l = 0; l < cfg.vec_fac; ++l) {
          const int ch = ch0 + l;
          const float v = (ch < ic && !ev.is_padding) ? ifm.at(ch, ev.row, ev.col) : 0.f;
          lanes[l] = ch < ic ? w.at(ch, ky, kx) * v : 0.f;
        }
        acc[n][k] += adder_tree_sum(lanes);
        stats.macs_performed += real_lanes;
      }
    }
  }
  if (cur_tile >= 0) drain_tile(cur_og, cur_tile);

  stats.total_cycles = std::max(stats.load_cycles, stats.compute_cycles) +
                       (cfg.pe_num - 1) + stats.drain_cycles;
  return {std::move(ofm), stats};
}

}  // namespace

float adder_tree_sum(std::span<const float> lanes) {
  if (lanes.size() == 1) return lanes[0];
  const std::size_t mid = lanes.size() / 2;
  return adder_tree_sum(lanes.subspan(0, mid)) + adder_tree_sum(lanes.subspan(mid));
}

std::int64_t adder_tree_depth(int vec_fac) {
  std::int64_t depth = 0;
  while ((1LL << depth) < vec_fac) ++depth;
  return depth;
}

ConvSimResult simulate_conv(const Tensor& ifm, const std::vector<Tensor>& filters,
                            const std::vector<float>& bias, const LayerDescriptor& layer,
                            const ArchConfig& cfg) {
  require_valid(cfg);
  if (!layer.is_conv())
    throw ValidationError("simulate_conv: layer '" + layer.name + "' is not conv");
  check_conv_shapes(ifm, filters, bias, layer);

  if (layer.groups == 1) return simulate_conv_single(ifm, filters, bias, layer, cfg);

  // Grouped convolution: one systolic pass per group over its channel slice.
  const int g = layer.groups;
  const int icg = layer.group_in_channels();
  const int ocg = layer.out_channels / g;
  const Shape out_shape = conv_output_shape({ifm.channels, ifm.height, ifm.width}, layer);

  Tensor ofm(out_shape.channels, out_shape.height, out_shape.width);
  CycleStats stats;
  stats.drain_cycles = adder_tree_depth(cfg.vec_fac) + 1;
  for (int gi = 0; gi < g; ++gi) {
    Tensor sub_ifm(icg, ifm.height, ifm.width);
    for (int ch = 0; ch < icg; ++ch)
      for (int y = 0; y < ifm.height; ++y)
        for (int x = 0; x < ifm.width; ++x) sub_ifm.at(ch, y, x) = ifm.at(gi * icg + ch, y, x);

    LayerDescriptor sub = layer;
    sub.in_channels = icg;
    sub.out_channels = ocg;
    sub.groups = 1;
    std::vector<Tensor> sub_filters(filters.begin() + gi * ocg, filters.begin() + (gi + 1) * ocg);
    std::vector<float> sub_bias(bias.begin() + gi * ocg, bias.begin() + (gi + 1) * ocg);

    auto res = simulate_conv_single(sub_ifm, sub_filters, sub_bias, sub, cfg);
    for (int ch = 0; ch < ocg; ++ch)
      for (int y = 0; y < out_shape.height; ++y)
        for (int x = 0; x < out_shape.width; ++x)
          ofm.at(gi * ocg + ch, y, x) = res.ofm.at(ch, y, x);

    stats.load_cycles += res.stats.load_cycles;
    stats.compute_cycles += res.stats.compute_cycles;
    stats.macs_performed += res.stats.macs_performed;
    stats.ifm_bytes += res.stats.ifm_bytes;
    stats.weight_bytes += res.stats.weight_bytes;
    stats.ofm_bytes += res.stats.ofm_bytes;
  }
  stats.total_cycles = std::max(stats.load_cycles, stats.compute_cycles) +
                       (cfg.pe_num - 1) + stats.drain_cycles;
  return {std::move(ofm), stats};
}

FcSimResult simulate_fc(const std::vector<std::vector<float>>& inputs, const Matrix& weights,
                        const std::vector<float>& bias, const ArchConfig& cfg, int batch,
                        bool apply_relu) {
  require_valid(cfg);
  if (batch < 1) throw ValidationError("simulate_fc: batch must be >= 1");
  if (batch > cfg.reuse_fac)
    throw ValidationError("simulate_fc: batch " + std::to_string(batch) +
                          " violates the constraint batch <= reuse_fac (reuse_fac = " +
                          std::to_string(cfg.reuse_fac) + ")");
  if (static_cast<int>(inputs.size()) != batch)
    throw ValidationError("simulate_fc: expected " + std::to_string(batch) + " input vectors");
  for (const auto& in : inputs)
    if (static_cast<int>(in.size()) != weights.cols)
      throw ValidationError("simulate_fc: input size " + std::to_string(in.size()) +
                            " != weight cols " + std::to_string(weights.cols));
  if (static_cast<int>(bias.size()) != weights.rows)
    throw ValidationError("simulate_fc: bias size mismatch");

  const int op = weights.rows, ic = weights.cols;
  const std::int64_t channel_groups = ceil_div(ic, cfg.vec_fac);

  FcSimResult res;
  res.outputs.assign(batch, std::vector<float>(op));
  std::vector<float> lanes(cfg.vec_fac);

  // IP unit b of every PE handles image b; all IP units share the PE's weight
  // stream, which is what batch mode exists for.
  for (int b = 0; b < batch; ++b) {
    for (int j = 0; j < op; ++j) {
      float acc = 0.f;
      for (std::int64_t cg = 0; cg < channel_groups; ++cg) {
        const int ch0 = static_cast<int>(cg) * cfg.vec_fac;
        for (int l = 0; l < cfg.vec_fac; ++l) {
          const int ch = ch0 + l;
          lanes[l] = ch < ic ? weights.at(j, ch) * inputs[b][ch] : 0.f;
        }
        acc += adder_tree_sum(lanes);
      }
      float v = acc + bias[j];
      if (apply_relu) v = std::max(0.f, v);
      res.outputs[b][j] = v;
    }
  }

  CycleStats& st = res.stats;
  st.compute_cycles = ceil_div(op, cfg.pe_num) * channel_groups;
  st.load_cycles = static_cast<std::int64_t>(batch) * channel_groups;
  // Weights stream once per pe_num-group pass and are shared by all IP units,
  // so the traffic is batch-invariant; per-image traffic divides by batch.
  st.weight_bytes = static_cast<std::int64_t>(op) * ic * kDataBytes;
  st.ifm_bytes = static_cast<std::int64_t>(batch) * channel_groups * cfg.vec_fac * kDataBytes;
  st.ofm_bytes = static_cast<std::int64_t>(batch) * op * kDataBytes;
  st.macs_performed = static_cast<std::int64_t>(batch) * op * ic;
  st.drain_cycles = adder_tree_depth(cfg.vec_fac) + 1;
  st.total_cycles = std::max(st.load_cycles, st.compute_cycles) + (cfg.pe_num - 1) +
                    st.drain_cycles;
  return res;
}

std::vector<std::vector<PEArrival>> shift_trace(const ArchConfig& cfg,
                                                const LoadSchedule& schedule) {
  require_valid(cfg);
  std::vector<std::vector<PEArrival>> trace(cfg.pe_num);
  for (auto& t : trace) t.reserve(schedule.events.size());
  for (std::size_t i = 0; i < schedule.events.size(); ++i)
    for (int n = 0; n < cfg.pe_num; ++n)
      trace[n].push_back({schedule.events[i].cycle + n, i});
  return trace;
}

}  // namespace scnn
