#include "scnn/memrd.hpp"

#include <algorithm>
#include <ostream>

#include "scnn/errors.hpp"

namespace scnn {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void check_conv_inputs(const LayerDescriptor& layer, const ArchConfig& cfg) {
  require_valid(cfg);
  if (!layer.is_conv())
    throw ValidationError("memrd: layer '" + layer.name + "' is " +
                          layer_kind_name(layer.kind) + ", expected conv");
  if (layer.groups != 1)
    throw ValidationError("memrd: layer '" + layer.name +
                          "' has groups > 1; schedule grouped convs per group");
}

}  // namespace

SlideCounts tile_slide_counts(const LayerDescriptor& layer, const ArchConfig& cfg) {
  check_conv_inputs(layer, cfg);
  const int c = layer.kernel_size;
  return {layer.stride * (cfg.reuse_fac - 1) + c, c};
}

LoadSchedule generate_schedule(const LayerDescriptor& layer, const ArchConfig& cfg,
                               const Shape& ifm_shape) {
  check_conv_inputs(layer, cfg);
  if (ifm_shape.channels != layer.in_channels)
    throw ValidationError("memrd: ifm shape " + ifm_shape.str() + " does not match layer '" +
                          layer.name + "' in_channels");
  const Shape out = conv_output_shape(ifm_shape, layer);
  const auto slides = tile_slide_counts(layer, cfg);
  const int s = layer.stride, p = layer.padding;
  const int ofm_groups = static_cast<int>(ceil_div(layer.out_channels, cfg.pe_num));
  const int tiles_per_row = static_cast<int>(ceil_div(out.width, cfg.reuse_fac));
  const int channel_groups = static_cast<int>(ceil_div(layer.in_channels, cfg.vec_fac));

  // A column is demanded iff some real output's kernel window contains it.
  // Slides outside the demand set (ragged-tile overshoot, or the gaps between
  // windows when stride > kernel) burn a cycle but fetch nothing.
  const int c = layer.kernel_size;
  auto demanded = [&](int col) {
    const int o_hi = (col + p) >= 0 ? (col + p) / s : -1;
    const int shifted = col + p - c + 1;
    const int o_lo = shifted <= 0 ? 0 : (shifted + s - 1) / s;
    return o_lo <= std::min(o_hi, out.width - 1);
  };

  LoadSchedule sched;
  sched.events.reserve(static_cast<std::size_t>(ofm_groups) * out.height * tiles_per_row *
                       channel_groups * slides.col_slides * slides.row_slides);

  std::int64_t cycle = 0;
  for (int og = 0; og < ofm_groups; ++og) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int tx = 0; tx < tiles_per_row; ++tx) {
        const int tile_index = oy * tiles_per_row + tx;
        const int window_start = s * (tx * cfg.reuse_fac) - p;
        // End column of the previous tile's window in this output row; columns
        // at or below it are still streaming through the shift register.
        const int prev_window_end =
            tx == 0 ? window_start - 1
                    : s * ((tx - 1) * cfg.reuse_fac) - p + slides.row_slides - 1;
        for (int cg = 0; cg < channel_groups; ++cg) {
          for (int j = 0; j < slides.col_slides; ++j) {
            const int row = oy * s - p + j;
            for (int i = 0; i < slides.row_slides; ++i) {
              const int col = window_start + i;
              LoadEvent ev;
              ev.cycle = cycle++;
              ev.channel_group = cg;
              ev.row = row;
              ev.col = col;
              ev.ofm_group = og;
              ev.tile = tile_index;
              ev.is_padding = row < 0 || row >= ifm_shape.height || col < 0 || col >= ifm_shape.width;
              ev.offchip = col > prev_window_end && demanded(col);
              if (ev.offchip) {
                ++sched.vectors_loaded;
                if (ev.is_padding) ++sched.padded_vector_count;
              }
              sched.events.push_back(ev);
            }
          }
        }
      }
    }
  }
  sched.bytes_loaded = sched.vectors_loaded * cfg.vec_fac * kDataBytes;
  return sched;
}

std::int64_t ifm_offchip_bytes(const LayerDescriptor& layer, const ArchConfig& cfg,
                               const Shape& ifm_shape) {
  check_conv_inputs(layer, cfg);
  const Shape out = conv_output_shape(ifm_shape, layer);
  const int c = layer.kernel_size, s = layer.stride;
  // Distinct columns the real outputs of one row demand, per kernel row:
  // consecutive demand windows overlap by c - s (when positive).
  const std::int64_t cols_per_sweep =
      static_cast<std::int64_t>(out.width - 1) * std::min(s, c) + c;
  const std::int64_t vectors = ceil_div(layer.out_channels, cfg.pe_num) * out.height *
                               ceil_div(layer.in_channels, cfg.vec_fac) * c * cols_per_sweep;
  return vectors * cfg.vec_fac * kDataBytes;
}

std::int64_t schedule_event_count(const LayerDescriptor& layer, const ArchConfig& cfg,
                                  const Shape& ifm_shape) {
  check_conv_inputs(layer, cfg);
  const Shape out = conv_output_shape(ifm_shape, layer);
  const auto slides = tile_slide_counts(layer, cfg);
  return ceil_div(layer.out_channels, cfg.pe_num) * out.height *
         ceil_div(out.width, cfg.reuse_fac) * ceil_div(layer.in_channels, cfg.vec_fac) *
         slides.row_slides * slides.col_slides;
}

void write_schedule_csv(std::ostream& os, const LoadSchedule& schedule) {
  os << "cycle,ofm_group,tile,channel_group,row,col,is_padding\n";
  for (const auto& ev : schedule.events)
    os << ev.cycle << ',' << ev.ofm_group << ',' << ev.tile << ',' << ev.channel_group << ','
       << ev.row << ',' << ev.col << ',' << (ev.is_padding ? 1 : 0) << '\n';
}

}  // namespace scnn
