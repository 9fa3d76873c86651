#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "scnn/arch.hpp"
#include "scnn/model.hpp"

namespace scnn {

/// One 1x1xvec_fac vector entering the shift-register IFM buffer. `row`/`col`
/// are IFM coordinates of the vector; they may land in the zero-padding
/// region (or past it, for ragged final tiles), in which case is_padding is
/// set and the vector is synthesized as zeros.
struct LoadEvent {
  std::int64_t cycle = 0;
  int channel_group = 0;
  int row = 0;  // IFM y coordinate
  int col = 0;  // IFM x coordinate
  int ofm_group = 0;
  int tile = 0;  // index of the reuse_fac-wide output tile within this ofm_group
  bool is_padding = false;
  // True when this cycle actually touches off-chip memory: first fetch of a
  // column some real output demands, within the current (ofm_group, output
  // row, channel group, kernel row) sweep. Re-walks of columns still in the
  // shift register and slides serving no kernel position (ragged-tile
  // overshoot, inter-window gaps at stride > kernel) occupy a cycle but no
  // bandwidth, which is what keeps off-chip traffic invariant in reuse_fac.
  bool offchip = true;
};

struct LoadSchedule {
  std::vector<LoadEvent> events;
  std::int64_t vectors_loaded = 0;       // off-chip vector fetches
  std::int64_t bytes_loaded = 0;         // vectors_loaded * vec_fac * 4
  std::int64_t padded_vector_count = 0;  // off-chip fetches synthesized as zeros
};

/// Times the loading window slides per output tile per channel group:
/// (row_slides, col_slides) = (stride*(reuse_fac-1) + c, c). Reduces to
/// (reuse_fac + c - 1, c) at stride 1.
struct SlideCounts {
  int row_slides = 0;  // along the row (x) dimension
  int col_slides = 0;  // along the column (y) dimension
};

SlideCounts tile_slide_counts(const LayerDescriptor& layer, const ArchConfig& cfg);

/// Exact MemRD event stream for one conv layer. Loop nesting, outermost to
/// innermost: ofm_group -> output tile (row-major, reuse_fac outputs per tile
/// along the row dimension) -> channel_group -> column slide -> row slide.
/// One event per cycle (II = 1), cycles consecutive from 0.
LoadSchedule generate_schedule(const LayerDescriptor& layer, const ArchConfig& cfg,
                               const Shape& ifm_shape);

/// Closed-form off-chip IFM byte count; equals
/// generate_schedule(...).bytes_loaded without materializing events.
std::int64_t ifm_offchip_bytes(const LayerDescriptor& layer, const ArchConfig& cfg,
                               const Shape& ifm_shape);

// Closed-form event count (load cycles) of the same schedule.
std::int64_t schedule_event_count(const LayerDescriptor& layer, const ArchConfig& cfg,
                                  const Shape& ifm_shape);

/// CSV dump: header plus one line per event with columns
/// cycle,ofm_group,tile,channel_group,row,col,is_padding.
void write_schedule_csv(std::ostream& os, const LoadSchedule& schedule);

}  // namespace scnn
