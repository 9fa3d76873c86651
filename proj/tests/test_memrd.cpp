#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include "scnn/errors.hpp"
#include "scnn/memrd.hpp"
#include "test_util.hpp"

using namespace scnn;
using namespace scnn::testutil;

namespace {

// Demand set of one output tile for one channel group: every (row, col) any
// real output of the tile reads for any kernel position.
std::set<std::pair<int, int>> tile_demand(const LayerDescriptor& layer, const ArchConfig& cfg,
                                          const Shape& out, int tile, int tiles_per_row) {
  std::set<std::pair<int, int>> want;
  const int oy = tile / tiles_per_row;
  const int tx = tile % tiles_per_row;
  for (int k = 0; k < cfg.reuse_fac; ++k) {
    const int ox = tx * cfg.reuse_fac + k;
    if (ox >= out.width) break;
    for (int ky = 0; ky < layer.kernel_size; ++ky)
      for (int kx = 0; kx < layer.kernel_size; ++kx)
        want.insert({oy * layer.stride - layer.padding + ky,
                     ox * layer.stride - layer.padding + kx});
  }
  return want;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

TEST_CASE("tile_slide_counts: published law and stride generalization") {
  auto l = make_conv(8, 16, 3, 1, 0);
  CHECK(tile_slide_counts(l, {4, 4, 4}).row_slides == 6);  // reuse_fac + c - 1
  CHECK(tile_slide_counts(l, {4, 4, 4}).col_slides == 3);

  auto pointwise = make_conv(8, 16, 1, 1, 0);
  CHECK(tile_slide_counts(pointwise, {1, 1, 1}).row_slides == 1);
  CHECK(tile_slide_counts(pointwise, {1, 1, 1}).col_slides == 1);

  auto strided = make_conv(8, 16, 3, 2, 0);
  const auto sc = tile_slide_counts(strided, {4, 4, 4});
  CHECK(sc.row_slides == 9);  // s*(reuse_fac-1) + c
  CHECK(sc.col_slides == 3);

  // Validate 9 against the union of the four stride-2 3x3 demand windows.
  std::set<int> cols;
  for (int k = 0; k < 4; ++k)
    for (int kx = 0; kx < 3; ++kx) cols.insert(2 * k + kx);
  CHECK(static_cast<int>(cols.size()) == sc.row_slides);

  LayerDescriptor pool;
  pool.name = "p";
  pool.kind = LayerKind::kMaxPool;
  CHECK_THROWS_AS(tile_slide_counts(pool, ArchConfig{1, 1, 1}), ValidationError);
}

TEST_CASE("generate_schedule: two-tile 6-wide row at (c=3, reuse=4, vec=16, ic=16)") {
  // One output row of width 6 => H=3, W=8 at s=1, p=0; OC <= pe_num.
  auto l = make_conv(8, 16, 3, 1, 0);
  const ArchConfig cfg{8, 16, 4};
  const Shape ifm{16, 3, 8};
  auto sched = generate_schedule(l, cfg, ifm);

  // 2 tiles x 1 channel group x (6 row slides x 3 column slides) cycles.
  CHECK(sched.events.size() == 36);
  // Off-chip traffic counts each demanded column once per (row sweep, kernel
  // row): (out_W-1)*s + c = 8 columns x 3 kernel rows.
  CHECK(sched.vectors_loaded == 24);
  CHECK(sched.bytes_loaded == 24 * 16 * 4);
  CHECK(sched.padded_vector_count == 0);
}

TEST_CASE("generate_schedule: pointwise degenerate case has exactly one event") {
  auto l = make_conv(1, 16, 1, 1, 0);
  const ArchConfig cfg{8, 16, 1};
  auto sched = generate_schedule(l, cfg, {16, 1, 1});
  REQUIRE(sched.events.size() == 1);
  CHECK(sched.events[0].cycle == 0);
  CHECK(sched.vectors_loaded == 1);
  CHECK(sched.bytes_loaded == 16 * 4);
}

TEST_CASE("bytes_loaded is invariant in reuse_fac") {
  auto l = make_conv(8, 16, 3, 1, 0);
  const Shape ifm{16, 3, 8};
  const auto bytes1 = generate_schedule(l, {8, 16, 1}, ifm).bytes_loaded;
  const auto bytes4 = generate_schedule(l, {8, 16, 4}, ifm).bytes_loaded;
  CHECK(bytes1 == bytes4);

  std::mt19937 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + 2 * (gen() % 3);  // 1, 3, 5
    const int s = 1 + gen() % 3;
    const int p = gen() % 3;
    const int ic = 1 + gen() % 24;
    const int oc = 1 + gen() % 24;
    const int h = c + gen() % 8;
    const int w = c + gen() % 8;
    auto layer = make_conv(oc, ic, c, s, p);
    const Shape shape{ic, h, w};
    const ArchConfig base{4, 4, 1};
    const auto want = generate_schedule(layer, base, shape).bytes_loaded;
    for (int r : {2, 4}) {
      ArchConfig cfg = base;
      cfg.reuse_fac = r;
      CHECK(generate_schedule(layer, cfg, shape).bytes_loaded == want);
    }
  }
}

TEST_CASE("ifm_offchip_bytes matches schedule totals on randomized layers") {
  std::mt19937 gen(32);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + 2 * (gen() % 3);
    const int s = 1 + gen() % 3;
    const int p = gen() % 2;
    const int ic = 1 + gen() % 20;
    const int oc = 1 + gen() % 20;
    const int h = c + gen() % 7;
    const int w = c + gen() % 7;
    const ArchConfig cfg{1 + static_cast<int>(gen() % 8), 1 + static_cast<int>(gen() % 8),
                         1 + static_cast<int>(gen() % 6)};
    auto layer = make_conv(oc, ic, c, s, p);
    const Shape shape{ic, h, w};
    CHECK(ifm_offchip_bytes(layer, cfg, shape) ==
          generate_schedule(layer, cfg, shape).bytes_loaded);
    CHECK(schedule_event_count(layer, cfg, shape) ==
          static_cast<std::int64_t>(generate_schedule(layer, cfg, shape).events.size()));
  }
}

TEST_CASE("coverage: each tile's events cover its demand set, per channel group") {
  std::mt19937 gen(33);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 1 + 2 * (gen() % 2);  // 1 or 3
    const int s = 1 + gen() % 2;
    const int p = gen() % 2;
    const int ic = 1 + gen() % 8;
    const int oc = 1 + gen() % 8;
    const int h = c + gen() % 5;
    const int w = c + gen() % 5;
    const ArchConfig cfg{1 + static_cast<int>(gen() % 4), 1 + static_cast<int>(gen() % 4),
                         1 + static_cast<int>(gen() % 4)};
    auto layer = make_conv(oc, ic, c, s, p);
    const Shape shape{ic, h, w};
    const Shape out = conv_output_shape(shape, layer);
    const int tiles_per_row = static_cast<int>(ceil_div(out.width, cfg.reuse_fac));
    const int channel_groups = static_cast<int>(ceil_div(ic, cfg.vec_fac));

    auto sched = generate_schedule(layer, cfg, shape);

    // loaded positions per (ofm_group, tile, channel_group)
    std::map<std::tuple<int, int, int>, std::set<std::pair<int, int>>> loaded;
    for (const auto& ev : sched.events)
      loaded[{ev.ofm_group, ev.tile, ev.channel_group}].insert({ev.row, ev.col});

    const int ofm_groups = static_cast<int>(ceil_div(oc, cfg.pe_num));
    for (int og = 0; og < ofm_groups; ++og)
      for (int tile = 0; tile < out.height * tiles_per_row; ++tile) {
        const auto want = tile_demand(layer, cfg, out, tile, tiles_per_row);
        for (int cg = 0; cg < channel_groups; ++cg) {
          const auto& got = loaded.at({og, tile, cg});
          for (const auto& pos : want) CHECK(got.count(pos) == 1);
        }
      }
  }
}

TEST_CASE("schedule cycles are consecutive from 0 (II = 1)") {
  auto l = make_conv(5, 7, 3, 2, 1);
  auto sched = generate_schedule(l, {2, 4, 3}, {7, 9, 9});
  for (std::size_t i = 0; i < sched.events.size(); ++i)
    CHECK(sched.events[i].cycle == static_cast<std::int64_t>(i));
}

TEST_CASE("minimality at stride 1: events per tile per channel group") {
  auto l = make_conv(4, 8, 3, 1, 0);
  const ArchConfig cfg{4, 4, 4};
  auto sched = generate_schedule(l, cfg, {8, 6, 9});
  std::map<std::tuple<int, int, int>, int> counts;
  for (const auto& ev : sched.events) ++counts[{ev.ofm_group, ev.tile, ev.channel_group}];
  for (const auto& [key, n] : counts) CHECK(n == (cfg.reuse_fac + 3 - 1) * 3);
}

TEST_CASE("bytes_loaded grows with IFM spatial size") {
  auto l = make_conv(4, 8, 3, 2, 1);
  const ArchConfig cfg{4, 4, 2};
  std::int64_t prev = 0;
  for (int grow = 0; grow < 4; ++grow) {
    // Step by the stride so the output plane grows every time.
    const Shape shape{8, 7 + 2 * grow, 7 + 2 * grow};
    const auto bytes = ifm_offchip_bytes(l, cfg, shape);
    CHECK(bytes > prev);
    prev = bytes;
  }
}

TEST_CASE("padding vectors are flagged and counted") {
  auto l = make_conv(2, 4, 3, 1, 1);
  auto sched = generate_schedule(l, {2, 4, 2}, {4, 4, 4});
  bool saw_padding = false;
  for (const auto& ev : sched.events) {
    const bool outside = ev.row < 0 || ev.row >= 4 || ev.col < 0 || ev.col >= 4;
    CHECK(ev.is_padding == outside);
    saw_padding = saw_padding || outside;
  }
  CHECK(saw_padding);
  CHECK(sched.padded_vector_count > 0);
  CHECK(sched.padded_vector_count < sched.vectors_loaded);
}

TEST_CASE("schedule CSV has the contract columns") {
  auto l = make_conv(1, 4, 1, 1, 0);
  auto sched = generate_schedule(l, {1, 4, 1}, {4, 2, 2});
  std::ostringstream os;
  write_schedule_csv(os, sched);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "cycle,ofm_group,tile,channel_group,row,col,is_padding");
  std::string line;
  std::getline(is, line);
  CHECK(line == "0,0,0,0,0,0,0");
  int lines = 1;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == static_cast<int>(sched.events.size()));
}
