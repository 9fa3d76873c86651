// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits non-zero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scnn/dse.hpp"
#include "scnn/errors.hpp"
#include "scnn/memrd.hpp"
#include "scnn/oracle.hpp"
#include "scnn/pe_array.hpp"
#include "scnn/perf_model.hpp"
#include "scnn/runtime.hpp"

using namespace scnn;

namespace {

const std::string kDataDir = SCNN_DATA_DIR;
int g_failures = 0;

void report(int criterion, const std::string& what, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

float uniform(std::mt19937& gen, float lo, float hi) {
  return lo + (hi - lo) * static_cast<float>(gen() * (1.0 / 4294967296.0));
}

struct RandomConv {
  LayerDescriptor layer;
  Shape ifm_shape;
  Tensor ifm;
  std::vector<Tensor> filters;
  std::vector<float> bias;
};

RandomConv random_conv(std::mt19937& gen, int max_dim = 12) {
  RandomConv rc;
  const int c = 1 + 2 * (gen() % 3);  // 1, 3, 5
  rc.layer.name = "rand";
  rc.layer.kind = LayerKind::kConv;
  rc.layer.inputs = {"input"};
  rc.layer.kernel_size = c;
  rc.layer.stride = 1 + gen() % 2;
  rc.layer.padding = gen() % 3;
  rc.layer.in_channels = 1 + gen() % max_dim;
  rc.layer.out_channels = 1 + gen() % max_dim;
  const int h = c + gen() % 8;
  const int w = c + gen() % 8;
  rc.ifm_shape = {rc.layer.in_channels, h, w};
  rc.ifm = Tensor(rc.layer.in_channels, h, w);
  for (auto& v : rc.ifm.data) v = uniform(gen, -1.f, 1.f);
  for (int oc = 0; oc < rc.layer.out_channels; ++oc) {
    Tensor f(rc.layer.in_channels, c, c);
    for (auto& v : f.data) v = uniform(gen, -1.f, 1.f);
    rc.filters.push_back(std::move(f));
  }
  rc.bias.resize(static_cast<std::size_t>(rc.layer.out_channels));
  for (auto& b : rc.bias) b = uniform(gen, -1.f, 1.f);
  return rc;
}

// ---- criterion 1: oracle equivalence over randomized (layer, config) pairs

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 gen(1001);
  const int grid[4] = {1, 2, 4, 16};
  int pairs = 0;
  bool ok = true;
  std::string detail;

  while (pairs < 200 && ok) {
    RandomConv rc = random_conv(gen);
    auto want = conv_ref(rc.ifm, rc.filters, rc.bias, rc.layer);
    const ArchConfig cfg{grid[gen() % 4], grid[gen() % 4], grid[gen() % 4]};
    auto sim = simulate_conv(rc.ifm, rc.filters, rc.bias, rc.layer, cfg);
    for (std::size_t i = 0; i < want.data.size() && ok; ++i) {
      const double err = std::abs(sim.ofm.data[i] - want.data[i]);
      if (err > 1e-5 + 1e-4 * std::abs(want.data[i])) {
        ok = false;
        detail = "mismatch at pair " + std::to_string(pairs);
      }
    }
    ++pairs;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 120.0) {
    ok = false;
    detail += " runtime " + std::to_string(secs) + "s >= 120s";
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d pairs, %.1fs", pairs, secs);
  report(1, std::string("simulate_conv matches conv_ref within 1e-4 rel / 1e-5 abs (") + buf +
             ")", ok, detail);
}

// ---- criterion 2: slide-count law and demand coverage

void criterion2() {
  LayerDescriptor l;
  l.name = "c3";
  l.kind = LayerKind::kConv;
  l.inputs = {"input"};
  l.out_channels = 8;
  l.in_channels = 8;
  l.kernel_size = 3;
  l.stride = 1;
  l.padding = 0;
  const auto sc = tile_slide_counts(l, {4, 4, 4});
  bool ok = sc.row_slides == 6 && sc.col_slides == 3;
  std::string detail = ok ? "" : "slide counts (" + std::to_string(sc.row_slides) + "," +
                                     std::to_string(sc.col_slides) + ") != (6,3)";

  std::mt19937 gen(1002);
  for (int trial = 0; trial < 50 && ok; ++trial) {
    RandomConv rc = random_conv(gen, 8);
    const ArchConfig cfg{1 + static_cast<int>(gen() % 4), 1 + static_cast<int>(gen() % 4),
                         1 + static_cast<int>(gen() % 4)};
    const Shape out = conv_output_shape(rc.ifm_shape, rc.layer);
    const int tiles_per_row = (out.width + cfg.reuse_fac - 1) / cfg.reuse_fac;
    auto sched = generate_schedule(rc.layer, cfg, rc.ifm_shape);

    std::map<std::tuple<int, int, int>, std::set<std::pair<int, int>>> loaded;
    for (const auto& ev : sched.events)
      loaded[{ev.ofm_group, ev.tile, ev.channel_group}].insert({ev.row, ev.col});

    const int ofm_groups = (rc.layer.out_channels + cfg.pe_num - 1) / cfg.pe_num;
    const int channel_groups = (rc.layer.in_channels + cfg.vec_fac - 1) / cfg.vec_fac;
    for (int og = 0; og < ofm_groups && ok; ++og)
      for (int tile = 0; tile < out.height * tiles_per_row && ok; ++tile) {
        const int oy = tile / tiles_per_row;
        const int tx = tile % tiles_per_row;
        for (int cg = 0; cg < channel_groups && ok; ++cg) {
          const auto& got = loaded[{og, tile, cg}];
          for (int k = 0; k < cfg.reuse_fac && ok; ++k) {
            const int ox = tx * cfg.reuse_fac + k;
            if (ox >= out.width) break;
            for (int ky = 0; ky < rc.layer.kernel_size && ok; ++ky)
              for (int kx = 0; kx < rc.layer.kernel_size && ok; ++kx)
                if (!got.count({oy * rc.layer.stride - rc.layer.padding + ky,
                                ox * rc.layer.stride - rc.layer.padding + kx})) {
                  ok = false;
                  detail = "coverage hole at trial " + std::to_string(trial);
                }
          }
        }
      }
  }
  report(2, "tile_slide_counts(c=3, reuse=4, s=1) = (6,3); demand coverage on 50 random layers",
         ok, detail);
}

// ---- criterion 3: reuse_fac bandwidth neutrality

void criterion3() {
  std::mt19937 gen(1003);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    RandomConv rc = random_conv(gen);
    ArchConfig cfg{1 + static_cast<int>(gen() % 8), 1 + static_cast<int>(gen() % 8), 1};
    std::int64_t base = -1;
    for (int r : {1, 2, 4}) {
      cfg.reuse_fac = r;
      const auto bytes = generate_schedule(rc.layer, cfg, rc.ifm_shape).bytes_loaded;
      if (base < 0) base = bytes;
      if (bytes != base) {
        ok = false;
        detail = "trial " + std::to_string(trial) + ": reuse=" + std::to_string(r) + " loads " +
                 std::to_string(bytes) + " != " + std::to_string(base);
      }
    }
  }
  report(3, "IFM off-chip bytes identical for reuse_fac in {1,2,4} on 20 random layers", ok,
         detail);
}

// ---- criterion 4: closed-form / simulator equality

void criterion4() {
  std::mt19937 gen(1004);
  bool ok = true;
  std::string detail;
  const int grid[4] = {1, 2, 4, 16};
  for (int trial = 0; trial < 50 && ok; ++trial) {
    RandomConv rc = random_conv(gen, 10);
    const ArchConfig cfg{grid[gen() % 4], grid[gen() % 4], grid[gen() % 4]};
    auto sim = simulate_conv(rc.ifm, rc.filters, rc.bias, rc.layer, cfg);
    auto cy = conv_cycles(rc.layer, rc.ifm_shape, cfg);
    if (cy.compute_cycles != sim.stats.compute_cycles || cy.load_cycles != sim.stats.load_cycles) {
      ok = false;
      detail = "trial " + std::to_string(trial) + ": model (" +
               std::to_string(cy.compute_cycles) + "," + std::to_string(cy.load_cycles) +
               ") vs sim (" + std::to_string(sim.stats.compute_cycles) + "," +
               std::to_string(sim.stats.load_cycles) + ")";
    }
  }
  report(4, "perf-model conv_cycles equals simulator counters exactly on 50 random pairs", ok,
         detail);
}

// ---- criterion 5: FLOP reproduction

void criterion5() {
  const std::vector<std::pair<std::string, double>> targets = {
      {"alexnet", 1.4}, {"resnet50", 8.0}, {"resnet152", 22.0}, {"retinanet", 312.0}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, gflops] : targets) {
    auto model = load_model(kDataDir + "/models/" + name + ".json");
    const double got = static_cast<double>(flop_count(model)) / 1e9;
    if (std::abs(got - gflops) > 0.15 * gflops) {
      ok = false;
      detail += name + "=" + std::to_string(got) + " outside " + std::to_string(gflops) +
                "+-15% ";
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s=%.2f ", name.c_str(), got);
      detail += buf;
    }
  }
  report(5, "bundled models reproduce the published GFLOP figures within 15%", ok, detail);
}

// ---- criterion 6: DSE reproduction

void criterion6() {
  auto model = load_model(kDataDir + "/models/alexnet.json");
  auto arria = load_fpga(kDataDir + "/fpga/arria10.json");
  auto stratix = load_fpga(kDataDir + "/fpga/stratix10.json");

  auto a = explore(model, arria);
  bool ok = a.config.pe_num == 16 && a.config.vec_fac == 16 && a.config.reuse_fac == 4;
  std::string detail = "arria10 -> (" + std::to_string(a.config.pe_num) + "," +
                       std::to_string(a.config.vec_fac) + "," +
                       std::to_string(a.config.reuse_fac) + ")";

  auto s = explore(model, stratix);
  detail += ", stratix10 -> vec=" + std::to_string(s.config.vec_fac) +
            " reuse=" + std::to_string(s.config.reuse_fac);
  ok = ok && s.config.vec_fac == 32 && s.config.reuse_fac == 6;
  report(6, "explore reproduces (16,16,4) on Arria-10 and vec=32/reuse=6 on Stratix-10", ok,
         detail);
}

// ---- criterion 7: batch-mode law

void criterion7() {
  auto arria = load_fpga(kDataDir + "/fpga/arria10.json");
  LayerDescriptor fc6;
  fc6.name = "fc6";
  fc6.kind = LayerKind::kFc;
  fc6.inputs = {"input"};
  fc6.out_channels = 4096;
  fc6.in_channels = 9216;
  const ArchConfig cfg{16, 16, 4};

  auto b1 = fc_latency(fc6, cfg, arria, 1);
  auto b4 = fc_latency(fc6, cfg, arria, 4);
  bool ok = b1.bound == Bound::kWeightMemory &&
            std::abs(b4.seconds - b1.seconds / 4.0) <= 0.01 * (b1.seconds / 4.0);

  bool rejected = false;
  try {
    Matrix w(4, 4);
    std::vector<std::vector<float>> images(5, std::vector<float>(4, 0.f));
    simulate_fc(images, w, std::vector<float>(4, 0.f), cfg, 5);
  } catch (const ValidationError&) {
    rejected = true;
  }
  ok = ok && rejected;
  char buf[96];
  std::snprintf(buf, sizeof buf, "batch1=%.4fs batch4=%.4fs, batch>reuse_fac %s", b1.seconds,
                b4.seconds, rejected ? "rejected" : "NOT rejected");
  report(7, "weight-bound FC at batch=4 takes 1/4 the batch=1 time (1%); batch cap enforced",
         ok, buf);
}

// ---- criterion 8: reuse_fac monotonicity on AlexNet

void criterion8() {
  auto model = load_model(kDataDir + "/models/alexnet.json");
  auto arria = load_fpga(kDataDir + "/fpga/arria10.json");
  bool ok = true;
  std::string detail;
  double prev = 1e30;
  for (int r : {1, 2, 3, 4}) {
    const double secs = model_latency(model, {16, 16, r}, arria, 1).total_seconds;
    char buf[40];
    std::snprintf(buf, sizeof buf, "r%d=%.4fs ", r, secs);
    detail += buf;
    if (secs > prev) ok = false;
    prev = secs;
  }
  report(8, "modeled AlexNet latency non-increasing in reuse_fac over {1,2,3,4} at (16,16)",
         ok, detail);
}

// ---- criterion 9: run-time flexibility with an immutable config

void criterion9() {
  const ArchConfig cfg{4, 8, 2};
  RunOptions opts;
  opts.cfg = cfg;

  bool ok = true;
  std::string detail;
  for (const std::string name : {"toy_convnet", "toy_resnet"}) {
    auto model = load_model(kDataDir + "/models/" + name + ".json");
    auto weights = synthesize_weights(model, 17);
    auto input = synthesize_input(model, 17);
    std::map<std::string, Tensor> outputs;
    run_inference_with_outputs(model, weights, input, opts, &outputs);
    auto oracle = model_ref_forward(model, input, weights);
    for (const auto& [lname, tensor] : outputs) {
      const auto& want = oracle.at(lname);
      for (std::size_t i = 0; i < tensor.data.size(); ++i) {
        const double err = std::abs(tensor.data[i] - want.data[i]);
        if (err > 1e-3 * std::max(1e-6, std::abs(want.data[i])) + 1e-6) {
          ok = false;
          detail = name + "/" + lname + " diverged from the oracle";
        }
      }
    }
  }
  ok = ok && opts.cfg.pe_num == cfg.pe_num && opts.cfg.vec_fac == cfg.vec_fac &&
       opts.cfg.reuse_fac == cfg.reuse_fac;
  report(9, "two structurally different models run back-to-back on one immutable config", ok,
         detail);
}

// ---- criterion 10: CLI determinism

void criterion10() {
  const std::string cli = SCNN_CLI_PATH;
  const std::string out1 = "/tmp/scnn_accept_run1.json";
  const std::string out2 = "/tmp/scnn_accept_run2.json";
  const std::string cmd = "\"" + cli + "\" run --model \"" + kDataDir +
                          "/models/toy_resnet.json\" --pe 4 --vec 4 --reuse 2 --seed 9 --json";

  bool ok = std::system((cmd + " > " + out1 + " 2>/dev/null").c_str()) == 0 &&
            std::system((cmd + " > " + out2 + " 2>/dev/null").c_str()) == 0;
  std::string detail = ok ? "" : "CLI invocation failed";
  if (ok) {
    std::ifstream a(out1, std::ios::binary), b(out2, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    ok = !sa.str().empty() && sa.str() == sb.str();
    if (!ok) detail = "outputs differ or are empty";
  }
  std::remove(out1.c_str());
  std::remove(out2.c_str());
  report(10, "two identical `run --json` invocations are byte-identical", ok, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (g_failures) std::printf("%d criterion(s) FAILED\n", g_failures);
  else std::printf("all criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
