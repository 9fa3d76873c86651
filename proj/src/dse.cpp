#include "scnn/dse.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <ostream>

#include "scnn/errors.hpp"

namespace scnn {

namespace {

// Evaluate one sweep point per index, optionally fanning out across threads.
// Results land in index order, so the merge is deterministic.
template <typename Fn>
std::vector<SweepPoint> evaluate_points(int count, Fn&& eval) {
  std::vector<SweepPoint> points(static_cast<std::size_t>(count));
  const int cap = sweep_thread_cap();
  if (cap <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) points[i] = eval(i);
    return points;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(static_cast<std::size_t>(count));
  // Simple bounded fan-out: at most `cap` tasks in flight.
  int next = 0;
  while (next < count) {
    const int batch_end = std::min(count, next + cap);
    for (int i = next; i < batch_end; ++i)
      futures.push_back(std::async(std::launch::async, [&, i] { points[i] = eval(i); }));
    for (auto& f : futures) f.get();
    futures.clear();
    next = batch_end;
  }
  return points;
}

// Dominant bound of a multi-layer evaluation: the bound of the layer that
// contributes the most time.
Bound dominant_bound(const std::vector<LayerLatency>& layers) {
  Bound b = Bound::kCompute;
  double worst = -1.0;
  for (const auto& l : layers)
    if (l.seconds > worst) {
      worst = l.seconds;
      b = l.bound;
    }
  return b;
}

}  // namespace

int sweep_thread_cap() {
  const char* env = std::getenv("SCNN_THREADS");
  if (!env) return 0;
  return std::max(0, std::atoi(env));
}

int select_vec_fac(const FpgaSpec& fpga) {
  require_valid(fpga);
  if (fpga.burst_width_bits % kDataBits != 0)
    throw ValidationError("select_vec_fac: burst width " + std::to_string(fpga.burst_width_bits) +
                          " bits is not a multiple of the " + std::to_string(kDataBits) +
                          "-bit data width");
  return fpga.burst_width_bits / kDataBits;
}

int select_knee(const std::vector<SweepPoint>& points, double threshold) {
  if (points.empty()) throw ValidationError("select_knee: empty sweep");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double cur = points[i].seconds;
    const double improvement = cur > 0.0 ? (cur - points[i + 1].seconds) / cur : 0.0;
    if (improvement < threshold) return points[i].value;
    if (points[i].bound != Bound::kWeightMemory && points[i + 1].bound == Bound::kWeightMemory)
      return points[i].value;
  }
  return points.back().value;
}

SweepResult sweep_pe_num(const ModelDescriptor& model, const FpgaSpec& fpga, int vec_fac,
                         int lo, int hi, int step) {
  require_valid(model);
  require_valid(fpga);
  if (lo < 1 || hi < lo || step < 1) throw ValidationError("sweep_pe_num: bad range");

  std::vector<const LayerDescriptor*> fc_layers;
  for (const auto& l : model.layers)
    if (l.is_fc()) fc_layers.push_back(&l);
  const bool use_fc = !fc_layers.empty();

  auto shapes = infer_shapes(model);
  auto producer_shape = [&](const LayerDescriptor& l) -> const Shape& {
    const std::string& src = l.inputs.at(0);
    return src == kModelInputName ? model.input_shape : shapes.at(src);
  };

  std::vector<int> values;
  for (int v = lo; v <= hi; v += step) values.push_back(v);

  auto eval = [&](int idx) {
    const ArchConfig cfg{values[static_cast<std::size_t>(idx)], vec_fac, 1};
    std::vector<LayerLatency> lats;
    if (use_fc) {
      for (const auto* l : fc_layers) lats.push_back(fc_latency(*l, cfg, fpga, 1));
    } else {
      for (const auto& l : model.layers)
        if (l.is_conv()) lats.push_back(conv_latency(l, producer_shape(l), cfg, fpga));
    }
    SweepPoint pt;
    pt.value = cfg.pe_num;
    for (const auto& lat : lats) pt.seconds += lat.seconds;
    pt.dsp_utilization = dsp_usage(cfg, fpga).dsp_utilization;
    pt.bound = dominant_bound(lats);
    return pt;
  };

  SweepResult result;
  result.parameter = "pe_num";
  result.points = evaluate_points(static_cast<int>(values.size()), eval);
  result.chosen = select_knee(result.points);
  result.rule = use_fc ? "knee of summed FC-layer latency (<5% successor improvement or "
                         "weight_memory flip)"
                       : "knee of summed conv-layer latency (no FC layers in model)";
  return result;
}

SweepResult sweep_reuse_fac(const ModelDescriptor& model, const FpgaSpec& fpga, int vec_fac,
                            int pe_num, int lo, int hi) {
  require_valid(model);
  require_valid(fpga);
  if (lo < 1 || hi < lo) throw ValidationError("sweep_reuse_fac: bad range");

  std::vector<int> values;
  for (int v = lo; v <= hi; ++v) values.push_back(v);

  auto eval = [&](int idx) {
    const ArchConfig cfg{pe_num, vec_fac, values[static_cast<std::size_t>(idx)]};
    const auto lat = model_latency(model, cfg, fpga, 1);
    SweepPoint pt;
    pt.value = cfg.reuse_fac;
    pt.seconds = lat.total_seconds;
    pt.dsp_utilization = lat.resources.dsp_utilization;
    pt.bound = dominant_bound(lat.layers);
    return pt;
  };

  SweepResult result;
  result.parameter = "reuse_fac";
  result.points = evaluate_points(static_cast<int>(values.size()), eval);
  result.rule = "largest reuse_fac within the DSP budget";

  int chosen = 0;
  for (const auto& pt : result.points)
    if (pt.dsp_utilization <= 1.0 + 1e-9) chosen = pt.value;
  if (chosen == 0) {
    const auto one_unit = dsp_usage({pe_num, vec_fac, lo}, fpga);
    throw ValidationError("sweep_reuse_fac: infeasible; reuse_fac=" + std::to_string(lo) +
                          " already needs " + std::to_string(one_unit.dsp_used) +
                          " DSPs of " + std::to_string(fpga.dsp_count));
  }
  result.chosen = chosen;
  return result;
}

ExploreResult explore(const ModelDescriptor& model, const FpgaSpec& fpga) {
  ExploreResult result;

  const int vec = select_vec_fac(fpga);
  result.vec_sweep.parameter = "vec_fac";
  result.vec_sweep.points = {{vec, 0.0, 0.0, Bound::kCompute}};
  result.vec_sweep.chosen = vec;
  result.vec_sweep.rule = "burst_width_bits / data bit width";

  result.pe_sweep = sweep_pe_num(model, fpga, vec);
  result.reuse_sweep = sweep_reuse_fac(model, fpga, vec, result.pe_sweep.chosen);

  result.config = ArchConfig{result.pe_sweep.chosen, vec, result.reuse_sweep.chosen};
  return result;
}

void write_dse_csv(std::ostream& os, const ExploreResult& result) {
  os << "parameter,value,seconds,dsp_utilization,bound,chosen\n";
  auto dump = [&](const SweepResult& sweep) {
    for (const auto& pt : sweep.points)
      os << sweep.parameter << ',' << pt.value << ',' << pt.seconds << ','
         << pt.dsp_utilization << ',' << bound_name(pt.bound) << ','
         << (pt.value == sweep.chosen ? 1 : 0) << '\n';
  };
  dump(result.vec_sweep);
  dump(result.pe_sweep);
  dump(result.reuse_sweep);
}

}  // namespace scnn
