#include "scnn/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "scnn/aux_kernels.hpp"
#include "scnn/errors.hpp"

namespace scnn {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

LayerKind parse_kind(const std::string& type, const std::string& layer_name) {
  if (type == "conv") return LayerKind::kConv;
  if (type == "fc") return LayerKind::kFc;
  if (type == "maxpool" || type == "pool") return LayerKind::kMaxPool;
  if (type == "avgpool")
    throw ValidationError("layer '" + layer_name + "': average pooling is unsupported");
  if (type == "lrn") return LayerKind::kLrn;
  if (type == "eltwise") return LayerKind::kEltwise;
  if (type == "relu") return LayerKind::kRelu;
  throw ValidationError("layer '" + layer_name + "': unknown type '" + type + "'");
}

int require_int(const json& j, const char* key, const std::string& layer_name) {
  if (!j.contains(key))
    throw ValidationError("layer '" + layer_name + "': missing required field '" + key + "'");
  return j.at(key).get<int>();
}

}  // namespace

ModelDescriptor parse_model_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(origin + ": JSON parse error: " + e.what());
  }

  try {
    ModelDescriptor model;
    model.name = j.value("name", origin);
    const auto& shape = j.at("input_shape");
    if (!shape.is_array() || shape.size() != 3)
      throw ValidationError("input_shape must be [channels, height, width]");
    model.input_shape = {shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>()};

    std::string prev = kModelInputName;
    for (const auto& lj : j.at("layers")) {
      LayerDescriptor l;
      l.name = lj.value("name", "");
      if (l.name.empty()) throw ValidationError("layer without a name");
      l.kind = parse_kind(lj.value("type", ""), l.name);
      if (lj.contains("inputs"))
        l.inputs = lj.at("inputs").get<std::vector<std::string>>();
      else
        l.inputs = {prev};  // sequential chaining sugar
      l.apply_relu = lj.value("relu", false);

      switch (l.kind) {
        case LayerKind::kConv:
          l.out_channels = require_int(lj, "out_channels", l.name);
          l.in_channels = require_int(lj, "in_channels", l.name);
          l.kernel_size = require_int(lj, "kernel_size", l.name);
          l.stride = lj.value("stride", 1);
          l.padding = lj.value("padding", 0);
          l.groups = lj.value("groups", 1);
          break;
        case LayerKind::kFc:
          l.out_channels = require_int(lj, "out_channels", l.name);
          l.in_channels = require_int(lj, "in_channels", l.name);
          break;
        case LayerKind::kMaxPool:
          l.pool_window = require_int(lj, "window", l.name);
          l.pool_stride = lj.value("stride", 1);
          break;
        case LayerKind::kLrn:
          l.lrn_size = lj.value("local_size", 5);
          l.lrn_alpha = lj.value("alpha", 1e-4);
          l.lrn_beta = lj.value("beta", 0.75);
          l.lrn_k = lj.value("k", 2.0);
          break;
        case LayerKind::kEltwise:
        case LayerKind::kRelu:
          break;
      }
      prev = l.name;
      model.layers.push_back(std::move(l));
    }
    require_valid(model);
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": bad model descriptor: " + e.what());
  }
}

ModelDescriptor load_model(const std::string& path) {
  return parse_model_json(read_file(path), path);
}

FpgaSpec parse_fpga_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(origin + ": JSON parse error: " + e.what());
  }
  try {
    FpgaSpec spec;
    spec.name = j.value("name", origin);
    spec.dsp_count = j.at("dsp_count").get<int>();
    spec.burst_width_bits = j.at("burst_width_bits").get<int>();
    spec.mem_bandwidth_bytes_per_sec = j.at("mem_bandwidth_bytes_per_sec").get<double>();
    spec.f_clk_hz = j.at("f_clk_hz").get<double>();
    spec.dsp_per_lane = j.value("dsp_per_lane", 1.0);
    spec.dsp_overhead_per_ip_unit = j.value("dsp_overhead_per_ip_unit", 0.0);
    require_valid(spec);
    return spec;
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": bad fpga spec: " + e.what());
  }
}

FpgaSpec load_fpga(const std::string& path) {
  return parse_fpga_json(read_file(path), path);
}

// ---- weight binary ----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'C', 'N', 'N'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw IoError("weight file: short read in " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(os, v);
}

float get_f32(std::istream& is, const std::string& what) {
  const std::uint32_t v = get_u32(is, what);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

struct RawRecord {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

void write_record(std::ostream& os, const std::string& name,
                  const std::vector<std::uint32_t>& dims, const std::vector<float>& data) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_u32(os, d);
  for (float f : data) put_f32(os, f);
}

bool shape_matches(const RawRecord& rec, const std::vector<std::uint32_t>& want) {
  return rec.dims == want;
}

std::string dims_str(const std::vector<std::uint32_t>& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + ")";
}

}  // namespace

void save_weights(const std::string& path, const ModelDescriptor& model,
                  const WeightMap& weights) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));

  for (const auto& l : model.layers) {
    if (!l.is_conv() && !l.is_fc()) continue;
    auto it = weights.find(l.name);
    if (it == weights.end())
      throw ValidationError("save_weights: missing weights for layer '" + l.name + "'");
    const LayerWeights& lw = it->second;
    if (l.is_conv()) {
      std::vector<float> flat;
      flat.reserve(static_cast<std::size_t>(l.out_channels) * l.group_in_channels() *
                   l.kernel_size * l.kernel_size);
      for (const auto& f : lw.filters) flat.insert(flat.end(), f.data.begin(), f.data.end());
      write_record(os, l.name,
                   {static_cast<std::uint32_t>(l.out_channels),
                    static_cast<std::uint32_t>(l.group_in_channels()),
                    static_cast<std::uint32_t>(l.kernel_size),
                    static_cast<std::uint32_t>(l.kernel_size)},
                   flat);
    } else {
      write_record(os, l.name,
                   {static_cast<std::uint32_t>(l.out_channels),
                    static_cast<std::uint32_t>(l.in_channels)},
                   lw.matrix.data);
    }
    write_record(os, l.name + ".bias", {static_cast<std::uint32_t>(l.out_channels)}, lw.bias);
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

WeightMap load_weights(const std::string& path, const ModelDescriptor& model) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");

  char magic[4];
  if (!is.read(magic, 4)) throw IoError("weight file '" + path + "': short read in header");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("weight file '" + path + "': bad magic, not a SCNN weight store");
  int version = is.get();
  if (version == std::istream::traits_type::eof())
    throw IoError("weight file '" + path + "': short read in header");
  if (version != kVersion)
    throw IoError("weight file '" + path + "': unsupported version " + std::to_string(version));

  std::map<std::string, RawRecord> records;
  while (true) {
    is.peek();
    if (is.eof()) break;
    const std::uint32_t name_len = get_u32(is, "record name length");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw IoError("weight file: short read in record name");
    RawRecord rec;
    const std::uint32_t rank = get_u32(is, "record '" + name + "' rank");
    std::uint64_t count = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      rec.dims.push_back(get_u32(is, "record '" + name + "' dims"));
      count *= rec.dims.back();
    }
    rec.data.resize(count);
    for (std::uint64_t i = 0; i < count; ++i)
      rec.data[i] = get_f32(is, "record '" + name + "' payload");
    records.emplace(std::move(name), std::move(rec));
  }

  WeightMap out;
  for (const auto& l : model.layers) {
    if (!l.is_conv() && !l.is_fc()) continue;
    auto wit = records.find(l.name);
    auto bit = records.find(l.name + ".bias");
    if (wit == records.end() || bit == records.end())
      throw ValidationError("weight store is missing layer '" + l.name + "'");
    const RawRecord& wr = wit->second;
    const RawRecord& br = bit->second;
    if (!shape_matches(br, {static_cast<std::uint32_t>(l.out_channels)}))
      throw ValidationError("layer '" + l.name + "': bias shape " + dims_str(br.dims) +
                            " != (" + std::to_string(l.out_channels) + ")");
    LayerWeights lw;
    lw.bias = br.data;
    for (float b : lw.bias)
      if (!std::isfinite(b))
        throw ValidationError("layer '" + l.name + "': bias contains non-finite values");
    if (l.is_conv()) {
      const std::vector<std::uint32_t> want = {
          static_cast<std::uint32_t>(l.out_channels),
          static_cast<std::uint32_t>(l.group_in_channels()),
          static_cast<std::uint32_t>(l.kernel_size), static_cast<std::uint32_t>(l.kernel_size)};
      if (!shape_matches(wr, want))
        throw ValidationError("layer '" + l.name + "': weight shape " + dims_str(wr.dims) +
                              " != expected " + dims_str(want));
      const int icg = l.group_in_channels();
      const std::size_t per_filter = static_cast<std::size_t>(icg) * l.kernel_size * l.kernel_size;
      for (int oc = 0; oc < l.out_channels; ++oc) {
        Tensor f(icg, l.kernel_size, l.kernel_size);
        std::copy_n(wr.data.begin() + static_cast<std::ptrdiff_t>(oc * per_filter), per_filter,
                    f.data.begin());
        f.require_finite("layer '" + l.name + "' weights");
        lw.filters.push_back(std::move(f));
      }
    } else {
      if (!shape_matches(wr, {static_cast<std::uint32_t>(l.out_channels),
                              static_cast<std::uint32_t>(l.in_channels)}))
        throw ValidationError("layer '" + l.name + "': weight shape " + dims_str(wr.dims) +
                              " != expected (" + std::to_string(l.out_channels) + "," +
                              std::to_string(l.in_channels) + ")");
      lw.matrix = Matrix(l.out_channels, l.in_channels);
      lw.matrix.data = wr.data;
      for (float w : lw.matrix.data)
        if (!std::isfinite(w))
          throw ValidationError("layer '" + l.name + "': weights contain non-finite values");
    }
    out.emplace(l.name, std::move(lw));
  }
  return out;
}

// ---- synthetic weights / inputs ---------------------------------------------

namespace {

// Fixed mapping from mt19937 draws to uniform [-0.1, 0.1); portable across
// implementations, unlike std::uniform_real_distribution.
class SyntheticGen {
 public:
  explicit SyntheticGen(std::uint32_t seed) : gen_(seed) {}
  float next() {
    return static_cast<float>(gen_() * (1.0 / 4294967296.0) * 0.2 - 0.1);
  }
  void fill(std::vector<float>& v) {
    for (auto& x : v) x = next();
  }

 private:
  std::mt19937 gen_;
};

}  // namespace

WeightMap synthesize_weights(const ModelDescriptor& model, std::uint32_t seed) {
  SyntheticGen gen(seed);
  WeightMap out;
  for (const auto& l : model.layers) {
    if (!l.is_conv() && !l.is_fc()) continue;
    LayerWeights lw;
    if (l.is_conv()) {
      for (int oc = 0; oc < l.out_channels; ++oc) {
        Tensor f(l.group_in_channels(), l.kernel_size, l.kernel_size);
        gen.fill(f.data);
        lw.filters.push_back(std::move(f));
      }
    } else {
      lw.matrix = Matrix(l.out_channels, l.in_channels);
      gen.fill(lw.matrix.data);
    }
    lw.bias.resize(static_cast<std::size_t>(l.out_channels));
    for (auto& b : lw.bias) b = gen.next();
    out.emplace(l.name, std::move(lw));
  }
  return out;
}

Tensor synthesize_input(const ModelDescriptor& model, std::uint32_t seed) {
  SyntheticGen gen(seed ^ 0x9e3779b9u);  // decorrelate from the weight stream
  Tensor t(model.input_shape.channels, model.input_shape.height, model.input_shape.width);
  gen.fill(t.data);
  return t;
}

// ---- inference ----------------------------------------------------------------

std::string fnv1a_checksum(const Tensor& t) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint32_t word) {
    for (int i = 0; i < 4; ++i) {
      h ^= (word >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint32_t>(t.channels));
  mix(static_cast<std::uint32_t>(t.height));
  mix(static_cast<std::uint32_t>(t.width));
  for (float f : t.data) {
    std::uint32_t w;
    std::memcpy(&w, &f, 4);
    mix(w);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

RunReport run_inference_with_outputs(const ModelDescriptor& model, const WeightMap& weights,
                                     const Tensor& input, const RunOptions& opts,
                                     std::map<std::string, Tensor>* outputs) {
  require_valid(model);
  require_valid(opts.cfg);
  if (opts.batch < 1 || opts.batch > opts.cfg.reuse_fac)
    throw ValidationError("run options: batch " + std::to_string(opts.batch) +
                          " violates batch <= reuse_fac");
  if (opts.mode == RunMode::kModelOnly && !opts.fpga)
    throw ValidationError("run options: model-only mode needs an FPGA spec");
  input.require_finite("model input");

  RunReport report;
  report.model_name = model.name;
  report.config = opts.cfg;
  report.mode = opts.mode;
  report.batch = opts.batch;
  report.seed = opts.seed;

  if (opts.mode == RunMode::kModelOnly) {
    const auto lat = model_latency(model, opts.cfg, *opts.fpga, opts.batch);
    auto shapes = infer_shapes(model);
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      const auto& l = model.layers[i];
      LayerReport lr;
      lr.name = l.name;
      lr.kind = layer_kind_name(l.kind);
      lr.output_shape = shapes.at(l.name);
      lr.latency = lat.layers[i];
      report.layers.push_back(std::move(lr));
    }
    report.total_seconds = lat.total_seconds;
    report.effective_gflops = lat.effective_gflops;
    report.efficiency = lat.efficiency;
    report.resources = lat.resources;
    return report;
  }

  std::map<std::string, Tensor> acts;
  acts.emplace(kModelInputName, input);

  auto fetch = [&](const LayerDescriptor& l, std::size_t i) -> const Tensor& {
    auto it = acts.find(l.inputs.at(i));
    if (it == acts.end())
      throw ValidationError("layer '" + l.name + "': unresolved input '" + l.inputs.at(i) + "'");
    return it->second;
  };
  auto fetch_weights = [&](const LayerDescriptor& l) -> const LayerWeights& {
    auto it = weights.find(l.name);
    if (it == weights.end())
      throw ValidationError("missing weights for layer '" + l.name + "'");
    return it->second;
  };

  for (const auto& l : model.layers) {
    Tensor out;
    CycleStats stats;
    switch (l.kind) {
      case LayerKind::kConv: {
        const auto& lw = fetch_weights(l);
        auto res = simulate_conv(fetch(l, 0), lw.filters, lw.bias, l, opts.cfg);
        out = std::move(res.ofm);
        stats = res.stats;
        break;
      }
      case LayerKind::kFc: {
        const auto& lw = fetch_weights(l);
        const Tensor& in = fetch(l, 0);
        // One image: batch lanes replicate it, all lanes agree by construction.
        std::vector<std::vector<float>> lanes(
            static_cast<std::size_t>(opts.batch),
            std::vector<float>(in.data.begin(), in.data.end()));
        auto res = simulate_fc(lanes, lw.matrix, lw.bias, opts.cfg, opts.batch, l.apply_relu);
        out = Tensor(l.out_channels, 1, 1);
        std::copy(res.outputs[0].begin(), res.outputs[0].end(), out.data.begin());
        stats = res.stats;
        break;
      }
      case LayerKind::kMaxPool: {
        auto res = simulate_pool(fetch(l, 0), l);
        out = std::move(res.out);
        stats.compute_cycles = stats.total_cycles = res.stats.cycles;
        stats.ifm_bytes = res.stats.bytes_in;
        stats.ofm_bytes = res.stats.bytes_out;
        break;
      }
      case LayerKind::kLrn: {
        auto res = simulate_lrn(fetch(l, 0), l);
        out = std::move(res.out);
        stats.compute_cycles = stats.total_cycles = res.stats.cycles;
        stats.ifm_bytes = res.stats.bytes_in;
        stats.ofm_bytes = res.stats.bytes_out;
        break;
      }
      case LayerKind::kEltwise: {
        const Tensor& b = fetch(l, 1);
        auto res = simulate_memwrite(fetch(l, 0), &b, l.apply_relu);
        out = std::move(res.out);
        stats.compute_cycles = stats.total_cycles = res.stats.cycles;
        stats.ifm_bytes = res.stats.bytes_in;
        stats.ofm_bytes = res.stats.bytes_out;
        break;
      }
      case LayerKind::kRelu: {
        auto res = simulate_memwrite(fetch(l, 0), nullptr, true);
        out = std::move(res.out);
        stats.compute_cycles = stats.total_cycles = res.stats.cycles;
        stats.ifm_bytes = res.stats.bytes_in;
        stats.ofm_bytes = res.stats.bytes_out;
        break;
      }
    }

    LayerReport lr;
    lr.name = l.name;
    lr.kind = layer_kind_name(l.kind);
    lr.output_shape = {out.channels, out.height, out.width};
    lr.checksum = fnv1a_checksum(out);
    lr.cycles = stats;
    report.layers.push_back(std::move(lr));

    report.totals.total_cycles += stats.total_cycles;
    report.totals.load_cycles += stats.load_cycles;
    report.totals.compute_cycles += stats.compute_cycles;
    report.totals.drain_cycles += stats.drain_cycles;
    report.totals.macs_performed += stats.macs_performed;
    report.totals.ifm_bytes += stats.ifm_bytes;
    report.totals.weight_bytes += stats.weight_bytes;
    report.totals.ofm_bytes += stats.ofm_bytes;

    acts.emplace(l.name, std::move(out));
  }

  if (outputs) {
    acts.erase(kModelInputName);
    *outputs = std::move(acts);
  }
  return report;
}

RunReport run_inference(const ModelDescriptor& model, const WeightMap& weights,
                        const Tensor& input, const RunOptions& opts) {
  return run_inference_with_outputs(model, weights, input, opts, nullptr);
}

std::string report_json(const RunReport& report) {
  json j;
  j["model"] = report.model_name;
  j["mode"] = report.mode == RunMode::kSimulate ? "simulate" : "model-only";
  j["config"] = {{"pe_num", report.config.pe_num},
                 {"vec_fac", report.config.vec_fac},
                 {"reuse_fac", report.config.reuse_fac}};
  j["batch"] = report.batch;
  j["seed"] = report.seed;

  json layers = json::array();
  for (const auto& lr : report.layers) {
    json lj;
    lj["name"] = lr.name;
    lj["kind"] = lr.kind;
    lj["output_shape"] = {lr.output_shape.channels, lr.output_shape.height,
                          lr.output_shape.width};
    if (report.mode == RunMode::kSimulate) {
      lj["checksum"] = lr.checksum;
      lj["cycles"] = {{"total", lr.cycles.total_cycles},
                      {"load", lr.cycles.load_cycles},
                      {"compute", lr.cycles.compute_cycles},
                      {"drain", lr.cycles.drain_cycles}};
      lj["macs"] = lr.cycles.macs_performed;
      lj["bytes"] = {{"ifm", lr.cycles.ifm_bytes},
                     {"weight", lr.cycles.weight_bytes},
                     {"ofm", lr.cycles.ofm_bytes}};
    } else {
      lj["cycles"] = {{"compute", lr.latency.compute_cycles},
                      {"load", lr.latency.load_cycles},
                      {"weight", lr.latency.weight_cycles}};
      lj["bound"] = bound_name(lr.latency.bound);
      lj["seconds"] = lr.latency.seconds;
    }
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);

  if (report.mode == RunMode::kSimulate) {
    j["totals"] = {{"total_cycles", report.totals.total_cycles},
                   {"load_cycles", report.totals.load_cycles},
                   {"compute_cycles", report.totals.compute_cycles},
                   {"macs", report.totals.macs_performed},
                   {"ifm_bytes", report.totals.ifm_bytes},
                   {"weight_bytes", report.totals.weight_bytes},
                   {"ofm_bytes", report.totals.ofm_bytes}};
  } else {
    j["totals"] = {{"seconds", report.total_seconds},
                   {"effective_gflops", report.effective_gflops},
                   {"efficiency_vs_peak", report.efficiency}};
    j["resources"] = {{"dsp_used", report.resources.dsp_used},
                      {"dsp_utilization", report.resources.dsp_utilization},
                      {"feasible", report.resources.feasible},
                      {"peak_gflops", report.resources.peak_gflops}};
  }
  return j.dump(2) + "\n";
}

}  // namespace scnn
