// Command-line front end: run inference (simulated or modeled), count FLOPs,
// explore the design space, dump MemRD schedules, validate inputs.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scnn/dse.hpp"
#include "scnn/errors.hpp"
#include "scnn/memrd.hpp"
#include "scnn/runtime.hpp"

namespace {

using namespace scnn;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct CfgFlags {
  int pe = 16;
  int vec = 16;
  int reuse = 4;
  ArchConfig to_config() const { return {pe, vec, reuse}; }
};

void add_cfg_flags(CLI::App* cmd, CfgFlags& cfg) {
  cmd->add_option("--pe", cfg.pe, "pe_num (number of PEs)");
  cmd->add_option("--vec", cfg.vec, "vec_fac (SIMD width)");
  cmd->add_option("--reuse", cfg.reuse, "reuse_fac (IP units per PE)");
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  return file;
}

int cmd_run(const std::string& model_path, const std::string& weights_path,
            const std::string& fpga_path, const CfgFlags& cfg_flags, const std::string& mode,
            int batch, std::uint32_t seed, bool as_json, const std::string& out_path) {
  ModelDescriptor model = load_model(model_path);

  RunOptions opts;
  opts.cfg = cfg_flags.to_config();
  opts.batch = batch;
  opts.seed = seed;
  opts.mode = mode == "simulate" ? RunMode::kSimulate : RunMode::kModelOnly;

  FpgaSpec fpga;
  if (!fpga_path.empty()) {
    fpga = load_fpga(fpga_path);
    opts.fpga = &fpga;
  }

  WeightMap weights = weights_path.empty() ? synthesize_weights(model, seed)
                                           : load_weights(weights_path, model);
  Tensor input = synthesize_input(model, seed);

  RunReport report = run_inference(model, weights, input, opts);

  std::ofstream file;
  std::ostream& os = open_sink(out_path, file);
  if (as_json) {
    os << report_json(report);
  } else {
    os << "model: " << report.model_name << "  config: (pe=" << report.config.pe_num
       << ", vec=" << report.config.vec_fac << ", reuse=" << report.config.reuse_fac
       << ")  batch=" << report.batch << "\n";
    for (const auto& lr : report.layers) {
      os << "  " << std::left << std::setw(20) << lr.name << std::setw(8) << lr.kind
         << lr.output_shape.str();
      if (opts.mode == RunMode::kSimulate)
        os << "  cycles=" << lr.cycles.total_cycles << "  checksum=" << lr.checksum;
      else
        os << "  seconds=" << lr.latency.seconds << "  bound=" << bound_name(lr.latency.bound);
      os << "\n";
    }
    if (opts.mode == RunMode::kSimulate)
      os << "total cycles: " << report.totals.total_cycles << "\n";
    else
      os << "total seconds: " << report.total_seconds << "\n";
  }
  return kExitOk;
}

int cmd_flops(const std::string& model_path, bool as_json, bool per_layer) {
  ModelDescriptor model = load_model(model_path);
  const std::int64_t flops = flop_count(model);
  if (as_json) {
    json j;
    j["model"] = model.name;
    j["flops"] = flops;
    j["gflops"] = static_cast<double>(flops) / 1e9;
    if (per_layer) {
      auto shapes = infer_shapes(model);
      json per = json::array();
      for (const auto& l : model.layers)
        per.push_back({{"name", l.name}, {"flops", layer_flops(l, shapes.at(l.name))}});
      j["layers"] = std::move(per);
    }
    std::cout << j.dump(2) << "\n";
  } else {
    if (per_layer) {
      auto shapes = infer_shapes(model);
      for (const auto& l : model.layers)
        std::cout << "  " << std::left << std::setw(20) << l.name
                  << layer_flops(l, shapes.at(l.name)) << "\n";
    }
    std::cout << model.name << ": " << std::fixed << std::setprecision(3)
              << static_cast<double>(flops) / 1e9 << " GFLOPs\n";
  }
  return kExitOk;
}

int cmd_dse(const std::string& model_path, const std::string& fpga_path, bool as_json,
            const std::string& out_path) {
  ModelDescriptor model = load_model(model_path);
  FpgaSpec fpga = load_fpga(fpga_path);
  ExploreResult result = explore(model, fpga);

  std::ofstream file;
  std::ostream& os = open_sink(out_path, file);
  if (as_json) {
    json j;
    j["fpga"] = fpga.name;
    j["model"] = model.name;
    j["config"] = {{"pe_num", result.config.pe_num},
                   {"vec_fac", result.config.vec_fac},
                   {"reuse_fac", result.config.reuse_fac}};
    auto sweep_json = [](const SweepResult& s) {
      json sj;
      sj["parameter"] = s.parameter;
      sj["chosen"] = s.chosen;
      sj["rule"] = s.rule;
      json pts = json::array();
      for (const auto& p : s.points)
        pts.push_back({{"value", p.value},
                       {"seconds", p.seconds},
                       {"dsp_utilization", p.dsp_utilization},
                       {"bound", bound_name(p.bound)}});
      sj["points"] = std::move(pts);
      return sj;
    };
    j["sweeps"] = {sweep_json(result.vec_sweep), sweep_json(result.pe_sweep),
                   sweep_json(result.reuse_sweep)};
    os << j.dump(2) << "\n";
  } else {
    write_dse_csv(os, result);
  }
  return kExitOk;
}

int cmd_schedule_dump(const std::string& model_path, const std::string& layer_name,
                      const CfgFlags& cfg_flags, const std::string& out_path) {
  ModelDescriptor model = load_model(model_path);
  const LayerDescriptor* layer = model.find_layer(layer_name);
  if (!layer) throw ValidationError("model has no layer named '" + layer_name + "'");
  if (!layer->is_conv())
    throw ValidationError("layer '" + layer_name + "' is not conv; only conv layers have a "
                          "MemRD schedule");

  auto shapes = infer_shapes(model);
  const std::string& src = layer->inputs.at(0);
  Shape ifm = src == kModelInputName ? model.input_shape : shapes.at(src);

  // Grouped convs run one identical pass per group; dump that repeating unit.
  LayerDescriptor unit = *layer;
  if (unit.groups > 1) {
    std::cerr << "note: '" << layer_name << "' has " << unit.groups
              << " groups; dumping the per-group schedule\n";
    unit.in_channels = unit.group_in_channels();
    unit.out_channels /= unit.groups;
    unit.groups = 1;
    ifm.channels = unit.in_channels;
  }

  LoadSchedule sched = generate_schedule(unit, cfg_flags.to_config(), ifm);
  std::ofstream file;
  std::ostream& os = open_sink(out_path, file);
  write_schedule_csv(os, sched);
  return kExitOk;
}

int cmd_validate(const std::string& model_path, std::optional<CfgFlags> cfg_flags) {
  std::vector<std::string> violations;
  if (!model_path.empty()) {
    // Parse without semantic validation so every violation is reported here.
    try {
      ModelDescriptor model = load_model(model_path);
      std::cout << "model '" << model.name << "': ok (" << model.layers.size() << " layers, "
                << std::fixed << std::setprecision(3)
                << static_cast<double>(flop_count(model)) / 1e9 << " GFLOPs)\n";
    } catch (const ValidationError& e) {
      violations.push_back(e.what());
    }
  }
  if (cfg_flags) {
    auto v = validate_arch(cfg_flags->to_config());
    violations.insert(violations.end(), v.begin(), v.end());
    if (v.empty())
      std::cout << "arch config (pe=" << cfg_flags->pe << ", vec=" << cfg_flags->vec
                << ", reuse=" << cfg_flags->reuse << "): ok\n";
  }
  for (const auto& v : violations) std::cerr << "invalid: " << v << "\n";
  return violations.empty() ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scnn: systolic-array CNN accelerator simulator, performance model "
               "and design-space explorer"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run inference and emit a report");
  std::string run_model, run_weights, run_fpga, run_mode = "simulate", run_out;
  CfgFlags run_cfg;
  int run_batch = 1;
  std::uint32_t run_seed = 1;
  bool run_json = false;
  run->add_option("--model", run_model, "model descriptor JSON")->required();
  run->add_option("--weights", run_weights, "weight store (synthesized from --seed if absent)");
  run->add_option("--fpga", run_fpga, "FPGA spec JSON (required for --mode model)");
  run->add_option("--mode", run_mode, "simulate | model-only")
      ->check(CLI::IsMember({"simulate", "model", "model-only"}));
  add_cfg_flags(run, run_cfg);
  run->add_option("--batch", run_batch, "FC batch size (<= reuse_fac)");
  run->add_option("--seed", run_seed, "seed for synthetic weights/input");
  run->add_flag("--json", run_json, "machine-readable report");
  run->add_option("--out", run_out, "write report to file instead of stdout");

  // flops
  auto* flops = app.add_subcommand("flops", "Headline GFLOPs of a model");
  std::string flops_model;
  bool flops_json = false, flops_per_layer = false;
  flops->add_option("model", flops_model, "model descriptor JSON")->required();
  flops->add_flag("--json", flops_json, "machine-readable output");
  flops->add_flag("--per-layer", flops_per_layer, "also list per-layer FLOPs");

  // dse
  auto* dse = app.add_subcommand("dse", "Explore vec_fac, pe_num, reuse_fac for a board");
  std::string dse_model, dse_fpga, dse_out;
  bool dse_json = false;
  dse->add_option("--model", dse_model, "model descriptor JSON")->required();
  dse->add_option("--fpga", dse_fpga, "FPGA spec JSON")->required();
  dse->add_flag("--json", dse_json, "JSON instead of CSV");
  dse->add_option("--out", dse_out, "write to file instead of stdout");

  // schedule-dump
  auto* sched = app.add_subcommand("schedule-dump", "Dump a conv layer's MemRD schedule CSV");
  std::string sched_model, sched_layer, sched_out;
  CfgFlags sched_cfg;
  sched->add_option("--model", sched_model, "model descriptor JSON")->required();
  sched->add_option("--layer", sched_layer, "conv layer name")->required();
  add_cfg_flags(sched, sched_cfg);
  sched->add_option("--out", sched_out, "write to file instead of stdout");

  // validate
  auto* val = app.add_subcommand("validate", "Validate a model descriptor and/or arch config");
  std::string val_model;
  CfgFlags val_cfg;
  bool val_has_cfg = false;
  val->add_option("--model", val_model, "model descriptor JSON");
  val->add_option("--pe", val_cfg.pe, "pe_num")->each([&](const std::string&) { val_has_cfg = true; });
  val->add_option("--vec", val_cfg.vec, "vec_fac")->each([&](const std::string&) { val_has_cfg = true; });
  val->add_option("--reuse", val_cfg.reuse, "reuse_fac")->each([&](const std::string&) { val_has_cfg = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run->parsed())
      return cmd_run(run_model, run_weights, run_fpga, run_cfg, run_mode, run_batch, run_seed,
                     run_json, run_out);
    if (flops->parsed()) return cmd_flops(flops_model, flops_json, flops_per_layer);
    if (dse->parsed()) return cmd_dse(dse_model, dse_fpga, dse_json, dse_out);
    if (sched->parsed()) return cmd_schedule_dump(sched_model, sched_layer, sched_cfg, sched_out);
    if (val->parsed())
      return cmd_validate(val_model,
                          val_has_cfg ? std::optional<CfgFlags>(val_cfg) : std::nullopt);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
