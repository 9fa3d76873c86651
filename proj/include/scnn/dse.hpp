#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scnn/arch.hpp"
#include "scnn/model.hpp"
#include "scnn/perf_model.hpp"

namespace scnn {

struct SweepPoint {
  int value = 0;
  double seconds = 0.0;
  double dsp_utilization = 0.0;
  Bound bound = Bound::kCompute;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;
  int chosen = 0;
  std::string rule;
};

struct ExploreResult {
  ArchConfig config;
  SweepResult vec_sweep;
  SweepResult pe_sweep;
  SweepResult reuse_sweep;
};

/// vec_fac = burst_width / bit_width; sized so an IFM vector loads every
/// cycle with no memory stalling.
int select_vec_fac(const FpgaSpec& fpga);

/// Knee rule over an ascending sweep: pick the smallest value whose successor
/// improves modeled time by less than `threshold`, or whose successor flips
/// to weight_memory-bound; the last point if neither happens.
int select_knee(const std::vector<SweepPoint>& points, double threshold = 0.05);

/// Sweeps pe_num over the summed modeled latency of the model's FC layers
/// (reuse_fac = 1, batch = 1). Models without FC layers fall back to the conv
/// layers' latency, an extension beyond the FC-driven procedure.
SweepResult sweep_pe_num(const ModelDescriptor& model, const FpgaSpec& fpga, int vec_fac,
                         int lo = 2, int hi = 20, int step = 2);

/// Sweeps reuse_fac and picks the largest value fitting the DSP budget.
SweepResult sweep_reuse_fac(const ModelDescriptor& model, const FpgaSpec& fpga, int vec_fac,
                            int pe_num, int lo = 1, int hi = 16);

/// The ordered three-step exploration: 1) vec_fac, 2) pe_num, 3) reuse_fac.
ExploreResult explore(const ModelDescriptor& model, const FpgaSpec& fpga);

/// CSV audit trail: parameter,value,seconds,dsp_utilization,bound,chosen.
void write_dse_csv(std::ostream& os, const ExploreResult& result);

// Sweep concurrency cap from SCNN_THREADS (0 or unset = serial).
int sweep_thread_cap();

}  // namespace scnn
