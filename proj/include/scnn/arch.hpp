#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scnn {

// Bit width of the single-precision data path. Everything in the accelerator
// (IFM values, weights, memory bursts) is sized in multiples of this.
inline constexpr int kDataBits = 32;
inline constexpr int kDataBytes = kDataBits / 8;

/// The three architectural parameters that fully determine an accelerator
/// instance:
///   pe_num    - number of PEs in the 1-D systolic array (OFM parallelism)
///   vec_fac   - SIMD width of a partial inner product (channel parallelism)
///   reuse_fac - IP units per PE / IFM reuse count (output-row parallelism)
struct ArchConfig {
  int pe_num = 1;
  int vec_fac = 1;
  int reuse_fac = 1;

  std::int64_t total_parallelism() const {
    return static_cast<std::int64_t>(pe_num) * vec_fac * reuse_fac;
  }

  // Size of the shift-register IFM buffer in words.
  std::int64_t ifm_buffer_words() const {
    return static_cast<std::int64_t>(reuse_fac) * vec_fac;
  }
};

/// Resource/bandwidth description of a target FPGA board. dsp_per_lane and
/// dsp_overhead_per_ip_unit are calibration coefficients mapping the
/// architecture to the board's reported DSP usage.
struct FpgaSpec {
  std::string name;
  int dsp_count = 0;
  int burst_width_bits = 0;
  double mem_bandwidth_bytes_per_sec = 0.0;
  double f_clk_hz = 0.0;
  double dsp_per_lane = 1.0;
  double dsp_overhead_per_ip_unit = 0.0;

  double bytes_per_cycle() const { return mem_bandwidth_bytes_per_sec / f_clk_hz; }
  int burst_words() const { return burst_width_bits / kDataBits; }
};

// Collect every invariant violation (empty result == valid).
std::vector<std::string> validate_arch(const ArchConfig& cfg);
std::vector<std::string> validate_fpga(const FpgaSpec& fpga);

// Throwing wrappers used at API boundaries.
void require_valid(const ArchConfig& cfg);
void require_valid(const FpgaSpec& fpga);

std::int64_t ifm_buffer_words(const ArchConfig& cfg);

}  // namespace scnn
