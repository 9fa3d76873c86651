#include "scnn/arch.hpp"

#include <sstream>

#include "scnn/errors.hpp"

namespace scnn {

std::vector<std::string> validate_arch(const ArchConfig& cfg) {
  std::vector<std::string> violations;
  if (cfg.pe_num < 1) violations.push_back("pe_num must be >= 1 (got " + std::to_string(cfg.pe_num) + ")");
  if (cfg.vec_fac < 1) violations.push_back("vec_fac must be >= 1 (got " + std::to_string(cfg.vec_fac) + ")");
  if (cfg.reuse_fac < 1) violations.push_back("reuse_fac must be >= 1 (got " + std::to_string(cfg.reuse_fac) + ")");
  return violations;
}

std::vector<std::string> validate_fpga(const FpgaSpec& fpga) {
  std::vector<std::string> violations;
  if (fpga.dsp_count < 1) violations.push_back("dsp_count must be >= 1");
  if (fpga.burst_width_bits < 1)
    violations.push_back("burst_width_bits must be >= 1");
  else if (fpga.burst_width_bits % kDataBits != 0)
    violations.push_back("burst_width_bits must be a multiple of " + std::to_string(kDataBits) +
                         " (got " + std::to_string(fpga.burst_width_bits) + ")");
  if (fpga.mem_bandwidth_bytes_per_sec <= 0.0)
    violations.push_back("mem_bandwidth_bytes_per_sec must be positive");
  if (fpga.f_clk_hz <= 0.0) violations.push_back("f_clk_hz must be positive");
  if (fpga.dsp_per_lane <= 0.0) violations.push_back("dsp_per_lane must be positive");
  if (fpga.dsp_overhead_per_ip_unit < 0.0)
    violations.push_back("dsp_overhead_per_ip_unit must be non-negative");
  return violations;
}

namespace {
[[noreturn]] void throw_violations(const char* what, const std::vector<std::string>& violations) {
  std::ostringstream os;
  os << what << ":";
  for (const auto& v : violations) os << "\n  - " << v;
  throw ValidationError(os.str());
}
}  // namespace

void require_valid(const ArchConfig& cfg) {
  auto v = validate_arch(cfg);
  if (!v.empty()) throw_violations("invalid ArchConfig", v);
}

void require_valid(const FpgaSpec& fpga) {
  auto v = validate_fpga(fpga);
  if (!v.empty()) throw_violations("invalid FpgaSpec", v);
}

std::int64_t ifm_buffer_words(const ArchConfig& cfg) {
  require_valid(cfg);
  return cfg.ifm_buffer_words();
}

}  // namespace scnn
