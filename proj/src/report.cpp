#include "bess/report.hpp"

#include "bess/error.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>

namespace bess {

void write_trace(std::ostream& out, const SimulationResult& r, bool record_timing) {
  out << kTraceHeader << '\n';
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const double ms = record_timing ? 1e3 * r.solve_times[k] : 0.0;
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", r.t[static_cast<std::size_t>(k)], r.time_h[k], r.p_load[k],
               r.p_res[k], r.p_gen[k], r.p_sto[k], r.x[k], ms);
  }
}

void write_trace(const std::filesystem::path& path, const SimulationResult& r, bool record_timing) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_trace(out, r, record_timing);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_metrics(std::ostream& out, const Metrics& m) {
  fmt::print(out, "slots={}\n", m.slots);
  fmt::print(out, "peak_gen_mw={}\n", m.peak_gen);
  fmt::print(out, "peak_gen_baseline_mw={}\n", m.peak_gen_baseline);
  fmt::print(out, "peak_reduction_pct={}\n", m.peak_reduction_pct);
  fmt::print(out, "max_ramp_gen_mw={}\n", m.max_ramp_gen);
  fmt::print(out, "max_ramp_gen_baseline_mw={}\n", m.max_ramp_gen_baseline);
  fmt::print(out, "rms_soc_dev_mwh={}\n", m.rms_soc_dev);
  fmt::print(out, "max_soc_dev_mwh={}\n", m.max_soc_dev);
  fmt::print(out, "mean_solve_ms={}\n", m.mean_solve_ms);
  fmt::print(out, "max_solve_ms={}\n", m.max_solve_ms);
}

void write_metrics(const std::filesystem::path& path, const Metrics& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_metrics(out, m);
}

}  // namespace bess
