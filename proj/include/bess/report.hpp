#pragma once

#include "bess/sim.hpp"

#include <filesystem>
#include <ostream>

namespace bess {

/// Header of the per-slot trace CSV.
inline constexpr const char* kTraceHeader = "slot,time_h,p_load_mw,p_res_mw,p_gen_mw,p_sto_mw,soc_mwh,solve_ms";

/// One row per simulated slot. Values use the shortest round-trip decimal
/// form. With record_timing false the solve_ms column is written as 0 so that
/// traces of identical runs are byte-identical.
void write_trace(std::ostream& out, const SimulationResult& r, bool record_timing = true);
void write_trace(const std::filesystem::path& path, const SimulationResult& r, bool record_timing = true);

/// key=value lines.
void write_metrics(std::ostream& out, const Metrics& m);
void write_metrics(const std::filesystem::path& path, const Metrics& m);

}  // namespace bess
