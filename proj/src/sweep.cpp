#include "bess/sim.hpp"

#include <exception>

namespace bess {

std::vector<SimulationResult> run_sweep_serial(std::span<const SweepCase> cases) {
  std::vector<SimulationResult> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(run_closed_loop(c.scenario, c.cfg, c.x_init, c.opts));
  return out;
}

std::vector<SimulationResult> run_sweep_parallel(std::span<const SweepCase> cases) {
  const auto n = static_cast<std::ptrdiff_t>(cases.size());
  std::vector<SimulationResult> out(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& c = cases[static_cast<std::size_t>(i)];
    try {
      out[static_cast<std::size_t>(i)] = run_closed_loop(c.scenario, c.cfg, c.x_init, c.opts);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace bess
