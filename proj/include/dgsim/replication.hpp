#pragma once

#include "dgsim/config.hpp"
#include "dgsim/simulation.hpp"
#include "dgsim/stats.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dgsim {

/// One independent run per seed, in seed order.
std::vector<SimulationReport> run_replications_serial(const RunConfig& config, std::span<const std::uint64_t> seeds,
                                                      const RunResources& resources);

/// Same result as the serial version; runs are spread over OpenMP threads.
std::vector<SimulationReport> run_replications_parallel(const RunConfig& config,
                                                        std::span<const std::uint64_t> seeds,
                                                        const RunResources& resources);

} // namespace dgsim
