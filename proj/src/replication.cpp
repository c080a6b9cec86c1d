#include "dgsim/replication.hpp"

#include <exception>

namespace dgsim {

std::vector<SimulationReport> run_replications_serial(const RunConfig& config, std::span<const std::uint64_t> seeds,
                                                      const RunResources& resources) {
    std::vector<SimulationReport> out;
    out.reserve(seeds.size());
    for (std::uint64_t seed : seeds) out.push_back(simulate(config, seed, resources));
    return out;
}

std::vector<SimulationReport> run_replications_parallel(const RunConfig& config,
                                                        std::span<const std::uint64_t> seeds,
                                                        const RunResources& resources) {
    std::vector<SimulationReport> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    const auto n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        try {
            out[i] = simulate(config, seeds[i], resources);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace dgsim
