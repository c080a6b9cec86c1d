#pragma once

#include "dgsim/model_tree.hpp"
#include "dgsim/random.hpp"
#include "dgsim/types.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace dgsim {

class CpuModel;

enum class OracleKind : std::uint8_t { Constant, Exponential, ModelTree };
enum class MemorySource : std::uint8_t { Sender, Receiver };

/// Trailing send rate as an exponentially decaying event count. Each send
/// contributes a kernel of unit mass, so a steady stream of r msgs/s reads r.
class SendRateMeter {
public:
    explicit SendRateMeter(double half_life = 0.5);

    double rate(SimTime now) const noexcept;
    void record(SimTime now) noexcept;

private:
    double decay_;   // ln 2 / half-life
    double value_ = 0.0;
    SimTime at_ = 0.0;
};

/// Bytes on the wire for the message kinds that cross servers.
struct MessageSizeModel {
    std::uint32_t header = 200;
    std::uint32_t key = 16;

    std::uint32_t control() const noexcept { return header; }
    std::uint32_t keys_only(std::size_t keys) const noexcept {
        return header + static_cast<std::uint32_t>(keys) * key;
    }
    std::uint32_t with_values(std::size_t keys, std::uint64_t value_bytes) const noexcept {
        return header + static_cast<std::uint32_t>(keys) * key + static_cast<std::uint32_t>(value_bytes);
    }
};

/// Latency source: a fixed or exponential delay, or a trained model tree.
class LatencyOracle {
public:
    static LatencyOracle constant(double delay);
    static LatencyOracle exponential(double mean);
    static LatencyOracle tree(std::shared_ptr<const ModelTree> tree, double floor = ModelTree::kDefaultFloor);

    double delay(const FeatureVector& features, RandomStream& rng);

    OracleKind kind() const noexcept { return kind_; }
    std::uint64_t extrapolations() const noexcept { return extrapolations_; }

private:
    LatencyOracle() = default;

    OracleKind kind_ = OracleKind::Constant;
    double mean_ = 0.0;
    double floor_ = ModelTree::kDefaultFloor;
    std::shared_ptr<const ModelTree> tree_;
    std::uint64_t extrapolations_ = 0;
};

enum class MessageClass : std::uint8_t { Read, Prepare, Outcome };

struct NetworkOptions {
    MessageSizeModel sizes;
    MemorySource memory_source = MemorySource::Sender;
    double memory_base_bytes = 256.0 * 1024 * 1024;
    double memory_per_copy_bytes = 1024.0;
    double cpu_window = 1.0;
    double rate_half_life = 0.5;
    double diagnostics_window = 1.0;
    SimTime warmup_cutoff = 0.0;
    /// Fixed delays of specific (sender, receiver) links; take precedence over the oracle.
    std::map<std::pair<ServerId, ServerId>, double> link_delays;
};

struct NetworkDiagnostics {
    std::uint64_t messages = 0;
    double delay_sum = 0.0;
    std::uint64_t prepare_messages = 0;
    double prepare_delay_sum = 0.0;
    std::uint64_t extrapolations = 0;
    /// Mean msg_rate feature per diagnostics window, from time 0.
    std::vector<double> msg_rate_windows;

    std::optional<double> mean_delay() const;
    std::optional<double> mean_prepare_delay() const;
    /// Relative change of the msg_rate feature between the last two complete windows.
    std::optional<double> msg_rate_drift() const;
};

/// Couples the simulated state to the latency oracle: builds the feature
/// vector of every cross-server send from live state and returns its delay.
class NetworkModel {
public:
    NetworkModel(LatencyOracle oracle, NetworkOptions options, std::vector<double> used_memory);

    /// Per-node memory from stored key copies.
    static std::vector<double> memory_from_copies(const NetworkOptions& options,
                                                  const std::vector<std::uint64_t>& copies);

    FeatureVector features(ServerId from, ServerId to, CpuModel& sender_cpu,
                           const SendRateMeter& sender_rate, std::uint32_t bytes, SimTime now) const;

    /// Delay for one send; records the send on the sender's rate meter.
    double delay_for_send(ServerId from, ServerId to, CpuModel& sender_cpu, SendRateMeter& sender_rate,
                          std::uint32_t bytes, SimTime now, RandomStream& rng, MessageClass cls);

    const MessageSizeModel& sizes() const noexcept { return options_.sizes; }
    const NetworkOptions& options() const noexcept { return options_; }
    NetworkDiagnostics diagnostics(SimTime end) const;
    OracleKind kind() const noexcept { return oracle_.kind(); }

private:
    LatencyOracle oracle_;
    NetworkOptions options_;
    std::vector<double> used_memory_;

    NetworkDiagnostics diag_;
    std::vector<double> window_sum_;
    std::vector<std::uint64_t> window_count_;
};

} // namespace dgsim
