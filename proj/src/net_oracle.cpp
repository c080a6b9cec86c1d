#include "dgsim/net_oracle.hpp"

#include "dgsim/cpu_model.hpp"
#include "dgsim/errors.hpp"

#include <cmath>

namespace dgsim {

SendRateMeter::SendRateMeter(double half_life) : decay_(std::log(2.0) / half_life) {
    if (!(half_life > 0.0)) throw ConfigError("network.rate_half_life", "", "must be > 0");
}

double SendRateMeter::rate(SimTime now) const noexcept {
    return value_ * std::exp(-decay_ * (now - at_));
}

void SendRateMeter::record(SimTime now) noexcept {
    value_ = rate(now) + decay_;
    at_ = now;
}

LatencyOracle LatencyOracle::constant(double delay) {
    if (!(delay >= 0.0)) throw ConfigError("network.mean_delay", "", "delay must be >= 0");
    LatencyOracle o;
    o.kind_ = OracleKind::Constant;
    o.mean_ = delay;
    return o;
}

LatencyOracle LatencyOracle::exponential(double mean) {
    if (!(mean > 0.0)) throw ConfigError("network.mean_delay", "", "mean delay must be > 0");
    LatencyOracle o;
    o.kind_ = OracleKind::Exponential;
    o.mean_ = mean;
    return o;
}

LatencyOracle LatencyOracle::tree(std::shared_ptr<const ModelTree> tree, double floor) {
    if (!tree) throw ConfigError("network.tree", "", "model tree missing");
    LatencyOracle o;
    o.kind_ = OracleKind::ModelTree;
    o.tree_ = std::move(tree);
    o.floor_ = floor;
    return o;
}

double LatencyOracle::delay(const FeatureVector& features, RandomStream& rng) {
    switch (kind_) {
    case OracleKind::Constant: return mean_;
    case OracleKind::Exponential: return rng.exponential(mean_);
    case OracleKind::ModelTree: {
        const Features x = features.array();
        if (!tree_->in_training_range(x)) ++extrapolations_;
        return tree_->predict(x, floor_);
    }
    }
    return mean_;
}

std::optional<double> NetworkDiagnostics::mean_delay() const {
    if (messages == 0) return std::nullopt;
    return delay_sum / static_cast<double>(messages);
}

std::optional<double> NetworkDiagnostics::mean_prepare_delay() const {
    if (prepare_messages == 0) return std::nullopt;
    return prepare_delay_sum / static_cast<double>(prepare_messages);
}

std::optional<double> NetworkDiagnostics::msg_rate_drift() const {
    if (msg_rate_windows.size() < 2) return std::nullopt;
    const double prev = msg_rate_windows[msg_rate_windows.size() - 2];
    const double last = msg_rate_windows.back();
    if (prev <= 0.0) return std::nullopt;
    return std::abs(last - prev) / prev;
}

NetworkModel::NetworkModel(LatencyOracle oracle, NetworkOptions options, std::vector<double> used_memory)
    : oracle_(std::move(oracle)), options_(options), used_memory_(std::move(used_memory)) {
    if (!(options_.diagnostics_window > 0.0))
        throw ConfigError("network.diagnostics_window", "", "must be > 0");
}

std::vector<double> NetworkModel::memory_from_copies(const NetworkOptions& options,
                                                     const std::vector<std::uint64_t>& copies) {
    std::vector<double> out;
    out.reserve(copies.size());
    for (auto c : copies)
        out.push_back(options.memory_base_bytes + options.memory_per_copy_bytes * static_cast<double>(c));
    return out;
}

FeatureVector NetworkModel::features(ServerId from, ServerId to, CpuModel& sender_cpu,
                                     const SendRateMeter& sender_rate, std::uint32_t bytes,
                                     SimTime now) const {
    const ServerId mem_node = options_.memory_source == MemorySource::Sender ? from : to;
    FeatureVector fv;
    fv.used_memory = mem_node < used_memory_.size() ? used_memory_[mem_node] : options_.memory_base_bytes;
    fv.cpu_utilization = sender_cpu.utilization(now, options_.cpu_window);
    fv.message_size = bytes;
    fv.msg_rate = sender_rate.rate(now);
    return fv;
}

double NetworkModel::delay_for_send(ServerId from, ServerId to, CpuModel& sender_cpu,
                                    SendRateMeter& sender_rate, std::uint32_t bytes, SimTime now,
                                    RandomStream& rng, MessageClass cls) {
    const FeatureVector fv = features(from, to, sender_cpu, sender_rate, bytes, now);
    const auto link = options_.link_delays.find({from, to});
    const double d = link != options_.link_delays.end() ? link->second : oracle_.delay(fv, rng);
    sender_rate.record(now);

    const auto w = static_cast<std::size_t>(now / options_.diagnostics_window);
    if (w >= window_sum_.size()) {
        window_sum_.resize(w + 1, 0.0);
        window_count_.resize(w + 1, 0);
    }
    window_sum_[w] += fv.msg_rate;
    ++window_count_[w];

    if (now >= options_.warmup_cutoff) {
        ++diag_.messages;
        diag_.delay_sum += d;
        if (cls == MessageClass::Prepare) {
            ++diag_.prepare_messages;
            diag_.prepare_delay_sum += d;
        }
    }
    return d;
}

NetworkDiagnostics NetworkModel::diagnostics(SimTime end) const {
    NetworkDiagnostics out = diag_;
    out.extrapolations = oracle_.extrapolations();
    // complete windows only
    const auto complete = static_cast<std::size_t>(end / options_.diagnostics_window);
    for (std::size_t w = 0; w < complete && w < window_sum_.size(); ++w)
        out.msg_rate_windows.push_back(
            window_count_[w] ? window_sum_[w] / static_cast<double>(window_count_[w]) : 0.0);
    return out;
}

} // namespace dgsim
