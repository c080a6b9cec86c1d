#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace dgsim {

/// Activities with a distinct CPU service demand at a cache server.
enum class CpuActivity : std::uint8_t {
    LocalTxGet,
    LocalTxPut,
    LocalTxGetFromRemote,
    TxSendRemoteTxGet,
    TxBegin,
    TxAbort,
    TxPrepare,
    DistributedFinalTxCommit,
};

inline constexpr std::size_t kCpuActivityCount = 8;

inline constexpr std::array<std::string_view, kCpuActivityCount> kCpuActivityNames = {
    "local_tx_get",   "local_tx_put", "local_tx_get_from_remote", "tx_send_remote_tx_get",
    "tx_begin",       "tx_abort",     "tx_prepare",               "distributed_final_tx_commit",
};

inline constexpr std::string_view to_string(CpuActivity a) noexcept {
    return kCpuActivityNames[static_cast<std::size_t>(a)];
}

inline std::optional<CpuActivity> parse_cpu_activity(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kCpuActivityCount; ++i)
        if (kCpuActivityNames[i] == name) return static_cast<CpuActivity>(i);
    return std::nullopt;
}

} // namespace dgsim
