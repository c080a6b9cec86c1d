#pragma once

#include "dgsim/random.hpp"
#include "dgsim/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dgsim {

enum class OpKind : std::uint8_t { Get, Put };

struct ScriptOp {
    OpKind kind;
    Key key;

    bool operator==(const ScriptOp&) const = default;
};

/// The operations of one transaction, followed implicitly by a commit.
struct TxScript {
    bool read_only = true;
    std::vector<ScriptOp> ops;

    bool operator==(const TxScript&) const = default;
};

enum class WorkloadPreset : std::uint8_t { A, B, F, Custom };
enum class UpdateStyle : std::uint8_t { Puts, ReadModifyWrite };
enum class AccessKind : std::uint8_t { Zipfian, Hotspot, Uniform, Trace };
enum class SystemKind : std::uint8_t { Closed, Open };
enum class ThinkDistribution : std::uint8_t { Constant, Exponential };

/// Constant (lo == hi) or uniform integer range.
struct CountDistribution {
    std::uint32_t lo = 5;
    std::uint32_t hi = 5;

    std::uint32_t draw(RandomStream& rng) const {
        return lo == hi ? lo : static_cast<std::uint32_t>(rng.between(lo, hi));
    }
};

struct AccessSpec {
    AccessKind kind = AccessKind::Zipfian;
    double zipf_s = 0.7;
    double hot_fraction = 0.01;
    double hot_access_fraction = 0.99;
    std::string trace_path;
    std::uint64_t permutation_seed = 0x5eed5eedULL;
};

struct WorkloadSpec {
    WorkloadPreset preset = WorkloadPreset::A;
    double read_tx_fraction = 0.5;
    CountDistribution ops_per_read_tx;
    CountDistribution ops_per_update_tx;
    UpdateStyle update_style = UpdateStyle::Puts;
    AccessSpec access;
    SystemKind system = SystemKind::Closed;
    ThinkDistribution think = ThinkDistribution::Exponential;
    double think_time = 0.0;
    double arrival_rate = 100.0;   // per client, open system
    std::uint64_t dataset_size = 100000;
    bool retry_aborted = true;
    bool redraw_on_retry = false;
    double retry_backoff = 0.0;

    /// Read fraction and update style of a named preset.
    static WorkloadSpec from_preset(WorkloadPreset preset);

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// N-D-P label, e.g. "A-5-Z".
    std::string label() const;
};

/// Fixed pseudo-random permutation of 0..n-1 so that popular ranks scatter
/// over the ring.
class KeyPermutation {
public:
    KeyPermutation(std::uint64_t n, std::uint64_t seed);

    Key operator[](std::uint64_t rank) const noexcept { return perm_[rank]; }
    std::uint64_t size() const noexcept { return perm_.size(); }

private:
    std::vector<Key> perm_;
};

/// Zipf over ranks 1..n with P(r) = r^-s / H(n, s), by inverse CDF.
class ZipfSampler {
public:
    ZipfSampler(double s, std::uint64_t n);

    /// 0-based rank.
    std::uint64_t rank(RandomStream& rng) const;
    /// Probability of the 0-based rank.
    double pmf(std::uint64_t rank) const;
    std::uint64_t size() const noexcept { return cdf_.size(); }

private:
    std::vector<double> cdf_;
};

Key sample_key_zipf(const ZipfSampler& zipf, const KeyPermutation& perm, RandomStream& rng);

/// Hot set = the first ceil(hot_fraction * n) keys of the permuted space.
Key sample_key_hotspot(double hot_fraction, double hot_access_fraction, std::uint64_t n,
                       const KeyPermutation& perm, RandomStream& rng);

std::uint64_t hot_set_size(double hot_fraction, std::uint64_t n);

/// Key sampler for a distributional access spec; immutable and shareable.
class AccessSampler {
public:
    AccessSampler(const AccessSpec& spec, std::uint64_t dataset_size);

    Key draw(RandomStream& rng) const;
    const KeyPermutation& permutation() const noexcept { return perm_; }

private:
    AccessSpec spec_;
    std::uint64_t n_;
    KeyPermutation perm_;
    std::optional<ZipfSampler> zipf_;
};

/// Source of transaction scripts for one client.
class ScriptSource {
public:
    virtual ~ScriptSource() = default;
    /// nullopt once the source is exhausted.
    virtual std::optional<TxScript> next(RandomStream& rng) = 0;
    /// Script for a retry that redraws keys; defaults to the same script.
    virtual TxScript redraw(const TxScript& previous, RandomStream&) { return previous; }
};

/// Distributional scripts drawn from a WorkloadSpec.
class GeneratedScripts : public ScriptSource {
public:
    GeneratedScripts(WorkloadSpec spec, std::shared_ptr<const AccessSampler> sampler);

    std::optional<TxScript> next(RandomStream& rng) override;
    TxScript redraw(const TxScript& previous, RandomStream& rng) override;

    TxScript make(bool read_only, RandomStream& rng) const;

private:
    WorkloadSpec spec_;
    std::shared_ptr<const AccessSampler> sampler_;
};

/// Replays a parsed trace once, in order.
class TraceScripts : public ScriptSource {
public:
    explicit TraceScripts(std::shared_ptr<const std::vector<TxScript>> trace) : trace_(std::move(trace)) {}

    std::optional<TxScript> next(RandomStream&) override;

private:
    std::shared_ptr<const std::vector<TxScript>> trace_;
    std::size_t pos_ = 0;
};

/// One transaction per line: `R|U|F <key> <key> ...`. Blank lines and lines
/// starting with '#' are skipped. Throws FormatError with the line number.
std::vector<TxScript> parse_trace(std::istream& in, const std::string& name,
                                  std::uint64_t dataset_size = 0);
std::vector<TxScript> load_trace(const std::string& path, std::uint64_t dataset_size = 0);

} // namespace dgsim
