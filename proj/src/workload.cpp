#include "dgsim/workload.hpp"

#include "dgsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace dgsim {

WorkloadSpec WorkloadSpec::from_preset(WorkloadPreset preset) {
    WorkloadSpec spec;
    spec.preset = preset;
    switch (preset) {
    case WorkloadPreset::A:
        spec.read_tx_fraction = 0.5;
        spec.update_style = UpdateStyle::Puts;
        break;
    case WorkloadPreset::B:
        spec.read_tx_fraction = 0.9;
        spec.update_style = UpdateStyle::Puts;
        break;
    case WorkloadPreset::F:
        spec.read_tx_fraction = 0.5;
        spec.update_style = UpdateStyle::ReadModifyWrite;
        break;
    case WorkloadPreset::Custom:
        break;
    }
    return spec;
}

namespace {

void check_fraction(double v, const char* key, bool allow_zero = true) {
    if (!(v >= 0.0 && v <= 1.0) || (!allow_zero && v == 0.0)) {
        throw ConfigError(key, "", "value out of range");
    }
}

void check_count(const CountDistribution& d, std::uint64_t dataset, const char* key) {
    if (d.lo == 0 || d.hi < d.lo) throw ConfigError(key, "", "expected a positive count or range lo <= hi");
    if (d.hi > dataset) throw ConfigError(key, "", "more distinct keys per transaction than the dataset holds");
}

} // namespace

void WorkloadSpec::validate() const {
    if (dataset_size < 1) throw ConfigError("workload.dataset_size", "", "must be >= 1");
    check_fraction(read_tx_fraction, "workload.read_tx_fraction");
    check_count(ops_per_read_tx, dataset_size, "workload.ops_per_read_tx");
    check_count(ops_per_update_tx, dataset_size, "workload.ops_per_update_tx");
    switch (access.kind) {
    case AccessKind::Zipfian:
        if (!(access.zipf_s >= 0.0) || !std::isfinite(access.zipf_s))
            throw ConfigError("workload.zipf_s", "", "must be >= 0");
        break;
    case AccessKind::Hotspot:
        check_fraction(access.hot_fraction, "workload.hot_fraction", false);
        check_fraction(access.hot_access_fraction, "workload.hot_access_fraction", false);
        break;
    case AccessKind::Trace:
        if (access.trace_path.empty()) throw ConfigError("workload.trace", "", "trace access needs a path");
        break;
    case AccessKind::Uniform:
        break;
    }
    if (system == SystemKind::Open && !(arrival_rate > 0.0))
        throw ConfigError("workload.arrival_rate", "", "must be > 0 for an open system");
    if (!(think_time >= 0.0)) throw ConfigError("workload.think_time", "", "must be >= 0");
    if (!(retry_backoff >= 0.0)) throw ConfigError("workload.retry_backoff", "", "must be >= 0");
}

std::string WorkloadSpec::label() const {
    std::string n;
    switch (preset) {
    case WorkloadPreset::A: n = "A"; break;
    case WorkloadPreset::B: n = "B"; break;
    case WorkloadPreset::F: n = "F"; break;
    case WorkloadPreset::Custom: n = "C"; break;
    }
    std::string d = ops_per_update_tx.lo == ops_per_update_tx.hi
                        ? std::to_string(ops_per_update_tx.lo)
                        : std::to_string(ops_per_update_tx.lo) + "_" + std::to_string(ops_per_update_tx.hi);
    std::string p;
    switch (access.kind) {
    case AccessKind::Zipfian: p = "Z"; break;
    case AccessKind::Hotspot: p = "H"; break;
    case AccessKind::Uniform: p = "U"; break;
    case AccessKind::Trace: p = "T"; break;
    }
    return n + "-" + d + "-" + p;
}

KeyPermutation::KeyPermutation(std::uint64_t n, std::uint64_t seed) : perm_(n) {
    std::iota(perm_.begin(), perm_.end(), Key{0});
    RandomStream rng(seed);
    // Fisher-Yates with our own draw so the permutation does not depend on
    // the standard library's shuffle implementation.
    for (std::uint64_t i = n; i > 1; --i) {
        std::uint64_t j = rng.below(i);
        std::swap(perm_[i - 1], perm_[j]);
    }
}

ZipfSampler::ZipfSampler(double s, std::uint64_t n) : cdf_(n) {
    double acc = 0.0;
    for (std::uint64_t r = 0; r < n; ++r) {
        acc += std::pow(static_cast<double>(r + 1), -s);
        cdf_[r] = acc;
    }
    for (double& c : cdf_) c /= acc;
    if (n > 0) cdf_.back() = 1.0;
}

std::uint64_t ZipfSampler::rank(RandomStream& rng) const {
    double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint64_t>(it - cdf_.begin());
}

double ZipfSampler::pmf(std::uint64_t rank) const {
    if (rank >= cdf_.size()) return 0.0;
    return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
}

Key sample_key_zipf(const ZipfSampler& zipf, const KeyPermutation& perm, RandomStream& rng) {
    return perm[zipf.rank(rng)];
}

std::uint64_t hot_set_size(double hot_fraction, std::uint64_t n) {
    auto h = static_cast<std::uint64_t>(std::ceil(hot_fraction * static_cast<double>(n) - 1e-9));
    return std::clamp<std::uint64_t>(h, 1, n);
}

Key sample_key_hotspot(double hot_fraction, double hot_access_fraction, std::uint64_t n,
                       const KeyPermutation& perm, RandomStream& rng) {
    std::uint64_t h = hot_set_size(hot_fraction, n);
    bool hot = h == n || rng.uniform() < hot_access_fraction;
    if (hot) return perm[rng.below(h)];
    return perm[h + rng.below(n - h)];
}

AccessSampler::AccessSampler(const AccessSpec& spec, std::uint64_t dataset_size)
    : spec_(spec), n_(dataset_size), perm_(dataset_size, spec.permutation_seed) {
    if (spec_.kind == AccessKind::Zipfian) zipf_.emplace(spec_.zipf_s, n_);
}

Key AccessSampler::draw(RandomStream& rng) const {
    switch (spec_.kind) {
    case AccessKind::Zipfian:
        return sample_key_zipf(*zipf_, perm_, rng);
    case AccessKind::Hotspot:
        return sample_key_hotspot(spec_.hot_fraction, spec_.hot_access_fraction, n_, perm_, rng);
    case AccessKind::Uniform:
        return rng.below(n_);
    case AccessKind::Trace:
        break;
    }
    throw ModelError("trace access has no key sampler");
}

GeneratedScripts::GeneratedScripts(WorkloadSpec spec, std::shared_ptr<const AccessSampler> sampler)
    : spec_(std::move(spec)), sampler_(std::move(sampler)) {}

TxScript GeneratedScripts::make(bool read_only, RandomStream& rng) const {
    std::uint32_t d = read_only ? spec_.ops_per_read_tx.draw(rng) : spec_.ops_per_update_tx.draw(rng);
    std::vector<Key> keys;
    keys.reserve(d);
    std::unordered_set<Key> seen;
    while (keys.size() < d) {
        Key k = sampler_->draw(rng);
        if (seen.insert(k).second) keys.push_back(k);
    }
    TxScript script;
    script.read_only = read_only;
    for (Key k : keys) {
        if (read_only) {
            script.ops.push_back({OpKind::Get, k});
        } else if (spec_.update_style == UpdateStyle::ReadModifyWrite) {
            script.ops.push_back({OpKind::Get, k});
            script.ops.push_back({OpKind::Put, k});
        } else {
            script.ops.push_back({OpKind::Put, k});
        }
    }
    return script;
}

std::optional<TxScript> GeneratedScripts::next(RandomStream& rng) {
    bool read_only = rng.uniform() < spec_.read_tx_fraction;
    return make(read_only, rng);
}

TxScript GeneratedScripts::redraw(const TxScript& previous, RandomStream& rng) {
    return make(previous.read_only, rng);
}

std::optional<TxScript> TraceScripts::next(RandomStream&) {
    if (!trace_ || pos_ >= trace_->size()) return std::nullopt;
    return (*trace_)[pos_++];
}

std::vector<TxScript> parse_trace(std::istream& in, const std::string& name, std::uint64_t dataset_size) {
    std::vector<TxScript> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "R" && tag != "U" && tag != "F")
            throw FormatError(name, lineno, "expected R, U or F, got '" + tag + "'");
        TxScript script;
        script.read_only = tag == "R";
        std::string tok;
        std::unordered_set<Key> seen;
        while (ls >> tok) {
            Key k = 0;
            std::size_t used = 0;
            try {
                if (tok.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(tok);
                k = std::stoull(tok, &used);
            } catch (const std::exception&) {
                throw FormatError(name, lineno, "bad key '" + tok + "'");
            }
            if (dataset_size != 0 && k >= dataset_size)
                throw FormatError(name, lineno, "key " + tok + " outside the dataset");
            if (!seen.insert(k).second) throw FormatError(name, lineno, "duplicate key " + tok);
            if (tag == "R") {
                script.ops.push_back({OpKind::Get, k});
            } else if (tag == "U") {
                script.ops.push_back({OpKind::Put, k});
            } else {
                script.ops.push_back({OpKind::Get, k});
                script.ops.push_back({OpKind::Put, k});
            }
        }
        if (script.ops.empty()) throw FormatError(name, lineno, "transaction without keys");
        out.push_back(std::move(script));
    }
    return out;
}

std::vector<TxScript> load_trace(const std::string& path, std::uint64_t dataset_size) {
    std::ifstream in(path);
    if (!in) throw ConfigError("workload.trace", path, "cannot open trace file");
    return parse_trace(in, path, dataset_size);
}

} // namespace dgsim
