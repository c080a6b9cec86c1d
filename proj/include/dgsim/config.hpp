#pragma once

#include "dgsim/cache_server.hpp"
#include "dgsim/cpu_model.hpp"
#include "dgsim/model_tree.hpp"
#include "dgsim/net_oracle.hpp"
#include "dgsim/workload.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dgsim {

struct NetworkSpec {
    OracleKind oracle = OracleKind::Exponential;
    double mean_delay = 0.001;
    std::string tree_path;        // trained tree dump
    std::string knowledge_base;   // trained at load time when no tree is given
    TrainParams train;
    double floor = ModelTree::kDefaultFloor;
    NetworkOptions options;
};

struct RunSpec {
    std::optional<double> max_time = 20.0;
    std::optional<std::uint64_t> max_commits;
    double warmup_fraction = 0.1;
    std::optional<double> warmup;   // absolute cutoff, overrides the fraction
    std::vector<std::uint64_t> seeds{1};
    bool drain = true;
};

struct RunConfig {
    std::uint32_t servers = 4;
    std::uint32_t clients_per_server = 4;
    std::uint32_t cores = 2;
    std::uint32_t replication = 2;
    std::uint32_t vnodes = 64;
    Ownership ownership = Ownership::Primary;
    std::string protocol = "lock2pc";
    double deadlock_timeout = 0.005;
    std::uint32_t value_size = 1024;

    ServiceDemandProfile demands = ServiceDemandProfile::measured_defaults();
    ServiceTimeModel service = ServiceTimeModel::Exponential;

    WorkloadSpec workload;
    NetworkSpec network;
    RunSpec run;

    /// Where each key was set (file:line:col or "override"); not echoed.
    std::map<std::string, std::string> locations;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Start of the measurement interval.
    double warmup_cutoff() const;
};

/// Parses YAML text. `overrides` are `section.key=value` strings applied on
/// top of the document. Does not validate.
RunConfig parse_config(const std::string& text, const std::string& name,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Every key with its effective value, in schema order; parses back to an
/// identical configuration.
std::string echo_config(const RunConfig& config, bool include_seeds = true);

/// Hash of the echoed configuration without the seed list, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Dotted names of all configuration keys.
std::vector<std::string> config_keys();
bool is_config_key(const std::string& dotted);

/// A what-if sweep: every key gets a value list; points are the cross
/// product, or the lists are zipped.
struct SweepSpec {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    bool zipped = false;

    /// Throws ConfigError for unknown keys or mismatched zipped lengths.
    void validate() const;
    /// Override lists, one per sweep point.
    std::vector<std::vector<std::string>> points() const;
};

/// `key=v1,v2,...` into an axis.
std::pair<std::string, std::vector<std::string>> parse_sweep_axis(const std::string& text);

std::string hex64(std::uint64_t v);
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

} // namespace dgsim
