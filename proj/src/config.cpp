#include "dgsim/config.hpp"

#include "dgsim/concurrency_control.hpp"
#include "dgsim/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace dgsim {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

struct Ctx {
    std::string key;
    std::string location;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(key, location, what); }
};

template <typename T>
T scalar(const YAML::Node& n, const Ctx& ctx, const char* expected) {
    if (!n.IsScalar()) ctx.fail(std::string("expected ") + expected);
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        ctx.fail(std::string("expected ") + expected + ", got '" + n.Scalar() + "'");
    }
}

double number(const YAML::Node& n, const Ctx& ctx) {
    double v = scalar<double>(n, ctx, "a number");
    if (!std::isfinite(v)) ctx.fail("expected a finite number");
    return v;
}

std::uint64_t count(const YAML::Node& n, const Ctx& ctx) {
    const std::string& s = n.IsScalar() ? n.Scalar() : std::string();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        ctx.fail("expected a non-negative integer" + (s.empty() ? std::string() : ", got '" + s + "'"));
    return scalar<std::uint64_t>(n, ctx, "a non-negative integer");
}

std::uint32_t count32(const YAML::Node& n, const Ctx& ctx) {
    std::uint64_t v = count(n, ctx);
    if (v > 0xffffffffULL) ctx.fail("value too large");
    return static_cast<std::uint32_t>(v);
}

bool boolean(const YAML::Node& n, const Ctx& ctx) { return scalar<bool>(n, ctx, "true or false"); }

std::string text(const YAML::Node& n, const Ctx& ctx) {
    if (n.IsNull()) return {};
    return scalar<std::string>(n, ctx, "a string");
}

template <typename E>
E choice(const YAML::Node& n, const Ctx& ctx, std::initializer_list<std::pair<const char*, E>> options) {
    std::string s = scalar<std::string>(n, ctx, "a name");
    std::string names;
    for (const auto& [name, value] : options) {
        if (s == name) return value;
        names += names.empty() ? name : std::string(", ") + name;
    }
    ctx.fail("unknown value '" + s + "' (expected one of: " + names + ")");
}

template <typename E>
std::string name_of(E v, std::initializer_list<std::pair<const char*, E>> options) {
    for (const auto& [name, value] : options)
        if (value == v) return name;
    return "?";
}

std::optional<double> opt_number(const YAML::Node& n, const Ctx& ctx) {
    if (n.IsNull()) return std::nullopt;
    return number(n, ctx);
}

CountDistribution count_dist(const YAML::Node& n, const Ctx& ctx) {
    if (n.IsSequence()) {
        if (n.size() != 2) ctx.fail("expected [lo, hi]");
        return {count32(n[0], ctx), count32(n[1], ctx)};
    }
    std::uint32_t v = count32(n, ctx);
    return {v, v};
}

std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string fmt(std::optional<double> v) { return v ? fmt(*v) : "~"; }

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string fmt_dist(const CountDistribution& d) {
    if (d.lo == d.hi) return std::to_string(d.lo);
    return "[" + std::to_string(d.lo) + ", " + std::to_string(d.hi) + "]";
}

const std::initializer_list<std::pair<const char*, Ownership>> kOwnership = {
    {"primary", Ownership::Primary}, {"multimaster", Ownership::MultiMaster}};
const std::initializer_list<std::pair<const char*, ServiceTimeModel>> kService = {
    {"exponential", ServiceTimeModel::Exponential}, {"deterministic", ServiceTimeModel::Deterministic}};
const std::initializer_list<std::pair<const char*, WorkloadPreset>> kPreset = {
    {"A", WorkloadPreset::A}, {"B", WorkloadPreset::B}, {"F", WorkloadPreset::F}, {"custom", WorkloadPreset::Custom}};
const std::initializer_list<std::pair<const char*, UpdateStyle>> kUpdateStyle = {
    {"puts", UpdateStyle::Puts}, {"read_modify_write", UpdateStyle::ReadModifyWrite}};
const std::initializer_list<std::pair<const char*, AccessKind>> kAccess = {
    {"zipfian", AccessKind::Zipfian}, {"hotspot", AccessKind::Hotspot},
    {"uniform", AccessKind::Uniform}, {"trace", AccessKind::Trace}};
const std::initializer_list<std::pair<const char*, SystemKind>> kSystem = {
    {"closed", SystemKind::Closed}, {"open", SystemKind::Open}};
const std::initializer_list<std::pair<const char*, ThinkDistribution>> kThink = {
    {"exponential", ThinkDistribution::Exponential}, {"constant", ThinkDistribution::Constant}};
const std::initializer_list<std::pair<const char*, OracleKind>> kOracle = {
    {"constant", OracleKind::Constant}, {"exponential", OracleKind::Exponential}, {"tree", OracleKind::ModelTree}};
const std::initializer_list<std::pair<const char*, MemorySource>> kMemory = {
    {"sender", MemorySource::Sender}, {"receiver", MemorySource::Receiver}};

using Setter = std::function<void(RunConfig&, const YAML::Node&, const Ctx&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
    std::string section;
    std::string key;
    Setter set;
    Getter get;

    std::string dotted() const { return section + "." + key; }
};

#define NUM(sec, k, field)                                                                   \
    Entry {                                                                                   \
        sec, k, [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.field = number(n, x); }, \
            [](const RunConfig& c) { return fmt(c.field); }                                   \
    }
#define U32(sec, k, field)                                                                     \
    Entry {                                                                                     \
        sec, k, [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.field = count32(n, x); }, \
            [](const RunConfig& c) { return std::to_string(c.field); }                          \
    }
#define U64(sec, k, field)                                                                   \
    Entry {                                                                                   \
        sec, k, [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.field = count(n, x); }, \
            [](const RunConfig& c) { return std::to_string(c.field); }                        \
    }
#define BOOL(sec, k, field)                                                                    \
    Entry {                                                                                     \
        sec, k, [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.field = boolean(n, x); }, \
            [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }          \
    }
#define STR(sec, k, field)                                                                  \
    Entry {                                                                                  \
        sec, k, [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.field = text(n, x); }, \
            [](const RunConfig& c) { return quoted(c.field); }                               \
    }
#define ENUM(sec, k, field, table)                                                                  \
    Entry {                                                                                          \
        sec, k, [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.field = choice(n, x, table); }, \
            [](const RunConfig& c) { return name_of(c.field, table); }                               \
    }
#define DEMAND(activity)                                                                       \
    Entry {                                                                                     \
        "cpu", std::string(to_string(activity)),                                                \
            [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.demands[activity] = number(n, x); }, \
            [](const RunConfig& c) { return fmt(c.demands[activity]); }                         \
    }

const std::vector<Entry>& schema() {
    static const std::vector<Entry> entries = {
        U32("cluster", "servers", servers),
        U32("cluster", "clients_per_server", clients_per_server),
        U32("cluster", "cores", cores),
        U32("cluster", "replication", replication),
        U32("cluster", "vnodes", vnodes),
        ENUM("cluster", "ownership", ownership, kOwnership),
        Entry{"cluster", "protocol",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.protocol = text(n, x); },
              [](const RunConfig& c) { return c.protocol; }},
        NUM("cluster", "deadlock_timeout", deadlock_timeout),
        U32("cluster", "value_size", value_size),

        ENUM("cpu", "service", service, kService),
        DEMAND(CpuActivity::LocalTxGet),
        DEMAND(CpuActivity::LocalTxPut),
        DEMAND(CpuActivity::LocalTxGetFromRemote),
        DEMAND(CpuActivity::TxSendRemoteTxGet),
        DEMAND(CpuActivity::TxBegin),
        DEMAND(CpuActivity::TxAbort),
        DEMAND(CpuActivity::TxPrepare),
        DEMAND(CpuActivity::DistributedFinalTxCommit),

        ENUM("workload", "preset", workload.preset, kPreset),
        NUM("workload", "read_tx_fraction", workload.read_tx_fraction),
        ENUM("workload", "update_style", workload.update_style, kUpdateStyle),
        Entry{"workload", "ops_per_read_tx",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.workload.ops_per_read_tx = count_dist(n, x); },
              [](const RunConfig& c) { return fmt_dist(c.workload.ops_per_read_tx); }},
        Entry{"workload", "ops_per_update_tx",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) {
                  c.workload.ops_per_update_tx = count_dist(n, x);
              },
              [](const RunConfig& c) { return fmt_dist(c.workload.ops_per_update_tx); }},
        ENUM("workload", "access", workload.access.kind, kAccess),
        NUM("workload", "zipf_s", workload.access.zipf_s),
        NUM("workload", "hot_fraction", workload.access.hot_fraction),
        NUM("workload", "hot_access_fraction", workload.access.hot_access_fraction),
        STR("workload", "trace", workload.access.trace_path),
        U64("workload", "permutation_seed", workload.access.permutation_seed),
        U64("workload", "dataset_size", workload.dataset_size),
        ENUM("workload", "system", workload.system, kSystem),
        ENUM("workload", "think_distribution", workload.think, kThink),
        NUM("workload", "think_time", workload.think_time),
        NUM("workload", "arrival_rate", workload.arrival_rate),
        BOOL("workload", "retry_aborted", workload.retry_aborted),
        BOOL("workload", "redraw_on_retry", workload.redraw_on_retry),
        NUM("workload", "retry_backoff", workload.retry_backoff),

        ENUM("network", "oracle", network.oracle, kOracle),
        NUM("network", "mean_delay", network.mean_delay),
        STR("network", "tree", network.tree_path),
        STR("network", "knowledge_base", network.knowledge_base),
        Entry{"network", "min_leaf",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.network.train.min_leaf = count(n, x); },
              [](const RunConfig& c) { return std::to_string(c.network.train.min_leaf); }},
        Entry{"network", "max_depth",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.network.train.max_depth = count(n, x); },
              [](const RunConfig& c) { return std::to_string(c.network.train.max_depth); }},
        NUM("network", "prune_factor", network.train.prune_factor),
        NUM("network", "floor", network.floor),
        ENUM("network", "memory_source", network.options.memory_source, kMemory),
        NUM("network", "memory_base_bytes", network.options.memory_base_bytes),
        NUM("network", "memory_per_copy_bytes", network.options.memory_per_copy_bytes),
        U32("network", "header_bytes", network.options.sizes.header),
        U32("network", "key_bytes", network.options.sizes.key),
        NUM("network", "cpu_window", network.options.cpu_window),
        NUM("network", "rate_half_life", network.options.rate_half_life),
        NUM("network", "diagnostics_window", network.options.diagnostics_window),

        Entry{"run", "max_time",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.run.max_time = opt_number(n, x); },
              [](const RunConfig& c) { return fmt(c.run.max_time); }},
        Entry{"run", "max_commits",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) {
                  if (n.IsNull()) {
                      c.run.max_commits.reset();
                  } else {
                      c.run.max_commits = count(n, x);
                  }
              },
              [](const RunConfig& c) {
                  return c.run.max_commits ? std::to_string(*c.run.max_commits) : std::string("~");
              }},
        NUM("run", "warmup_fraction", run.warmup_fraction),
        Entry{"run", "warmup",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) { c.run.warmup = opt_number(n, x); },
              [](const RunConfig& c) { return fmt(c.run.warmup); }},
        BOOL("run", "drain", run.drain),
        Entry{"run", "seeds",
              [](RunConfig& c, const YAML::Node& n, const Ctx& x) {
                  c.run.seeds.clear();
                  if (n.IsSequence()) {
                      for (const auto& item : n) c.run.seeds.push_back(count(item, x));
                  } else {
                      c.run.seeds.push_back(count(n, x));
                  }
              },
              [](const RunConfig& c) {
                  std::string s = "[";
                  for (std::size_t i = 0; i < c.run.seeds.size(); ++i)
                      s += (i ? ", " : "") + std::to_string(c.run.seeds[i]);
                  return s + "]";
              }},
    };
    return entries;
}

#undef NUM
#undef U32
#undef U64
#undef BOOL
#undef STR
#undef ENUM
#undef DEMAND

const Entry* find_entry(const std::string& dotted) {
    for (const Entry& e : schema())
        if (e.dotted() == dotted) return &e;
    return nullptr;
}

std::string mark_location(const std::string& name, const YAML::Node& n) {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) return name;
    return name + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

} // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const Entry& e : schema()) out.push_back(e.dotted());
    return out;
}

bool is_config_key(const std::string& dotted) { return find_entry(dotted) != nullptr; }

RunConfig parse_config(const std::string& text_in, const std::string& name,
                       const std::vector<std::string>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text_in);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", name + ":" + std::to_string(e.mark.line + 1), "YAML syntax error: " + e.msg);
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("", name, "expected a mapping of sections");

    // Leaves in document order, checked against the schema.
    struct Leaf {
        const Entry* entry;
        YAML::Node value;
        std::string location;
    };
    std::map<std::string, Leaf> leaves;
    for (const auto& sec : root) {
        std::string section = sec.first.as<std::string>();
        if (!sec.second.IsMap() && !sec.second.IsNull())
            throw ConfigError(section, mark_location(name, sec.first), "expected a section mapping");
        if (sec.second.IsNull()) continue;
        for (const auto& kv : sec.second) {
            std::string dotted = section + "." + kv.first.as<std::string>();
            const Entry* e = find_entry(dotted);
            if (!e) throw ConfigError(dotted, mark_location(name, kv.first), "unknown key");
            leaves[dotted] = Leaf{e, kv.second, mark_location(name, kv.second)};
        }
    }
    for (const std::string& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError(ov, "override", "expected key=value");
        std::string dotted = ov.substr(0, eq);
        const Entry* e = find_entry(dotted);
        if (!e) throw ConfigError(dotted, "override", "unknown key");
        YAML::Node value;
        try {
            value = YAML::Load(ov.substr(eq + 1));
        } catch (const YAML::Exception& ex) {
            throw ConfigError(dotted, "override", "cannot parse value: " + ex.msg);
        }
        leaves[dotted] = Leaf{e, value, "override"};
    }

    RunConfig config;
    auto apply = [&](const Leaf& leaf) {
        std::string dotted = leaf.entry->dotted();
        leaf.entry->set(config, leaf.value, Ctx{dotted, leaf.location});
        config.locations[dotted] = leaf.location;
    };
    // The preset supplies defaults that explicit keys may then override.
    if (auto it = leaves.find("workload.preset"); it != leaves.end()) {
        apply(it->second);
        WorkloadSpec preset = WorkloadSpec::from_preset(config.workload.preset);
        config.workload.read_tx_fraction = preset.read_tx_fraction;
        config.workload.update_style = preset.update_style;
    }
    for (const Entry& e : schema()) {
        if (e.dotted() == "workload.preset") continue;
        if (auto it = leaves.find(e.dotted()); it != leaves.end()) apply(it->second);
    }
    return config;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", path, "cannot open configuration file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, overrides);
}

std::string echo_config(const RunConfig& config, bool include_seeds) {
    std::string out;
    std::string section;
    for (const Entry& e : schema()) {
        if (!include_seeds && e.dotted() == "run.seeds") continue;
        if (e.section != section) {
            section = e.section;
            out += section + ":\n";
        }
        out += "  " + e.key + ": " + e.get(config) + "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& config) { return hex64(fnv1a64(echo_config(config, false))); }

namespace {

[[noreturn]] void invalid(const RunConfig& c, const std::string& key, const std::string& what) {
    auto it = c.locations.find(key);
    throw ConfigError(key, it == c.locations.end() ? std::string() : it->second, what);
}

void need_file(const RunConfig& c, const std::string& key, const std::string& path, const char* what) {
    if (!std::filesystem::exists(path)) invalid(c, key, std::string(what) + " not found: " + path);
}

} // namespace

void RunConfig::validate() const {
    if (servers < 1) invalid(*this, "cluster.servers", "must be >= 1");
    if (cores < 1) invalid(*this, "cluster.cores", "must be >= 1");
    if (replication < 1) invalid(*this, "cluster.replication", "must be >= 1");
    if (replication > servers) invalid(*this, "cluster.replication", "replication degree exceeds server count");
    if (vnodes < 1) invalid(*this, "cluster.vnodes", "must be >= 1");
    if (!ProtocolRegistry::instance().contains(protocol))
        invalid(*this, "cluster.protocol", "unknown protocol '" + protocol + "'");
    if (!(deadlock_timeout >= 0.0)) invalid(*this, "cluster.deadlock_timeout", "must be >= 0");

    for (std::size_t i = 0; i < kCpuActivityCount; ++i) {
        if (!(demands.mean[i] > 0.0))
            invalid(*this, "cpu." + std::string(kCpuActivityNames[i]), "service demand must be > 0");
    }

    try {
        workload.validate();
    } catch (const ConfigError& e) {
        invalid(*this, e.key(), std::string(e.what()).substr(e.key().size() + 4));
    }
    if (workload.access.kind == AccessKind::Trace)
        need_file(*this, "workload.trace", workload.access.trace_path, "trace file");

    switch (network.oracle) {
    case OracleKind::Constant:
        if (!(network.mean_delay >= 0.0)) invalid(*this, "network.mean_delay", "must be >= 0");
        break;
    case OracleKind::Exponential:
        if (!(network.mean_delay > 0.0)) invalid(*this, "network.mean_delay", "must be > 0");
        break;
    case OracleKind::ModelTree:
        if (!network.tree_path.empty()) {
            need_file(*this, "network.tree", network.tree_path, "tree file");
        } else if (!network.knowledge_base.empty()) {
            need_file(*this, "network.knowledge_base", network.knowledge_base, "knowledge base");
        } else {
            invalid(*this, "network.knowledge_base", "tree oracle needs network.tree or network.knowledge_base");
        }
        break;
    }
    if (network.train.min_leaf < 1) invalid(*this, "network.min_leaf", "must be >= 1");
    if (network.train.max_depth < 1) invalid(*this, "network.max_depth", "must be >= 1");
    if (!(network.train.prune_factor > 0.0)) invalid(*this, "network.prune_factor", "must be > 0");
    if (!(network.floor > 0.0)) invalid(*this, "network.floor", "must be > 0");
    if (!(network.options.memory_base_bytes >= 0.0)) invalid(*this, "network.memory_base_bytes", "must be >= 0");
    if (!(network.options.memory_per_copy_bytes >= 0.0))
        invalid(*this, "network.memory_per_copy_bytes", "must be >= 0");
    if (!(network.options.cpu_window > 0.0)) invalid(*this, "network.cpu_window", "must be > 0");
    if (!(network.options.rate_half_life > 0.0)) invalid(*this, "network.rate_half_life", "must be > 0");
    if (!(network.options.diagnostics_window > 0.0)) invalid(*this, "network.diagnostics_window", "must be > 0");

    if (!run.max_time && !run.max_commits) invalid(*this, "run.max_time", "a time or commit budget is required");
    if (run.max_time && !(*run.max_time > 0.0)) invalid(*this, "run.max_time", "must be > 0");
    if (!(run.warmup_fraction >= 0.0 && run.warmup_fraction < 1.0))
        invalid(*this, "run.warmup_fraction", "must be in [0, 1)");
    if (run.warmup) {
        if (!(*run.warmup >= 0.0)) invalid(*this, "run.warmup", "must be >= 0");
        if (run.max_time && *run.warmup >= *run.max_time) invalid(*this, "run.warmup", "must be below run.max_time");
    }
    if (run.seeds.empty()) invalid(*this, "run.seeds", "at least one seed is required");
}

double RunConfig::warmup_cutoff() const {
    if (run.warmup) return *run.warmup;
    if (run.max_time) return run.warmup_fraction * *run.max_time;
    return 0.0;
}

std::pair<std::string, std::vector<std::string>> parse_sweep_axis(const std::string& text_in) {
    auto eq = text_in.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(text_in, "sweep", "expected key=v1,v2,...");
    std::pair<std::string, std::vector<std::string>> axis;
    axis.first = text_in.substr(0, eq);
    std::stringstream ss(text_in.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw ConfigError(axis.first, "sweep", "empty value in list");
        axis.second.push_back(item);
    }
    if (axis.second.empty()) throw ConfigError(axis.first, "sweep", "no values");
    return axis;
}

void SweepSpec::validate() const {
    if (axes.empty()) throw ConfigError("", "sweep", "no sweep axes given");
    std::set<std::string> seen;
    for (const auto& [key, values] : axes) {
        if (!is_config_key(key)) throw ConfigError(key, "sweep", "unknown key");
        if (!seen.insert(key).second) throw ConfigError(key, "sweep", "key swept twice");
        if (values.empty()) throw ConfigError(key, "sweep", "no values");
        if (zipped && values.size() != axes.front().second.size())
            throw ConfigError(key, "sweep", "zipped axes need equal lengths");
    }
}

std::vector<std::vector<std::string>> SweepSpec::points() const {
    std::vector<std::vector<std::string>> out;
    if (axes.empty()) return out;
    if (zipped) {
        for (std::size_t i = 0; i < axes.front().second.size(); ++i) {
            std::vector<std::string> point;
            for (const auto& [key, values] : axes) point.push_back(key + "=" + values[i]);
            out.push_back(std::move(point));
        }
        return out;
    }
    out.push_back({});
    for (const auto& [key, values] : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& partial : out) {
            for (const auto& v : values) {
                auto p = partial;
                p.push_back(key + "=" + v);
                next.push_back(std::move(p));
            }
        }
        out = std::move(next);
    }
    return out;
}

} // namespace dgsim
