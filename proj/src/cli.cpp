#include "dgsim/cli.hpp"

#include "dgsim/config.hpp"
#include "dgsim/errors.hpp"
#include "dgsim/model_tree.hpp"
#include "dgsim/replication.hpp"
#include "dgsim/simulation.hpp"
#include "dgsim/stats.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace dgsim {
namespace {

struct CommonOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = ".";
    int verbosity = 0;
    bool parallel = false;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("-c,--config", o.config, "YAML configuration file")->required();
    cmd.add_option("-s,--set", o.overrides, "Override a key, e.g. cluster.servers=8");
    cmd.add_option("--seeds", o.seeds, "Seed list (replaces run.seeds)")->delimiter(',');
    cmd.add_option("-o,--out", o.out_dir, "Output directory");
    cmd.add_flag("-v,--verbose", o.verbosity, "More output");
    cmd.add_flag("--parallel", o.parallel, "Run seed replications on OpenMP threads");
}

RunConfig prepare(const CommonOptions& o, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> overrides = o.overrides;
    overrides.insert(overrides.end(), extra.begin(), extra.end());
    RunConfig config = load_config(o.config, overrides);
    if (!o.seeds.empty()) config.run.seeds = o.seeds;
    config.validate();
    return config;
}

std::vector<SimulationReport> replicate(const RunConfig& config, bool parallel) {
    RunResources resources = RunResources::load(config);
    return parallel ? run_replications_parallel(config, config.run.seeds, resources)
                    : run_replications_serial(config, config.run.seeds, resources);
}

void write_report(const fs::path& path, const std::vector<SimulationReport>& runs, const std::string& label) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << csv_header() << "\n";
    for (const auto& r : runs) f << csv_row(r, label) << "\n";
    f << csv_aggregate_row(runs, label) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

int cmd_run(const CommonOptions& o, std::ostream& out) {
    RunConfig config = prepare(o);
    std::vector<SimulationReport> runs = replicate(config, o.parallel);
    fs::create_directories(o.out_dir);
    const std::string label = config.workload.label() + "-n" + std::to_string(config.servers);
    write_report(fs::path(o.out_dir) / "report.csv", runs, label);
    write_text(fs::path(o.out_dir) / "effective_config.yaml", echo_config(config));
    for (const auto& r : runs) {
        if (o.verbosity > 0) {
            write_table(out, r);
            out << "\n";
        }
    }
    out << label << ": " << runs.size() << " run(s), mean throughput " << mean_throughput(runs)
        << " tx/s, rsd " << throughput_rsd(runs) << "\n";
    out << "wrote " << (fs::path(o.out_dir) / "report.csv").string() << "\n";
    return kExitOk;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    return s;
}

double mean_of(const std::vector<SimulationReport>& runs, auto field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : runs) {
        if (auto v = field(r)) {
            sum += *v;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

int cmd_sweep(const CommonOptions& o, const std::vector<std::string>& vary, bool zipped, std::ostream& out) {
    SweepSpec spec;
    spec.zipped = zipped;
    for (const auto& v : vary) spec.axes.push_back(parse_sweep_axis(v));
    spec.validate();
    auto points = spec.points();

    // Validate every point before running any.
    std::vector<RunConfig> configs;
    for (const auto& point : points) configs.push_back(prepare(o, point));

    fs::create_directories(o.out_dir);
    std::ostringstream dat;
    dat << "# x = " << spec.axes.front().first << "\n";
    dat << "# x throughput throughput_rsd commit_probability update_latency_mean read_only_latency_mean label\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const RunConfig& config = configs[i];
        std::string label = config.workload.label() + "-n" + std::to_string(config.servers);
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
            const std::string& key = spec.axes[a].first;
            if (key == "cluster.servers") continue;
            std::string value = points[i][a].substr(key.size() + 1);
            label += "_" + key.substr(key.find('.') + 1) + sanitize(value);
        }
        std::vector<SimulationReport> runs = replicate(config, o.parallel);
        fs::path file = fs::path(o.out_dir) / (label + ".csv");
        write_report(file, runs, label);
        const std::string x = points[i][0].substr(spec.axes.front().first.size() + 1);
        dat << x << " " << mean_throughput(runs) << " " << throughput_rsd(runs) << " "
            << mean_of(runs, [](const SimulationReport& r) { return r.commit_probability; }) << " "
            << mean_of(runs, [](const SimulationReport& r) {
                   return r.update_latency ? std::optional<double>(r.update_latency->mean) : std::nullopt;
               })
            << " "
            << mean_of(runs, [](const SimulationReport& r) {
                   return r.read_only_latency ? std::optional<double>(r.read_only_latency->mean) : std::nullopt;
               })
            << " " << label << "\n";
        out << "wrote " << file.string() << "\n";
    }
    write_text(fs::path(o.out_dir) / "sweep.dat", dat.str());
    out << "wrote " << (fs::path(o.out_dir) / "sweep.dat").string() << "\n";
    return kExitOk;
}

struct TrainOptions {
    std::string knowledge_base;
    std::string output;
    std::size_t min_leaf = 15;
    std::size_t max_depth = 12;
    double prune_factor = 1.0;
    std::uint64_t split_seed = 1;
    double holdout = 0.2;
    bool parallel = false;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
    TrainingSet data = read_knowledge_base(o.knowledge_base);
    if (data.rows.empty()) throw TrainingError("empty training set");
    if (!(o.holdout >= 0.0 && o.holdout < 1.0)) throw ConfigError("--holdout", "", "must be in [0, 1)");

    std::vector<std::size_t> order(data.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomStream rng(o.split_seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    auto n_hold = static_cast<std::size_t>(static_cast<double>(order.size()) * o.holdout);
    if (order.size() - n_hold < 2) n_hold = 0;

    TrainingSet fit, hold;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_hold ? hold : fit).rows.push_back(data.rows[order[i]]);

    TrainParams params;
    params.min_leaf = o.min_leaf;
    params.max_depth = o.max_depth;
    params.prune_factor = o.prune_factor;
    params.search = o.parallel ? SplitSearch::Parallel : SplitSearch::Serial;
    ModelTree tree = train(fit, params);

    if (!o.output.empty()) {
        std::ofstream f(o.output);
        if (!f) throw std::runtime_error("cannot write " + o.output);
        tree.write(f);
    }
    out << "rows " << data.rows.size() << " train " << fit.rows.size() << " holdout " << hold.rows.size()
        << " leaves " << tree.leaves() << " depth " << tree.depth() << "\n";
    out << "train_rmse " << rmse(tree, fit.rows) << " s";
    if (!hold.rows.empty()) {
        out << "  holdout_rmse " << rmse(tree, hold.rows) << " s";
    } else {
        out << "  holdout_rmse NA";
    }
    out << "\n";
    if (!o.output.empty()) out << "wrote " << o.output << "\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete-event simulator of transactional in-memory data grids", "dgsim"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "Run one simulation per seed");
    add_common(*run, run_opts);

    CommonOptions sweep_opts;
    std::vector<std::string> vary;
    bool zipped = false;
    auto* sweep = app.add_subcommand("sweep", "What-if sweep over configuration keys");
    add_common(*sweep, sweep_opts);
    sweep->add_option("--vary", vary, "key=v1,v2,... (repeatable)")->required();
    sweep->add_flag("--zip", zipped, "Iterate axes in lockstep instead of the cross product");

    TrainOptions train_opts;
    auto* trn = app.add_subcommand("train", "Train the network latency model tree");
    trn->add_option("-k,--knowledge-base", train_opts.knowledge_base, "Knowledge-base CSV")->required();
    trn->add_option("-o,--out", train_opts.output, "Tree dump to write");
    trn->add_option("--min-leaf", train_opts.min_leaf, "Minimum samples per leaf");
    trn->add_option("--max-depth", train_opts.max_depth, "Maximum tree depth");
    trn->add_option("--prune-factor", train_opts.prune_factor, "Leaf pruning factor");
    trn->add_option("--split-seed", train_opts.split_seed, "Seed of the train/holdout split");
    trn->add_option("--holdout", train_opts.holdout, "Holdout fraction");
    trn->add_flag("--parallel", train_opts.parallel, "Parallel split search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(run_opts, out);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, vary, zipped, out);
        if (trn->parsed()) return cmd_train(train_opts, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const TrainingError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}

} // namespace dgsim
