#include "dgsim/cli.hpp"
#include "dgsim/config.hpp"
#include "dgsim/errors.hpp"
#include "dgsim/model_tree.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dgsim;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(cluster:
  servers: 2
  clients_per_server: 2
  replication: 1
workload:
  preset: A
  dataset_size: 1000
  access: uniform
network:
  oracle: constant
  mean_delay: 0.0005
run:
  max_time: 1.0
)";

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("dgsim-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

fs::path write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "dgsim");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Config, DefaultsAndPresetOverrides) {
    auto c = parse_config("workload:\n  preset: B\n  read_tx_fraction: 0.7\n", "t.yaml");
    EXPECT_EQ(c.servers, 4u);
    EXPECT_EQ(c.workload.preset, WorkloadPreset::B);
    EXPECT_DOUBLE_EQ(c.workload.read_tx_fraction, 0.7);
    auto b = parse_config("workload:\n  preset: B\n", "t.yaml");
    EXPECT_DOUBLE_EQ(b.workload.read_tx_fraction, 0.9);
}

TEST(Config, UnknownKeyReportsItsLocation) {
    try {
        parse_config("cluster:\n  servers: 2\n  severs: 3\n", "c.yaml");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.location(), "c.yaml:3:3");
        EXPECT_NE(std::string(e.what()).find("severs"), std::string::npos);
    }
}

TEST(Config, BadValueNamesKeyAndLocation) {
    try {
        parse_config("cluster:\n  servers: two\n", "c.yaml");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "cluster.servers");
        EXPECT_EQ(e.location().rfind("c.yaml:2:", 0), 0u);
    }
}

TEST(Config, ReplicationAboveServers) {
    try {
        parse_config("cluster:\n  servers: 2\n  replication: 3\n", "c.yaml").validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("replication degree exceeds server count"), std::string::npos);
    }
}

TEST(Config, OverridesApplyAfterTheFile) {
    auto c = parse_config(kSmall, "s.yaml", {"cluster.servers=3", "workload.zipf_s=0.9"});
    EXPECT_EQ(c.servers, 3u);
    EXPECT_DOUBLE_EQ(c.workload.access.zipf_s, 0.9);
    EXPECT_EQ(c.locations.at("cluster.servers"), "override");
    EXPECT_THROW(parse_config(kSmall, "s.yaml", {"cluster.nope=1"}), ConfigError);
    EXPECT_THROW(parse_config(kSmall, "s.yaml", {"cluster.servers"}), ConfigError);
}

TEST(Config, EchoRoundTripsByteForByte) {
    auto c = parse_config(kSmall, "s.yaml", {"workload.ops_per_update_tx=[2,4]", "run.seeds=[3,4]"});
    auto echo = echo_config(c);
    auto again = parse_config(echo, "echo.yaml");
    EXPECT_EQ(echo_config(again), echo);
    EXPECT_EQ(config_hash(again), config_hash(c));
}

TEST(Config, HashIgnoresSeedsButNotModelKeys) {
    auto a = parse_config(kSmall, "s.yaml");
    auto b = parse_config(kSmall, "s.yaml", {"run.seeds=[9]"});
    auto c = parse_config(kSmall, "s.yaml", {"cluster.cores=4"});
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(c));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, EveryEchoedKeyIsASchemaKey) {
    auto keys = config_keys();
    EXPECT_TRUE(is_config_key("network.mean_delay"));
    EXPECT_FALSE(is_config_key("network.nope"));
    EXPECT_GT(keys.size(), 40u);
}

TEST(Config, WarmupCutoff) {
    auto c = parse_config(kSmall, "s.yaml", {"run.max_time=20"});
    EXPECT_DOUBLE_EQ(c.warmup_cutoff(), 2.0);
    auto d = parse_config(kSmall, "s.yaml", {"run.warmup=0.5"});
    EXPECT_DOUBLE_EQ(d.warmup_cutoff(), 0.5);
}

TEST(Sweep, CrossProductAndZip) {
    SweepSpec s;
    s.axes = {parse_sweep_axis("cluster.servers=2,4"), parse_sweep_axis("workload.zipf_s=0.5,0.9")};
    EXPECT_EQ(s.points().size(), 4u);
    s.zipped = true;
    EXPECT_EQ(s.points().size(), 2u);
    s.axes[1].second.push_back("1.1");
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_THROW(parse_sweep_axis("servers"), ConfigError);
}

TEST(Cli, RunWritesPerSeedAndAggregateRows) {
    TempDir dir;
    auto cfg = write(dir / "c.yaml", kSmall);
    auto r = cli({"run", "-c", cfg.string(), "--seeds", "1,2,3", "-o", (dir / "out").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto csv = slurp(dir / "out" / "report.csv");
    EXPECT_EQ(lines(csv), 5u);   // header + 3 seeds + aggregate
    EXPECT_NE(csv.find(",mean,"), std::string::npos);
    auto echoed = slurp(dir / "out" / "effective_config.yaml");
    EXPECT_EQ(echo_config(parse_config(echoed, "e.yaml")), echoed);
}

TEST(Cli, IdenticalRunsGiveIdenticalReports) {
    TempDir dir;
    auto cfg = write(dir / "c.yaml", kSmall);
    ASSERT_EQ(cli({"run", "-c", cfg.string(), "--seeds", "5", "-o", (dir / "a").string()}).code, kExitOk);
    ASSERT_EQ(cli({"run", "-c", cfg.string(), "--seeds", "5", "-o", (dir / "b").string()}).code, kExitOk);
    EXPECT_EQ(slurp(dir / "a" / "report.csv"), slurp(dir / "b" / "report.csv"));
}

TEST(Cli, ValidationFailuresExitWithOne) {
    TempDir dir;
    auto cfg = write(dir / "c.yaml", "cluster:\n  servers: 2\n  replication: 3\n");
    auto r = cli({"run", "-c", cfg.string(), "-o", (dir / "out").string()});
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find("replication degree exceeds server count"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "out" / "report.csv"));
    EXPECT_EQ(cli({"run"}).code, kExitValidation);
    EXPECT_EQ(cli({"run", "-c", (dir / "missing.yaml").string()}).code, kExitValidation);
}

TEST(Cli, SweepWritesOneFilePerPointAndAGnuplotTable) {
    TempDir dir;
    auto cfg = write(dir / "c.yaml", kSmall);
    auto r = cli({"sweep", "-c", cfg.string(), "--vary", "cluster.servers=2,3,4", "-s", "cluster.clients_per_server=1",
                  "-o", (dir / "out").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(dir / "out"))
        if (e.path().extension() == ".csv") ++csvs;
    EXPECT_EQ(csvs, 3u);
    EXPECT_TRUE(fs::exists(dir / "out" / "A-5-U-n2.csv"));
    std::istringstream dat(slurp(dir / "out" / "sweep.dat"));
    std::string line;
    std::vector<double> xs;
    while (std::getline(dat, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double x, tput;
        ls >> x >> tput;
        xs.push_back(x);
        EXPECT_GT(tput, 0.0);
    }
    EXPECT_EQ(xs, (std::vector<double>{2, 3, 4}));
}

TEST(Cli, TrainHeaderOnlyIsAnEmptyTrainingSet) {
    TempDir dir;
    auto kb = write(dir / "kb.csv", std::string(kKnowledgeBaseHeader) + "\n");
    auto r = cli({"train", "-k", kb.string()});
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find("empty training set"), std::string::npos);
}

TEST(Cli, TrainWritesATreeAndRmse) {
    TempDir dir;
    std::ostringstream kb;
    kb << kKnowledgeBaseHeader << "\n";
    for (int i = 0; i < 1000; ++i) {
        double size = 100 + (i * 37) % 1900, rate = (i * 13) % 500;
        kb << 1e8 << "," << 0.001 * (i % 900) << "," << size << "," << rate << "," << 50 + 0.02 * size + 0.1 * rate << "\n";
    }
    auto path = write(dir / "kb.csv", kb.str());
    auto r = cli({"train", "-k", path.string(), "-o", (dir / "tree.txt").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("train_rmse"), std::string::npos);
    EXPECT_NE(r.out.find("holdout_rmse"), std::string::npos);
    std::ifstream in(dir / "tree.txt");
    EXPECT_NO_THROW(ModelTree::read(in));
}

TEST(Cli, MalformedKnowledgeBaseIsAValidationError) {
    TempDir dir;
    auto kb = write(dir / "kb.csv", std::string(kKnowledgeBaseHeader) + "\n1,2,3\n");
    auto r = cli({"train", "-k", kb.string()});
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find(":2"), std::string::npos);
}
