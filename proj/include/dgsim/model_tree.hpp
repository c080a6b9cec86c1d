#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dgsim {

inline constexpr std::size_t kFeatureCount = 4;
using Features = std::array<double, kFeatureCount>;

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "used_memory_bytes", "cpu_utilization", "message_size_bytes", "msg_rate_per_s"};

/// Inputs of the message-latency regressor.
struct FeatureVector {
    double used_memory = 0.0;
    double cpu_utilization = 0.0;
    double message_size = 0.0;
    double msg_rate = 0.0;

    Features array() const noexcept { return {used_memory, cpu_utilization, message_size, msg_rate}; }
};

struct TrainingRow {
    Features x{};
    double latency = 0.0;   // seconds
};

struct TrainingSet {
    std::vector<TrainingRow> rows;
};

enum class SplitSearch : std::uint8_t { Serial, Parallel };

struct TrainParams {
    std::size_t min_leaf = 15;
    std::size_t max_depth = 12;
    double prune_factor = 1.0;
    /// Splits reducing deviation by less than this fraction of the parent's are not taken.
    double min_reduction = 0.05;
    SplitSearch search = SplitSearch::Serial;
};

struct LinearModel {
    double intercept = 0.0;
    Features coef{};

    double operator()(const Features& x) const noexcept {
        double y = intercept;
        for (std::size_t i = 0; i < kFeatureCount; ++i) y += coef[i] * x[i];
        return y;
    }
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;   // deviation reduction / parent deviation

    bool valid() const noexcept { return feature >= 0; }
};

/// Best (feature, threshold) over the rows selected by `index`, by normalized
/// standard-deviation reduction. Both sides keep at least `min_leaf` rows.
/// Ties go to the lower feature index, then the lower threshold.
SplitCandidate best_split_serial(std::span<const TrainingRow> rows,
                                 std::span<const std::uint32_t> index, std::size_t min_leaf);
/// Same result as best_split_serial, one OpenMP task per feature.
SplitCandidate best_split_parallel(std::span<const TrainingRow> rows,
                                   std::span<const std::uint32_t> index, std::size_t min_leaf);

/// Regression tree with a linear model in every leaf.
class ModelTree {
public:
    struct Node {
        bool leaf = true;
        int feature = -1;
        double threshold = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        LinearModel model;
        std::size_t samples = 0;
    };

    static constexpr double kDefaultFloor = 1e-6;

    /// Leaf model evaluated at x, clamped below at `floor`.
    double predict(const Features& x, double floor = kDefaultFloor) const;
    double predict_raw(const Features& x) const;
    const Node& leaf_for(const Features& x) const;

    /// Whether x lies inside the per-feature ranges seen in training.
    bool in_training_range(const Features& x) const noexcept;

    std::size_t leaves() const noexcept;
    std::size_t depth() const noexcept;
    std::vector<SplitCandidate> splits() const;
    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Features& range_low() const noexcept { return lo_; }
    const Features& range_high() const noexcept { return hi_; }

    /// Versioned text dump, nodes in pre-order, one per line.
    void write(std::ostream& out) const;
    static ModelTree read(std::istream& in, const std::string& name = "<tree>");

private:
    friend ModelTree train(const TrainingSet&, const TrainParams&);
    friend class TreeBuilder;

    std::vector<Node> nodes_;
    Features lo_{};
    Features hi_{};
};

/// Throws TrainingError on fewer than two rows or invalid parameters.
ModelTree train(const TrainingSet& data, const TrainParams& params = {});

double rmse(const ModelTree& tree, std::span<const TrainingRow> rows);

/// Reads the profiling knowledge base (CSV with the fixed header; latency in
/// microseconds, converted to seconds). Throws FormatError with the line.
TrainingSet read_knowledge_base(std::istream& in, const std::string& name);
TrainingSet read_knowledge_base(const std::string& path);
void write_knowledge_base(std::ostream& out, const TrainingSet& data);

inline constexpr const char* kKnowledgeBaseHeader =
    "used_memory_bytes,cpu_utilization,message_size_bytes,msg_rate_per_s,latency_us";

} // namespace dgsim
