#include "dgsim/model_tree.hpp"

#include "dgsim/errors.hpp"

#include <Eigen/Dense>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dgsim {

namespace {

constexpr int kTreeFormatVersion = 1;

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments moments(std::span<const TrainingRow> rows, std::span<const std::uint32_t> index) {
    Moments m;
    if (index.empty()) return m;
    for (auto i : index) m.mean += rows[i].latency;
    m.mean /= static_cast<double>(index.size());
    double ss = 0.0;
    for (auto i : index) {
        const double d = rows[i].latency - m.mean;
        ss += d * d;
    }
    m.sd = std::sqrt(ss / static_cast<double>(index.size()));
    return m;
}

SplitCandidate scan_feature(std::span<const TrainingRow> rows, std::span<const std::uint32_t> index,
                            int feature, std::size_t min_leaf, const Moments& parent) {
    SplitCandidate best;
    const std::size_t n = index.size();
    if (n < 2 * min_leaf || parent.sd <= 0.0) return best;

    std::vector<std::pair<double, double>> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = {rows[index[i]].x[feature], rows[index[i]].latency - parent.mean};
    std::sort(v.begin(), v.end());

    double total = 0.0, total_sq = 0.0;
    for (const auto& [x, y] : v) {
        total += y;
        total_sq += y * y;
    }
    double s = 0.0, ss = 0.0;
    const double dn = static_cast<double>(n);
    for (std::size_t i = 1; i < n; ++i) {
        s += v[i - 1].second;
        ss += v[i - 1].second * v[i - 1].second;
        if (i < min_leaf || n - i < min_leaf) continue;
        if (!(v[i - 1].first < v[i].first)) continue;
        const double nl = static_cast<double>(i), nr = dn - nl;
        const double var_l = std::max(0.0, ss / nl - (s / nl) * (s / nl));
        const double sr = total - s, ssr = total_sq - ss;
        const double var_r = std::max(0.0, ssr / nr - (sr / nr) * (sr / nr));
        const double reduction =
            parent.sd - (nl / dn) * std::sqrt(var_l) - (nr / dn) * std::sqrt(var_r);
        const double score = reduction / parent.sd;
        if (!best.valid() || score > best.score) {
            best.feature = feature;
            best.threshold = 0.5 * (v[i - 1].first + v[i].first);
            best.score = score;
        }
    }
    return best;
}

SplitCandidate pick(const std::array<SplitCandidate, kFeatureCount>& per_feature) {
    SplitCandidate best;
    for (const auto& c : per_feature)
        if (c.valid() && (!best.valid() || c.score > best.score)) best = c;
    return best;
}

double adjusted(double err, std::size_t n, std::size_t params) {
    if (n <= params) return err * 1e6 + 1e-300;
    return err * (static_cast<double>(n + params) / static_cast<double>(n - params));
}

} // namespace

SplitCandidate best_split_serial(std::span<const TrainingRow> rows,
                                 std::span<const std::uint32_t> index, std::size_t min_leaf) {
    const Moments parent = moments(rows, index);
    std::array<SplitCandidate, kFeatureCount> per_feature;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        per_feature[f] = scan_feature(rows, index, static_cast<int>(f), min_leaf, parent);
    return pick(per_feature);
}

SplitCandidate best_split_parallel(std::span<const TrainingRow> rows,
                                   std::span<const std::uint32_t> index, std::size_t min_leaf) {
    const Moments parent = moments(rows, index);
    std::array<SplitCandidate, kFeatureCount> per_feature;
#pragma omp parallel for schedule(static)
    for (int f = 0; f < static_cast<int>(kFeatureCount); ++f)
        per_feature[f] = scan_feature(rows, index, f, min_leaf, parent);
    return pick(per_feature);
}

class TreeBuilder {
public:
    TreeBuilder(const TrainingSet& data, const TrainParams& params) : rows_(data.rows), params_(params) {}

    ModelTree build() {
        std::vector<std::uint32_t> all(rows_.size());
        for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
        const Moments root = moments(rows_, all);
        eps_ = 1e-9 * root.sd + 1e-300;
        Built b = grow(all, 0, 0u);

        ModelTree tree;
        compact(b.node, tree.nodes_);
        tree.lo_.fill(std::numeric_limits<double>::infinity());
        tree.hi_.fill(-std::numeric_limits<double>::infinity());
        for (const auto& r : rows_)
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                tree.lo_[f] = std::min(tree.lo_[f], r.x[f]);
                tree.hi_[f] = std::max(tree.hi_[f], r.x[f]);
            }
        return tree;
    }

private:
    struct Built {
        std::size_t node;
        double error;        // adjusted training RMS error of the (pruned) subtree
        unsigned features;   // features tested in the subtree, as a bitmask
    };

    struct Fit {
        LinearModel model;
        double error;
    };

    Built grow(const std::vector<std::uint32_t>& index, std::size_t depth, unsigned path) {
        const std::size_t id = work_.size();
        work_.push_back({});
        work_[id].samples = index.size();

        const Moments m = moments(rows_, index);
        SplitCandidate split;
        if (depth < params_.max_depth && index.size() >= 2 * params_.min_leaf &&
            m.sd > 1e-12 * (std::abs(m.mean) + 1e-300)) {
            split = params_.search == SplitSearch::Parallel
                        ? best_split_parallel(rows_, index, params_.min_leaf)
                        : best_split_serial(rows_, index, params_.min_leaf);
            if (split.valid() && split.score < params_.min_reduction) split = {};
        }

        if (!split.valid()) {
            const Fit fit = fit_node(index, path);
            work_[id].model = fit.model;
            return {id, fit.error, 0u};
        }

        std::vector<std::uint32_t> left, right;
        for (auto i : index)
            (rows_[i].x[split.feature] <= split.threshold ? left : right).push_back(i);
        const unsigned here = 1u << split.feature;
        const Built l = grow(left, depth + 1, path | here);
        const Built r = grow(right, depth + 1, path | here);
        const unsigned subtree = here | l.features | r.features;

        const double n = static_cast<double>(index.size());
        const double subtree_error = std::sqrt((static_cast<double>(left.size()) * l.error * l.error +
                                                static_cast<double>(right.size()) * r.error * r.error) /
                                               n);
        const Fit fit = fit_node(index, path | subtree);
        if (fit.error <= params_.prune_factor * subtree_error + eps_) {
            work_[id].model = fit.model;
            return {id, fit.error, subtree};
        }
        work_[id].leaf = false;
        work_[id].feature = split.feature;
        work_[id].threshold = split.threshold;
        work_[id].left = static_cast<std::uint32_t>(l.node);
        work_[id].right = static_cast<std::uint32_t>(r.node);
        return {id, subtree_error, subtree};
    }

    /// Least squares over the features in `mask` that vary inside the node,
    /// kept only if it beats the node mean (after the complexity adjustment).
    Fit fit_node(const std::vector<std::uint32_t>& index, unsigned mask) const {
        const std::size_t n = index.size();
        const Moments m = moments(rows_, index);
        Fit mean_fit;
        mean_fit.model.intercept = m.mean;
        mean_fit.error = adjusted(m.sd, n, 1);

        std::vector<std::size_t> vars;
        Features centre{};
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            if (!(mask & (1u << f))) continue;
            double lo = rows_[index[0]].x[f], hi = lo, sum = 0.0;
            for (auto i : index) {
                lo = std::min(lo, rows_[i].x[f]);
                hi = std::max(hi, rows_[i].x[f]);
                sum += rows_[i].x[f];
            }
            if (hi > lo) {
                vars.push_back(f);
                centre[f] = sum / static_cast<double>(n);
            }
        }
        if (vars.empty() || n <= vars.size() + 1) return mean_fit;

        Eigen::MatrixXd X(n, vars.size());
        Eigen::VectorXd y(n);
        for (std::size_t r = 0; r < n; ++r) {
            const auto& row = rows_[index[r]];
            for (std::size_t c = 0; c < vars.size(); ++c) X(r, c) = row.x[vars[c]] - centre[vars[c]];
            y(r) = row.latency - m.mean;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < static_cast<Eigen::Index>(vars.size())) return mean_fit;
        const Eigen::VectorXd beta = qr.solve(y);

        Fit lin;
        lin.model.intercept = m.mean;
        for (std::size_t c = 0; c < vars.size(); ++c) {
            lin.model.coef[vars[c]] = beta(c);
            lin.model.intercept -= beta(c) * centre[vars[c]];
        }
        double ss = 0.0;
        for (auto i : index) {
            const double d = rows_[i].latency - lin.model(rows_[i].x);
            ss += d * d;
        }
        lin.error = adjusted(std::sqrt(ss / static_cast<double>(n)), n, vars.size() + 1);
        if (lin.error * params_.prune_factor < mean_fit.error - eps_) return lin;
        return mean_fit;
    }

    void compact(std::size_t id, std::vector<ModelTree::Node>& out) const {
        const std::size_t at = out.size();
        out.push_back(work_[id]);
        if (work_[id].leaf) {
            out[at].feature = -1;
            out[at].left = out[at].right = 0;
            return;
        }
        out[at].left = static_cast<std::uint32_t>(out.size());
        compact(work_[id].left, out);
        out[at].right = static_cast<std::uint32_t>(out.size());
        compact(work_[id].right, out);
    }

    std::span<const TrainingRow> rows_;
    TrainParams params_;
    std::vector<ModelTree::Node> work_;
    double eps_ = 0.0;
};

ModelTree train(const TrainingSet& data, const TrainParams& params) {
    if (data.rows.empty()) throw TrainingError("empty training set");
    if (data.rows.size() < 2) throw TrainingError("training set needs at least 2 rows");
    if (params.min_leaf == 0 || params.max_depth == 0 || !(params.prune_factor > 0.0))
        throw TrainingError("training parameters must be positive");
    for (const auto& r : data.rows)
        if (!std::isfinite(r.latency)) throw TrainingError("non-finite latency in training set");
    return TreeBuilder(data, params).build();
}

const ModelTree::Node& ModelTree::leaf_for(const Features& x) const {
    std::size_t i = 0;
    while (!nodes_[i].leaf)
        i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    return nodes_[i];
}

double ModelTree::predict_raw(const Features& x) const { return leaf_for(x).model(x); }

double ModelTree::predict(const Features& x, double floor) const {
    const double y = predict_raw(x);
    if (!(y >= floor)) return floor;   // also catches NaN
    return y;
}

bool ModelTree::in_training_range(const Features& x) const noexcept {
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        if (x[f] < lo_[f] || x[f] > hi_[f]) return false;
    return true;
}

std::size_t ModelTree::leaves() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

std::size_t ModelTree::depth() const noexcept {
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[i].leaf) {
            stack.push_back({nodes_[i].left, d + 1});
            stack.push_back({nodes_[i].right, d + 1});
        }
    }
    return deepest;
}

std::vector<SplitCandidate> ModelTree::splits() const {
    std::vector<SplitCandidate> out;
    for (const auto& n : nodes_)
        if (!n.leaf) out.push_back({n.feature, n.threshold, 0.0});
    return out;
}

void ModelTree::write(std::ostream& out) const {
    out << "dgsim-model-tree " << kTreeFormatVersion << '\n' << std::setprecision(17);
    out << "ranges";
    for (std::size_t f = 0; f < kFeatureCount; ++f) out << ' ' << lo_[f] << ' ' << hi_[f];
    out << '\n';
    for (const auto& n : nodes_) {
        if (n.leaf) {
            out << "leaf " << n.samples << ' ' << n.model.intercept;
            for (double c : n.model.coef) out << ' ' << c;
        } else {
            out << "split " << n.feature << ' ' << n.threshold << ' ' << n.samples;
        }
        out << '\n';
    }
}

namespace {

struct TreeReader {
    std::istream& in;
    const std::string& name;
    std::size_t line_no = 0;

    std::istringstream next() {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line[0] != '#') return std::istringstream(line);
        }
        throw FormatError(name, line_no, "unexpected end of tree dump");
    }

    std::size_t node(std::vector<ModelTree::Node>& out, std::size_t depth) {
        if (depth > 256) throw FormatError(name, line_no, "tree too deep");
        auto ls = next();
        std::string tag;
        ls >> tag;
        ModelTree::Node n;
        if (tag == "leaf") {
            ls >> n.samples >> n.model.intercept;
            for (double& c : n.model.coef) ls >> c;
            if (!ls) throw FormatError(name, line_no, "malformed leaf line");
            out.push_back(n);
            return out.size() - 1;
        }
        if (tag != "split") throw FormatError(name, line_no, "expected 'leaf' or 'split'");
        ls >> n.feature >> n.threshold >> n.samples;
        if (!ls || n.feature < 0 || n.feature >= static_cast<int>(kFeatureCount))
            throw FormatError(name, line_no, "malformed split line");
        n.leaf = false;
        out.push_back(n);
        const std::size_t at = out.size() - 1;
        const std::size_t l = node(out, depth + 1);
        const std::size_t r = node(out, depth + 1);
        out[at].left = static_cast<std::uint32_t>(l);
        out[at].right = static_cast<std::uint32_t>(r);
        return at;
    }
};

} // namespace

ModelTree ModelTree::read(std::istream& in, const std::string& name) {
    TreeReader reader{in, name};
    {
        auto ls = reader.next();
        std::string magic;
        int version = 0;
        ls >> magic >> version;
        if (magic != "dgsim-model-tree") throw FormatError(name, reader.line_no, "not a tree dump");
        if (version != kTreeFormatVersion)
            throw FormatError(name, reader.line_no, "unsupported tree format version");
    }
    ModelTree tree;
    {
        auto ls = reader.next();
        std::string tag;
        ls >> tag;
        if (tag != "ranges") throw FormatError(name, reader.line_no, "expected 'ranges'");
        for (std::size_t f = 0; f < kFeatureCount; ++f) ls >> tree.lo_[f] >> tree.hi_[f];
        if (!ls) throw FormatError(name, reader.line_no, "malformed ranges line");
    }
    reader.node(tree.nodes_, 0);
    return tree;
}

double rmse(const ModelTree& tree, std::span<const TrainingRow> rows) {
    if (rows.empty()) return 0.0;
    double ss = 0.0;
    for (const auto& r : rows) {
        const double d = tree.predict_raw(r.x) - r.latency;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(rows.size()));
}

TrainingSet read_knowledge_base(std::istream& in, const std::string& name) {
    TrainingSet set;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        if (!header) {
            if (line.substr(first) != kKnowledgeBaseHeader)
                throw FormatError(name, line_no,
                                  std::string("expected header '") + kKnowledgeBaseHeader + "'");
            header = true;
            continue;
        }
        std::array<double, kFeatureCount + 1> cells{};
        std::size_t col = 0, pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            const std::string cell = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            if (col > kFeatureCount) throw FormatError(name, line_no, "too many columns");
            char* end = nullptr;
            cells[col] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || (*end != '\0' && std::string_view(end).find_first_not_of(" \t") != std::string_view::npos))
                throw FormatError(name, line_no, "column " + std::to_string(col + 1) + " is not a number");
            ++col;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (col != kFeatureCount + 1) throw FormatError(name, line_no, "expected 5 columns");
        TrainingRow row;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            if (!(cells[f] >= 0.0)) throw FormatError(name, line_no, "features must be non-negative");
            row.x[f] = cells[f];
        }
        if (!(cells[kFeatureCount] > 0.0)) throw FormatError(name, line_no, "latency must be > 0");
        row.latency = cells[kFeatureCount] * 1e-6;
        set.rows.push_back(row);
    }
    if (!header) throw FormatError(name, line_no, "missing header line");
    return set;
}

TrainingSet read_knowledge_base(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path, 0, "cannot open knowledge base");
    return read_knowledge_base(in, path);
}

void write_knowledge_base(std::ostream& out, const TrainingSet& data) {
    out << kKnowledgeBaseHeader << '\n' << std::setprecision(17);
    for (const auto& r : data.rows) {
        for (double v : r.x) out << v << ',';
        out << r.latency * 1e6 << '\n';
    }
}

} // namespace dgsim
