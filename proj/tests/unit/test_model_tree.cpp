#include "dgsim/errors.hpp"
#include "dgsim/model_tree.hpp"
#include "dgsim/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace dgsim;

namespace {

constexpr std::size_t kSize = 2;   // message_size feature

// Features drawn uniformly; `size` from the given ranges, latency from `law`.
template <typename Law>
TrainingSet synthetic(std::size_t n, std::uint64_t seed, Law law,
                      std::vector<std::pair<double, double>> size_ranges = {{100.0, 2000.0}}) {
    RandomStream rng(seed);
    TrainingSet t;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [lo, hi] = size_ranges[i % size_ranges.size()];
        Features x{1e8 + 1e8 * rng.uniform(), rng.uniform(), lo + (hi - lo) * rng.uniform(), 1000.0 * rng.uniform()};
        t.rows.push_back({x, law(x, rng)});
    }
    return t;
}

} // namespace

TEST(ModelTree, RecoversASingleLinearLaw) {
    auto data = synthetic(400, 1, [](const Features& x, RandomStream&) { return 3.0 * x[kSize] + 0.1; });
    auto tree = train(data);
    ASSERT_EQ(tree.leaves(), 1u);
    const auto& leaf = tree.nodes()[0];
    EXPECT_NEAR(leaf.model.coef[kSize], 3.0, 1e-6);
    EXPECT_NEAR(leaf.model.intercept, 0.1, 1e-6);
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        if (f != kSize) {
            EXPECT_NEAR(leaf.model.coef[f], 0.0, 1e-6);
        }
    Features x{1e8, 0.5, 2.0, 10.0};
    EXPECT_NEAR(tree.predict(x), 6.1, 1e-6);
}

TEST(ModelTree, RecoversTwoRegimesAndSplitsInTheGap) {
    const double a1 = 2e-6, a2 = 7e-6;
    auto law = [&](const Features& x, RandomStream&) { return x[kSize] < 1000.0 ? a1 * x[kSize] : a2 * x[kSize]; };
    auto data = synthetic(600, 2, law, {{100.0, 900.0}, {1100.0, 2000.0}});
    auto tree = train(data);
    ASSERT_EQ(tree.leaves(), 2u);
    auto splits = tree.splits();
    ASSERT_EQ(splits.size(), 1u);
    EXPECT_EQ(splits[0].feature, static_cast<int>(kSize));
    EXPECT_GT(splits[0].threshold, 900.0);
    EXPECT_LT(splits[0].threshold, 1100.0);
    Features lo{1.5e8, 0.5, 500.0, 100.0}, hi{1.5e8, 0.5, 1500.0, 100.0};
    EXPECT_NEAR(tree.leaf_for(lo).model.coef[kSize], a1, 1e-6 * a1);
    EXPECT_NEAR(tree.leaf_for(hi).model.coef[kSize], a2, 1e-6 * a2);
    EXPECT_NEAR(tree.leaf_for(lo).model.intercept, 0.0, 1e-9);
    EXPECT_NEAR(tree.leaf_for(hi).model.intercept, 0.0, 1e-9);
}

TEST(ModelTree, NoisyHoldoutWithinTwoSigma) {
    const double sigma = 2e-5;
    auto law = [&](const Features& x, RandomStream& rng) {
        double base = x[kSize] < 1000.0 ? 1e-4 + 2e-7 * x[kSize] : 5e-4 + 1e-7 * x[kSize];
        double u1 = rng.uniform(), u2 = rng.uniform();
        return base + sigma * std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
    };
    auto train_set = synthetic(2000, 3, law);
    auto holdout = synthetic(500, 4, law);
    auto tree = train(train_set);
    EXPECT_LE(rmse(tree, holdout.rows), 2.0 * sigma);
}

TEST(ModelTree, ConstantTarget) {
    auto data = synthetic(100, 5, [](const Features&, RandomStream&) { return 0.004; });
    auto tree = train(data);
    EXPECT_EQ(tree.leaves(), 1u);
    EXPECT_DOUBLE_EQ(tree.predict({1e8, 0.1, 100.0, 1.0}), 0.004);
}

TEST(ModelTree, ExtrapolationIsClampedAtTheFloor) {
    // Latency falls with msg_rate; far outside the range the raw model goes negative.
    auto data = synthetic(300, 6, [](const Features& x, RandomStream&) { return 1e-3 - 1e-6 * x[3]; });
    auto tree = train(data);
    Features far{1.5e8, 0.5, 500.0, 1e6};
    EXPECT_LT(tree.predict_raw(far), 0.0);
    EXPECT_FALSE(tree.in_training_range(far));
    EXPECT_EQ(tree.predict(far), ModelTree::kDefaultFloor);
    EXPECT_EQ(tree.predict(far, 2e-6), 2e-6);
}

TEST(ModelTree, DumpRoundTrip) {
    auto law = [](const Features& x, RandomStream&) { return x[kSize] < 1000.0 ? 1e-6 * x[kSize] : 3e-6 * x[kSize]; };
    auto tree = train(synthetic(500, 7, law, {{100.0, 900.0}, {1100.0, 2000.0}}));
    std::stringstream ss;
    tree.write(ss);
    auto back = ModelTree::read(ss);
    RandomStream rng(8);
    for (int i = 0; i < 200; ++i) {
        Features x{2e8 * rng.uniform(), rng.uniform(), 3000.0 * rng.uniform(), 1000.0 * rng.uniform()};
        EXPECT_EQ(back.predict_raw(x), tree.predict_raw(x));
    }
    std::stringstream again;
    back.write(again);
    std::stringstream first;
    tree.write(first);
    EXPECT_EQ(again.str(), first.str());
}

TEST(ModelTree, MalformedDumpIsAFormatError) {
    std::istringstream bad("dgsim-model-tree 1\nranges 0 1\nleaf x\n");
    EXPECT_THROW(ModelTree::read(bad), FormatError);
}

TEST(ModelTree, TrainingInputErrors) {
    EXPECT_THROW(train(TrainingSet{}), TrainingError);
    TrainingSet one;
    one.rows.push_back({});
    EXPECT_THROW(train(one), TrainingError);
    auto ok = synthetic(50, 9, [](const Features&, RandomStream&) { return 1.0; });
    TrainParams p;
    p.min_leaf = 0;
    EXPECT_THROW(train(ok, p), TrainingError);
}

TEST(ModelTree, ParallelSplitSearchMatchesSerial) {
    auto data = synthetic(5000, 10, [](const Features& x, RandomStream& rng) {
        return 1e-4 * x[1] + 1e-7 * x[kSize] + (x[3] > 500.0 ? 2e-4 : 0.0) + 1e-5 * rng.uniform();
    });
    std::vector<std::uint32_t> index(data.rows.size());
    for (std::uint32_t i = 0; i < index.size(); ++i) index[i] = i;
    auto s = best_split_serial(data.rows, index, 15);
    auto p = best_split_parallel(data.rows, index, 15);
    EXPECT_EQ(s.feature, p.feature);
    EXPECT_EQ(s.threshold, p.threshold);
    EXPECT_EQ(s.score, p.score);

    TrainParams serial, parallel;
    parallel.search = SplitSearch::Parallel;
    std::stringstream a, b;
    train(data, serial).write(a);
    train(data, parallel).write(b);
    EXPECT_EQ(a.str(), b.str());
}

TEST(KnowledgeBase, ReadsMicrosecondsAsSeconds) {
    std::istringstream in(std::string(kKnowledgeBaseHeader) + "\n1000,0.5,300,20,150\n");
    auto t = read_knowledge_base(in, "kb");
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_DOUBLE_EQ(t.rows[0].latency, 150e-6);
    EXPECT_DOUBLE_EQ(t.rows[0].x[kSize], 300.0);
}

TEST(KnowledgeBase, BadRowNamesTheLine) {
    std::istringstream in(std::string(kKnowledgeBaseHeader) + "\n1,2,3,4,5\n1,2,x,4,5\n");
    try {
        read_knowledge_base(in, "kb");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream header_only(std::string(kKnowledgeBaseHeader) + "\n");
    EXPECT_TRUE(read_knowledge_base(header_only, "kb").rows.empty());
}

TEST(KnowledgeBase, WriteReadRoundTrip) {
    auto data = synthetic(20, 11, [](const Features& x, RandomStream&) { return 1e-6 * x[kSize]; });
    std::stringstream ss;
    write_knowledge_base(ss, data);
    auto back = read_knowledge_base(ss, "kb");
    ASSERT_EQ(back.rows.size(), 20u);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(back.rows[i].latency, data.rows[i].latency, 1e-15);
}
