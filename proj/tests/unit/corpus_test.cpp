#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "udib/corpus.hpp"

namespace udib {
namespace {

using testing::make_set;
using testing::Point;

std::string line(const std::string& id, const std::string& role, const std::string& emb,
                 const std::string& extra = "") {
    return R"({"id":")" + id + R"(","role":")" + role + R"(","group_id":"g")" + extra + R"(,"embedding":)" +
           emb + "}";
}

ErrorCode parse_error(const std::vector<std::string>& lines) {
    try {
        (void)parse_corpus(lines);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a parse error";
    return ErrorCode::Io;
}

TEST(ParseCorpus, MinimalValidCorpus) {
    const std::vector<std::string> lines = {line("a", "prompt", "[1,2,3]"),
                                            line("b", "answer", "[4,5,6]", R"(,"generation_id":2,"text":"hi")")};
    const auto set = parse_corpus(lines);
    EXPECT_EQ(set.size(), 2u);
    EXPECT_EQ(set.dim(), 3u);
    EXPECT_EQ(set.label(0).role, Role::prompt);
    EXPECT_EQ(set.label(1).generation_id, 2);
    EXPECT_EQ(set.label(1).text.value_or(""), "hi");
    EXPECT_FALSE(set.label(0).text.has_value());
    EXPECT_DOUBLE_EQ(set.point(1)[2], 6.0);
}

TEST(ParseCorpus, SkipsCommentsAndBlankLines) {
    const std::vector<std::string> lines = {"# header", "", line("a", "prompt", "[1]"), "   ",
                                            line("b", "answer", "[2]")};
    EXPECT_EQ(parse_corpus(lines).size(), 2u);
}

TEST(ParseCorpus, GenerationIdDefaultsToZero) {
    const auto set = parse_corpus(std::vector<std::string>{line("a", "prompt", "[1]"), line("b", "answer", "[2]")});
    EXPECT_EQ(set.label(1).generation_id, 0);
}

TEST(ParseCorpus, RejectsDimensionMismatch) {
    EXPECT_EQ(parse_error({line("a", "prompt", "[1,2,3]"), line("b", "answer", "[1,2,3,4]")}),
              ErrorCode::DimensionMismatch);
}

TEST(ParseCorpus, RejectsUnknownRole) {
    EXPECT_EQ(parse_error({line("a", "question", "[1]"), line("b", "answer", "[2]")}), ErrorCode::UnknownRole);
}

TEST(ParseCorpus, RejectsDuplicateId) {
    EXPECT_EQ(parse_error({line("a", "prompt", "[1]"), line("a", "answer", "[2]")}), ErrorCode::DuplicateId);
}

TEST(ParseCorpus, RejectsEmptyAndSingletonCorpus) {
    EXPECT_EQ(parse_error({"# nothing here"}), ErrorCode::EmptyCorpus);
    EXPECT_EQ(parse_error({line("a", "prompt", "[1]")}), ErrorCode::EmptyCorpus);
}

TEST(ParseCorpus, RejectsMalformedRecords) {
    EXPECT_EQ(parse_error({"{not json", line("b", "answer", "[2]")}), ErrorCode::MalformedRecord);
    EXPECT_EQ(parse_error({R"({"id":"a","role":"prompt"})", line("b", "answer", "[2]")}),
              ErrorCode::MalformedRecord);
    EXPECT_EQ(parse_error({line("a", "prompt", R"([1,"x"])"), line("b", "answer", "[2,3]")}),
              ErrorCode::MalformedRecord);
}

TEST(ParseCorpus, RejectsOverflowingNumberAsNonFinite) {
    EXPECT_EQ(parse_error({line("a", "prompt", "[1e999]"), line("b", "answer", "[2]")}), ErrorCode::NonFiniteValue);
}

TEST(ParseCorpus, ErrorMessageCarriesLineNumber) {
    try {
        (void)parse_corpus(std::vector<std::string>{"# c", line("a", "prompt", "[1]"), line("b", "oops", "[1]")});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(EmbeddingSet, RejectsNonFiniteValueDirectly) {
    std::vector<EmbeddingRecord> recs = {testing::make_record("a", {1.0}),
                                         testing::make_record("b", {std::nan("")})};
    try {
        EmbeddingSet set(std::move(recs));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteValue);
    }
}

TEST(ParseCorpus, SerializeRoundTripPreservesOrderAndValues) {
    std::mt19937_64 rng(7);
    const auto pts = testing::random_points(rng, 17, 5, 3.0);
    const auto set = make_set(pts);
    std::istringstream in(serialize_corpus(set));
    const auto back = parse_corpus(in);
    ASSERT_EQ(back.size(), set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        EXPECT_EQ(back.label(i), set.label(i));
        for (std::size_t k = 0; k < set.dim(); ++k) EXPECT_EQ(back.point(i)[k], set.point(i)[k]);
    }
    // idempotent
    EXPECT_EQ(serialize_corpus(back), serialize_corpus(set));
}

TEST(PairwiseStats, TwoPointExample) {
    const auto s = pairwise_stats(make_set({{0, 0}, {2, 0}}));
    EXPECT_DOUBLE_EQ(s.total_variance, 1.0);
    EXPECT_DOUBLE_EQ(s.mean_sq_pair_dist, 2.0);
    EXPECT_DOUBLE_EQ(s.centroid[0], 1.0);
}

TEST(PairwiseStats, IdenticalPointsHaveZeroSpread) {
    const auto s = pairwise_stats(make_set({{1, 2}, {1, 2}, {1, 2}}));
    EXPECT_EQ(s.total_variance, 0.0);
    EXPECT_EQ(s.mean_sq_pair_dist, 0.0);
}

TEST(PairwiseStats, TrianglePairSumMatchesDoubleLoop) {
    const std::vector<Point> pts = {{0, 0}, {1, 0}, {0, 1}};
    const double oracle = testing::brute_mean_sq_pair_dist(pts);
    EXPECT_NEAR(oracle, 8.0 / 9.0, 1e-15);
    EXPECT_NEAR(pairwise_stats(make_set(pts)).mean_sq_pair_dist, oracle, 1e-15);
}

TEST(PairwiseStats, PropertyMatchesBruteForceOnRandomCorpora) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> n_dist(2, 50), d_dist(1, 8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto pts = testing::random_points(rng, n_dist(rng), d_dist(rng), 2.5);
        const auto s = pairwise_stats(make_set(pts));
        const double oracle = testing::brute_mean_sq_pair_dist(pts);
        EXPECT_NEAR(s.mean_sq_pair_dist, oracle, 1e-9 * oracle);
        EXPECT_NEAR(s.mean_sq_pair_dist, 2.0 * s.total_variance, 1e-9 * oracle);
    }
}

TEST(DefaultSmoothingScale, WorkedValues) {
    PairwiseStats s;
    s.mean_sq_pair_dist = 2.0;
    EXPECT_NEAR(default_smoothing_scale(s, 2), 1.4426950408889634, 1e-15);
    s.mean_sq_pair_dist = 2.0 * std::log(10.0);
    EXPECT_NEAR(default_smoothing_scale(s, 10), 1.0, 1e-15);
}

TEST(DefaultSmoothingScale, DegenerateCorpusThrows) {
    const auto s = pairwise_stats(make_set({{3.0}, {3.0}}));
    try {
        (void)default_smoothing_scale(s, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateCorpus);
    }
}

TEST(DefaultSmoothingScale, PositiveAndLinearInSpread) {
    PairwiseStats s;
    for (double msp : {0.1, 1.0, 7.5}) {
        s.mean_sq_pair_dist = msp;
        const double base = default_smoothing_scale(s, 40);
        EXPECT_GT(base, 0.0);
        s.mean_sq_pair_dist = 3.0 * msp;
        EXPECT_NEAR(default_smoothing_scale(s, 40), 3.0 * base, 1e-14 * base);
    }
}

}  // namespace
}  // namespace udib
