#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "udib/export.hpp"

namespace udib {
namespace {

using json = nlohmann::json;

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(2.0), "2");
    EXPECT_EQ(format_number(-1.5e-7), "-1.5e-07");
    for (double v : {1.0 / 3.0, M_PI, 1e-300, 123456.789}) EXPECT_EQ(std::stod(format_number(v)), v);
    EXPECT_THROW((void)format_number(std::numeric_limits<double>::infinity()), std::domain_error);
    EXPECT_THROW((void)format_number(std::nan("")), std::domain_error);
}

TEST(ClusteringJson, FieldsAndAssignments) {
    const auto set = testing::make_set({{0, 0}, {0.1, 0}, {10, 0}, {10.1, 0}});
    const auto r = run_udib(set, {.k_max = 2, .tau = 0.05, .max_iter = 50, .seed = 0});
    const auto doc = json::parse(clustering_json(r));
    for (const char* key : {"k_final", "tau", "seed", "iterations", "converged", "entropy_bits", "loss", "assignments"})
        EXPECT_TRUE(doc.contains(key)) << key;
    EXPECT_EQ(doc["k_final"].get<std::size_t>(), r.k_final);
    EXPECT_EQ(doc["assignments"].size(), 4u);
    EXPECT_DOUBLE_EQ(doc["loss"]["total"].get<double>(), r.loss.total);
}

TEST(AssignmentsCsv, OneRowPerRecordWithLfEndings) {
    const auto set = testing::make_set({{0}, {1}, {5}});
    const auto r = run_udib(set, {.k_max = 1, .tau = 0.1, .max_iter = 5, .seed = 0});
    const auto csv = assignments_csv(set, r);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "id,role,group_id,generation_id,cluster");
    EXPECT_NE(csv.find("p2,answer,g0,0,0\n"), std::string::npos) << csv;
}

TEST(ProfileCsv, HeaderAndRows) {
    const auto set = testing::make_set({{0, 0}, {0.1, 0}, {10, 0}, {10.1, 0}});
    const std::vector<double> grid = {0.01, 0.1};
    const std::vector<InformationProfile> profiles = {sweep_tau(set, grid, 4, 7)};
    const auto csv = profile_csv(profiles);
    std::istringstream in(csv);
    std::string header, row;
    std::getline(in, header);
    EXPECT_EQ(header, kProfileCsvHeader);
    std::size_t rows = 0;
    while (std::getline(in, row)) {
        EXPECT_EQ(row.rfind("7,", 0), 0u) << row;
        ++rows;
    }
    EXPECT_EQ(rows, 2u);
    EXPECT_EQ(json::parse(profile_json(profiles)).size(), 1u);
}

TEST(CooccurrenceCsv, SixDecimalsAndRowNormalizedVariant) {
    CooccurrenceMatrix m{.k = 2, .joint = {0.4, 0.1, 0.2, 0.3}, .pair_count = 1};
    EXPECT_EQ(cooccurrence_csv(m), "0.400000,0.100000\n0.200000,0.300000\n");
    EXPECT_EQ(cooccurrence_csv(m, true), "0.800000,0.200000\n0.400000,0.600000\n");
    const auto doc = json::parse(cooccurrence_json(m));
    EXPECT_EQ(doc["k"].get<int>(), 2);
}

TEST(SdmReportJson, CarriesConventions) {
    std::vector<EmbeddingRecord> recs = {testing::make_record("a", {0}, Role::prompt),
                                         testing::make_record("b", {1}, Role::answer)};
    const EmbeddingSet set(std::move(recs));
    const std::vector<Label> a = {0, 1};
    const auto doc = json::parse(sdm_report_json(sdm_report(a, set, 2)));
    EXPECT_EQ(doc["conventions"]["units"], "bits");
    EXPECT_EQ(doc["pair_count"].get<int>(), 1);
    EXPECT_TRUE(doc.contains("ensemble_mi_bits"));
}

TEST(CorpusSummaryJson, CountsRoles) {
    std::vector<EmbeddingRecord> recs = {testing::make_record("a", {0}, Role::prompt),
                                         testing::make_record("b", {1}), testing::make_record("c", {2})};
    const auto doc = json::parse(corpus_summary_json(EmbeddingSet(std::move(recs))));
    EXPECT_EQ(doc["count"].get<int>(), 3);
    EXPECT_EQ(doc["prompts"].get<int>(), 1);
    EXPECT_EQ(doc["answers"].get<int>(), 2);
    EXPECT_DOUBLE_EQ(doc["mean_sq_pair_dist"].get<double>(), 12.0 / 9.0);
}

}  // namespace
}  // namespace udib
