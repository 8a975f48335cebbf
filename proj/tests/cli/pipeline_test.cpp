#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "pipeline.hpp"

namespace udib::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::string kToy = UDIB_TOY_CORPUS;
const std::string kCli = UDIB_CLI_PATH;

EmbeddingSet toy() {
    std::istringstream in(read_file(kToy));
    return parse_corpus(in);
}

RunManifest manifest_for(Command c, const std::string& extra_seeds = "") {
    RunOptions o;
    o.command = c;
    o.input = kToy;
    if (!extra_seeds.empty()) o.seeds = extra_seeds;
    return resolve_manifest(o, toy(), sha256_hex(read_file(kToy)));
}

std::map<std::string, std::string> as_map(const PipelineOutput& out) {
    return {out.files.begin(), out.files.end()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("udib_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_file(e.path());
    return out;
}

TEST(ParseArgs, Seeds) {
    EXPECT_EQ(parse_seeds("3"), (std::vector<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(parse_seeds("0,4,7"), (std::vector<std::uint64_t>{0, 4, 7}));
    EXPECT_THROW((void)parse_seeds("1,1"), ConfigError);
    EXPECT_THROW((void)parse_seeds("0"), ConfigError);
    EXPECT_THROW((void)parse_seeds("a,b"), ConfigError);
}

TEST(ParseArgs, WindowsAndGrid) {
    EXPECT_EQ(parse_windows("2,3"), (std::vector<std::size_t>{2, 3}));
    EXPECT_THROW((void)parse_windows("0"), ConfigError);
    RunManifest m;
    parse_tau_grid("0.01:2:5", m);
    EXPECT_EQ(m.tau_min, 0.01);
    EXPECT_EQ(m.tau_max, 2.0);
    EXPECT_EQ(m.tau_count, 5u);
    EXPECT_THROW(parse_tau_grid("1:2", m), ConfigError);
    EXPECT_THROW(parse_tau_grid("2:1:5", m), ConfigError);
}

TEST(Defaults, KMax) {
    EXPECT_EQ(default_k_max(400), 30u);
    EXPECT_EQ(default_k_max(56), 11u);
    EXPECT_EQ(default_k_max(5), 2u);
    EXPECT_EQ(default_k_max(2), 2u);
}

TEST(Defaults, ResolvedManifest) {
    const auto m = manifest_for(Command::select);
    EXPECT_EQ(m.seeds.size(), 10u);
    EXPECT_EQ(m.tau_count, 40u);
    EXPECT_EQ(m.windows, (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(m.min_clusters, 3u);
    EXPECT_EQ(m.alpha, 1e-4);
    EXPECT_EQ(m.input_sha256.size(), 64u);
}

TEST(Manifest, JsonRoundTripIsExact) {
    auto m = manifest_for(Command::report, "0,5,9");
    m.k = 4;
    m.tau = 0.3;
    const auto text = manifest_json(m);
    EXPECT_EQ(manifest_json(parse_manifest(text)), text);
    EXPECT_THROW((void)parse_manifest("{"), ConfigError);
    EXPECT_THROW((void)parse_manifest(R"({"command":"cluster"})"), ConfigError);
}

TEST(Sha256, KnownDigest) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RunPipeline, ClusterIsDeterministic) {
    const auto set = toy();
    const auto m = manifest_for(Command::cluster);
    const auto a = as_map(run_pipeline(m, set, 1));
    const auto b = as_map(run_pipeline(m, set, 1));
    ASSERT_TRUE(a.count("assignments.csv"));
    EXPECT_EQ(a, b);
}

TEST(RunPipeline, SelectFinalKIsModeOfPerSeedRecommendations) {
    const auto out = as_map(run_pipeline(manifest_for(Command::select), toy()));
    const auto doc = json::parse(out.at("summary.json"));
    std::map<std::size_t, int> votes;
    for (const auto& s : doc["per_seed"])
        if (!s["kink_angle"].is_null()) votes[s["kink_angle"]["n_c"].get<std::size_t>()]++;
    ASSERT_FALSE(votes.empty());
    std::size_t mode = 0;
    int best = 0;
    for (auto [k, c] : votes)
        if (c > best) {
            best = c;
            mode = k;
        }
    EXPECT_EQ(doc["final_k"].get<std::size_t>(), mode);
    EXPECT_EQ(doc["final_k"].get<std::size_t>(), 4u);
    EXPECT_EQ(doc["per_seed"].size(), 10u);
}

TEST(RunPipeline, MetricsAtExplicitTau) {
    auto m = manifest_for(Command::metrics);
    m.tau = 0.2;
    m.tau_explicit = true;
    const auto out = as_map(run_pipeline(m, toy()));
    EXPECT_TRUE(out.count("sdm_report.json"));
    EXPECT_TRUE(out.count("cooccurrence_row_normalized.csv"));
    EXPECT_FALSE(out.count("summary.json"));
}

TEST(RunPipeline, JsonTableFormat) {
    auto m = manifest_for(Command::report, "0,1,2");
    m.format = TableFormat::json;
    const auto out = as_map(run_pipeline(m, toy()));
    EXPECT_TRUE(out.count("profiles.json"));
    EXPECT_TRUE(out.count("cooccurrence.json"));
    EXPECT_FALSE(out.count("cooccurrence.csv"));
}

TEST(RunPipeline, KWithoutMatchingRunIsConfigError) {
    auto m = manifest_for(Command::metrics, "0,1");
    m.k = 50;
    EXPECT_THROW((void)run_pipeline(m, toy()), ConfigError);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    std::ofstream(dir / "bad.jsonl") << R"({"id":"a","role":"prompt","embedding":[1,2]})" << "\n{oops\n";
    EXPECT_EQ(run_cli("validate --input " + (dir / "bad.jsonl").string() + " --out " + (dir / "o").string()), 2);
    EXPECT_EQ(run_cli("validate --input " + (dir / "missing.jsonl").string()), 2);
    EXPECT_EQ(run_cli("select --input " + kToy + " --tau-grid 1:0.1:5 --out " + (dir / "o").string()), 3);
    EXPECT_EQ(run_cli("cluster --input " + kToy + " --k-max 0 --out " + (dir / "o").string()), 3);
    EXPECT_EQ(run_cli("cluster --input " + kToy + " --no-such-flag"), 3);
    EXPECT_EQ(run_cli("validate --input " + kToy + " --out " + (dir / "ok").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ok" / "manifest.json"));
}

TEST(Cli, RerunReproducesReportTree) {
    const auto dir = scratch("rerun");
    fs::copy_file(kToy, dir / "toy.jsonl");
    const auto input = (dir / "toy.jsonl").string();
    ASSERT_EQ(run_cli("report --input " + input + " --seeds 4 --out " + (dir / "a").string()), 0);
    ASSERT_EQ(run_cli("rerun --manifest " + (dir / "a" / "manifest.json").string() + " --out " + (dir / "b").string()),
              0);
    const auto a = read_tree(dir / "a");
    EXPECT_GE(a.size(), 9u);
    EXPECT_EQ(a, read_tree(dir / "b"));

    std::ofstream(input, std::ios::app) << "\n";
    EXPECT_EQ(run_cli("rerun --manifest " + (dir / "a" / "manifest.json").string() + " --out " + (dir / "c").string()),
              2);
}

}  // namespace
}  // namespace udib::cli
