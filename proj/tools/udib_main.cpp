// udib: UDIB clustering, model selection and divergence metrics over
// line-delimited embedding corpora.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pipeline.hpp"

namespace {

using namespace udib;
using namespace udib::cli;

constexpr int kExitInternal = 1;
constexpr int kExitConfig = 3;

int fail(int code, const std::string& message) {
    std::cerr << "udib: " << message << '\n';
    return code;
}

// Reads and parses the corpus; on failure prints the diagnostic and sets
// `exit_code`.
std::optional<EmbeddingSet> load_corpus(const std::string& path, std::string& digest, int& exit_code) {
    try {
        const auto bytes = read_file(path);
        digest = sha256_hex(bytes);
        std::istringstream stream(bytes);
        return parse_corpus(stream);
    } catch (const Error& e) {
        exit_code = fail(exit_code_for(e.code()), std::string(to_string(e.code())) + ": " + e.what());
        return std::nullopt;
    }
}

int execute(const RunManifest& manifest, const EmbeddingSet& set, const std::filesystem::path& out_dir,
            std::size_t threads) {
    PipelineOutput out;
    try {
        out = run_pipeline(manifest, set, threads);
    } catch (const ConfigError& e) {
        return fail(kExitConfig, e.what());
    } catch (const Error& e) {
        return fail(exit_code_for(e.code()), std::string(to_string(e.code())) + ": " + e.what());
    }

    try {
        write_outputs(out_dir, out.files);
    } catch (const Error& e) {
        return fail(kExitInternal, e.what());
    }
    std::cout << out.summary << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UDIB topic clustering, tau-sweep model selection and semantic divergence metrics"};
    app.set_version_flag("--version", std::string(udib::kVersion));
    app.require_subcommand(1);

    RunOptions opts;
    std::string out_dir = "udib-out";
    std::string format = "csv";
    std::size_t threads = 0;

    auto add_common = [&](CLI::App* sub, Command command) {
        sub->callback([&opts, command] { opts.command = command; });
        sub->add_option("--input", opts.input, "Line-delimited embedding corpus")->required();
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    };
    auto add_clustering = [&](CLI::App* sub) {
        sub->add_option("--k-max", opts.k_max, "Initial number of clusters (default min(30, N/5), >= 2)");
        sub->add_option("--seeds", opts.seeds, "Seed list '0,4,7' or a count '10' meaning 0..9");
        sub->add_option("--max-iter", opts.max_iter, "Sweep limit per run (default 200)");
    };
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--tau-grid", opts.tau_grid, "Geometric tau grid MIN:MAX:COUNT (default 1e-3:1:40)");
        sub->add_option("--format", format, "Table format for profiles and co-occurrence")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    };
    auto add_selection = [&](CLI::App* sub) {
        sub->add_option("--min-clusters", opts.min_clusters, "Smallest eligible cluster count (default 3)");
        sub->add_option("--windows", opts.windows, "Kink-angle regression windows (default 2,3)");
    };
    auto add_metrics = [&](CLI::App* sub) {
        sub->add_option("--alpha", opts.alpha, "Additive smoothing on topic counts (default 1e-4)");
        sub->add_option("--k", opts.k, "Topic count for metrics instead of the selected mode");
    };

    auto* validate = app.add_subcommand("validate", "Parse and summarize a corpus");
    add_common(validate, Command::validate);

    auto* cluster = app.add_subcommand("cluster", "Single UDIB run at one tau (first seed)");
    add_common(cluster, Command::cluster);
    add_clustering(cluster);
    cluster->add_option("--tau", opts.tau, "Effective temperature (default 0.1)");

    auto* sweep = app.add_subcommand("sweep", "Information profile over the tau grid (first seed)");
    add_common(sweep, Command::sweep);
    add_clustering(sweep);
    add_grid(sweep);

    auto* select = app.add_subcommand("select", "Multi-seed kink-angle and elbow model selection");
    add_common(select, Command::select);
    add_clustering(select);
    add_grid(select);
    add_selection(select);

    auto* metrics = app.add_subcommand("metrics", "Divergence metrics and co-occurrence at a chosen clustering");
    add_common(metrics, Command::metrics);
    add_clustering(metrics);
    add_grid(metrics);
    add_selection(metrics);
    add_metrics(metrics);
    metrics->add_option("--tau", opts.tau, "Cluster once at this tau instead of running selection");

    auto* report = app.add_subcommand("report", "Selection, representative clustering and metrics in one pass");
    add_common(report, Command::report);
    add_clustering(report);
    add_grid(report);
    add_selection(report);
    add_metrics(report);

    std::string manifest_path;
    auto* rerun = app.add_subcommand("rerun", "Replay a saved manifest.json");
    rerun->add_option("--manifest", manifest_path, "Manifest written by an earlier run")->required();
    rerun->add_option("--out", out_dir, "Output directory")->capture_default_str();
    rerun->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (rerun->parsed()) {
            RunManifest manifest;
            try {
                manifest = parse_manifest(read_file(manifest_path));
            } catch (const ConfigError& e) {
                return fail(kExitConfig, e.what());
            } catch (const Error& e) {
                return fail(kExitConfig, e.what());
            }
            std::string digest;
            int code = 0;
            const auto set = load_corpus(manifest.input, digest, code);
            if (!set) return code;
            if (digest != manifest.input_sha256) {
                return fail(2, "input '" + manifest.input + "' does not match the manifest digest");
            }
            return execute(manifest, *set, out_dir, threads);
        }

        opts.format = format == "json" ? TableFormat::json : TableFormat::csv;
        std::string digest;
        int code = 0;
        const auto set = load_corpus(opts.input, digest, code);
        if (!set) return code;
        RunManifest manifest;
        try {
            manifest = resolve_manifest(opts, *set, digest);
        } catch (const ConfigError& e) {
            return fail(kExitConfig, e.what());
        }
        return execute(manifest, *set, out_dir, threads);
    } catch (const std::exception& e) {
        return fail(kExitInternal, std::string("internal error: ") + e.what());
    }
}
