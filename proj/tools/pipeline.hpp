#ifndef UDIB_TOOLS_PIPELINE_HPP
#define UDIB_TOOLS_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "udib/udib.hpp"

namespace udib::cli {

enum class Command { validate, cluster, sweep, select, metrics, report };

std::string_view to_string(Command c) noexcept;
std::optional<Command> parse_command(std::string_view name) noexcept;

enum class TableFormat { csv, json };

/// Raw command-line settings. Unset optionals take defaults that may depend
/// on the corpus (k_max) when the manifest is resolved.
struct RunOptions {
    Command command = Command::validate;
    std::string input;
    std::optional<std::size_t> k_max;
    std::optional<std::string> tau_grid;  // "MIN:MAX:COUNT"
    std::optional<double> tau;
    std::optional<std::string> seeds;  // "LIST" or "COUNT"
    std::optional<double> alpha;
    std::optional<std::size_t> min_clusters;
    std::optional<std::string> windows;
    std::optional<std::size_t> k;
    std::optional<std::size_t> max_iter;
    TableFormat format = TableFormat::csv;
};

/// Fully resolved run description. Written next to the outputs; replaying
/// it on the same input reproduces them byte for byte.
struct RunManifest {
    std::string tool_version;
    std::string command;
    std::string input;
    std::string input_sha256;
    std::size_t k_max = 0;
    double tau_min = 1e-3;
    double tau_max = 1.0;
    std::size_t tau_count = 40;
    /// Temperature for `cluster`, and for `metrics` when set explicitly.
    double tau = 0.1;
    bool tau_explicit = false;
    std::vector<std::uint64_t> seeds;
    double alpha = kDefaultAlpha;
    std::size_t min_clusters = kDefaultMinClusters;
    std::vector<std::size_t> windows{2, 3};
    std::optional<std::size_t> k;
    std::size_t max_iter = 200;
    TableFormat format = TableFormat::csv;

    std::vector<double> grid() const { return geometric_grid(tau_min, tau_max, tau_count); }
};

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(std::string_view text);

/// min(30, N/5), at least 2, at most N.
std::size_t default_k_max(std::size_t n) noexcept;

std::vector<std::uint64_t> parse_seeds(std::string_view text);
std::vector<std::size_t> parse_windows(std::string_view text);
void parse_tau_grid(std::string_view text, RunManifest& m);

RunManifest resolve_manifest(const RunOptions& opts, const EmbeddingSet& set, std::string input_sha256);

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Output file name and full contents.
using OutputFile = std::pair<std::string, std::string>;

struct PipelineOutput {
    std::vector<OutputFile> files;
    /// One-line human summary for stdout.
    std::string summary;
};

/// Runs the manifest's command on an already-parsed corpus. The manifest
/// itself is included in the output set as manifest.json.
PipelineOutput run_pipeline(const RunManifest& manifest, const EmbeddingSet& set, std::size_t threads = 0);

/// Writes every file via a temporary name and rename.
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

/// Raised for problems in the requested configuration itself.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 2 for input validation problems, 3 for configuration problems, 1 otherwise.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace udib::cli

#endif  // UDIB_TOOLS_PIPELINE_HPP
