#include "pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace udib::cli {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::validate: return "validate";
        case Command::cluster: return "cluster";
        case Command::sweep: return "sweep";
        case Command::select: return "select";
        case Command::metrics: return "metrics";
        case Command::report: return "report";
    }
    return "validate";
}

std::optional<Command> parse_command(std::string_view name) noexcept {
    for (auto c : {Command::validate, Command::cluster, Command::sweep, Command::select, Command::metrics,
                   Command::report}) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

std::size_t default_k_max(std::size_t n) noexcept {
    const std::size_t k = std::max<std::size_t>(2, std::min<std::size_t>(30, n / 5));
    return std::min(k, n);
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? text.size() - start : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::uint64_t parse_unsigned(std::string_view s, const char* what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(std::string("invalid ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

double parse_double(std::string_view s, const char* what) {
    // from_chars for double is fine on GCC 11+, but strtod also accepts
    // what users type ("1e-3").
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v)) {
        throw ConfigError(std::string("invalid ") + what + " '" + tmp + "'");
    }
    return v;
}

}  // namespace

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
    if (text.find(',') == std::string_view::npos) {
        const auto count = parse_unsigned(text, "seed count");
        if (count == 0) throw ConfigError("seed count must be positive");
        std::vector<std::uint64_t> seeds(count);
        for (std::uint64_t i = 0; i < count; ++i) seeds[i] = i;
        return seeds;
    }
    std::vector<std::uint64_t> seeds;
    for (auto part : split(text, ',')) {
        if (part.empty()) continue;
        seeds.push_back(parse_unsigned(part, "seed"));
    }
    if (seeds.empty()) throw ConfigError("seed list is empty");
    auto sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ConfigError("seeds must be distinct");
    }
    return seeds;
}

std::vector<std::size_t> parse_windows(std::string_view text) {
    std::vector<std::size_t> windows;
    for (auto part : split(text, ',')) {
        if (part.empty()) continue;
        const auto w = parse_unsigned(part, "window");
        if (w == 0) throw ConfigError("windows must be positive");
        windows.push_back(static_cast<std::size_t>(w));
    }
    if (windows.empty()) throw ConfigError("window list is empty");
    return windows;
}

void parse_tau_grid(std::string_view text, RunManifest& m) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("tau grid must look like MIN:MAX:COUNT");
    m.tau_min = parse_double(parts[0], "tau grid minimum");
    m.tau_max = parse_double(parts[1], "tau grid maximum");
    m.tau_count = static_cast<std::size_t>(parse_unsigned(parts[2], "tau grid count"));
    try {
        (void)m.grid();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

RunManifest resolve_manifest(const RunOptions& opts, const EmbeddingSet& set, std::string input_sha256) {
    RunManifest m;
    m.tool_version = kVersion;
    m.command = std::string(to_string(opts.command));
    m.input = opts.input;
    m.input_sha256 = std::move(input_sha256);
    m.k_max = opts.k_max ? *opts.k_max : default_k_max(set.size());
    if (m.k_max < 1 || m.k_max > set.size()) {
        throw ConfigError("--k-max must lie in [1, " + std::to_string(set.size()) + "]");
    }
    if (opts.tau_grid) parse_tau_grid(*opts.tau_grid, m);
    if (opts.tau) {
        if (!std::isfinite(*opts.tau) || *opts.tau < 0.0) throw ConfigError("--tau must be finite and >= 0");
        m.tau = *opts.tau;
        m.tau_explicit = true;
    }
    m.seeds = parse_seeds(opts.seeds.value_or("10"));
    if (opts.alpha) {
        if (!std::isfinite(*opts.alpha) || *opts.alpha < 0.0) throw ConfigError("--alpha must be finite and >= 0");
        m.alpha = *opts.alpha;
    }
    if (opts.min_clusters) m.min_clusters = *opts.min_clusters;
    if (opts.windows) m.windows = parse_windows(*opts.windows);
    if (opts.k) {
        if (*opts.k == 0) throw ConfigError("--k must be positive");
        m.k = opts.k;
    }
    if (opts.max_iter) {
        if (*opts.max_iter == 0) throw ConfigError("--max-iter must be positive");
        m.max_iter = *opts.max_iter;
    }
    m.format = opts.format;
    return m;
}

std::string manifest_json(const RunManifest& m) {
    ojson j;
    j["tool_version"] = m.tool_version;
    j["command"] = m.command;
    j["input"] = m.input;
    j["input_sha256"] = m.input_sha256;
    j["config"] = {{"k_max", m.k_max},
                   {"tau_grid", {{"min", m.tau_min}, {"max", m.tau_max}, {"count", m.tau_count}}},
                   {"tau", m.tau},
                   {"tau_explicit", m.tau_explicit},
                   {"seeds", m.seeds},
                   {"alpha", m.alpha},
                   {"min_clusters", m.min_clusters},
                   {"windows", m.windows},
                   {"k", m.k ? ojson(*m.k) : ojson(nullptr)},
                   {"max_iter", m.max_iter},
                   {"format", m.format == TableFormat::csv ? "csv" : "json"}};
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    try {
        RunManifest m;
        m.tool_version = j.at("tool_version").get<std::string>();
        m.command = j.at("command").get<std::string>();
        if (!parse_command(m.command)) throw ConfigError("manifest names unknown command '" + m.command + "'");
        m.input = j.at("input").get<std::string>();
        m.input_sha256 = j.at("input_sha256").get<std::string>();
        const auto& c = j.at("config");
        m.k_max = c.at("k_max").get<std::size_t>();
        m.tau_min = c.at("tau_grid").at("min").get<double>();
        m.tau_max = c.at("tau_grid").at("max").get<double>();
        m.tau_count = c.at("tau_grid").at("count").get<std::size_t>();
        m.tau = c.at("tau").get<double>();
        m.tau_explicit = c.at("tau_explicit").get<bool>();
        m.seeds = c.at("seeds").get<std::vector<std::uint64_t>>();
        m.alpha = c.at("alpha").get<double>();
        m.min_clusters = c.at("min_clusters").get<std::size_t>();
        m.windows = c.at("windows").get<std::vector<std::size_t>>();
        if (!c.at("k").is_null()) m.k = c.at("k").get<std::size_t>();
        m.max_iter = c.at("max_iter").get<std::size_t>();
        const auto fmt = c.at("format").get<std::string>();
        if (fmt != "csv" && fmt != "json") throw ConfigError("manifest format must be csv or json");
        m.format = fmt == "csv" ? TableFormat::csv : TableFormat::json;
        return m;
    } catch (const ojson::exception& e) {
        throw ConfigError(std::string("manifest is missing or mistypes a field: ") + e.what());
    }
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

SelectionConfig selection_config(const RunManifest& m, std::size_t threads) {
    SelectionConfig cfg;
    cfg.seeds = m.seeds;
    cfg.grid = m.grid();
    cfg.k_max = m.k_max;
    cfg.min_clusters = m.min_clusters;
    cfg.windows = m.windows;
    cfg.sweep.max_iter = m.max_iter;
    cfg.sweep.threads = threads;
    return cfg;
}

void add_profiles(PipelineOutput& out, const RunManifest& m, const std::vector<InformationProfile>& profiles,
                  const std::string& stem) {
    if (m.format == TableFormat::csv) {
        out.files.emplace_back(stem + ".csv", profile_csv(profiles));
    } else {
        out.files.emplace_back(stem + ".json", profile_json(profiles));
    }
}

void add_clustering(PipelineOutput& out, const EmbeddingSet& set, const ClusteringResult& r) {
    out.files.emplace_back("clustering.json", clustering_json(r));
    out.files.emplace_back("assignments.csv", assignments_csv(set, r));
}

void add_metrics(PipelineOutput& out, const RunManifest& m, const EmbeddingSet& set, const ClusteringResult& r) {
    const auto report = sdm_report(r.assignments, set, r.k_final, m.alpha);
    const auto joint = cooccurrence(r.assignments, set, r.k_final, m.alpha);
    out.files.emplace_back("sdm_report.json", sdm_report_json(report));
    if (m.format == TableFormat::csv) {
        out.files.emplace_back("cooccurrence.csv", cooccurrence_csv(joint));
        out.files.emplace_back("cooccurrence_row_normalized.csv", cooccurrence_csv(joint, true));
    } else {
        out.files.emplace_back("cooccurrence.json", cooccurrence_json(joint));
    }
}

ClusteringResult cluster_at(const EmbeddingSet& set, const RunManifest& m, double tau, std::uint64_t seed) {
    UdibConfig cfg{.k_max = m.k_max, .tau = tau, .max_iter = m.max_iter, .seed = seed};
    try {
        return run_udib(set, cfg);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw ConfigError(e.what());
        throw;
    }
}

MultiSeedSummary select_models(const EmbeddingSet& set, const SelectionConfig& cfg) {
    try {
        return multi_seed(set, cfg);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::NoRecommendation) {
            throw ConfigError(e.what());
        }
        throw;
    }
}

// The lowest-loss run with exactly k clusters across all seeds, re-run to
// recover its assignments.
ClusteringResult representative(const EmbeddingSet& set, const RunManifest& m, const MultiSeedSummary& summary,
                                std::size_t k) {
    const auto rep = representative_run(summary, k);
    if (!rep) throw ConfigError("no run in the sweep produced exactly " + std::to_string(k) + " clusters");
    auto result = cluster_at(set, m, rep->point.tau, rep->seed);
    if (result.k_final != k) {
        throw std::logic_error("re-run of the representative clustering did not reproduce k");
    }
    return result;
}

}  // namespace

PipelineOutput run_pipeline(const RunManifest& m, const EmbeddingSet& set, std::size_t threads) {
    const auto command = parse_command(m.command);
    if (!command) throw ConfigError("unknown command '" + m.command + "'");
    if (m.seeds.empty()) throw ConfigError("seed list is empty");

    PipelineOutput out;
    std::ostringstream summary;
    switch (*command) {
        case Command::validate: {
            out.files.emplace_back("corpus_summary.json", corpus_summary_json(set));
            summary << "valid corpus: " << set.size() << " records, dim " << set.dim();
            break;
        }
        case Command::cluster: {
            const auto r = cluster_at(set, m, m.tau, m.seeds.front());
            add_clustering(out, set, r);
            summary << "k_final=" << r.k_final << " iterations=" << r.iterations
                    << (r.converged ? " converged" : " max_iter reached");
            break;
        }
        case Command::sweep: {
            SweepOptions opts{.max_iter = m.max_iter, .smoothing_scale = std::nullopt, .threads = threads};
            std::vector<InformationProfile> profiles;
            try {
                profiles.push_back(sweep_tau(set, m.grid(), m.k_max, m.seeds.front(), opts));
            } catch (const Error& e) {
                if (e.code() == ErrorCode::InvalidConfig) throw ConfigError(e.what());
                throw;
            }
            add_profiles(out, m, profiles, "profile");
            summary << "swept " << m.tau_count << " tau values; curve has " << profiles.front().curve.size()
                    << " distinct cluster counts";
            break;
        }
        case Command::select:
        case Command::metrics:
        case Command::report: {
            if (*command == Command::metrics && m.tau_explicit) {
                const auto r = cluster_at(set, m, m.tau, m.seeds.front());
                add_clustering(out, set, r);
                add_metrics(out, m, set, r);
                summary << "metrics at tau=" << m.tau << " with k=" << r.k_final;
                break;
            }
            const auto cfg = selection_config(m, threads);
            const auto ms = select_models(set, cfg);
            const std::size_t k = m.k.value_or(ms.final_k);
            if (*command != Command::metrics) {
                std::vector<InformationProfile> profiles;
                for (const auto& s : ms.per_seed) profiles.push_back(s.profile);
                out.files.emplace_back("summary.json", summary_json(ms, cfg));
                add_profiles(out, m, profiles, "profiles");
            }
            if (*command == Command::report) {
                out.files.emplace_back("corpus_summary.json", corpus_summary_json(set));
            }
            if (*command != Command::select) {
                const auto r = representative(set, m, ms, k);
                add_clustering(out, set, r);
                add_metrics(out, m, set, r);
            }
            summary << "final_k=" << ms.final_k;
            if (*command != Command::select) summary << " metrics at k=" << k;
            break;
        }
    }
    out.files.emplace_back("manifest.json", manifest_json(m));
    out.summary = summary.str();
    return out;
}

void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, contents] : files) {
        const auto final_path = dir / name;
        const auto tmp_path = dir / ("." + name + ".tmp");
        {
            std::ofstream os(tmp_path, std::ios::binary | std::ios::trunc);
            if (!os) throw Error(ErrorCode::Io, "cannot write '" + tmp_path.string() + "'");
            os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
            if (!os) throw Error(ErrorCode::Io, "short write to '" + tmp_path.string() + "'");
        }
        std::filesystem::rename(tmp_path, final_path, ec);
        if (ec) throw Error(ErrorCode::Io, "cannot rename into '" + final_path.string() + "': " + ec.message());
    }
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedRecord:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::NonFiniteValue:
        case ErrorCode::DuplicateId:
        case ErrorCode::UnknownRole:
        case ErrorCode::EmptyCorpus:
        case ErrorCode::DegenerateCorpus:
        case ErrorCode::MissingRole:
        case ErrorCode::NoPairs:
        case ErrorCode::Io:
            return 2;
        case ErrorCode::InvalidConfig:
        case ErrorCode::NoRecommendation:
            return 3;
        default:
            return 1;
    }
}

}  // namespace udib::cli
