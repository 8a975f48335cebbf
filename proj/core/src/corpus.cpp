#include "udib/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace udib {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownRole: return "UnknownRole";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::DegenerateCorpus: return "DegenerateCorpus";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NoClusters: return "NoClusters";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::CurveTooShort: return "CurveTooShort";
        case ErrorCode::NoEligiblePoint: return "NoEligiblePoint";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::NoRecommendation: return "NoRecommendation";
        case ErrorCode::EmptySelection: return "EmptySelection";
        case ErrorCode::KMismatch: return "KMismatch";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::NoPairs: return "NoPairs";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::MissingRole: return "MissingRole";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

std::string_view to_string(Role role) noexcept {
    return role == Role::prompt ? "prompt" : "answer";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
    if (text == "prompt") return Role::prompt;
    if (text == "answer") return Role::answer;
    return std::nullopt;
}

EmbeddingSet::EmbeddingSet(std::vector<EmbeddingRecord> records) {
    if (records.size() < 2) {
        throw Error(ErrorCode::EmptyCorpus,
                    "corpus needs at least 2 records, got " + std::to_string(records.size()));
    }
    dim_ = records.front().vector.size();
    if (dim_ == 0) {
        throw Error(ErrorCode::DimensionMismatch, "record '" + records.front().label.id +
                                                      "' has an empty embedding");
    }

    labels_.reserve(records.size());
    coords_.reserve(records.size() * dim_);
    std::unordered_set<std::string> seen;
    for (auto& rec : records) {
        if (rec.vector.size() != dim_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "record '" + rec.label.id + "' has dimension " +
                            std::to_string(rec.vector.size()) + ", expected " +
                            std::to_string(dim_));
        }
        for (double v : rec.vector) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteValue,
                            "record '" + rec.label.id + "' has a non-finite coordinate");
            }
        }
        if (!seen.insert(rec.label.id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate record id '" + rec.label.id + "'");
        }
        coords_.insert(coords_.end(), rec.vector.begin(), rec.vector.end());
        labels_.push_back(std::move(rec.label));
    }
}

std::size_t EmbeddingSet::count(Role role) const noexcept {
    std::size_t n = 0;
    for (const auto& l : labels_) n += (l.role == role);
    return n;
}

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(std::size_t line_no, ErrorCode code, const std::string& msg) {
    throw Error(code, "line " + std::to_string(line_no) + ": " + msg);
}

EmbeddingRecord parse_record(std::string_view line, std::size_t line_no) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        fail_at(line_no, ErrorCode::MalformedRecord, std::string("invalid JSON: ") + e.what());
    } catch (const json::out_of_range& e) {
        // number too large for a double, e.g. 1e999
        fail_at(line_no, ErrorCode::NonFiniteValue, e.what());
    }
    if (!doc.is_object()) fail_at(line_no, ErrorCode::MalformedRecord, "record is not an object");

    auto require_string = [&](const char* key) -> std::string {
        auto it = doc.find(key);
        if (it == doc.end() || !it->is_string()) {
            fail_at(line_no, ErrorCode::MalformedRecord,
                    std::string("missing or non-string field '") + key + "'");
        }
        return it->get<std::string>();
    };

    EmbeddingRecord rec;
    rec.label.id = require_string("id");
    const std::string role = require_string("role");
    auto parsed_role = parse_role(role);
    if (!parsed_role) fail_at(line_no, ErrorCode::UnknownRole, "unknown role '" + role + "'");
    rec.label.role = *parsed_role;

    if (auto it = doc.find("group_id"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) fail_at(line_no, ErrorCode::MalformedRecord, "group_id must be a string");
        rec.label.group_id = it->get<std::string>();
    }
    if (auto it = doc.find("generation_id"); it != doc.end() && !it->is_null()) {
        if (!it->is_number_integer()) {
            fail_at(line_no, ErrorCode::MalformedRecord, "generation_id must be an integer");
        }
        rec.label.generation_id = it->get<std::int64_t>();
    }
    if (auto it = doc.find("text"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) fail_at(line_no, ErrorCode::MalformedRecord, "text must be a string");
        rec.label.text = it->get<std::string>();
    }

    auto emb = doc.find("embedding");
    if (emb == doc.end() || !emb->is_array()) {
        fail_at(line_no, ErrorCode::MalformedRecord, "missing or non-array field 'embedding'");
    }
    rec.vector.reserve(emb->size());
    for (const auto& v : *emb) {
        if (!v.is_number()) fail_at(line_no, ErrorCode::MalformedRecord, "embedding entry is not a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail_at(line_no, ErrorCode::NonFiniteValue, "non-finite embedding entry");
        rec.vector.push_back(x);
    }
    return rec;
}

bool skip_line(std::string_view line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string_view::npos || line[first] == '#';
}

template <typename NextLine>
EmbeddingSet parse_lines(NextLine next) {
    std::vector<EmbeddingRecord> records;
    std::size_t dim = 0;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    std::string_view line;
    while (next(line)) {
        ++line_no;
        if (skip_line(line)) continue;
        auto rec = parse_record(line, line_no);
        // Checked here as well as in EmbeddingSet so the diagnostic has a line number.
        if (records.empty()) {
            dim = rec.vector.size();
        } else if (rec.vector.size() != dim) {
            fail_at(line_no, ErrorCode::DimensionMismatch,
                    "embedding has " + std::to_string(rec.vector.size()) +
                        " components, expected " + std::to_string(dim));
        }
        if (!ids.insert(rec.label.id).second) {
            fail_at(line_no, ErrorCode::DuplicateId, "duplicate record id '" + rec.label.id + "'");
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus contains no records");
    return EmbeddingSet(std::move(records));
}

}  // namespace

EmbeddingSet parse_corpus(std::span<const std::string> raw_lines) {
    std::size_t next_index = 0;
    return parse_lines([&](std::string_view& out) {
        if (next_index == raw_lines.size()) return false;
        out = raw_lines[next_index++];
        return true;
    });
}

EmbeddingSet parse_corpus(std::istream& in) {
    std::string buffer;
    return parse_lines([&](std::string_view& out) {
        if (!std::getline(in, buffer)) return false;
        out = buffer;
        return true;
    });
}

EmbeddingSet read_corpus_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open corpus file '" + path + "'");
    return parse_corpus(in);
}

std::string serialize_record(const EmbeddingSet& set, std::size_t i) {
    const auto& label = set.label(i);
    nlohmann::ordered_json doc;
    doc["id"] = label.id;
    doc["role"] = std::string(to_string(label.role));
    doc["group_id"] = label.group_id;
    doc["generation_id"] = label.generation_id;
    if (label.text) doc["text"] = *label.text;
    const auto p = set.point(i);
    doc["embedding"] = std::vector<double>(p.begin(), p.end());
    return doc.dump();
}

std::string serialize_corpus(const EmbeddingSet& set) {
    std::string out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        out += serialize_record(set, i);
        out += '\n';
    }
    return out;
}

PairwiseStats pairwise_stats(const EmbeddingSet& set) {
    const std::size_t n = set.size();
    const std::size_t d = set.dim();
    if (n < 2) throw Error(ErrorCode::EmptyCorpus, "pairwise statistics need at least 2 points");

    PairwiseStats stats;
    stats.centroid.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = set.point(i);
        for (std::size_t k = 0; k < d; ++k) stats.centroid[k] += x[k];
    }
    for (double& c : stats.centroid) c /= static_cast<double>(n);

    // (1/N^2) sum_{i,j} |x_i - x_j|^2 = 2 (1/N) sum_i |x_i - mu|^2
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = set.point(i);
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = x[k] - stats.centroid[k];
            acc += diff * diff;
        }
    }
    stats.total_variance = acc / static_cast<double>(n);
    stats.mean_sq_pair_dist = 2.0 * stats.total_variance;
    return stats;
}

double default_smoothing_scale(const PairwiseStats& stats, std::size_t n) {
    if (n < 2) throw Error(ErrorCode::EmptyCorpus, "smoothing scale needs n >= 2");
    if (!(stats.mean_sq_pair_dist > 0.0)) {
        throw Error(ErrorCode::DegenerateCorpus, "all points are identical; spread is zero");
    }
    return stats.mean_sq_pair_dist / (2.0 * std::log(static_cast<double>(n)));
}

}  // namespace udib
