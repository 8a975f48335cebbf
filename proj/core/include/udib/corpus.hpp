#ifndef UDIB_CORPUS_HPP
#define UDIB_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "udib/error.hpp"

namespace udib {

enum class Role { prompt, answer };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

/// Everything about a record except its coordinates.
struct RecordLabel {
    std::string id;
    Role role = Role::prompt;
    /// Ties an answer to the prompt variant that produced it.
    std::string group_id;
    std::int64_t generation_id = 0;
    std::optional<std::string> text;

    friend bool operator==(const RecordLabel&, const RecordLabel&) = default;
};

struct EmbeddingRecord {
    RecordLabel label;
    std::vector<double> vector;
};

/**
 * @brief Validated, immutable corpus of labeled embedding vectors.
 *
 * Coordinates are stored row-major in one contiguous buffer, so `point(i)`
 * is a cheap view. Construction enforces the corpus invariants: at least two
 * records, a common dimension taken from the first record, finite
 * coordinates, and unique ids.
 */
class EmbeddingSet {
public:
    explicit EmbeddingSet(std::vector<EmbeddingRecord> records);

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> point(std::size_t i) const noexcept {
        return {coords_.data() + i * dim_, dim_};
    }
    const RecordLabel& label(std::size_t i) const noexcept { return labels_[i]; }
    std::span<const RecordLabel> labels() const noexcept { return labels_; }

    /// Row-major N x d coordinate buffer.
    std::span<const double> coordinates() const noexcept { return coords_; }

    std::size_t count(Role role) const noexcept;

private:
    std::vector<RecordLabel> labels_;
    std::vector<double> coords_;
    std::size_t dim_ = 0;
};

/// Parses the line-delimited record format. Blank lines and lines starting
/// with '#' are skipped; errors carry the 1-based line number.
EmbeddingSet parse_corpus(std::span<const std::string> raw_lines);
EmbeddingSet parse_corpus(std::istream& in);
EmbeddingSet read_corpus_file(const std::string& path);

/// One record in the line-delimited format (no trailing newline). Numbers
/// are written in shortest round-trip form, so parse(serialize(x)) == x.
std::string serialize_record(const EmbeddingSet& set, std::size_t i);
std::string serialize_corpus(const EmbeddingSet& set);

struct PairwiseStats {
    std::vector<double> centroid;
    /// (1/N) sum_i |x_i - mu|^2
    double total_variance = 0.0;
    /// (1/N^2) sum_{i,j} |x_i - x_j|^2, equal to 2 * total_variance.
    double mean_sq_pair_dist = 0.0;
};

PairwiseStats pairwise_stats(const EmbeddingSet& set);

/// Smoothing variance s^2 at which the pairwise bound on I(i;x),
/// mean_sq_pair_dist / (2 s^2), equals ln n. With that choice the
/// normalized information fraction H[c] / bound never exceeds one.
double default_smoothing_scale(const PairwiseStats& stats, std::size_t n);

}  // namespace udib

#endif  // UDIB_CORPUS_HPP
