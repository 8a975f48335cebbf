#ifndef UDIB_DIVERGENCE_HPP
#define UDIB_DIVERGENCE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udib/clustering.hpp"
#include "udib/corpus.hpp"

namespace udib {

inline constexpr double kDefaultAlpha = 1e-4;

struct TopicDistribution {
    std::vector<double> probs;
    double alpha = 0.0;
    std::size_t support_count = 0;

    std::size_t k() const noexcept { return probs.size(); }
};

/// Empty fields match everything.
struct Selector {
    std::optional<Role> role{};
    std::optional<std::string> group_id{};
    std::optional<std::int64_t> generation_id{};

    bool matches(const RecordLabel& label) const noexcept;
};

/// probs[t] = (count_t + alpha) / (selected + k * alpha) over the records
/// matched by `selector`.
TopicDistribution topic_distribution(std::span<const Label> assignments, const EmbeddingSet& set,
                                     const Selector& selector, std::size_t k, double alpha);

/// Smoothed distribution built from raw counts.
TopicDistribution distribution_from_counts(std::span<const double> counts, double alpha);

double entropy_bits(std::span<const double> p);
double entropy_bits(const TopicDistribution& p);

/// Sum p log2(p/q). Throws SupportViolation if q_t = 0 where p_t > 0.
double kl_bits(std::span<const double> p, std::span<const double> q);
double kl_bits(const TopicDistribution& p, const TopicDistribution& q);

/// H((p+q)/2) - (H(p) + H(q))/2, clamped to [0, 1].
double jsd_bits(std::span<const double> p, std::span<const double> q);
double jsd_bits(const TopicDistribution& p, const TopicDistribution& q);

/// Row-major k x k joint distribution. Rows are prompt topics, columns are
/// answer topics.
struct CooccurrenceMatrix {
    std::size_t k = 0;
    std::vector<double> joint;
    std::size_t pair_count = 0;

    double at(std::size_t row, std::size_t col) const noexcept { return joint[row * k + col]; }
    std::vector<double> row_marginal() const;
    std::vector<double> col_marginal() const;
    /// Each row divided by its sum (zero rows stay zero); for heatmaps.
    std::vector<double> row_normalized() const;
};

CooccurrenceMatrix outer_product(std::span<const double> p, std::span<const double> q);

/// A prompt/answer pair: the answers of one (group, generation) and the
/// prompts that share its group.
struct TopicPair {
    std::string group_id;
    std::int64_t generation_id = 0;
    TopicDistribution prompt;
    TopicDistribution answer;
};

/// Every (group_id, generation_id) of the answer records whose group also
/// has at least one prompt record, in order of first appearance.
std::vector<TopicPair> topic_pairs(std::span<const Label> assignments, const EmbeddingSet& set,
                                   std::size_t k, double alpha);

/// Mean over pairs of outer(prompt, answer). Throws NoPairs.
CooccurrenceMatrix cooccurrence(std::span<const Label> assignments, const EmbeddingSet& set,
                                std::size_t k, double alpha);

/// Mutual information of a joint distribution. Throws NotNormalized unless
/// the entries sum to 1 within 1e-9.
double mutual_info_bits(const CooccurrenceMatrix& m);

struct SdmReport {
    double h_prompt_bits = 0.0;
    double h_answer_bits = 0.0;
    double entropy_diff_bits = 0.0;
    double global_jsd_bits = 0.0;
    double global_kl_pa_bits = 0.0;
    double global_kl_ap_bits = 0.0;
    double ensemble_jsd_bits = 0.0;
    double ensemble_kl_pa_bits = 0.0;
    double ensemble_kl_ap_bits = 0.0;
    double ensemble_mi_bits = 0.0;
    double averaged_mi_bits = 0.0;
    std::size_t k = 0;
    double alpha = 0.0;
    std::size_t pair_count = 0;
    TopicDistribution prompt;
    TopicDistribution answer;
};

/// Names of the construction choices behind the ensemble and co-occurrence
/// metrics, serialized with every report.
struct SdmConventions {
    static constexpr const char* prompt_pooling = "pooled";
    static constexpr const char* pair_key = "answer (group_id, generation_id); prompt side = all prompts of group_id";
    static constexpr const char* ensemble = "mean over pairs of divergence(pooled prompt, pair answer)";
    static constexpr const char* cooccurrence = "mean over pairs of outer(pair prompt, pair answer)";
    static constexpr const char* averaged_mi = "mean over pairs of MI(outer(pair prompt, pair answer))";
    static constexpr const char* units = "bits";
};

/**
 * @brief Divergence metrics between prompt and answer topic distributions.
 *
 * Global metrics compare the pooled prompt and pooled answer
 * distributions. Ensemble metrics average each pair's answer distribution
 * against the pooled prompt distribution. Throws MissingRole if either role
 * is absent and NoPairs if no answer group has a matching prompt group.
 */
SdmReport sdm_report(std::span<const Label> assignments, const EmbeddingSet& set, std::size_t k,
                     double alpha = kDefaultAlpha);

}  // namespace udib

#endif  // UDIB_DIVERGENCE_HPP
