#ifndef UDIB_EXPORT_HPP
#define UDIB_EXPORT_HPP

#include <span>
#include <string>

#include "udib/clustering.hpp"
#include "udib/corpus.hpp"
#include "udib/divergence.hpp"
#include "udib/selection.hpp"

// Text renderings of the library's results. Every function returns the full
// document (UTF-8, LF line endings) and throws std::domain_error rather than
// write a non-finite number.
namespace udib {

std::string format_number(double value);

std::string clustering_json(const ClusteringResult& result);

/// id,role,group_id,generation_id,cluster
std::string assignments_csv(const EmbeddingSet& set, const ClusteringResult& result);

inline constexpr const char* kProfileCsvHeader =
    "seed,tau,n_clusters,entropy_bits,normalized_info,distance_term,regularization_term";

std::string profile_csv(std::span<const InformationProfile> profiles);
std::string profile_json(std::span<const InformationProfile> profiles);

std::string summary_json(const MultiSeedSummary& summary, const SelectionConfig& config);

std::string sdm_report_json(const SdmReport& report);

/// k rows x k columns, 6 decimal places, no header.
std::string cooccurrence_csv(const CooccurrenceMatrix& m, bool row_normalized = false);

/// {"k", "pair_count", "joint", "row_normalized"} with rows as arrays.
std::string cooccurrence_json(const CooccurrenceMatrix& m);

std::string corpus_summary_json(const EmbeddingSet& set);

}  // namespace udib

#endif  // UDIB_EXPORT_HPP
