#ifndef UDIB_CLUSTERING_HPP
#define UDIB_CLUSTERING_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "udib/corpus.hpp"

namespace udib {

/// Cluster label as produced by the assignment sweep. Labels are not
/// necessarily contiguous until a result is compacted.
using Label = std::uint32_t;

struct UdibConfig {
    /// Number of labels drawn at initialization.
    std::size_t k_max = 0;
    /// Effective temperature; scales the cluster-entropy penalty.
    double tau = 0.0;
    std::size_t max_iter = 200;
    std::uint64_t seed = 0;
};

/// Throws InvalidConfig unless 1 <= k_max <= N, tau is finite and >= 0,
/// and max_iter >= 1.
void validate(const UdibConfig& config, const EmbeddingSet& set);

/// Sufficient statistics of one non-empty cluster.
struct ClusterSummary {
    Label label = 0;
    std::size_t size = 0;
    std::vector<double> mean;
    /// (1/n_c) sum_{j in c} |x_j - mu_c|^2
    double spread = 0.0;
    /// n_c / N
    double marginal = 0.0;
};

/// Statistics of every non-empty cluster, sorted by label. Labels that are
/// not used by any point have no entry.
struct ClusterStats {
    std::vector<ClusterSummary> clusters;
    std::size_t total = 0;
};

ClusterStats cluster_stats(const EmbeddingSet& set, std::span<const Label> assignments);

/**
 * @brief Upper-bounded per-point Lagrangian of a point against one cluster.
 *
 * Returns |x - mu_c|^2 + v_c - tau * ln q_c. The first two terms equal the
 * average squared distance (1/n_c) sum_j |x - x_j|^2 over the cluster, i.e.
 * the Jensen upper bound on the KL divergence between the point's Gaussian
 * and the cluster's Gaussian mixture, rescaled by 2 s^2 / beta.
 */
double cluster_affinity(std::span<const double> point, const ClusterSummary& cluster, double tau);

/// One synchronous sweep: every point takes the argmin of cluster_affinity
/// over the clusters in `stats` (all scored against the same statistics).
/// Ties go to the lowest label. Throws NoClusters if `stats` is empty.
std::vector<Label> assignment_step(const EmbeddingSet& set, const ClusterStats& stats, double tau);

struct LossBreakdown {
    /// Mean over points of the average squared distance to their cluster.
    double distance_term = 0.0;
    /// tau * H[q(c)], entropy in nats.
    double regularization_term = 0.0;
    double total = 0.0;
};

LossBreakdown total_loss(const EmbeddingSet& set, std::span<const Label> assignments, double tau);

/// Entropy of the cluster marginals q_c = n_c / N, in nats.
double cluster_entropy_nats(std::span<const Label> assignments);

struct ClusteringResult {
    /// Compact labels 0..k_final-1, numbered in order of first appearance.
    std::vector<Label> assignments;
    std::size_t k_final = 0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    LossBreakdown loss;
    std::size_t iterations = 0;
    bool converged = false;
    double entropy_bits = 0.0;
};

/// Random initial labels drawn uniformly from [0, k_max). Uses a portable
/// bounded draw on mt19937_64, so the sequence is identical across standard
/// libraries.
std::vector<Label> initial_assignments(std::size_t n, std::size_t k_max, std::uint64_t seed);

/// Relabels to 0..k-1 in order of first appearance.
std::vector<Label> compact_labels(std::span<const Label> assignments);

/**
 * @brief Runs UDIB from a random start until the assignments stop changing.
 *
 * Alternates assignment_step and cluster_stats. Clusters that lose all
 * their points drop out of the statistics and never come back. Stops at a
 * fixed point (converged = true) or after config.max_iter sweeps. The
 * result is a deterministic function of (set, config).
 */
ClusteringResult run_udib(const EmbeddingSet& set, const UdibConfig& config);

}  // namespace udib

#endif  // UDIB_CLUSTERING_HPP
