#include "udib/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "detail/numeric.hpp"

namespace udib {

void validate(const UdibConfig& config, const EmbeddingSet& set) {
    if (config.k_max < 1 || config.k_max > set.size()) {
        throw Error(ErrorCode::InvalidConfig, "k_max must lie in [1, " + std::to_string(set.size()) +
                                                  "], got " + std::to_string(config.k_max));
    }
    if (!std::isfinite(config.tau) || config.tau < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "tau must be finite and non-negative");
    }
    if (config.max_iter < 1) throw Error(ErrorCode::InvalidConfig, "max_iter must be at least 1");
}

namespace {

void check_length(const EmbeddingSet& set, std::span<const Label> assignments) {
    if (assignments.size() != set.size()) {
        throw Error(ErrorCode::LengthMismatch, "assignments have length " +
                                                   std::to_string(assignments.size()) +
                                                   ", corpus has " + std::to_string(set.size()));
    }
}

// Distinct labels, ascending, and each point's index into that list.
struct LabelIndex {
    std::vector<Label> labels;
    std::vector<std::size_t> slot;
};

LabelIndex index_labels(std::span<const Label> assignments) {
    LabelIndex idx;
    idx.labels.assign(assignments.begin(), assignments.end());
    std::sort(idx.labels.begin(), idx.labels.end());
    idx.labels.erase(std::unique(idx.labels.begin(), idx.labels.end()), idx.labels.end());
    idx.slot.reserve(assignments.size());
    for (Label a : assignments) {
        idx.slot.push_back(static_cast<std::size_t>(
            std::lower_bound(idx.labels.begin(), idx.labels.end(), a) - idx.labels.begin()));
    }
    return idx;
}

}  // namespace

ClusterStats cluster_stats(const EmbeddingSet& set, std::span<const Label> assignments) {
    check_length(set, assignments);
    const std::size_t n = set.size();
    const std::size_t d = set.dim();
    const auto idx = index_labels(assignments);

    ClusterStats stats;
    stats.total = n;
    stats.clusters.resize(idx.labels.size());
    for (std::size_t c = 0; c < idx.labels.size(); ++c) {
        stats.clusters[c].label = idx.labels[c];
        stats.clusters[c].mean.assign(d, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& cl = stats.clusters[idx.slot[i]];
        ++cl.size;
        const auto x = set.point(i);
        for (std::size_t k = 0; k < d; ++k) cl.mean[k] += x[k];
    }
    for (auto& cl : stats.clusters) {
        const double inv = 1.0 / static_cast<double>(cl.size);
        for (double& m : cl.mean) m *= inv;
        cl.marginal = static_cast<double>(cl.size) / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& cl = stats.clusters[idx.slot[i]];
        cl.spread += detail::squared_distance(set.point(i), cl.mean);
    }
    for (auto& cl : stats.clusters) {
        // A singleton's only deviation is exactly zero; keep it that way.
        cl.spread = cl.size == 1 ? 0.0 : cl.spread / static_cast<double>(cl.size);
    }
    return stats;
}

double cluster_affinity(std::span<const double> point, const ClusterSummary& cluster, double tau) {
    const double avg_sq_dist = detail::squared_distance(point, cluster.mean) + cluster.spread;
    if (tau == 0.0) return avg_sq_dist;
    return avg_sq_dist - tau * std::log(cluster.marginal);
}

std::vector<Label> assignment_step(const EmbeddingSet& set, const ClusterStats& stats, double tau) {
    if (stats.clusters.empty()) throw Error(ErrorCode::NoClusters, "no non-empty clusters to assign to");

    // The entropy part of the affinity does not depend on the point.
    std::vector<double> offset(stats.clusters.size());
    for (std::size_t c = 0; c < stats.clusters.size(); ++c) {
        const auto& cl = stats.clusters[c];
        offset[c] = cl.spread - (tau == 0.0 ? 0.0 : tau * std::log(cl.marginal));
    }

    std::vector<Label> next(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto x = set.point(i);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < stats.clusters.size(); ++c) {
            const double score = detail::squared_distance(x, stats.clusters[c].mean) + offset[c];
            if (score < best) {
                best = score;
                best_c = c;
            }
        }
        next[i] = stats.clusters[best_c].label;
    }
    return next;
}

double cluster_entropy_nats(std::span<const Label> assignments) {
    if (assignments.empty()) return 0.0;
    const auto idx = index_labels(assignments);
    std::vector<std::size_t> counts(idx.labels.size(), 0);
    for (std::size_t s : idx.slot) ++counts[s];
    const double n = static_cast<double>(assignments.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        const double q = static_cast<double>(c) / n;
        if (q < 1.0) h -= q * std::log(q);
    }
    return h;
}

LossBreakdown total_loss(const EmbeddingSet& set, std::span<const Label> assignments, double tau) {
    const auto stats = cluster_stats(set, assignments);

    LossBreakdown loss;
    double acc = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        // stats.clusters is sorted by label
        const Label a = assignments[i];
        if (stats.clusters[c].label != a) {
            c = static_cast<std::size_t>(
                std::lower_bound(stats.clusters.begin(), stats.clusters.end(), a,
                                 [](const ClusterSummary& s, Label l) { return s.label < l; }) -
                stats.clusters.begin());
        }
        const auto& cl = stats.clusters[c];
        acc += detail::squared_distance(set.point(i), cl.mean) + cl.spread;
    }
    loss.distance_term = acc / static_cast<double>(set.size());
    loss.regularization_term = tau == 0.0 ? 0.0 : tau * cluster_entropy_nats(assignments);
    loss.total = loss.distance_term + loss.regularization_term;
    return loss;
}

std::vector<Label> initial_assignments(std::size_t n, std::size_t k_max, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::uint64_t k = k_max;
    // Rejection keeps the draw unbiased: accept r only above 2^64 mod k.
    const std::uint64_t threshold = (0 - k) % k;
    std::vector<Label> labels(n);
    for (auto& l : labels) {
        std::uint64_t r = rng();
        while (r < threshold) r = rng();
        l = static_cast<Label>(r % k);
    }
    return labels;
}

std::vector<Label> compact_labels(std::span<const Label> assignments) {
    std::vector<Label> out(assignments.size());
    std::vector<std::pair<Label, Label>> seen;  // (original, compact)
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        auto it = std::find_if(seen.begin(), seen.end(),
                               [&](const auto& p) { return p.first == assignments[i]; });
        if (it == seen.end()) {
            seen.emplace_back(assignments[i], static_cast<Label>(seen.size()));
            out[i] = seen.back().second;
        } else {
            out[i] = it->second;
        }
    }
    return out;
}

ClusteringResult run_udib(const EmbeddingSet& set, const UdibConfig& config) {
    validate(config, set);

    ClusteringResult result;
    result.tau = config.tau;
    result.seed = config.seed;

    auto assignments = initial_assignments(set.size(), config.k_max, config.seed);
    auto stats = cluster_stats(set, assignments);
    for (std::size_t sweep = 1; sweep <= config.max_iter; ++sweep) {
        auto next = assignment_step(set, stats, config.tau);
        result.iterations = sweep;
        if (next == assignments) {
            result.converged = true;
            break;
        }
        assignments = std::move(next);
        stats = cluster_stats(set, assignments);
    }

    result.assignments = compact_labels(assignments);
    result.k_final = stats.clusters.size();
    result.loss = total_loss(set, result.assignments, config.tau);
    result.entropy_bits = cluster_entropy_nats(result.assignments) / std::numbers::ln2;
    return result;
}

}  // namespace udib
