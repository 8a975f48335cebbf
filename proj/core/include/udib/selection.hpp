#ifndef UDIB_SELECTION_HPP
#define UDIB_SELECTION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "udib/clustering.hpp"
#include "udib/corpus.hpp"

namespace udib {

/// `count` values spaced geometrically over [lo, hi], both ends included.
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

/// The default sweep: 40 points over [1e-3, 1].
std::vector<double> default_tau_grid();

/// One clustering run of a tau sweep, reduced to what the profile needs.
struct ProfilePoint {
    double tau = 0.0;
    std::size_t n_clusters = 0;
    double entropy_bits = 0.0;
    /// H[q(c)] (nats) divided by the pairwise bound mean_sq_pair_dist / (2 s^2).
    double normalized_info = 0.0;
    double distance_term = 0.0;
    double regularization_term = 0.0;

    double total_loss() const noexcept { return distance_term + regularization_term; }
};

struct InformationProfile {
    std::uint64_t seed = 0;
    /// One entry per grid value, in grid order.
    std::vector<ProfilePoint> points;
    /// One entry per distinct n_clusters (ascending), the lowest-loss point
    /// among runs that produced that count.
    std::vector<ProfilePoint> curve;
    /// Curve indices m where normalized_info drops from m-1 to m by more
    /// than 1e-9. Reported, never fatal.
    std::vector<std::size_t> monotonicity_violations;
};

/// Builds curve and diagnostics from raw sweep points.
InformationProfile build_profile(std::uint64_t seed, std::vector<ProfilePoint> points);

struct SweepOptions {
    std::size_t max_iter = 200;
    /// Overrides the smoothing variance s^2; default_smoothing_scale otherwise.
    std::optional<double> smoothing_scale;
    /// Worker threads for independent runs; 0 picks hardware concurrency.
    std::size_t threads = 0;
};

/// Runs run_udib once per grid value at a fixed seed.
InformationProfile sweep_tau(const EmbeddingSet& set, std::span<const double> grid, std::size_t k_max,
                             std::uint64_t seed, const SweepOptions& options = {});

enum class Heuristic { kink_angle, elbow };

std::string_view to_string(Heuristic method) noexcept;

struct HeuristicRecommendation {
    Heuristic method = Heuristic::kink_angle;
    /// Regression window; 1 for elbow (angle reported at window 1).
    std::size_t window = 0;
    std::size_t n_c = 0;
    double angle_deg = 0.0;
    /// Smallest and largest grid tau whose run produced exactly n_c clusters.
    double tau_min = 0.0;
    double tau_max = 0.0;
    /// Loss terms of the curve point at n_c.
    double distance_term = 0.0;
    double regularization_term = 0.0;
    /// Grid tau values strictly inside [tau_min, tau_max] whose run
    /// produced a different cluster count.
    std::vector<double> stability_gaps;
};

inline constexpr std::size_t kDefaultMinClusters = 3;

/**
 * @brief Kink-angle heuristic on the information profile.
 *
 * The curve (x = n_clusters, y = normalized_info) is rescaled to the unit
 * square. For each curve index m with `window` neighbours on both sides,
 * least-squares lines are fitted over [m - window, m] and [m, m + window];
 * the signed angle is atan(slope_in) - atan(slope_out) in degrees. The
 * eligible point (n_clusters >= min_clusters) with the largest angle wins;
 * exact ties go to the smaller cluster count.
 *
 * Throws CurveTooShort if the curve has fewer than 2*window+1 points and
 * NoEligiblePoint if every interior point is below min_clusters.
 */
HeuristicRecommendation kink_angle(const InformationProfile& profile, std::size_t window,
                                   std::size_t min_clusters = kDefaultMinClusters);

/// Elbow heuristic: the normalized-curve point farthest from the chord
/// between the first and last points. Needs at least 3 curve points.
HeuristicRecommendation elbow(const InformationProfile& profile,
                              std::size_t min_clusters = kDefaultMinClusters);

/// Smallest n_c first, then the largest angle. Throws EmptyInput.
HeuristicRecommendation meta_recommend(std::span<const HeuristicRecommendation> recs);

struct MeanStd {
    double mean = 0.0;
    /// Population standard deviation.
    double stddev = 0.0;
};

MeanStd mean_std(std::span<const double> values);

/// "10.00 ± 1.84"
std::string format_mean_std(const MeanStd& value, int precision);

struct MethodSummary {
    /// Seeds that produced a recommendation for this method.
    std::size_t runs = 0;
    MeanStd n_c;
    MeanStd angle_deg;
    MeanStd tau_min;
    MeanStd tau_max;
    MeanStd distance_term;
    MeanStd regularization_term;
};

MethodSummary summarize(std::span<const HeuristicRecommendation> recs);

struct SeedOutcome {
    std::uint64_t seed = 0;
    InformationProfile profile;
    /// Per-window kink candidates that could be computed.
    std::vector<HeuristicRecommendation> kink_candidates;
    std::optional<HeuristicRecommendation> kink;
    std::optional<HeuristicRecommendation> elbow;
    /// Why a heuristic produced nothing for this seed, if it did not.
    std::vector<std::string> notes;
};

struct SelectionConfig {
    std::vector<std::uint64_t> seeds;
    std::vector<double> grid;
    std::size_t k_max = 0;
    std::size_t min_clusters = kDefaultMinClusters;
    std::vector<std::size_t> windows{2, 3};
    SweepOptions sweep;
};

struct MultiSeedSummary {
    std::vector<SeedOutcome> per_seed;
    /// Mode of the per-seed kink recommendations, ties toward fewer clusters.
    std::size_t final_k = 0;
    MethodSummary kink;
    MethodSummary elbow;
};

/// Mode with ties broken toward the smaller value. Throws EmptyInput.
std::size_t mode_smallest(std::span<const std::size_t> values);

/**
 * @brief Multi-seed model selection.
 *
 * Sweeps tau for every seed, takes the kink angle at each window and
 * reduces those candidates with meta_recommend, and computes the elbow.
 * final_k is the mode of the per-seed kink recommendations. Seeds whose
 * curve supports no kink candidate are kept in per_seed (with a note) and
 * left out of the mode; if no seed yields one, throws NoRecommendation.
 */
MultiSeedSummary multi_seed(const EmbeddingSet& set, const SelectionConfig& config);

/// Where the lowest-loss run with exactly k clusters came from.
struct RepresentativeRun {
    std::uint64_t seed = 0;
    ProfilePoint point;
};

/// Scans every seed's curve for n_clusters == k; ties keep the earlier seed.
std::optional<RepresentativeRun> representative_run(const MultiSeedSummary& summary, std::size_t k);

}  // namespace udib

#endif  // UDIB_SELECTION_HPP
