#include "udib/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>

#include "detail/parallel.hpp"

namespace udib {

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
    if (count == 0 || !(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
        throw Error(ErrorCode::InvalidConfig, "tau grid needs 0 < lo <= hi and count >= 1");
    }
    if (count == 1) return {lo};
    if (lo == hi) throw Error(ErrorCode::InvalidConfig, "tau grid with count > 1 needs lo < hi");
    std::vector<double> grid(count);
    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(log_lo + step * static_cast<double>(i));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

std::vector<double> default_tau_grid() { return geometric_grid(1e-3, 1.0, 40); }

InformationProfile build_profile(std::uint64_t seed, std::vector<ProfilePoint> points) {
    InformationProfile profile;
    profile.seed = seed;
    profile.points = std::move(points);

    std::map<std::size_t, ProfilePoint> best;
    for (const auto& p : profile.points) {
        auto [it, inserted] = best.try_emplace(p.n_clusters, p);
        if (!inserted && p.total_loss() < it->second.total_loss()) it->second = p;
    }
    profile.curve.reserve(best.size());
    for (auto& [n, p] : best) profile.curve.push_back(p);

    for (std::size_t m = 1; m < profile.curve.size(); ++m) {
        if (profile.curve[m].normalized_info < profile.curve[m - 1].normalized_info - 1e-9) {
            profile.monotonicity_violations.push_back(m);
        }
    }
    return profile;
}

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidConfig, "tau grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] <= 0.0) {
            throw Error(ErrorCode::InvalidConfig, "tau grid values must be finite and positive");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw Error(ErrorCode::InvalidConfig, "tau grid must be strictly increasing");
        }
    }
}

}  // namespace

InformationProfile sweep_tau(const EmbeddingSet& set, std::span<const double> grid, std::size_t k_max,
                             std::uint64_t seed, const SweepOptions& options) {
    check_grid(grid);
    const auto stats = pairwise_stats(set);
    const double s2 = options.smoothing_scale ? *options.smoothing_scale
                                              : default_smoothing_scale(stats, set.size());
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
        throw Error(ErrorCode::InvalidConfig, "smoothing scale must be finite and positive");
    }
    if (!(stats.mean_sq_pair_dist > 0.0)) {
        throw Error(ErrorCode::DegenerateCorpus, "all points are identical; spread is zero");
    }
    const double info_bound = stats.mean_sq_pair_dist / (2.0 * s2);

    std::vector<ProfilePoint> points(grid.size());
    detail::parallel_for(grid.size(), options.threads, [&](std::size_t t) {
        UdibConfig cfg{.k_max = k_max, .tau = grid[t], .max_iter = options.max_iter, .seed = seed};
        const auto run = run_udib(set, cfg);
        auto& p = points[t];
        p.tau = grid[t];
        p.n_clusters = run.k_final;
        p.entropy_bits = run.entropy_bits;
        p.normalized_info = run.entropy_bits * std::numbers::ln2 / info_bound;
        p.distance_term = run.loss.distance_term;
        p.regularization_term = run.loss.regularization_term;
    });
    return build_profile(seed, std::move(points));
}

std::string_view to_string(Heuristic method) noexcept {
    return method == Heuristic::kink_angle ? "kink_angle" : "elbow";
}

namespace {

// Ties closer than this (degrees, or unit-square distance for the elbow) go
// to the smaller cluster count.
constexpr double kTieTolerance = 1e-9;

struct UnitCurve {
    std::vector<double> x;
    std::vector<double> y;
};

UnitCurve normalize(std::span<const ProfilePoint> curve) {
    UnitCurve out;
    out.x.reserve(curve.size());
    out.y.reserve(curve.size());
    for (const auto& p : curve) {
        out.x.push_back(static_cast<double>(p.n_clusters));
        out.y.push_back(p.normalized_info);
    }
    auto rescale = [](std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double low = *lo;
        const double range = *hi - low;
        for (double& e : v) e = range > 0.0 ? (e - low) / range : 0.0;
    };
    rescale(out.x);
    rescale(out.y);
    return out;
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

double angle_at(const UnitCurve& c, std::size_t m, std::size_t window) {
    const std::span<const double> x(c.x), y(c.y);
    const double in = ls_slope(x.subspan(m - window, window + 1), y.subspan(m - window, window + 1));
    const double out = ls_slope(x.subspan(m, window + 1), y.subspan(m, window + 1));
    return (std::atan(in) - std::atan(out)) * 180.0 / std::numbers::pi;
}

HeuristicRecommendation describe(const InformationProfile& profile, Heuristic method, std::size_t window,
                                 const ProfilePoint& at, double angle) {
    HeuristicRecommendation rec;
    rec.method = method;
    rec.window = window;
    rec.n_c = at.n_clusters;
    rec.angle_deg = angle;
    rec.distance_term = at.distance_term;
    rec.regularization_term = at.regularization_term;

    bool found = false;
    for (const auto& p : profile.points) {
        if (p.n_clusters != at.n_clusters) continue;
        rec.tau_min = found ? std::min(rec.tau_min, p.tau) : p.tau;
        rec.tau_max = found ? std::max(rec.tau_max, p.tau) : p.tau;
        found = true;
    }
    if (!found) {
        // Synthetic curves built without raw points.
        rec.tau_min = rec.tau_max = at.tau;
    }
    for (const auto& p : profile.points) {
        if (p.tau > rec.tau_min && p.tau < rec.tau_max && p.n_clusters != at.n_clusters) {
            rec.stability_gaps.push_back(p.tau);
        }
    }
    std::sort(rec.stability_gaps.begin(), rec.stability_gaps.end());
    return rec;
}

}  // namespace

HeuristicRecommendation kink_angle(const InformationProfile& profile, std::size_t window,
                                   std::size_t min_clusters) {
    if (window == 0) throw Error(ErrorCode::InvalidConfig, "kink window must be positive");
    const auto& curve = profile.curve;
    if (curve.size() < 2 * window + 1) {
        throw Error(ErrorCode::CurveTooShort, "kink angle with window " + std::to_string(window) +
                                                  " needs " + std::to_string(2 * window + 1) +
                                                  " curve points, have " + std::to_string(curve.size()));
    }
    const auto unit = normalize(curve);
    std::optional<std::size_t> best;
    double best_angle = 0.0;
    for (std::size_t m = window; m + window < curve.size(); ++m) {
        if (curve[m].n_clusters < min_clusters) continue;
        const double a = angle_at(unit, m, window);
        if (!best || a > best_angle + kTieTolerance) {
            best = m;
            best_angle = a;
        }
    }
    if (!best) {
        throw Error(ErrorCode::NoEligiblePoint, "no interior curve point has at least " +
                                                    std::to_string(min_clusters) + " clusters");
    }
    return describe(profile, Heuristic::kink_angle, window, curve[*best], best_angle);
}

HeuristicRecommendation elbow(const InformationProfile& profile, std::size_t min_clusters) {
    const auto& curve = profile.curve;
    if (curve.size() < 3) {
        throw Error(ErrorCode::CurveTooShort,
                    "elbow needs 3 curve points, have " + std::to_string(curve.size()));
    }
    const auto unit = normalize(curve);
    const std::size_t last = curve.size() - 1;
    const double dx = unit.x[last] - unit.x[0];
    const double dy = unit.y[last] - unit.y[0];
    const double chord = std::hypot(dx, dy);

    std::optional<std::size_t> best;
    double best_dist = 0.0;
    for (std::size_t m = 0; m < curve.size(); ++m) {
        if (curve[m].n_clusters < min_clusters) continue;
        const double rx = unit.x[m] - unit.x[0];
        const double ry = unit.y[m] - unit.y[0];
        const double dist = chord > 0.0 ? std::abs(dx * ry - dy * rx) / chord : std::hypot(rx, ry);
        if (!best || dist > best_dist + kTieTolerance) {
            best = m;
            best_dist = dist;
        }
    }
    if (!best) {
        throw Error(ErrorCode::NoEligiblePoint,
                    "no curve point has at least " + std::to_string(min_clusters) + " clusters");
    }
    const std::size_t m = *best;
    const double angle = (m >= 1 && m + 1 < curve.size()) ? angle_at(unit, m, 1) : 0.0;
    return describe(profile, Heuristic::elbow, 1, curve[m], angle);
}

HeuristicRecommendation meta_recommend(std::span<const HeuristicRecommendation> recs) {
    if (recs.empty()) throw Error(ErrorCode::EmptyInput, "no candidate recommendations");
    const HeuristicRecommendation* best = &recs.front();
    for (const auto& r : recs.subspan(1)) {
        if (r.n_c < best->n_c || (r.n_c == best->n_c && r.angle_deg > best->angle_deg)) best = &r;
    }
    return *best;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    for (double v : values) out.mean += v;
    out.mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / n);
    return out;
}

std::string format_mean_std(const MeanStd& value, int precision) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.*f \xC2\xB1 %.*f", precision, value.mean, precision, value.stddev);
    return buf;
}

MethodSummary summarize(std::span<const HeuristicRecommendation> recs) {
    MethodSummary s;
    s.runs = recs.size();
    auto column = [&](auto field) {
        std::vector<double> v;
        v.reserve(recs.size());
        for (const auto& r : recs) v.push_back(static_cast<double>(field(r)));
        return mean_std(v);
    };
    s.n_c = column([](const auto& r) { return r.n_c; });
    s.angle_deg = column([](const auto& r) { return r.angle_deg; });
    s.tau_min = column([](const auto& r) { return r.tau_min; });
    s.tau_max = column([](const auto& r) { return r.tau_max; });
    s.distance_term = column([](const auto& r) { return r.distance_term; });
    s.regularization_term = column([](const auto& r) { return r.regularization_term; });
    return s;
}

std::size_t mode_smallest(std::span<const std::size_t> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "mode of an empty sequence");
    std::map<std::size_t, std::size_t> counts;
    for (auto v : values) ++counts[v];
    std::size_t best = counts.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [v, c] : counts) {
        if (c > best_count) {  // ascending keys: equal counts keep the smaller value
            best = v;
            best_count = c;
        }
    }
    return best;
}

MultiSeedSummary multi_seed(const EmbeddingSet& set, const SelectionConfig& config) {
    if (config.seeds.empty()) throw Error(ErrorCode::InvalidConfig, "seed list is empty");
    if (std::set<std::uint64_t>(config.seeds.begin(), config.seeds.end()).size() != config.seeds.size()) {
        throw Error(ErrorCode::InvalidConfig, "seeds must be distinct");
    }
    if (config.windows.empty()) throw Error(ErrorCode::InvalidConfig, "window list is empty");
    check_grid(config.grid);

    MultiSeedSummary summary;
    summary.per_seed.reserve(config.seeds.size());
    for (auto seed : config.seeds) {
        SeedOutcome out;
        out.seed = seed;
        out.profile = sweep_tau(set, config.grid, config.k_max, seed, config.sweep);
        for (auto w : config.windows) {
            try {
                out.kink_candidates.push_back(kink_angle(out.profile, w, config.min_clusters));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::CurveTooShort && e.code() != ErrorCode::NoEligiblePoint) throw;
                out.notes.push_back("kink window " + std::to_string(w) + ": " + e.what());
            }
        }
        if (!out.kink_candidates.empty()) out.kink = meta_recommend(out.kink_candidates);
        try {
            out.elbow = elbow(out.profile, config.min_clusters);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CurveTooShort && e.code() != ErrorCode::NoEligiblePoint) throw;
            out.notes.push_back(std::string("elbow: ") + e.what());
        }
        summary.per_seed.push_back(std::move(out));
    }

    std::vector<HeuristicRecommendation> kinks, elbows;
    std::vector<std::size_t> votes;
    for (const auto& s : summary.per_seed) {
        if (s.kink) {
            kinks.push_back(*s.kink);
            votes.push_back(s.kink->n_c);
        }
        if (s.elbow) elbows.push_back(*s.elbow);
    }
    if (votes.empty()) {
        throw Error(ErrorCode::NoRecommendation, "no seed produced a kink-angle recommendation");
    }
    summary.final_k = mode_smallest(votes);
    summary.kink = summarize(kinks);
    summary.elbow = summarize(elbows);
    return summary;
}

std::optional<RepresentativeRun> representative_run(const MultiSeedSummary& summary, std::size_t k) {
    std::optional<RepresentativeRun> best;
    for (const auto& s : summary.per_seed) {
        for (const auto& p : s.profile.curve) {
            if (p.n_clusters != k) continue;
            if (!best || p.total_loss() < best->point.total_loss()) best = RepresentativeRun{s.seed, p};
        }
    }
    return best;
}

}  // namespace udib
