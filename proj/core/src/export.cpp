#include "udib/export.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace udib {

using ojson = nlohmann::ordered_json;

namespace {

double finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::domain_error(std::string("refusing to write non-finite ") + what);
    return v;
}

std::string dump(const ojson& doc) { return doc.dump(2) + "\n"; }

ojson recommendation_json(const HeuristicRecommendation& r) {
    ojson j;
    j["method"] = std::string(to_string(r.method));
    j["window"] = r.window;
    j["n_c"] = r.n_c;
    j["angle_deg"] = finite(r.angle_deg, "angle");
    j["tau_min"] = finite(r.tau_min, "tau_min");
    j["tau_max"] = finite(r.tau_max, "tau_max");
    j["distance_term"] = finite(r.distance_term, "distance term");
    j["regularization_term"] = finite(r.regularization_term, "regularization term");
    j["stability_gaps"] = r.stability_gaps;
    return j;
}

ojson mean_std_json(const MeanStd& m, int precision) {
    ojson j;
    j["mean"] = finite(m.mean, "mean");
    j["std"] = finite(m.stddev, "std");
    j["display"] = format_mean_std(m, precision);
    return j;
}

ojson method_json(const MethodSummary& s) {
    ojson j;
    j["runs"] = s.runs;
    j["n_c"] = mean_std_json(s.n_c, 2);
    j["angle_deg"] = mean_std_json(s.angle_deg, 2);
    j["tau_min"] = mean_std_json(s.tau_min, 4);
    j["tau_max"] = mean_std_json(s.tau_max, 4);
    j["distance_term"] = mean_std_json(s.distance_term, 4);
    j["regularization_term"] = mean_std_json(s.regularization_term, 4);
    return j;
}

ojson distribution_json(const TopicDistribution& d) {
    ojson j;
    for (double p : d.probs) finite(p, "probability");
    j["probs"] = d.probs;
    j["alpha"] = d.alpha;
    j["support_count"] = d.support_count;
    return j;
}

}  // namespace

std::string format_number(double value) {
    finite(value, "number");
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

std::string clustering_json(const ClusteringResult& result) {
    ojson j;
    j["k_final"] = result.k_final;
    j["tau"] = finite(result.tau, "tau");
    j["seed"] = result.seed;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["entropy_bits"] = finite(result.entropy_bits, "entropy");
    j["loss"] = {{"distance_term", finite(result.loss.distance_term, "distance term")},
                 {"regularization_term", finite(result.loss.regularization_term, "regularization term")},
                 {"total", finite(result.loss.total, "loss")}};
    j["assignments"] = result.assignments;
    return dump(j);
}

std::string assignments_csv(const EmbeddingSet& set, const ClusteringResult& result) {
    std::string out = "id,role,group_id,generation_id,cluster\n";
    auto quoted = [](const std::string& s) {
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& l = set.label(i);
        out += quoted(l.id) + ',' + std::string(to_string(l.role)) + ',' + quoted(l.group_id) + ',' +
               std::to_string(l.generation_id) + ',' + std::to_string(result.assignments.at(i)) + '\n';
    }
    return out;
}

std::string profile_csv(std::span<const InformationProfile> profiles) {
    std::string out = kProfileCsvHeader;
    out += '\n';
    for (const auto& prof : profiles) {
        for (const auto& p : prof.points) {
            out += std::to_string(prof.seed) + ',' + format_number(p.tau) + ',' + std::to_string(p.n_clusters) +
                   ',' + format_number(p.entropy_bits) + ',' + format_number(p.normalized_info) + ',' +
                   format_number(p.distance_term) + ',' + format_number(p.regularization_term) + '\n';
        }
    }
    return out;
}

namespace {

ojson point_json(const ProfilePoint& p) {
    ojson j;
    j["tau"] = finite(p.tau, "tau");
    j["n_clusters"] = p.n_clusters;
    j["entropy_bits"] = finite(p.entropy_bits, "entropy");
    j["normalized_info"] = finite(p.normalized_info, "normalized info");
    j["distance_term"] = finite(p.distance_term, "distance term");
    j["regularization_term"] = finite(p.regularization_term, "regularization term");
    return j;
}

ojson profile_object(const InformationProfile& prof) {
    ojson j;
    j["seed"] = prof.seed;
    j["points"] = ojson::array();
    for (const auto& p : prof.points) j["points"].push_back(point_json(p));
    j["curve"] = ojson::array();
    for (const auto& p : prof.curve) j["curve"].push_back(point_json(p));
    j["monotonicity_violations"] = prof.monotonicity_violations;
    return j;
}

}  // namespace

std::string profile_json(std::span<const InformationProfile> profiles) {
    ojson j = ojson::array();
    for (const auto& prof : profiles) j.push_back(profile_object(prof));
    return dump(j);
}

std::string summary_json(const MultiSeedSummary& summary, const SelectionConfig& config) {
    ojson j;
    j["final_k"] = summary.final_k;
    j["config"] = {{"seeds", config.seeds},
                   {"tau_grid", config.grid},
                   {"k_max", config.k_max},
                   {"min_clusters", config.min_clusters},
                   {"windows", config.windows},
                   {"max_iter", config.sweep.max_iter}};
    if (config.sweep.smoothing_scale) j["config"]["smoothing_scale"] = *config.sweep.smoothing_scale;

    ojson per_seed = ojson::array();
    for (const auto& s : summary.per_seed) {
        ojson e;
        e["seed"] = s.seed;
        e["kink_angle"] = s.kink ? recommendation_json(*s.kink) : ojson(nullptr);
        e["kink_candidates"] = ojson::array();
        for (const auto& c : s.kink_candidates) e["kink_candidates"].push_back(recommendation_json(c));
        e["elbow"] = s.elbow ? recommendation_json(*s.elbow) : ojson(nullptr);
        e["curve_n_clusters"] = ojson::array();
        for (const auto& p : s.profile.curve) e["curve_n_clusters"].push_back(p.n_clusters);
        e["monotonicity_violations"] = s.profile.monotonicity_violations;
        e["notes"] = s.notes;
        per_seed.push_back(std::move(e));
    }
    j["per_seed"] = std::move(per_seed);
    j["kink_angle"] = method_json(summary.kink);
    j["elbow"] = method_json(summary.elbow);
    return dump(j);
}

std::string sdm_report_json(const SdmReport& r) {
    ojson j;
    j["h_prompt_bits"] = finite(r.h_prompt_bits, "entropy");
    j["h_answer_bits"] = finite(r.h_answer_bits, "entropy");
    j["entropy_diff_bits"] = finite(r.entropy_diff_bits, "entropy difference");
    j["global_jsd_bits"] = finite(r.global_jsd_bits, "JSD");
    j["global_kl_pa_bits"] = finite(r.global_kl_pa_bits, "KL");
    j["global_kl_ap_bits"] = finite(r.global_kl_ap_bits, "KL");
    j["ensemble_jsd_bits"] = finite(r.ensemble_jsd_bits, "JSD");
    j["ensemble_kl_pa_bits"] = finite(r.ensemble_kl_pa_bits, "KL");
    j["ensemble_kl_ap_bits"] = finite(r.ensemble_kl_ap_bits, "KL");
    j["ensemble_mi_bits"] = finite(r.ensemble_mi_bits, "MI");
    j["averaged_mi_bits"] = finite(r.averaged_mi_bits, "MI");
    j["k"] = r.k;
    j["alpha"] = r.alpha;
    j["pair_count"] = r.pair_count;
    j["prompt_distribution"] = distribution_json(r.prompt);
    j["answer_distribution"] = distribution_json(r.answer);
    j["conventions"] = {{"prompt_pooling", SdmConventions::prompt_pooling},
                        {"pair_key", SdmConventions::pair_key},
                        {"ensemble", SdmConventions::ensemble},
                        {"cooccurrence", SdmConventions::cooccurrence},
                        {"averaged_mi", SdmConventions::averaged_mi},
                        {"units", SdmConventions::units}};
    return dump(j);
}

std::string cooccurrence_csv(const CooccurrenceMatrix& m, bool row_normalized) {
    const auto values = row_normalized ? m.row_normalized() : m.joint;
    std::string out;
    char buf[48];
    for (std::size_t r = 0; r < m.k; ++r) {
        for (std::size_t c = 0; c < m.k; ++c) {
            std::snprintf(buf, sizeof(buf), "%.6f", finite(values[r * m.k + c], "matrix entry"));
            if (c) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string cooccurrence_json(const CooccurrenceMatrix& m) {
    auto rows = [&](const std::vector<double>& values) {
        ojson out = ojson::array();
        for (std::size_t r = 0; r < m.k; ++r) {
            ojson row = ojson::array();
            for (std::size_t c = 0; c < m.k; ++c) row.push_back(finite(values[r * m.k + c], "matrix entry"));
            out.push_back(std::move(row));
        }
        return out;
    };
    ojson j;
    j["k"] = m.k;
    j["pair_count"] = m.pair_count;
    j["joint"] = rows(m.joint);
    j["row_normalized"] = rows(m.row_normalized());
    return dump(j);
}

std::string corpus_summary_json(const EmbeddingSet& set) {
    const auto stats = pairwise_stats(set);
    std::set<std::string> groups;
    for (const auto& l : set.labels()) groups.insert(l.group_id);
    ojson j;
    j["count"] = set.size();
    j["dim"] = set.dim();
    j["prompts"] = set.count(Role::prompt);
    j["answers"] = set.count(Role::answer);
    j["groups"] = groups.size();
    j["total_variance"] = finite(stats.total_variance, "variance");
    j["mean_sq_pair_dist"] = finite(stats.mean_sq_pair_dist, "pair distance");
    if (stats.mean_sq_pair_dist > 0.0) {
        j["default_smoothing_scale"] = default_smoothing_scale(stats, set.size());
    } else {
        j["default_smoothing_scale"] = nullptr;
    }
    return dump(j);
}

}  // namespace udib
