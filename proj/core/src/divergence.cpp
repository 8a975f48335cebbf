#include "udib/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace udib {

bool Selector::matches(const RecordLabel& label) const noexcept {
    return (!role || label.role == *role) && (!group_id || label.group_id == *group_id) &&
           (!generation_id || label.generation_id == *generation_id);
}

namespace {

void check_assignments(std::span<const Label> assignments, const EmbeddingSet& set, std::size_t k) {
    if (assignments.size() != set.size()) {
        throw Error(ErrorCode::LengthMismatch, "assignments have length " +
                                                   std::to_string(assignments.size()) +
                                                   ", corpus has " + std::to_string(set.size()));
    }
    if (k == 0) throw Error(ErrorCode::KMismatch, "topic count must be positive");
    for (Label a : assignments) {
        if (a >= k) {
            throw Error(ErrorCode::KMismatch, "assignment " + std::to_string(a) +
                                                  " is outside [0, " + std::to_string(k) + ")");
        }
    }
}

void check_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "alpha must be finite and non-negative");
    }
}

void check_same_length(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw Error(ErrorCode::KMismatch, "distributions have different lengths " +
                                              std::to_string(p.size()) + " and " + std::to_string(q.size()));
    }
}

}  // namespace

TopicDistribution distribution_from_counts(std::span<const double> counts, double alpha) {
    check_alpha(alpha);
    TopicDistribution dist;
    dist.alpha = alpha;
    double total = 0.0;
    for (double c : counts) total += c;
    dist.support_count = static_cast<std::size_t>(total);
    const double denom = total + static_cast<double>(counts.size()) * alpha;
    if (!(denom > 0.0)) throw Error(ErrorCode::EmptySelection, "no mass to normalize");
    dist.probs.reserve(counts.size());
    for (double c : counts) dist.probs.push_back((c + alpha) / denom);
    return dist;
}

TopicDistribution topic_distribution(std::span<const Label> assignments, const EmbeddingSet& set,
                                     const Selector& selector, std::size_t k, double alpha) {
    check_assignments(assignments, set, k);
    std::vector<double> counts(k, 0.0);
    std::size_t selected = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!selector.matches(set.label(i))) continue;
        counts[assignments[i]] += 1.0;
        ++selected;
    }
    if (selected == 0) throw Error(ErrorCode::EmptySelection, "selector matches no records");
    return distribution_from_counts(counts, alpha);
}

double entropy_bits(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

double entropy_bits(const TopicDistribution& p) { return entropy_bits(p.probs); }

double kl_bits(std::span<const double> p, std::span<const double> q) {
    check_same_length(p, q);
    double kl = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
        if (p[t] <= 0.0) continue;
        if (q[t] <= 0.0) {
            throw Error(ErrorCode::SupportViolation,
                        "q is zero at topic " + std::to_string(t) + " where p is positive");
        }
        kl += p[t] * std::log2(p[t] / q[t]);
    }
    // Each term can be negative; the sum is >= 0 up to rounding.
    return std::max(kl, 0.0);
}

double kl_bits(const TopicDistribution& p, const TopicDistribution& q) { return kl_bits(p.probs, q.probs); }

double jsd_bits(std::span<const double> p, std::span<const double> q) {
    check_same_length(p, q);
    std::vector<double> mid(p.size());
    for (std::size_t t = 0; t < p.size(); ++t) mid[t] = 0.5 * (p[t] + q[t]);
    const double jsd = entropy_bits(mid) - 0.5 * (entropy_bits(p) + entropy_bits(q));
    return std::clamp(jsd, 0.0, 1.0);
}

double jsd_bits(const TopicDistribution& p, const TopicDistribution& q) { return jsd_bits(p.probs, q.probs); }

std::vector<double> CooccurrenceMatrix::row_marginal() const {
    std::vector<double> rows(k, 0.0);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) rows[r] += at(r, c);
    return rows;
}

std::vector<double> CooccurrenceMatrix::col_marginal() const {
    std::vector<double> cols(k, 0.0);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) cols[c] += at(r, c);
    return cols;
}

std::vector<double> CooccurrenceMatrix::row_normalized() const {
    std::vector<double> out(joint);
    const auto rows = row_marginal();
    for (std::size_t r = 0; r < k; ++r) {
        if (rows[r] <= 0.0) continue;
        for (std::size_t c = 0; c < k; ++c) out[r * k + c] /= rows[r];
    }
    return out;
}

CooccurrenceMatrix outer_product(std::span<const double> p, std::span<const double> q) {
    check_same_length(p, q);
    CooccurrenceMatrix m;
    m.k = p.size();
    m.pair_count = 1;
    m.joint.resize(m.k * m.k);
    for (std::size_t r = 0; r < m.k; ++r)
        for (std::size_t c = 0; c < m.k; ++c) m.joint[r * m.k + c] = p[r] * q[c];
    return m;
}

std::vector<TopicPair> topic_pairs(std::span<const Label> assignments, const EmbeddingSet& set,
                                   std::size_t k, double alpha) {
    check_assignments(assignments, set, k);
    check_alpha(alpha);

    struct Counts {
        std::string group;
        std::int64_t generation = 0;
        std::vector<double> answer;
    };
    std::vector<std::pair<std::string, std::vector<double>>> prompt_groups;
    std::vector<Counts> answer_pairs;
    auto find_group = [&](const std::string& g) {
        return std::find_if(prompt_groups.begin(), prompt_groups.end(),
                            [&](const auto& e) { return e.first == g; });
    };

    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& l = set.label(i);
        if (l.role == Role::prompt) {
            auto it = find_group(l.group_id);
            if (it == prompt_groups.end()) {
                prompt_groups.emplace_back(l.group_id, std::vector<double>(k, 0.0));
                it = std::prev(prompt_groups.end());
            }
            it->second[assignments[i]] += 1.0;
        } else {
            auto it = std::find_if(answer_pairs.begin(), answer_pairs.end(), [&](const Counts& c) {
                return c.group == l.group_id && c.generation == l.generation_id;
            });
            if (it == answer_pairs.end()) {
                answer_pairs.push_back({l.group_id, l.generation_id, std::vector<double>(k, 0.0)});
                it = std::prev(answer_pairs.end());
            }
            it->answer[assignments[i]] += 1.0;
        }
    }

    std::vector<TopicPair> pairs;
    for (const auto& a : answer_pairs) {
        auto g = find_group(a.group);
        if (g == prompt_groups.end()) continue;
        pairs.push_back({a.group, a.generation, distribution_from_counts(g->second, alpha),
                         distribution_from_counts(a.answer, alpha)});
    }
    return pairs;
}

namespace {

CooccurrenceMatrix average_outer(const std::vector<TopicPair>& pairs, std::size_t k) {
    if (pairs.empty()) throw Error(ErrorCode::NoPairs, "no (group, generation) pair has both prompts and answers");
    CooccurrenceMatrix m;
    m.k = k;
    m.pair_count = pairs.size();
    m.joint.assign(k * k, 0.0);
    for (const auto& pr : pairs) {
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) m.joint[r * k + c] += pr.prompt.probs[r] * pr.answer.probs[c];
    }
    const double inv = 1.0 / static_cast<double>(pairs.size());
    for (double& v : m.joint) v *= inv;
    return m;
}

}  // namespace

CooccurrenceMatrix cooccurrence(std::span<const Label> assignments, const EmbeddingSet& set,
                                std::size_t k, double alpha) {
    return average_outer(topic_pairs(assignments, set, k, alpha), k);
}

double mutual_info_bits(const CooccurrenceMatrix& m) {
    double total = 0.0;
    for (double v : m.joint) {
        if (v < 0.0) throw Error(ErrorCode::NotNormalized, "joint distribution has a negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(ErrorCode::NotNormalized, "joint distribution sums to " + std::to_string(total));
    }
    const auto rows = m.row_marginal();
    const auto cols = m.col_marginal();
    double mi = 0.0;
    for (std::size_t r = 0; r < m.k; ++r) {
        for (std::size_t c = 0; c < m.k; ++c) {
            const double v = m.at(r, c);
            if (v > 0.0) mi += v * std::log2(v / (rows[r] * cols[c]));
        }
    }
    return mi;
}

SdmReport sdm_report(std::span<const Label> assignments, const EmbeddingSet& set, std::size_t k,
                     double alpha) {
    if (set.count(Role::prompt) == 0 || set.count(Role::answer) == 0) {
        throw Error(ErrorCode::MissingRole, "corpus needs both prompt and answer records");
    }
    SdmReport rep;
    rep.k = k;
    rep.alpha = alpha;
    rep.prompt = topic_distribution(assignments, set, Selector{.role = Role::prompt}, k, alpha);
    rep.answer = topic_distribution(assignments, set, Selector{.role = Role::answer}, k, alpha);

    rep.h_prompt_bits = entropy_bits(rep.prompt);
    rep.h_answer_bits = entropy_bits(rep.answer);
    rep.entropy_diff_bits = rep.h_answer_bits - rep.h_prompt_bits;
    rep.global_jsd_bits = jsd_bits(rep.prompt, rep.answer);
    rep.global_kl_pa_bits = kl_bits(rep.prompt, rep.answer);
    rep.global_kl_ap_bits = kl_bits(rep.answer, rep.prompt);

    const auto pairs = topic_pairs(assignments, set, k, alpha);
    const auto joint = average_outer(pairs, k);
    rep.pair_count = pairs.size();

    double jsd = 0.0, kl_pa = 0.0, kl_ap = 0.0, avg_mi = 0.0;
    for (const auto& pr : pairs) {
        jsd += jsd_bits(rep.prompt, pr.answer);
        kl_pa += kl_bits(rep.prompt, pr.answer);
        kl_ap += kl_bits(pr.answer, rep.prompt);
        avg_mi += mutual_info_bits(outer_product(pr.prompt.probs, pr.answer.probs));
    }
    const double n = static_cast<double>(pairs.size());
    rep.ensemble_jsd_bits = jsd / n;
    rep.ensemble_kl_pa_bits = kl_pa / n;
    rep.ensemble_kl_ap_bits = kl_ap / n;
    rep.averaged_mi_bits = avg_mi / n;
    rep.ensemble_mi_bits = mutual_info_bits(joint);
    return rep;
}

}  // namespace udib
