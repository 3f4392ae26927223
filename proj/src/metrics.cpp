#include "quare/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quare/assignment.hpp"
#include "quare/errors.hpp"
#include "quare/hashing.hpp"
#include "quare/hull.hpp"
#include "quare/prompting.hpp"

namespace quare::metrics {

namespace {

const char* kJudgeSystemPrompt =
    "You are an impartial requirements-quality assessor. You are not one of the "
    "generation agents and must judge only what is written.\n";

std::string axis_rubrics() {
    return "Score each axis on a 0-1 scale:\n"
           "- safety: rate how directly this requirement addresses hazard identification, "
           "fault tolerance, or safety-critical behavior.\n"
           "- efficiency: rate how directly it addresses performance, latency, or resource "
           "optimisation.\n"
           "- sustainability: rate how directly it addresses energy efficiency or "
           "environmental footprint.\n"
           "- trustworthiness: rate how directly it addresses security, privacy, or data "
           "protection.\n"
           "- responsibility: rate how directly it addresses regulatory, ethical, or "
           "social obligations.\n";
}

} // namespace

QualityVector project_quality(providers::Provider& provider, const Requirement& requirement,
                              const RunConfig& config, int seed) {
    if (requirement.description.empty())
        throw std::invalid_argument("cannot project an empty requirement description");

    std::string system = std::string(kJudgeSystemPrompt) +
                         "Task: project-quality\n" + axis_rubrics() +
                         "Respond with a JSON object keyed by axis name.";
    std::string user = "Requirement: " + requirement.description +
                       "\ndimension_hint: " + to_string(requirement.dimension) +
                       "\ncontent_key: " + hex16(fnv1a64(requirement.description)) + "\n";

    auto parsed = prompting::chat_json(provider, prompting::make_request(system, user, config, seed), 2);
    if (!parsed || !parsed->is_object())
        throw ProjectionError("quality projection unparseable for requirement " + requirement.id);

    QualityVector v;
    static const char* keys[] = {"safety", "efficiency", "sustainability", "trustworthiness",
                                 "responsibility"};
    for (int i = 0; i < kDimensionCount; ++i) {
        if (!parsed->contains(keys[i]) || !(*parsed)[keys[i]].is_number())
            throw ProjectionError(std::string("projection missing axis '") + keys[i] + "'");
        v[static_cast<std::size_t>(i)] = std::clamp((*parsed)[keys[i]].get<double>(), 0.0, 1.0);
    }
    return v;
}

std::vector<QualityVector> project_set(providers::Provider& provider, const RequirementSet& set,
                                       const RunConfig& config, int seed) {
    std::vector<QualityVector> out;
    out.reserve(set.requirements.size());
    for (const auto& r : set.requirements) out.push_back(project_quality(provider, r, config, seed));
    return out;
}

ChvResult chv(const std::vector<QualityVector>& points) {
    std::vector<std::vector<double>> raw;
    raw.reserve(points.size());
    for (const auto& p : points)
        raw.emplace_back(p.components.begin(), p.components.end());
    auto hull = geometry::convex_hull_volume(raw, kDimensionCount);
    return {hull.volume, hull.degenerate};
}

double mdc(const std::vector<QualityVector>& points) {
    if (points.empty()) throw std::invalid_argument("mdc requires at least one point");
    std::array<double, kDimensionCount> centroid{};
    for (const auto& p : points)
        for (int k = 0; k < kDimensionCount; ++k) centroid[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
    for (double& c : centroid) c /= static_cast<double>(points.size());

    double total = 0.0;
    for (const auto& p : points) {
        double sq = 0.0;
        for (int k = 0; k < kDimensionCount; ++k) {
            const double d = p[static_cast<std::size_t>(k)] - centroid[static_cast<std::size_t>(k)];
            sq += d * d;
        }
        total += std::sqrt(sq);
    }
    return total / static_cast<double>(points.size());
}

int AxisCounts::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

double AxisCounts::mean() const { return static_cast<double>(total()) / kDimensionCount; }

AxisCounts axis_counts(const RequirementSet& set) {
    AxisCounts out;
    for (const auto& r : set.requirements) {
        for (auto d : all_dimensions()) {
            if (r.source_agent == to_string(d)) {
                ++out.counts[static_cast<std::size_t>(static_cast<int>(d))];
                break;
            }
        }
    }
    return out;
}

double cu(const AxisCounts& counts) {
    const double mean = counts.mean();
    double ss = 0.0;
    for (int c : counts.counts) {
        const double d = static_cast<double>(c) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / kDimensionCount);
}

int mac(const AxisCounts& counts) {
    return *std::min_element(counts.counts.begin(), counts.counts.end());
}

CrrResult crr(const coordinator::ConflictRegistry& registry) {
    int resolved = 0;
    int negotiable = 0;
    for (const auto& c : registry.conflicts) {
        if (c.kind == ConflictKind::Redundant) continue;
        ++negotiable;
        if (c.status == ConflictStatus::Consensus) ++resolved;
    }
    if (negotiable == 0) return {1.0, true};
    return {static_cast<double>(resolved) / static_cast<double>(negotiable), false};
}

SimilarityFn exact_match_similarity() {
    return [](const std::string& a, const std::string& b) { return a == b ? 1.0 : 0.0; };
}

PreservationScore set_preservation_matrix(const std::vector<std::vector<double>>& similarities) {
    const std::size_t m = similarities.size();
    const std::size_t n = m == 0 ? 0 : similarities.front().size();
    if (m == 0 && n == 0) return {1.0, {}};
    if (m == 0 || n == 0) {
        PreservationScore score;
        score.score = 0.0;
        for (std::size_t i = 0; i < std::max(m, n); ++i)
            score.matching.emplace_back(m == 0 ? -1 : static_cast<int>(i),
                                        n == 0 ? -1 : static_cast<int>(i));
        return score;
    }

    const std::size_t big = std::max(m, n);
    std::vector<std::vector<double>> padded(big, std::vector<double>(big, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) padded[i][j] = similarities[i][j];

    const auto pi = assignment::max_assignment(padded);

    PreservationScore out;
    double total = 0.0;
    for (std::size_t i = 0; i < big; ++i) {
        const int j = pi[i];
        total += padded[i][static_cast<std::size_t>(j)];
        out.matching.emplace_back(i < m ? static_cast<int>(i) : -1,
                                  static_cast<std::size_t>(j) < n ? j : -1);
    }
    out.score = total / static_cast<double>(big);
    return out;
}

PreservationScore set_preservation(const SimilarityFn& similarity,
                                   const std::vector<std::string>& texts_a,
                                   const std::vector<std::string>& texts_b) {
    if (texts_a.empty() && texts_b.empty()) return {1.0, {}};
    std::vector<std::vector<double>> matrix(texts_a.size(),
                                            std::vector<double>(texts_b.size(), 0.0));
    for (std::size_t i = 0; i < texts_a.size(); ++i)
        for (std::size_t j = 0; j < texts_b.size(); ++j)
            matrix[i][j] = similarity(texts_a[i], texts_b[j]);
    return set_preservation_matrix(matrix);
}

PreservationScore set_preservation(providers::Provider& provider, const RequirementSet& a,
                                   const RequirementSet& b) {
    std::vector<std::string> texts_a, texts_b;
    for (const auto& r : a.requirements) texts_a.push_back(r.description);
    for (const auto& r : b.requirements) texts_b.push_back(r.description);
    return set_preservation(
        [&provider](const std::string& x, const std::string& y) {
            return providers::similarity_f1(provider, x, y);
        },
        texts_a, texts_b);
}

void to_json(Json& j, const Iso29148Scores& s) {
    j = Json{{"unambiguous", s.unambiguous},         {"correctness", s.correctness},
             {"verifiability", s.verifiability},     {"set_consistency", s.set_consistency},
             {"set_feasibility", s.set_feasibility}, {"s_term", s.s_term}};
}

void from_json(const Json& j, Iso29148Scores& s) {
    j.at("unambiguous").get_to(s.unambiguous);
    j.at("correctness").get_to(s.correctness);
    j.at("verifiability").get_to(s.verifiability);
    j.at("set_consistency").get_to(s.set_consistency);
    j.at("set_feasibility").get_to(s.set_feasibility);
    j.at("s_term").get_to(s.s_term);
}

Iso29148Scores iso29148_judge(providers::Provider& provider, const RequirementSet& set,
                              const RunConfig& config, int seed) {
    if (set.requirements.empty())
        throw std::invalid_argument("iso29148_judge requires a non-empty set");

    std::string listing;
    std::string concat;
    for (const auto& r : set.requirements) {
        listing += "- [" + r.id + "] " + r.description + "\n";
        concat += r.description + "\n";
    }
    std::string system = std::string(kJudgeSystemPrompt) +
                         "Task: iso29148-judge\n"
                         "Score the requirement set on a 1-5 scale for: unambiguous, "
                         "correctness, verifiability, set_consistency, set_feasibility, and "
                         "s_term (terminology consistency, e.g. unified naming of actors). "
                         "Respond with a JSON object of those six numeric fields.";
    std::string user = "Requirement set:\n" + listing + "\nset_key: " + hex16(fnv1a64(concat)) + "\n";

    auto parsed = prompting::chat_json(provider, prompting::make_request(system, user, config, seed), 2);
    if (!parsed || !parsed->is_object()) throw JudgeError("iso 29148 judge response unparseable");

    auto read = [&](const char* key) {
        if (!parsed->contains(key) || !(*parsed)[key].is_number())
            throw JudgeError(std::string("iso 29148 judge missing field '") + key + "'");
        return std::clamp((*parsed)[key].get<double>(), 1.0, 5.0);
    };
    Iso29148Scores s;
    s.unambiguous = read("unambiguous");
    s.correctness = read("correctness");
    s.verifiability = read("verifiability");
    s.set_consistency = read("set_consistency");
    s.set_feasibility = read("set_feasibility");
    s.s_term = read("s_term");
    return s;
}

} // namespace quare::metrics
