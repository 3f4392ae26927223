#include "quare/coordinator.hpp"

#include <algorithm>

#include "quare/errors.hpp"
#include "quare/hashing.hpp"
#include "quare/prompting.hpp"

namespace quare::coordinator {

Conflict* ConflictRegistry::find(const std::string& left_id, const std::string& right_id) {
    for (auto& c : conflicts)
        if (c.left_id == left_id && c.right_id == right_id) return &c;
    return nullptr;
}

const Conflict* ConflictRegistry::find(const std::string& left_id,
                                       const std::string& right_id) const {
    for (const auto& c : conflicts)
        if (c.left_id == left_id && c.right_id == right_id) return &c;
    return nullptr;
}

std::vector<CandidatePair> detect_overlaps(providers::Provider& provider,
                                           const RequirementSet& set, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0,1)");

    // Canonical order removes any dependence on the incoming set order.
    std::vector<const Requirement*> sorted;
    for (const auto& r : set.requirements) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const Requirement* a, const Requirement* b) { return a->id < b->id; });

    std::vector<std::string> texts;
    for (const auto* r : sorted) texts.push_back(r->description);
    if (texts.empty()) return {};
    const auto vectors = provider.embed(texts);

    std::vector<CandidatePair> pairs;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            const double sim = providers::cosine(vectors[i], vectors[j]);
            if (sim > tau) { // strictly exceeds
                pairs.push_back({sorted[i]->id, sorted[j]->id, sim});
            }
        }
    }
    return pairs;
}

Classification classify_pair(providers::Provider& provider, const Requirement& left,
                             const Requirement& right, double similarity,
                             const RunConfig& config, int seed) {
    std::string system =
        "You are the conflict coordinator of a requirements pipeline.\n"
        "Task: classify-conflict\n"
        "Classify the relationship between the two requirements as Redundant, "
        "ResourceBound (quality attributes competing for a finite budget), or "
        "LogicalIncompatibility (mutually exclusive system states). Respond with a JSON "
        "object {\"kind\", \"confidence\", \"rationale\"}.";
    std::string user = "Left [" + left.id + ", " + to_string(left.dimension) + "]: " +
                       left.description + "\nRight [" + right.id + ", " +
                       to_string(right.dimension) + "]: " + right.description +
                       "\nEmbedding similarity: " + std::to_string(similarity) +
                       "\npair_key: " + hex16(fnv1a64(left.description + "|" + right.description)) +
                       "\n";

    auto parsed = prompting::chat_json(provider, prompting::make_request(system, user, config, seed), 2);

    Classification result;
    if (parsed && parsed->is_object() && parsed->contains("kind") && (*parsed)["kind"].is_string()) {
        try {
            result.kind = conflict_kind_from_string((*parsed)["kind"].get<std::string>());
            const double confidence =
                std::clamp(parsed->value("confidence", 1.0), 0.0, 1.0);
            result.severity = confidence * conflict_kind_weight(result.kind);
            result.rationale = parsed->value("rationale", "");
            return result;
        } catch (const std::invalid_argument&) {
            // fall through to degradation
        }
    }
    // Degradation path: a single flaky classification must not kill the run.
    result.kind = ConflictKind::Redundant;
    result.severity = 0.3;
    result.rationale = "classifier output unparseable; defaulted to Redundant";
    result.degraded = true;
    return result;
}

ConflictRegistry build_registry(providers::Provider& provider, const RequirementSet& set,
                                const RunConfig& config, int seed,
                                std::vector<std::string>* warnings) {
    ConflictRegistry registry;
    registry.source_set_id = "phase-" + std::to_string(set.phase_label);

    for (const auto& pair : detect_overlaps(provider, set, config.tau_overlap)) {
        const Requirement* left = set.find(pair.left_id);
        const Requirement* right = set.find(pair.right_id);
        if (!left || !right) continue;
        auto cls = classify_pair(provider, *left, *right, pair.similarity, config, seed);
        if (cls.degraded && warnings) {
            warnings->push_back("classification degraded for pair " + pair.left_id + "|" +
                                pair.right_id);
        }
        Conflict conflict;
        conflict.left_id = pair.left_id;
        conflict.right_id = pair.right_id;
        conflict.kind = cls.kind;
        conflict.severity = cls.severity;
        conflict.similarity = pair.similarity;
        conflict.classification_rationale = cls.rationale;
        conflict.status = ConflictStatus::Unresolved;
        registry.conflicts.push_back(std::move(conflict));
    }

    std::stable_sort(registry.conflicts.begin(), registry.conflicts.end(),
                     [](const Conflict& a, const Conflict& b) {
                         if (a.severity != b.severity) return a.severity > b.severity;
                         return a.pair_key() < b.pair_key();
                     });
    return registry;
}

Json registry_to_json(const ConflictRegistry& registry) {
    return Json{{"source_set_id", registry.source_set_id}, {"conflicts", registry.conflicts}};
}

ConflictRegistry registry_from_json(const Json& j) {
    ConflictRegistry registry;
    registry.source_set_id = j.value("source_set_id", "");
    registry.conflicts = j.at("conflicts").get<std::vector<Conflict>>();
    return registry;
}

} // namespace quare::coordinator
