#pragma once

#include <string>
#include <vector>

#include "quare/model.hpp"
#include "quare/providers.hpp"

namespace quare::coordinator {

struct CandidatePair {
    std::string left_id;
    std::string right_id;
    double similarity = 0.0;
};

struct ConflictRegistry {
    std::vector<Conflict> conflicts; // sorted by descending severity
    std::string source_set_id;

    Conflict* find(const std::string& left_id, const std::string& right_id);
    const Conflict* find(const std::string& left_id, const std::string& right_id) const;
};

// Stage 1: all unordered pairs whose description-embedding cosine strictly
// exceeds tau. Pairs are canonicalized left_id < right_id and returned in
// (left_id, right_id) order.
std::vector<CandidatePair> detect_overlaps(providers::Provider& provider,
                                           const RequirementSet& set, double tau);

struct Classification {
    ConflictKind kind = ConflictKind::Redundant;
    double severity = 0.0;
    std::string rationale;
    bool degraded = false; // classifier unusable; defaulted to Redundant
};

// Stage 2: LLM classification of one flagged pair. Falls back to
// (Redundant, 0.3) when the classifier output stays unparseable.
Classification classify_pair(providers::Provider& provider, const Requirement& left,
                             const Requirement& right, double similarity,
                             const RunConfig& config, int seed);

// detect_overlaps then classify_pair for every flagged pair; conflicts
// sorted by descending severity, ties by pair id. All statuses Unresolved.
ConflictRegistry build_registry(providers::Provider& provider, const RequirementSet& set,
                                const RunConfig& config, int seed,
                                std::vector<std::string>* warnings = nullptr);

Json registry_to_json(const ConflictRegistry& registry);
ConflictRegistry registry_from_json(const Json& j);

} // namespace quare::coordinator
