#pragma once

#include <map>
#include <string>
#include <vector>

#include "quare/coordinator.hpp"
#include "quare/model.hpp"
#include "quare/negotiation.hpp"
#include "quare/providers.hpp"

namespace quare::integration {

struct Annotation {
    std::string kind; // escalation-constraint | hallucination-flag | ...
    std::string text;
    std::string source_id;

    bool operator==(const Annotation&) const = default;
};

using AnnotationMap = std::map<std::string, std::vector<Annotation>>;

struct DecisionEntry {
    std::string action;
    std::string subject;
    std::string detail;
};

Json decisions_to_json(const std::vector<DecisionEntry>& decisions);

// ---------------------------------------------------------------------------
// Set transforms
// ---------------------------------------------------------------------------

struct SetTransformResult {
    RequirementSet set;
    std::vector<Requirement> retired; // removed items, text preserved
    std::vector<DecisionEntry> decisions;
};

// Semantic deduplication: removes the weaker member of every
// Redundant-classified pair and of every pair with embedding cosine
// strictly above tau_dup. Survivor = longer rationale, ties to the
// lexicographically smaller id; survivor ancestry extends with the removed
// id.
SetTransformResult deduplicate(providers::Provider& provider, const RequirementSet& set,
                               const coordinator::ConflictRegistry& registry, double tau_dup);

// Replaces each consensus focal requirement by its decomposition children
// (ids = focal id + suffix, level one below the parent, dimension of the
// proposing agent). Suffix collisions raise IntegrationError.
SetTransformResult apply_decompositions(const RequirementSet& set,
                                        const negotiation::NegotiationTrace& trace);

struct EscalationResult {
    RequirementSet set;
    std::vector<Requirement> retired;
    AnnotationMap annotations; // constraint annotations on the survivors
    std::vector<DecisionEntry> decisions;
};

// Priority-weighted integration of escalated conflicts: keep the side whose
// weighted quality projection scores higher, demote the other to a
// constraint annotation on the survivor. Ties keep the smaller id.
EscalationResult resolve_escalated(providers::Provider& provider, const RequirementSet& set,
                                   const coordinator::ConflictRegistry& registry,
                                   const RunConfig& config, int seed);

// ---------------------------------------------------------------------------
// KAOS stitching and validation
// ---------------------------------------------------------------------------

struct StitchResult {
    KaosModel model;
    std::vector<DecisionEntry> decisions;
};

// One goal node per requirement plus level-adjacent parent edges. Parents
// are proposed over the top-3 embedding candidates one level up (chat call
// on live providers, deterministic best-candidate fallback on mocks);
// synthetic Strategic/Tactical nodes bridge missing levels.
StitchResult stitch(providers::Provider& provider, const RequirementSet& set,
                    const RunConfig& config, int seed);

struct TopologyFinding {
    std::string kind;    // cycle | level-order | level-skip | orphan-operational | orphan-tactical
    std::string subject; // node id or cycle path
    std::string message;
};

struct TopologyReport {
    std::vector<TopologyFinding> findings;

    bool empty() const { return findings.empty(); }
};

Json topology_report_to_json(const TopologyReport& report);

// Pure structural check: cycles, level-order violations, level skips,
// operational nodes without a tactical ancestor, tactical nodes without a
// strategic parent. Empty report iff the model invariants hold.
TopologyReport validate_dag(const KaosModel& model);

// Edge-only repair: drops the weakest-similarity edge of each cycle,
// removes level-violating edges, and re-links orphans through the stitch
// fallback. Node texts are never touched. Irreparable after 3 passes raises
// TopologyError.
KaosModel repair(providers::Provider& provider, KaosModel model, const TopologyReport& report,
                 const RunConfig& config);

// ---------------------------------------------------------------------------
// Phase 3 driver
// ---------------------------------------------------------------------------

struct Phase3Result {
    RequirementSet set; // phase_label 3
    KaosModel model;
    AnnotationMap annotations;
    std::vector<Requirement> retired;
    std::vector<DecisionEntry> decisions;
};

Phase3Result run_phase3(providers::Provider& provider, const RequirementSet& set,
                        const coordinator::ConflictRegistry& registry,
                        const negotiation::NegotiationTrace& trace, const RunConfig& config,
                        int seed);

} // namespace quare::integration
