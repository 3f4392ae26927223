#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quare/agents.hpp"
#include "quare/coordinator.hpp"
#include "quare/model.hpp"
#include "quare/providers.hpp"

namespace quare::negotiation {

struct DecompositionDraft {
    std::string suffix; // appended to the focal id, e.g. ".1"
    std::string text;
    std::optional<KaosLevel> level; // as suggested; integration derives the final level
};

struct SynthesisProposal {
    std::string conflict_id; // pair key
    std::string focal_id;    // requirement the decomposition replaces
    QualityDimension proposer = QualityDimension::Safety;
    std::string proposed_text;
    std::vector<DecompositionDraft> decomposition;
    ConflictStatus status_claim = ConflictStatus::Unresolved;
};

struct TraceEvent {
    std::string conflict_id;
    RoundRecord record;
};

struct NegotiationTrace {
    // One step per thesis/antithesis/synthesis cycle.
    std::vector<TraceEvent> events;
    int total_steps = 0;
    std::map<std::string, ConflictStatus> final_statuses;
    std::vector<SynthesisProposal> consensus_proposals; // pending drafts for phase 3
};

Json trace_to_json(const NegotiationTrace& trace);

// Sum of w_i * Q_i; weights must satisfy the run-config invariant.
double aggregate_objective(const QualityVector& scores, const std::array<double, kDimensionCount>& weights);

// True iff similarity_f1(prev, next) > 1 - epsilon. epsilon in (0,1).
bool check_convergence(providers::Provider& provider, const std::string& prev,
                       const std::string& next, double epsilon);

// Seed-shuffled agent ordering (Fisher-Yates over the axis order).
std::array<QualityDimension, kDimensionCount> shuffled_dimensions(int seed);

// The agent that leads a conflict's rounds: pair member with the lowest
// (axis, id), so the proposal under refinement stays with its author.
QualityDimension conflict_owner(const Conflict& conflict, const RequirementSet& set);

struct RoundOutcome {
    RoundRecord record;
    SynthesisProposal proposal;
    bool degraded = false; // a provider failure was absorbed into the record
};

// One thesis -> peer critiques -> moderated synthesis cycle. Critiques are
// gathered from the four non-focus agents and aggregated in axis order
// before synthesis. Updates the conflict status for Partial/Consensus
// claims; provider failures degrade into an Unresolved round with an error
// note.
RoundOutcome run_round(providers::Provider& provider, QualityDimension focus, Conflict& conflict,
                       const RequirementSet& set, const std::vector<agents::AgentSpec>& specs,
                       const std::string& orchestrator_prompt, const RunConfig& config, int seed);

struct Phase2Result {
    RequirementSet set; // text identical to the input; phase_label 2
    coordinator::ConflictRegistry registry;
    NegotiationTrace trace;
};

// Round-robin negotiation: per global round each agent leads its
// highest-severity open conflict once; conflicts close on Consensus,
// convergence, or the round cap, and everything still open afterwards is
// escalated. Redundant pairs skip negotiation and flow to phase-3
// deduplication. Requirement text is never rewritten here.
Phase2Result run_phase2(providers::Provider& provider, const RequirementSet& set,
                        coordinator::ConflictRegistry registry,
                        const std::vector<agents::AgentSpec>& specs,
                        const std::string& orchestrator_prompt, const RunConfig& config, int seed,
                        const std::array<QualityDimension, kDimensionCount>& agent_order);

Phase2Result run_phase2(providers::Provider& provider, const RequirementSet& set,
                        coordinator::ConflictRegistry registry,
                        const std::vector<agents::AgentSpec>& specs,
                        const std::string& orchestrator_prompt, const RunConfig& config, int seed);

} // namespace quare::negotiation
