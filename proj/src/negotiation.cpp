#include "quare/negotiation.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "quare/errors.hpp"
#include "quare/hashing.hpp"
#include "quare/prompting.hpp"

namespace quare::negotiation {

Json trace_to_json(const NegotiationTrace& trace) {
    Json events = Json::array();
    for (const auto& e : trace.events)
        events.push_back(Json{{"conflict_id", e.conflict_id}, {"record", e.record}});
    Json statuses = Json::object();
    for (const auto& [key, status] : trace.final_statuses) statuses[key] = to_string(status);
    Json proposals = Json::array();
    for (const auto& p : trace.consensus_proposals) {
        Json drafts = Json::array();
        for (const auto& d : p.decomposition) {
            Json dj{{"suffix", d.suffix}, {"text", d.text}};
            if (d.level) dj["level"] = to_string(*d.level);
            drafts.push_back(std::move(dj));
        }
        proposals.push_back(Json{{"conflict_id", p.conflict_id},
                                 {"focal_id", p.focal_id},
                                 {"proposer", to_string(p.proposer)},
                                 {"proposed_text", p.proposed_text},
                                 {"decomposition", drafts},
                                 {"status_claim", to_string(p.status_claim)}});
    }
    return Json{{"events", events},
                {"total_steps", trace.total_steps},
                {"final_statuses", statuses},
                {"consensus_proposals", proposals}};
}

double aggregate_objective(const QualityVector& scores,
                           const std::array<double, kDimensionCount>& weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
    double value = 0.0;
    for (int i = 0; i < kDimensionCount; ++i)
        value += weights[static_cast<std::size_t>(i)] * scores[static_cast<std::size_t>(i)];
    return value;
}

bool check_convergence(providers::Provider& provider, const std::string& prev,
                       const std::string& next, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
    return providers::similarity_f1(provider, prev, next) > 1.0 - epsilon;
}

std::array<QualityDimension, kDimensionCount> shuffled_dimensions(int seed) {
    auto order = all_dimensions();
    std::mt19937 rng(static_cast<std::uint32_t>(seed));
    for (int i = kDimensionCount - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint32_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
}

QualityDimension conflict_owner(const Conflict& conflict, const RequirementSet& set) {
    const Requirement* left = set.find(conflict.left_id);
    const Requirement* right = set.find(conflict.right_id);
    if (!left && !right) return QualityDimension::Safety;
    if (!left) return right->dimension;
    if (!right) return left->dimension;
    if (static_cast<int>(left->dimension) != static_cast<int>(right->dimension))
        return static_cast<int>(left->dimension) < static_cast<int>(right->dimension)
                   ? left->dimension
                   : right->dimension;
    return left->dimension;
}

namespace {

const agents::AgentSpec& spec_for(const std::vector<agents::AgentSpec>& specs, QualityDimension d) {
    for (const auto& s : specs)
        if (s.dimension == d) return s;
    throw std::invalid_argument("missing agent spec for " + to_string(d));
}

std::string conflict_context(const Conflict& conflict, const RequirementSet& set, int round_index) {
    const Requirement* left = set.find(conflict.left_id);
    const Requirement* right = set.find(conflict.right_id);
    std::string left_desc = left ? left->description : "(missing)";
    std::string right_desc = right ? right->description : "(missing)";
    std::string ctx = "Conflict between:\n[" + conflict.left_id + "] " + left_desc + "\n[" +
                      conflict.right_id + "] " + right_desc +
                      "\nKind: " + to_string(conflict.kind) + "\n";
    if (!conflict.rounds.empty()) ctx += "Previous synthesis: " + conflict.rounds.back().synthesis + "\n";
    ctx += "conflict_key: " + hex16(fnv1a64(left_desc + "|" + right_desc)) + "\n";
    ctx += "round_index: " + std::to_string(round_index) + "\n";
    return ctx;
}

// The pair member authored by the proposing agent; falls back to left.
std::string default_focal_id(const Conflict& conflict, const RequirementSet& set,
                             QualityDimension proposer) {
    const Requirement* left = set.find(conflict.left_id);
    const Requirement* right = set.find(conflict.right_id);
    if (left && left->dimension == proposer) return conflict.left_id;
    if (right && right->dimension == proposer) return conflict.right_id;
    return conflict.left_id;
}

} // namespace

RoundOutcome run_round(providers::Provider& provider, QualityDimension focus, Conflict& conflict,
                       const RequirementSet& set, const std::vector<agents::AgentSpec>& specs,
                       const std::string& orchestrator_prompt, const RunConfig& config, int seed) {
    if (conflict.status != ConflictStatus::Unresolved && conflict.status != ConflictStatus::Partial)
        throw std::logic_error("run_round on a closed conflict " + conflict.pair_key());
    const int round_index = static_cast<int>(conflict.rounds.size()) + 1;
    if (round_index > config.round_cap)
        throw std::logic_error("round cap exceeded for conflict " + conflict.pair_key());

    RoundOutcome outcome;
    RoundRecord& record = outcome.record;
    record.round_index = round_index;
    record.focus_agent = to_string(focus);

    const std::string context = conflict_context(conflict, set, round_index);
    const std::string previous =
        conflict.rounds.empty() ? std::string() : conflict.rounds.back().synthesis;

    // Thesis from the focus agent.
    const auto& focus_spec = spec_for(specs, focus);
    try {
        auto request = prompting::make_request(
            focus_spec.role_definition +
                "\nTask: thesis\nPropose a resolution for the conflict below that protects your "
                "quality concern.",
            context, config, seed);
        record.thesis = providers::chat_with_retry(provider, request);
    } catch (const ProviderError& e) {
        record.thesis = std::string("[thesis unavailable: ") + e.what() + "]";
        outcome.degraded = true;
    }

    // Antithesis: critiques from the four peers, aggregated in axis order so
    // the synthesis input does not depend on scheduling.
    for (auto d : all_dimensions()) {
        if (d == focus) continue;
        const auto& peer = spec_for(specs, d);
        Critique critique;
        critique.agent = to_string(d);
        try {
            auto request = prompting::make_request(
                peer.role_definition +
                    "\nTask: critique\nEvaluate the proposal against your own constraints and "
                    "respond with a JSON object {\"critique\": \"...\"}.",
                context + "Proposal: " + record.thesis + "\n", config, seed);
            const std::string raw = providers::chat_with_retry(provider, request);
            auto parsed = prompting::extract_json(raw);
            critique.text = (parsed && parsed->is_object() && parsed->contains("critique") &&
                             (*parsed)["critique"].is_string())
                                ? (*parsed)["critique"].get<std::string>()
                                : raw;
        } catch (const ProviderError& e) {
            critique.text = std::string("[critique unavailable: ") + e.what() + "]";
            outcome.degraded = true;
        }
        record.critiques.push_back(std::move(critique));
    }

    // Synthesis through the moderator persona.
    SynthesisProposal& proposal = outcome.proposal;
    proposal.conflict_id = conflict.pair_key();
    proposal.proposer = focus;
    proposal.status_claim = ConflictStatus::Unresolved;
    std::string critique_block;
    for (const auto& c : record.critiques) critique_block += c.agent + ": " + c.text + "\n";
    try {
        auto request = prompting::make_request(
            orchestrator_prompt +
                "\nTask: synthesize\nIntegrate the thesis and critiques into a revised proposal. "
                "Respond with a JSON object {\"proposal_text\", \"status\" "
                "(Unresolved|Partial|Consensus), optional \"decomposition\" "
                "[{\"suffix\", \"text\", \"level\"}], optional \"focal_id\"}.",
            context + "Thesis: " + record.thesis + "\nCritiques:\n" + critique_block, config, seed);
        std::string raw;
        auto parsed = prompting::chat_json(provider, request, /*repairs=*/1, &raw);
        if (parsed && parsed->is_object() && parsed->contains("proposal_text") &&
            (*parsed)["proposal_text"].is_string()) {
            proposal.proposed_text = (*parsed)["proposal_text"].get<std::string>();
            const std::string status = parsed->value("status", "Unresolved");
            if (status == "Consensus")
                proposal.status_claim = ConflictStatus::Consensus;
            else if (status == "Partial")
                proposal.status_claim = ConflictStatus::Partial;
            proposal.focal_id = parsed->value("focal_id", "");
            if (parsed->contains("decomposition") && (*parsed)["decomposition"].is_array()) {
                std::set<std::string> suffixes;
                for (const auto& d : (*parsed)["decomposition"]) {
                    DecompositionDraft draft;
                    draft.suffix = d.value("suffix", "");
                    draft.text = d.value("text", "");
                    if (d.contains("level") && d["level"].is_string()) {
                        try {
                            draft.level = level_from_string(d["level"].get<std::string>());
                        } catch (const std::invalid_argument&) {
                        }
                    }
                    if (draft.suffix.empty() || draft.text.empty()) continue;
                    if (!suffixes.insert(draft.suffix).second) continue;
                    proposal.decomposition.push_back(std::move(draft));
                }
            }
        } else {
            proposal.proposed_text = "[synthesis unparseable] " + raw;
            outcome.degraded = true;
        }
    } catch (const ProviderError& e) {
        proposal.proposed_text = std::string("[synthesis unavailable: ") + e.what() + "]";
        outcome.degraded = true;
    }
    if (proposal.focal_id.empty() ||
        (proposal.focal_id != conflict.left_id && proposal.focal_id != conflict.right_id)) {
        proposal.focal_id = default_focal_id(conflict, set, focus);
    }
    record.synthesis = proposal.proposed_text;

    const std::string prev_text = previous.empty() ? record.thesis : previous;
    record.similarity_to_previous =
        (prev_text.empty() || record.synthesis.empty())
            ? 0.0
            : providers::similarity_f1(provider, prev_text, record.synthesis);

    if (!outcome.degraded) {
        if (proposal.status_claim == ConflictStatus::Consensus) {
            conflict.advance_status(ConflictStatus::Consensus);
        } else if (proposal.status_claim == ConflictStatus::Partial &&
                   conflict.status == ConflictStatus::Unresolved) {
            conflict.advance_status(ConflictStatus::Partial);
        }
    }
    record.status_after = conflict.status;
    conflict.rounds.push_back(record);
    return outcome;
}

Phase2Result run_phase2(providers::Provider& provider, const RequirementSet& set,
                        coordinator::ConflictRegistry registry,
                        const std::vector<agents::AgentSpec>& specs,
                        const std::string& orchestrator_prompt, const RunConfig& config, int seed,
                        const std::array<QualityDimension, kDimensionCount>& agent_order) {
    Phase2Result result;
    result.set = set;
    result.set.phase_label = 2;

    auto open = [](const Conflict& c) {
        return c.kind != ConflictKind::Redundant &&
               (c.status == ConflictStatus::Unresolved || c.status == ConflictStatus::Partial);
    };

    for (int global_round = 1; global_round <= config.round_cap; ++global_round) {
        std::set<std::string> processed_this_round;
        for (auto focus : agent_order) {
            // highest-severity open conflict owned by this agent (registry is
            // severity-sorted)
            Conflict* chosen = nullptr;
            for (auto& c : registry.conflicts) {
                if (!open(c) || processed_this_round.count(c.pair_key())) continue;
                if (conflict_owner(c, result.set) != focus) continue;
                chosen = &c;
                break;
            }
            if (!chosen) continue;
            processed_this_round.insert(chosen->pair_key());

            const std::string prev_synthesis =
                chosen->rounds.empty() ? std::string() : chosen->rounds.back().synthesis;
            auto outcome = run_round(provider, focus, *chosen, result.set, specs,
                                     orchestrator_prompt, config, seed);
            result.trace.events.push_back({chosen->pair_key(), outcome.record});
            ++result.trace.total_steps;

            if (chosen->status == ConflictStatus::Consensus) {
                result.trace.consensus_proposals.push_back(outcome.proposal);
                continue;
            }
            // Convergence between successive rounds without an explicit
            // consensus claim reads as stalled agreement: close as escalated.
            if (!prev_synthesis.empty() && !outcome.record.synthesis.empty() &&
                check_convergence(provider, prev_synthesis, outcome.record.synthesis,
                                  config.epsilon)) {
                if (chosen->status == ConflictStatus::Unresolved)
                    chosen->advance_status(ConflictStatus::Partial);
                chosen->advance_status(ConflictStatus::Escalated);
                continue;
            }
            if (static_cast<int>(chosen->rounds.size()) >= config.round_cap) {
                if (chosen->status == ConflictStatus::Unresolved ||
                    chosen->status == ConflictStatus::Partial) {
                    chosen->advance_status(ConflictStatus::Escalated);
                }
            }
        }
    }

    // Whatever stayed open after the capped rounds goes to priority-weighted
    // integration.
    for (auto& c : registry.conflicts) {
        if (open(c)) c.advance_status(ConflictStatus::Escalated);
        result.trace.final_statuses[c.pair_key()] = c.status;
    }

    result.registry = std::move(registry);
    return result;
}

Phase2Result run_phase2(providers::Provider& provider, const RequirementSet& set,
                        coordinator::ConflictRegistry registry,
                        const std::vector<agents::AgentSpec>& specs,
                        const std::string& orchestrator_prompt, const RunConfig& config, int seed) {
    return run_phase2(provider, set, std::move(registry), specs, orchestrator_prompt, config, seed,
                      shuffled_dimensions(seed));
}

} // namespace quare::negotiation
