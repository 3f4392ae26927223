#include "quare/integration.hpp"

#include <algorithm>
#include <set>

#include "quare/errors.hpp"
#include "quare/metrics.hpp"
#include "quare/prompting.hpp"

namespace quare::integration {

Json decisions_to_json(const std::vector<DecisionEntry>& decisions) {
    Json out = Json::array();
    for (const auto& d : decisions)
        out.push_back(Json{{"action", d.action}, {"subject", d.subject}, {"detail", d.detail}});
    return out;
}

// ---------------------------------------------------------------------------
// Deduplication
// ---------------------------------------------------------------------------

SetTransformResult deduplicate(providers::Provider& provider, const RequirementSet& set,
                               const coordinator::ConflictRegistry& registry, double tau_dup) {
    if (!(tau_dup > 0.0 && tau_dup < 1.0)) throw std::invalid_argument("tau_dup must lie in (0,1)");

    // Candidate pairs: redundant-classified plus anything above tau_dup.
    std::set<std::pair<std::string, std::string>> candidates;
    for (const auto& c : registry.conflicts) {
        if (c.kind == ConflictKind::Redundant) {
            candidates.insert(std::minmax(c.left_id, c.right_id));
        }
    }

    std::vector<const Requirement*> sorted;
    for (const auto& r : set.requirements) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const Requirement* a, const Requirement* b) { return a->id < b->id; });
    if (!sorted.empty()) {
        std::vector<std::string> texts;
        for (const auto* r : sorted) texts.push_back(r->description);
        const auto vectors = provider.embed(texts);
        for (std::size_t i = 0; i < sorted.size(); ++i)
            for (std::size_t j = i + 1; j < sorted.size(); ++j)
                if (providers::cosine(vectors[i], vectors[j]) > tau_dup)
                    candidates.insert({sorted[i]->id, sorted[j]->id});
    }

    SetTransformResult result;
    result.set = set;
    result.set.phase_label = 3;

    std::set<std::string> removed;
    for (const auto& [left_id, right_id] : candidates) {
        if (removed.count(left_id) || removed.count(right_id)) continue;
        Requirement* left = nullptr;
        Requirement* right = nullptr;
        for (auto& r : result.set.requirements) {
            if (r.id == left_id) left = &r;
            if (r.id == right_id) right = &r;
        }
        if (!left || !right) continue;

        Requirement* survivor = left;
        Requirement* loser = right;
        if (right->rationale.size() > left->rationale.size()) {
            survivor = right;
            loser = left;
        } // equal lengths keep the smaller id, which is already `left`

        survivor->ancestry.push_back(loser->id);
        removed.insert(loser->id);
        result.retired.push_back(*loser);
        result.decisions.push_back({"dedup", survivor->id + "<-" + loser->id,
                                    "kept '" + survivor->id + "', retired '" + loser->id + "'"});
    }

    std::erase_if(result.set.requirements,
                  [&](const Requirement& r) { return removed.count(r.id) > 0; });
    return result;
}

// ---------------------------------------------------------------------------
// Consensus decompositions
// ---------------------------------------------------------------------------

namespace {

// The requirement carrying `id`, or the survivor whose ancestry absorbed it.
Requirement* resolve_alive(RequirementSet& set, const std::string& id) {
    for (auto& r : set.requirements)
        if (r.id == id) return &r;
    Requirement* best = nullptr;
    for (auto& r : set.requirements) {
        if (std::find(r.ancestry.begin(), r.ancestry.end(), id) != r.ancestry.end()) {
            if (!best || r.id < best->id) best = &r;
        }
    }
    return best;
}

} // namespace

SetTransformResult apply_decompositions(const RequirementSet& set,
                                        const negotiation::NegotiationTrace& trace) {
    SetTransformResult result;
    result.set = set;
    result.set.phase_label = 3;

    for (const auto& proposal : trace.consensus_proposals) {
        if (proposal.decomposition.empty()) continue;
        Requirement* focal = resolve_alive(result.set, proposal.focal_id);
        if (!focal) {
            result.decisions.push_back({"decomposition-skipped", proposal.focal_id,
                                        "focal requirement no longer present"});
            continue;
        }
        const Requirement parent = *focal;

        std::set<std::string> suffixes;
        for (const auto& draft : proposal.decomposition) {
            if (!suffixes.insert(draft.suffix).second)
                throw IntegrationError("decomposition suffix collision '" + draft.suffix +
                                       "' for " + parent.id);
            if (result.set.contains(parent.id + draft.suffix))
                throw IntegrationError("decomposition id collision '" + parent.id + draft.suffix + "'");
        }

        std::vector<Requirement> children;
        for (const auto& draft : proposal.decomposition) {
            Requirement child;
            child.id = parent.id + draft.suffix;
            child.description = draft.text;
            child.dimension = proposal.proposer;
            child.source_agent = to_string(proposal.proposer);
            child.level = level_below(parent.level);
            child.rationale = "decomposed from " + parent.id + " by negotiated consensus";
            child.phase_of_origin = 3;
            child.ancestry = parent.ancestry;
            child.ancestry.push_back(parent.id);
            children.push_back(std::move(child));
        }

        // replace the focal requirement in place to keep ordering stable
        auto it = std::find_if(result.set.requirements.begin(), result.set.requirements.end(),
                               [&](const Requirement& r) { return r.id == parent.id; });
        const auto index = static_cast<std::size_t>(it - result.set.requirements.begin());
        result.set.requirements.erase(it);
        result.set.requirements.insert(result.set.requirements.begin() + static_cast<std::ptrdiff_t>(index),
                                       children.begin(), children.end());
        result.retired.push_back(parent);
        result.decisions.push_back({"decomposition", parent.id,
                                    "replaced by " + std::to_string(children.size()) + " children"});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Escalated conflicts
// ---------------------------------------------------------------------------

EscalationResult resolve_escalated(providers::Provider& provider, const RequirementSet& set,
                                   const coordinator::ConflictRegistry& registry,
                                   const RunConfig& config, int seed) {
    EscalationResult result;
    result.set = set;
    result.set.phase_label = 3;

    for (const auto& conflict : registry.conflicts) {
        if (conflict.status != ConflictStatus::Escalated) continue;
        Requirement* left = resolve_alive(result.set, conflict.left_id);
        Requirement* right = resolve_alive(result.set, conflict.right_id);
        if (!left || !right || left == right) {
            result.decisions.push_back({"escalation-skipped", conflict.pair_key(),
                                        "pair no longer resolvable in the integrated set"});
            continue;
        }

        const double left_score = negotiation::aggregate_objective(
            metrics::project_quality(provider, *left, config, seed), config.weights);
        const double right_score = negotiation::aggregate_objective(
            metrics::project_quality(provider, *right, config, seed), config.weights);

        Requirement* survivor = left;
        Requirement* loser = right;
        if (right_score > left_score ||
            (right_score == left_score && right->id < left->id)) {
            survivor = right;
            loser = left;
        }

        result.annotations[survivor->id].push_back(
            {"escalation-constraint", "[" + loser->id + "] " + loser->description, loser->id});
        survivor->ancestry.push_back(loser->id);
        result.retired.push_back(*loser);
        const std::string loser_id = loser->id;
        std::erase_if(result.set.requirements,
                      [&](const Requirement& r) { return r.id == loser_id; });
        result.decisions.push_back(
            {"escalation-resolved", conflict.pair_key(),
             "weighted scores " + std::to_string(left_score) + " vs " + std::to_string(right_score) +
                 "; kept '" + survivor->id + "', annotated '" + loser_id + "'"});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Stitching
// ---------------------------------------------------------------------------

namespace {

struct NodeRef {
    std::string id;
    std::string text;
};

// Best parent among the candidates: top-3 by cosine go to the provider on
// live endpoints; mocks take the deterministic best (ties by ascending id).
std::string choose_parent(providers::Provider& provider, const NodeRef& child,
                          const std::vector<NodeRef>& candidates, const RunConfig& config,
                          int seed) {
    std::vector<std::string> texts{child.text};
    for (const auto& c : candidates) texts.push_back(c.text);
    const auto vectors = provider.embed(texts);

    std::vector<std::pair<double, std::string>> ranked;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        ranked.emplace_back(providers::cosine(vectors[0], vectors[i + 1]), candidates[i].id);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (ranked.size() > 3) ranked.resize(3);

    if (!provider.is_mock()) {
        std::string listing;
        for (const auto& [score, id] : ranked) listing += "- " + id + "\n";
        auto request = prompting::make_request(
            "You organise goals into a KAOS refinement hierarchy.\nTask: propose-parent\n"
            "Pick the parent goal that the child most directly refines. Respond with a JSON "
            "object {\"parent_id\": \"...\"}.",
            "Child goal: " + child.text + "\nCandidate parents:\n" + listing, config, seed);
        auto parsed = prompting::chat_json(provider, request, 1);
        if (parsed && parsed->is_object() && parsed->contains("parent_id") &&
            (*parsed)["parent_id"].is_string()) {
            const std::string pick = (*parsed)["parent_id"].get<std::string>();
            for (const auto& [score, id] : ranked)
                if (id == pick) return pick;
        }
    }
    return ranked.front().second;
}

} // namespace

StitchResult stitch(providers::Provider& provider, const RequirementSet& set,
                    const RunConfig& config, int seed) {
    StitchResult result;
    for (const auto& r : set.requirements) {
        GoalNode node;
        node.id = r.id;
        node.level = r.level;
        node.text = r.description;
        node.requirement_refs = {r.id};
        result.model.nodes.push_back(std::move(node));
    }

    auto level_nodes = [&](KaosLevel level) {
        std::vector<NodeRef> refs;
        for (const auto& n : result.model.nodes)
            if (n.level == level) refs.push_back({n.id, n.text});
        return refs;
    };

    const bool has_tactical = !level_nodes(KaosLevel::Tactical).empty();
    const bool has_operational = !level_nodes(KaosLevel::Operational).empty();

    if (level_nodes(KaosLevel::Strategic).empty() && (has_tactical || has_operational)) {
        result.model.nodes.push_back(
            {"ROOT-S", KaosLevel::Strategic, "Deliver the overall project mission", {}});
        result.decisions.push_back({"synthetic-node", "ROOT-S", "no strategic requirement existed"});
    }
    if (!has_tactical && has_operational) {
        result.model.nodes.push_back(
            {"ROOT-T", KaosLevel::Tactical, "Realise the strategic goals through concrete capabilities", {}});
        result.decisions.push_back({"synthetic-node", "ROOT-T", "no tactical requirement existed"});
    }

    const auto strategic = level_nodes(KaosLevel::Strategic);
    const auto tactical = level_nodes(KaosLevel::Tactical);

    for (const auto& n : result.model.nodes) {
        if (n.level == KaosLevel::Tactical) {
            if (strategic.empty()) continue;
            const std::string parent =
                choose_parent(provider, {n.id, n.text}, strategic, config, seed);
            result.model.edges.push_back({parent, n.id});
        } else if (n.level == KaosLevel::Operational) {
            if (tactical.empty()) continue;
            const std::string parent =
                choose_parent(provider, {n.id, n.text}, tactical, config, seed);
            result.model.edges.push_back({parent, n.id});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> adjacency(const KaosModel& model,
                                        std::map<std::string, int>& index) {
    index.clear();
    for (std::size_t i = 0; i < model.nodes.size(); ++i)
        index[model.nodes[i].id] = static_cast<int>(i);
    std::vector<std::vector<int>> adj(model.nodes.size());
    for (const auto& e : model.edges) {
        auto p = index.find(e.parent);
        auto c = index.find(e.child);
        if (p == index.end() || c == index.end()) continue;
        adj[static_cast<std::size_t>(p->second)].push_back(c->second);
    }
    return adj;
}

} // namespace

TopologyReport validate_dag(const KaosModel& model) {
    TopologyReport report;
    std::map<std::string, int> index;
    const auto adj = adjacency(model, index);
    const int n = static_cast<int>(model.nodes.size());

    for (const auto& e : model.edges) {
        if (!index.count(e.parent) || !index.count(e.child)) {
            report.findings.push_back({"unknown-node", e.parent + "->" + e.child,
                                       "edge references a node that does not exist"});
        }
    }

    // cycle detection: iterative colouring DFS, one finding per cycle found
    std::vector<int> color(static_cast<std::size_t>(n), 0); // 0 white, 1 grey, 2 black
    std::vector<int> parent_of(static_cast<std::size_t>(n), -1);
    for (int start = 0; start < n; ++start) {
        if (color[static_cast<std::size_t>(start)] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
        color[static_cast<std::size_t>(start)] = 1;
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            if (next < adj[static_cast<std::size_t>(u)].size()) {
                const int v = adj[static_cast<std::size_t>(u)][next++];
                if (color[static_cast<std::size_t>(v)] == 0) {
                    color[static_cast<std::size_t>(v)] = 1;
                    parent_of[static_cast<std::size_t>(v)] = u;
                    stack.emplace_back(v, 0);
                } else if (color[static_cast<std::size_t>(v)] == 1) {
                    std::vector<std::string> cycle{model.nodes[static_cast<std::size_t>(v)].id};
                    for (int w = u; w != v && w != -1; w = parent_of[static_cast<std::size_t>(w)])
                        cycle.push_back(model.nodes[static_cast<std::size_t>(w)].id);
                    std::reverse(cycle.begin(), cycle.end());
                    std::string path;
                    for (const auto& id : cycle) path += (path.empty() ? "" : "->") + id;
                    report.findings.push_back({"cycle", path, "goal refinement cycle detected"});
                }
            } else {
                color[static_cast<std::size_t>(u)] = 2;
                stack.pop_back();
            }
        }
    }

    for (const auto& e : model.edges) {
        const GoalNode* p = model.find(e.parent);
        const GoalNode* c = model.find(e.child);
        if (!p || !c) continue;
        const int diff = static_cast<int>(p->level) - static_cast<int>(c->level);
        if (diff <= 0) {
            report.findings.push_back({"level-order", e.parent + "->" + e.child,
                                       "parent level must be strictly higher than the child"});
        } else if (diff > 1) {
            report.findings.push_back({"level-skip", e.parent + "->" + e.child,
                                       "edge skips a refinement level"});
        }
    }

    // ancestor reachability over valid (strictly downward) edges
    std::map<std::string, std::vector<std::string>> parents;
    for (const auto& e : model.edges) {
        const GoalNode* p = model.find(e.parent);
        const GoalNode* c = model.find(e.child);
        if (p && c && static_cast<int>(p->level) > static_cast<int>(c->level))
            parents[e.child].push_back(e.parent);
    }
    auto has_ancestor_level = [&](const std::string& id, KaosLevel level) {
        std::set<std::string> visited;
        std::vector<std::string> queue{id};
        while (!queue.empty()) {
            const std::string cur = queue.back();
            queue.pop_back();
            for (const auto& p : parents[cur]) {
                if (!visited.insert(p).second) continue;
                const GoalNode* node = model.find(p);
                if (node && node->level == level) return true;
                queue.push_back(p);
            }
        }
        return false;
    };

    for (const auto& node : model.nodes) {
        if (node.level == KaosLevel::Operational && !has_ancestor_level(node.id, KaosLevel::Tactical)) {
            report.findings.push_back({"orphan-operational", node.id,
                                       "operational goal lacks a tactical ancestor"});
        }
        if (node.level == KaosLevel::Tactical) {
            bool ok = false;
            for (const auto& p : parents[node.id]) {
                const GoalNode* pn = model.find(p);
                if (pn && pn->level == KaosLevel::Strategic) ok = true;
            }
            if (!ok)
                report.findings.push_back({"orphan-tactical", node.id,
                                           "tactical goal lacks a strategic parent"});
        }
    }
    return report;
}

Json topology_report_to_json(const TopologyReport& report) {
    Json findings = Json::array();
    for (const auto& f : report.findings)
        findings.push_back(Json{{"kind", f.kind}, {"subject", f.subject}, {"message", f.message}});
    return Json{{"findings", findings}, {"valid", report.empty()}};
}

// ---------------------------------------------------------------------------
// Repair
// ---------------------------------------------------------------------------

namespace {

double edge_similarity(providers::Provider& provider, const KaosModel& model, const KaosEdge& e) {
    const GoalNode* p = model.find(e.parent);
    const GoalNode* c = model.find(e.child);
    if (!p || !c) return -1.0;
    const auto vectors = provider.embed({p->text, c->text});
    return providers::cosine(vectors[0], vectors[1]);
}

void relink_orphans(providers::Provider& provider, KaosModel& model, const RunConfig& config,
                    int seed) {
    auto refs_of_level = [&](KaosLevel level) {
        std::vector<std::pair<std::string, std::string>> refs;
        for (const auto& n : model.nodes)
            if (n.level == level) refs.emplace_back(n.id, n.text);
        return refs;
    };

    auto ensure_node = [&](const std::string& id, KaosLevel level, const std::string& text) {
        if (!model.find(id)) model.nodes.push_back({id, level, text, {}});
    };

    const auto current = validate_dag(model);
    for (const auto& f : current.findings) {
        if (f.kind != "orphan-operational" && f.kind != "orphan-tactical") continue;
        const KaosLevel parent_level =
            f.kind == "orphan-operational" ? KaosLevel::Tactical : KaosLevel::Strategic;
        auto candidates = refs_of_level(parent_level);
        if (candidates.empty()) {
            if (parent_level == KaosLevel::Strategic) {
                ensure_node("ROOT-S", KaosLevel::Strategic, "Deliver the overall project mission");
            } else {
                ensure_node("ROOT-T", KaosLevel::Tactical,
                            "Realise the strategic goals through concrete capabilities");
            }
            candidates = refs_of_level(parent_level);
        }
        const GoalNode* child = model.find(f.subject);
        if (!child) continue;

        // deterministic best-similarity fallback, ties by ascending id
        std::vector<std::string> texts{child->text};
        for (const auto& [id, text] : candidates) texts.push_back(text);
        const auto vectors = provider.embed(texts);
        std::string best_id;
        double best_score = -2.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const double score = providers::cosine(vectors[0], vectors[i + 1]);
            if (score > best_score || (score == best_score && candidates[i].first < best_id)) {
                best_score = score;
                best_id = candidates[i].first;
            }
        }
        model.edges.push_back({best_id, f.subject});
    }
    (void)config;
    (void)seed;
}

} // namespace

KaosModel repair(providers::Provider& provider, KaosModel model, const TopologyReport& report,
                 const RunConfig& config) {
    if (report.empty()) return model;

    for (int pass = 0; pass < 3; ++pass) {
        const auto current = validate_dag(model);
        if (current.empty()) return model;

        // 1. break cycles at their weakest edge
        for (const auto& f : current.findings) {
            if (f.kind != "cycle") continue;
            std::vector<std::string> ids;
            std::string token;
            for (char ch : f.subject + std::string(">")) {
                if (ch == '-' || ch == '>') {
                    if (!token.empty()) ids.push_back(token);
                    token.clear();
                } else {
                    token.push_back(ch);
                }
            }
            if (ids.size() < 2) continue;
            std::size_t weakest = std::string::npos;
            double weakest_sim = 2.0;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const std::string& parent = ids[i];
                const std::string& child = ids[(i + 1) % ids.size()];
                for (std::size_t e = 0; e < model.edges.size(); ++e) {
                    if (model.edges[e].parent != parent || model.edges[e].child != child) continue;
                    const double sim = edge_similarity(provider, model, model.edges[e]);
                    if (sim < weakest_sim) {
                        weakest_sim = sim;
                        weakest = e;
                    }
                }
            }
            if (weakest != std::string::npos)
                model.edges.erase(model.edges.begin() + static_cast<std::ptrdiff_t>(weakest));
        }

        // 2. drop level-violating edges
        std::erase_if(model.edges, [&](const KaosEdge& e) {
            const GoalNode* p = model.find(e.parent);
            const GoalNode* c = model.find(e.child);
            if (!p || !c) return true;
            return static_cast<int>(p->level) - static_cast<int>(c->level) != 1;
        });

        // 3. re-link whatever became orphaned
        relink_orphans(provider, model, config, 0);
    }

    const auto final_report = validate_dag(model);
    if (!final_report.empty())
        throw TopologyError("model irreparable after 3 passes; " +
                            std::to_string(final_report.findings.size()) + " finding(s) remain");
    return model;
}

// ---------------------------------------------------------------------------
// Phase 3 driver
// ---------------------------------------------------------------------------

Phase3Result run_phase3(providers::Provider& provider, const RequirementSet& set,
                        const coordinator::ConflictRegistry& registry,
                        const negotiation::NegotiationTrace& trace, const RunConfig& config,
                        int seed) {
    Phase3Result result;

    auto dedup = deduplicate(provider, set, registry, config.tau_dup);
    auto decomposed = apply_decompositions(dedup.set, trace);
    auto escalated = resolve_escalated(provider, decomposed.set, registry, config, seed);

    result.set = escalated.set;
    result.set.phase_label = 3;
    result.annotations = escalated.annotations;

    for (auto& v : {&dedup.retired, &decomposed.retired, &escalated.retired})
        result.retired.insert(result.retired.end(), v->begin(), v->end());
    for (auto& v : {&dedup.decisions, &decomposed.decisions, &escalated.decisions})
        result.decisions.insert(result.decisions.end(), v->begin(), v->end());

    auto stitched = stitch(provider, result.set, config, seed);
    result.decisions.insert(result.decisions.end(), stitched.decisions.begin(),
                            stitched.decisions.end());
    result.model = std::move(stitched.model);

    const auto report = validate_dag(result.model);
    if (!report.empty()) {
        result.model = repair(provider, std::move(result.model), report, config);
        result.decisions.push_back({"repair", "model",
                                    "topology repaired after " +
                                        std::to_string(report.findings.size()) + " finding(s)"});
    }
    return result;
}

} // namespace quare::integration
