#include "quare/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace quare {

std::string to_string(QualityDimension d) {
    switch (d) {
        case QualityDimension::Safety: return "Safety";
        case QualityDimension::Efficiency: return "Efficiency";
        case QualityDimension::Sustainability: return "Sustainability";
        case QualityDimension::Trustworthiness: return "Trustworthiness";
        case QualityDimension::Responsibility: return "Responsibility";
    }
    throw std::logic_error("unknown QualityDimension");
}

QualityDimension dimension_from_string(const std::string& s) {
    for (auto d : all_dimensions()) {
        if (to_string(d) == s) return d;
    }
    throw std::invalid_argument("unknown quality dimension: " + s);
}

std::string to_string(KaosLevel l) {
    switch (l) {
        case KaosLevel::Strategic: return "Strategic";
        case KaosLevel::Tactical: return "Tactical";
        case KaosLevel::Operational: return "Operational";
    }
    throw std::logic_error("unknown KaosLevel");
}

KaosLevel level_from_string(const std::string& s) {
    if (s == "Strategic") return KaosLevel::Strategic;
    if (s == "Tactical") return KaosLevel::Tactical;
    if (s == "Operational") return KaosLevel::Operational;
    throw std::invalid_argument("unknown KAOS level: " + s);
}

KaosLevel level_below(KaosLevel l) {
    switch (l) {
        case KaosLevel::Strategic: return KaosLevel::Tactical;
        case KaosLevel::Tactical: return KaosLevel::Operational;
        case KaosLevel::Operational: return KaosLevel::Operational;
    }
    throw std::logic_error("unknown KaosLevel");
}

const Requirement* RequirementSet::find(const std::string& id) const {
    for (const auto& r : requirements) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

std::string to_string(ConflictKind k) {
    switch (k) {
        case ConflictKind::Redundant: return "Redundant";
        case ConflictKind::ResourceBound: return "ResourceBound";
        case ConflictKind::LogicalIncompatibility: return "LogicalIncompatibility";
    }
    throw std::logic_error("unknown ConflictKind");
}

ConflictKind conflict_kind_from_string(const std::string& s) {
    if (s == "Redundant") return ConflictKind::Redundant;
    if (s == "ResourceBound") return ConflictKind::ResourceBound;
    if (s == "LogicalIncompatibility") return ConflictKind::LogicalIncompatibility;
    throw std::invalid_argument("unknown conflict kind: " + s);
}

double conflict_kind_weight(ConflictKind k) {
    switch (k) {
        case ConflictKind::Redundant: return 0.3;
        case ConflictKind::ResourceBound: return 0.8;
        case ConflictKind::LogicalIncompatibility: return 1.0;
    }
    throw std::logic_error("unknown ConflictKind");
}

std::string to_string(ConflictStatus s) {
    switch (s) {
        case ConflictStatus::Unresolved: return "Unresolved";
        case ConflictStatus::Partial: return "Partial";
        case ConflictStatus::Consensus: return "Consensus";
        case ConflictStatus::Escalated: return "Escalated";
    }
    throw std::logic_error("unknown ConflictStatus");
}

ConflictStatus conflict_status_from_string(const std::string& s) {
    if (s == "Unresolved") return ConflictStatus::Unresolved;
    if (s == "Partial") return ConflictStatus::Partial;
    if (s == "Consensus") return ConflictStatus::Consensus;
    if (s == "Escalated") return ConflictStatus::Escalated;
    throw std::invalid_argument("unknown conflict status: " + s);
}

bool status_transition_allowed(ConflictStatus from, ConflictStatus to) {
    if (from == to) return true;
    switch (from) {
        case ConflictStatus::Unresolved:
            return true; // may move anywhere forward
        case ConflictStatus::Partial:
            return to == ConflictStatus::Consensus || to == ConflictStatus::Escalated;
        case ConflictStatus::Consensus:
        case ConflictStatus::Escalated:
            return false; // terminal
    }
    return false;
}

void Conflict::advance_status(ConflictStatus next) {
    if (!status_transition_allowed(status, next)) {
        throw std::logic_error("illegal conflict status transition " +
                               to_string(status) + " -> " + to_string(next));
    }
    status = next;
}

const GoalNode* KaosModel::find(const std::string& id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

void RunConfig::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("negative agent weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("agent weights must sum to 1");
    if (!(tau_overlap > 0.0 && tau_overlap < 1.0))
        throw std::invalid_argument("tau_overlap must lie in (0,1)");
    if (!(tau_dup > 0.0 && tau_dup < 1.0))
        throw std::invalid_argument("tau_dup must lie in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in (0,1)");
    if (round_cap < 1) throw std::invalid_argument("round_cap must be >= 1");
    if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
    if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
    if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("at least one seed required");
}

std::vector<double> new_uniform_weights(int n) {
    if (n < 1) throw std::invalid_argument("agent count must be >= 1");
    return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

ValidationReport validate_requirement_set(const RequirementSet& set) {
    ValidationReport report;
    std::set<std::string> seen;
    std::set<std::string> all_ids;
    for (const auto& r : set.requirements) all_ids.insert(r.id);

    for (const auto& r : set.requirements) {
        if (r.id.empty()) {
            report.findings.push_back({"empty-id", r.id, "requirement has empty id"});
        } else if (!seen.insert(r.id).second) {
            report.findings.push_back({"duplicate-id", r.id, "duplicate requirement id '" + r.id + "'"});
        }
        if (r.description.empty()) {
            report.findings.push_back({"empty-description", r.id, "requirement '" + r.id + "' has empty description"});
        }
        for (const auto& anc : r.ancestry) {
            if (!all_ids.count(anc)) {
                report.findings.push_back({"dangling-ancestry", r.id,
                                           "requirement '" + r.id + "' references absent ancestor '" + anc + "'"});
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

void to_json(Json& j, const Requirement& r) {
    j = Json{{"id", r.id},
             {"description", r.description},
             {"dimension", to_string(r.dimension)},
             {"level", to_string(r.level)},
             {"rationale", r.rationale},
             {"source_agent", r.source_agent},
             {"phase_of_origin", r.phase_of_origin},
             {"ancestry", r.ancestry}};
}

void from_json(const Json& j, Requirement& r) {
    j.at("id").get_to(r.id);
    j.at("description").get_to(r.description);
    r.dimension = dimension_from_string(j.at("dimension").get<std::string>());
    r.level = level_from_string(j.at("level").get<std::string>());
    r.rationale = j.value("rationale", "");
    r.source_agent = j.value("source_agent", "");
    r.phase_of_origin = j.value("phase_of_origin", 1);
    r.ancestry = j.value("ancestry", std::vector<std::string>{});
}

void to_json(Json& j, const RequirementSet& s) {
    j = Json{{"phase_label", s.phase_label}, {"requirements", s.requirements}};
}

void from_json(const Json& j, RequirementSet& s) {
    s.phase_label = j.value("phase_label", 1);
    s.requirements = j.at("requirements").get<std::vector<Requirement>>();
}

void to_json(Json& j, const QualityVector& v) {
    j = Json{{"components", v.components}};
}

void from_json(const Json& j, QualityVector& v) {
    auto c = j.at("components").get<std::vector<double>>();
    if (c.size() != kDimensionCount)
        throw std::invalid_argument("quality vector must have 5 components");
    std::copy(c.begin(), c.end(), v.components.begin());
}

void to_json(Json& j, const Critique& c) {
    j = Json{{"agent", c.agent}, {"text", c.text}};
}

void from_json(const Json& j, Critique& c) {
    j.at("agent").get_to(c.agent);
    j.at("text").get_to(c.text);
}

void to_json(Json& j, const RoundRecord& r) {
    j = Json{{"round_index", r.round_index},
             {"focus_agent", r.focus_agent},
             {"thesis", r.thesis},
             {"critiques", r.critiques},
             {"synthesis", r.synthesis},
             {"similarity_to_previous", r.similarity_to_previous},
             {"status_after", to_string(r.status_after)}};
}

void from_json(const Json& j, RoundRecord& r) {
    j.at("round_index").get_to(r.round_index);
    j.at("focus_agent").get_to(r.focus_agent);
    j.at("thesis").get_to(r.thesis);
    r.critiques = j.value("critiques", std::vector<Critique>{});
    j.at("synthesis").get_to(r.synthesis);
    r.similarity_to_previous = j.value("similarity_to_previous", 0.0);
    r.status_after = conflict_status_from_string(j.value("status_after", "Unresolved"));
}

void to_json(Json& j, const Conflict& c) {
    j = Json{{"left_id", c.left_id},
             {"right_id", c.right_id},
             {"kind", to_string(c.kind)},
             {"severity", c.severity},
             {"status", to_string(c.status)},
             {"rounds", c.rounds},
             {"similarity", c.similarity},
             {"classification_rationale", c.classification_rationale}};
}

void from_json(const Json& j, Conflict& c) {
    j.at("left_id").get_to(c.left_id);
    j.at("right_id").get_to(c.right_id);
    c.kind = conflict_kind_from_string(j.at("kind").get<std::string>());
    c.severity = j.value("severity", 0.0);
    c.status = conflict_status_from_string(j.value("status", "Unresolved"));
    c.rounds = j.value("rounds", std::vector<RoundRecord>{});
    c.similarity = j.value("similarity", 0.0);
    c.classification_rationale = j.value("classification_rationale", "");
}

void to_json(Json& j, const GoalNode& n) {
    j = Json{{"id", n.id},
             {"level", to_string(n.level)},
             {"text", n.text},
             {"requirement_refs", n.requirement_refs}};
}

void from_json(const Json& j, GoalNode& n) {
    j.at("id").get_to(n.id);
    n.level = level_from_string(j.at("level").get<std::string>());
    j.at("text").get_to(n.text);
    n.requirement_refs = j.value("requirement_refs", std::vector<std::string>{});
}

void to_json(Json& j, const KaosEdge& e) {
    j = Json{{"parent", e.parent}, {"child", e.child}};
}

void from_json(const Json& j, KaosEdge& e) {
    j.at("parent").get_to(e.parent);
    j.at("child").get_to(e.child);
}

void to_json(Json& j, const KaosModel& m) {
    j = Json{{"nodes", m.nodes}, {"edges", m.edges}};
}

void from_json(const Json& j, KaosModel& m) {
    m.nodes = j.at("nodes").get<std::vector<GoalNode>>();
    m.edges = j.value("edges", std::vector<KaosEdge>{});
}

void to_json(Json& j, const ProviderConfig& p) {
    j = Json{{"kind", p.kind},
             {"transcript_path", p.transcript_path},
             {"base_url", p.base_url},
             {"model", p.model},
             {"embed_model", p.embed_model},
             {"token_env", p.token_env}};
}

void from_json(const Json& j, ProviderConfig& p) {
    p.kind = j.value("kind", "hash-mock");
    p.transcript_path = j.value("transcript_path", "");
    p.base_url = j.value("base_url", "");
    p.model = j.value("model", "gpt-4o-mini-2024-07-18");
    p.embed_model = j.value("embed_model", "bert-base-uncased");
    p.token_env = j.value("token_env", "QUARE_API_TOKEN");
}

void to_json(Json& j, const RunConfig& c) {
    j = Json{{"weights", c.weights},
             {"tau_overlap", c.tau_overlap},
             {"tau_dup", c.tau_dup},
             {"epsilon", c.epsilon},
             {"round_cap", c.round_cap},
             {"temperature", c.temperature},
             {"max_tokens", c.max_tokens},
             {"seeds", c.seeds},
             {"top_k", c.top_k},
             {"per_agent_budget", c.per_agent_budget},
             {"prompts_dir", c.prompts_dir},
             {"clause_corpus", c.clause_corpus},
             {"domain_tags", c.domain_tags},
             {"provider", c.provider}};
}

void from_json(const Json& j, RunConfig& c) {
    if (j.contains("weights")) {
        auto w = j.at("weights").get<std::vector<double>>();
        if (w.size() != kDimensionCount)
            throw std::invalid_argument("weights must have 5 entries");
        std::copy(w.begin(), w.end(), c.weights.begin());
    }
    c.tau_overlap = j.value("tau_overlap", 0.85);
    c.tau_dup = j.value("tau_dup", 0.92);
    c.epsilon = j.value("epsilon", 0.05);
    c.round_cap = j.value("round_cap", 3);
    c.temperature = j.value("temperature", 0.7);
    c.max_tokens = j.value("max_tokens", 4000);
    c.seeds = j.value("seeds", std::vector<int>{101, 202, 303});
    c.top_k = j.value("top_k", 5);
    c.per_agent_budget = j.value("per_agent_budget", 12);
    c.prompts_dir = j.value("prompts_dir", "prompts");
    c.clause_corpus = j.value("clause_corpus", "");
    c.domain_tags = j.value("domain_tags", std::vector<std::string>{});
    c.provider = j.value("provider", ProviderConfig{});
}

} // namespace quare
