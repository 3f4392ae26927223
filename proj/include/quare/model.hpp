#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace quare {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Quality dimensions and KAOS levels
// ---------------------------------------------------------------------------

// Axis order is load-bearing: Safety is axis 1 of the quality space,
// Responsibility axis 5. Every geometric metric indexes by this order.
enum class QualityDimension : int {
    Safety = 0,
    Efficiency = 1,
    Sustainability = 2,
    Trustworthiness = 3,
    Responsibility = 4,
};

inline constexpr int kDimensionCount = 5;

constexpr std::array<QualityDimension, kDimensionCount> all_dimensions() {
    return {QualityDimension::Safety, QualityDimension::Efficiency,
            QualityDimension::Sustainability, QualityDimension::Trustworthiness,
            QualityDimension::Responsibility};
}

std::string to_string(QualityDimension d);
QualityDimension dimension_from_string(const std::string& s);

// Strategic > Tactical > Operational.
enum class KaosLevel : int {
    Strategic = 2,
    Tactical = 1,
    Operational = 0,
};

std::string to_string(KaosLevel l);
KaosLevel level_from_string(const std::string& s);

// Level immediately below, flooring at Operational.
KaosLevel level_below(KaosLevel l);

// ---------------------------------------------------------------------------
// Requirements
// ---------------------------------------------------------------------------

struct Requirement {
    std::string id;
    std::string description;
    QualityDimension dimension = QualityDimension::Safety;
    KaosLevel level = KaosLevel::Operational;
    std::string rationale;
    std::string source_agent;
    int phase_of_origin = 1;
    std::vector<std::string> ancestry; // revision chain, oldest first

    bool operator==(const Requirement&) const = default;
};

struct RequirementSet {
    std::vector<Requirement> requirements;
    int phase_label = 1;

    bool operator==(const RequirementSet&) const = default;

    const Requirement* find(const std::string& id) const;
    bool contains(const std::string& id) const { return find(id) != nullptr; }
};

// Point in the [0,1]^5 quality space.
struct QualityVector {
    std::array<double, kDimensionCount> components{};

    bool operator==(const QualityVector&) const = default;
    double operator[](std::size_t i) const { return components[i]; }
    double& operator[](std::size_t i) { return components[i]; }
};

// ---------------------------------------------------------------------------
// Conflicts
// ---------------------------------------------------------------------------

enum class ConflictKind : int {
    Redundant = 0,
    ResourceBound = 1,
    LogicalIncompatibility = 2,
};

std::string to_string(ConflictKind k);
ConflictKind conflict_kind_from_string(const std::string& s);

// Severity = classifier confidence x kind weight.
double conflict_kind_weight(ConflictKind k);

enum class ConflictStatus : int {
    Unresolved = 0,
    Partial = 1,
    Consensus = 2,
    Escalated = 3,
};

std::string to_string(ConflictStatus s);
ConflictStatus conflict_status_from_string(const std::string& s);

// Legal transitions: Unresolved -> Partial -> Consensus, or -> Escalated.
// Consensus and Escalated are terminal.
bool status_transition_allowed(ConflictStatus from, ConflictStatus to);

struct Critique {
    std::string agent;
    std::string text;

    bool operator==(const Critique&) const = default;
};

struct RoundRecord {
    int round_index = 1;
    std::string focus_agent;
    std::string thesis;
    std::vector<Critique> critiques;
    std::string synthesis;
    double similarity_to_previous = 0.0;
    // Conflict status after this round; lets traces replay round-by-round.
    ConflictStatus status_after = ConflictStatus::Unresolved;

    bool operator==(const RoundRecord&) const = default;
};

struct Conflict {
    std::string left_id;
    std::string right_id;
    ConflictKind kind = ConflictKind::Redundant;
    double severity = 0.0;
    ConflictStatus status = ConflictStatus::Unresolved;
    std::vector<RoundRecord> rounds;
    // Embedding cosine from the detection stage; always > tau_overlap.
    double similarity = 0.0;
    std::string classification_rationale;

    bool operator==(const Conflict&) const = default;

    std::string pair_key() const { return left_id + "|" + right_id; }

    // Throws std::logic_error on a regressing transition.
    void advance_status(ConflictStatus next);
};

// ---------------------------------------------------------------------------
// KAOS goal model
// ---------------------------------------------------------------------------

struct GoalNode {
    std::string id;
    KaosLevel level = KaosLevel::Operational;
    std::string text;
    std::vector<std::string> requirement_refs;

    bool operator==(const GoalNode&) const = default;
};

struct KaosEdge {
    std::string parent;
    std::string child;

    bool operator==(const KaosEdge&) const = default;
};

struct KaosModel {
    std::vector<GoalNode> nodes;
    std::vector<KaosEdge> edges;

    bool operator==(const KaosModel&) const = default;

    const GoalNode* find(const std::string& id) const;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct ProviderConfig {
    std::string kind = "hash-mock"; // hash-mock | transcript | http
    std::string transcript_path;
    std::string base_url;
    std::string model = "gpt-4o-mini-2024-07-18";
    std::string embed_model = "bert-base-uncased";
    std::string token_env = "QUARE_API_TOKEN";

    bool operator==(const ProviderConfig&) const = default;
};

struct RunConfig {
    std::array<double, kDimensionCount> weights{0.2, 0.2, 0.2, 0.2, 0.2};
    double tau_overlap = 0.85;
    double tau_dup = 0.92;
    double epsilon = 0.05;
    int round_cap = 3;
    double temperature = 0.7;
    int max_tokens = 4000;
    std::vector<int> seeds{101, 202, 303};
    int top_k = 5;
    int per_agent_budget = 12;
    std::string prompts_dir = "prompts";
    std::string clause_corpus;
    std::vector<std::string> domain_tags;
    ProviderConfig provider;

    bool operator==(const RunConfig&) const = default;

    // weights sum to 1 +- 1e-9 and each >= 0; tau/epsilon in (0,1); cap >= 1.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// w_i = 1/n for every agent. Throws std::invalid_argument when n == 0.
std::vector<double> new_uniform_weights(int n);

struct ValidationFinding {
    std::string kind;    // duplicate-id | empty-description | dangling-ancestry
    std::string subject; // offending requirement id
    std::string message;

    bool operator==(const ValidationFinding&) const = default;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;

    bool empty() const { return findings.empty(); }
};

ValidationReport validate_requirement_set(const RequirementSet& set);

// ---------------------------------------------------------------------------
// Canonical JSON (snake_case field names; the interchange format for the CLI)
// ---------------------------------------------------------------------------

void to_json(Json& j, const Requirement& r);
void from_json(const Json& j, Requirement& r);
void to_json(Json& j, const RequirementSet& s);
void from_json(const Json& j, RequirementSet& s);
void to_json(Json& j, const QualityVector& v);
void from_json(const Json& j, QualityVector& v);
void to_json(Json& j, const Critique& c);
void from_json(const Json& j, Critique& c);
void to_json(Json& j, const RoundRecord& r);
void from_json(const Json& j, RoundRecord& r);
void to_json(Json& j, const Conflict& c);
void from_json(const Json& j, Conflict& c);
void to_json(Json& j, const GoalNode& n);
void from_json(const Json& j, GoalNode& n);
void to_json(Json& j, const KaosEdge& e);
void from_json(const Json& j, KaosEdge& e);
void to_json(Json& j, const KaosModel& m);
void from_json(const Json& j, KaosModel& m);
void to_json(Json& j, const ProviderConfig& p);
void from_json(const Json& j, ProviderConfig& p);
void to_json(Json& j, const RunConfig& c);
void from_json(const Json& j, RunConfig& c);

} // namespace quare
