#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quare/integration.hpp"
#include "quare/model.hpp"
#include "quare/providers.hpp"

namespace quare::verification {

// ---------------------------------------------------------------------------
// Numeric constraints and S_logic
// ---------------------------------------------------------------------------

enum class Comparator { Le, Lt, Ge, Gt, Eq };

std::string to_string(Comparator c);

struct NumericConstraint {
    std::string requirement_id;
    std::string metric; // normalized: lowercased, stop-words stripped
    Comparator comparator = Comparator::Le;
    double value = 0.0;
    std::string unit;  // canonical: ms | s | % | count
    std::string scope; // qualifier such as "fast-path"; empty when global

    bool operator==(const NumericConstraint&) const = default;
};

// Pattern-based extraction; prose without recognizable numeric constraints
// yields nothing.
std::vector<NumericConstraint> extract_constraints(const RequirementSet& set);

struct LogicFinding {
    std::string left_id;
    std::string right_id;
    std::string metric;
    std::string scope;
    std::string detail;
};

struct SLogicReport {
    double score = 1.0;
    int comparable_pairs = 0;
    int conflicting_pairs = 0;
    std::vector<LogicFinding> findings;
};

// Two constraints conflict iff same metric, same scope, compatible units,
// and disjoint value intervals. Score = 1 - conflicting/comparable pairs
// over requirement pairs; 1.0 when nothing is comparable.
SLogicReport logic_check(const std::vector<NumericConstraint>& constraints);

Json logic_report_to_json(const SLogicReport& report);

// ---------------------------------------------------------------------------
// Compliance
// ---------------------------------------------------------------------------

struct ComplianceVerdict {
    std::string clause_id;
    std::string label; // Satisfied | Partially | NotSatisfied
    std::string best_requirement_id;
    std::string rationale;
    std::string citation; // extractive: always a substring of the clause text
    std::vector<std::string> votes;
    std::string error_note;
};

// Stage 1 keeps clauses sharing at least one domain tag; stage 2 asks the
// applicability classifier. Classifier failures keep the clause and add a
// warning.
std::vector<providers::ClauseRecord> filter_applicable(
    providers::Provider& provider, const std::vector<providers::ClauseRecord>& corpus,
    const std::vector<std::string>& case_domain_tags, const RunConfig& config, int seed,
    std::vector<std::string>* warnings = nullptr);

// Evidence bundle (clause + context + top-k retrieved requirements), three
// verifier votes with distinct seeds, majority label; the 1-1-1 tie and the
// all-failed case resolve to NotSatisfied.
ComplianceVerdict judge_clause(providers::Provider& provider, const providers::ClauseRecord& clause,
                               const RequirementSet& set,
                               const providers::IndexedCorpus& requirement_index,
                               const RunConfig& config, int seed);

struct CoverageResult {
    double value = 1.0;
    bool vacuous = false; // no applicable clauses
};

// Fraction of verdicts labelled Satisfied or Partially.
CoverageResult compliance_coverage(const std::vector<ComplianceVerdict>& verdicts);

// ---------------------------------------------------------------------------
// Hallucination flagging
// ---------------------------------------------------------------------------

struct HallucinationResult {
    bool checked = false; // false when the requirement cites no standard
    bool flagged = false;
    std::vector<providers::RetrievedItem> nearest_clauses;
    std::string rationale;
};

// RAG-grounded check of standard-referencing claims; requirements without a
// standard reference are skipped, judge failures leave the requirement
// unflagged with a warning.
HallucinationResult hallucination_check(providers::Provider& provider,
                                        const Requirement& requirement,
                                        const providers::IndexedCorpus& clause_index,
                                        const RunConfig& config, int seed,
                                        std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Phase 4 driver (strictly non-mutating)
// ---------------------------------------------------------------------------

struct ComplianceReport {
    std::vector<std::string> applicable_clause_ids;
    std::vector<ComplianceVerdict> verdicts;
    CoverageResult coverage;
    SLogicReport logic;
    std::vector<NumericConstraint> constraints;
    integration::AnnotationMap annotations; // hallucination flags
    std::vector<std::string> warnings;
};

Json compliance_report_to_json(const ComplianceReport& report);

ComplianceReport run_phase4(providers::Provider& provider, const RequirementSet& set,
                            const std::vector<providers::ClauseRecord>& corpus,
                            const RunConfig& config, int seed);

} // namespace quare::verification
