#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "quare/coordinator.hpp"
#include "quare/model.hpp"
#include "quare/providers.hpp"

namespace quare::metrics {

// ---------------------------------------------------------------------------
// Quality-space projection
// ---------------------------------------------------------------------------

// Single chat call scoring the requirement against all five axis rubrics;
// components clamped to [0,1]. Throws ProjectionError after the repair
// attempts are exhausted.
QualityVector project_quality(providers::Provider& provider, const Requirement& requirement,
                              const RunConfig& config, int seed);

std::vector<QualityVector> project_set(providers::Provider& provider, const RequirementSet& set,
                                       const RunConfig& config, int seed);

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct ChvResult {
    double volume = 0.0;
    bool degenerate = false;
};

// Convex hull volume in R^5. Fewer than six points or an affinely
// dependent set reports (0, degenerate).
ChvResult chv(const std::vector<QualityVector>& points);

// Mean Euclidean distance to the centroid. Empty input is invalid.
double mdc(const std::vector<QualityVector>& points);

// ---------------------------------------------------------------------------
// Axis balance
// ---------------------------------------------------------------------------

struct AxisCounts {
    std::array<int, kDimensionCount> counts{};

    int total() const;
    double mean() const;
};

// Per-axis counts assigned by source_agent; requirements from outside the
// five specialized agents are not counted.
AxisCounts axis_counts(const RequirementSet& set);

// Population standard deviation of the per-axis counts.
double cu(const AxisCounts& counts);

// Minimum per-axis count.
int mac(const AxisCounts& counts);

// ---------------------------------------------------------------------------
// Conflict resolution rate
// ---------------------------------------------------------------------------

struct CrrResult {
    double value = 1.0;
    bool vacuous = false; // no non-redundant conflicts; value pinned to 1.0
};

CrrResult crr(const coordinator::ConflictRegistry& registry);

// ---------------------------------------------------------------------------
// Set-level semantic preservation
// ---------------------------------------------------------------------------

struct PreservationScore {
    double score = 1.0;
    // (index_a, index_b) per matched slot after padding; -1 marks a dummy.
    std::vector<std::pair<int, int>> matching;
};

using SimilarityFn = std::function<double(const std::string&, const std::string&)>;

// Exact-match oracle: 1.0 for identical strings, 0.0 otherwise.
SimilarityFn exact_match_similarity();

// Pairwise similarity, dummy padding to N x N with zeros, exact max-sum
// assignment, score = mean matched similarity. Two empty sets score 1.0;
// exactly one empty set scores 0.0.
PreservationScore set_preservation(const SimilarityFn& similarity,
                                   const std::vector<std::string>& texts_a,
                                   const std::vector<std::string>& texts_b);

PreservationScore set_preservation(providers::Provider& provider, const RequirementSet& a,
                                   const RequirementSet& b);

// Core step on a precomputed m x n similarity matrix.
PreservationScore set_preservation_matrix(const std::vector<std::vector<double>>& similarities);

// ---------------------------------------------------------------------------
// ISO 29148 LLM-judge scores
// ---------------------------------------------------------------------------

struct Iso29148Scores {
    double unambiguous = 0.0;
    double correctness = 0.0;
    double verifiability = 0.0;
    double set_consistency = 0.0;
    double set_feasibility = 0.0;
    double s_term = 0.0;
};

void to_json(Json& j, const Iso29148Scores& s);
void from_json(const Json& j, Iso29148Scores& s);

// Judge persona independent of the generation agents; scores clamped to
// [1,5]. Throws JudgeError when unparseable.
Iso29148Scores iso29148_judge(providers::Provider& provider, const RequirementSet& set,
                              const RunConfig& config, int seed);

} // namespace quare::metrics
