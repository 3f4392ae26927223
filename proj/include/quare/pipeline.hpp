#pragma once

#include <string>
#include <vector>

#include "quare/agents.hpp"
#include "quare/coordinator.hpp"
#include "quare/emitters.hpp"
#include "quare/integration.hpp"
#include "quare/metrics.hpp"
#include "quare/model.hpp"
#include "quare/negotiation.hpp"
#include "quare/providers.hpp"
#include "quare/verification.hpp"

namespace quare::pipeline {

struct ProjectSpec {
    std::string name;
    std::string description;
    std::vector<std::string> domain_tags;
};

ProjectSpec load_project(const std::string& path);
RunConfig load_config(const std::string& path);

struct SeedRunResult {
    int seed = 0;
    std::string case_name;
    RequirementSet phase1;
    RequirementSet phase2;
    RequirementSet phase3;
    RequirementSet phase4;
    coordinator::ConflictRegistry registry;
    negotiation::NegotiationTrace trace;
    KaosModel model;
    integration::AnnotationMap annotations;
    std::vector<Requirement> retired;
    std::vector<integration::DecisionEntry> decisions;
    verification::ComplianceReport compliance;
    metrics::Iso29148Scores iso;
    Json metrics_json;
    std::vector<std::string> warnings;
};

// Phases 1-5 for one seed. Throws PipelineError (with the phase name) on a
// hard failure.
SeedRunResult run_seed(providers::Provider& provider, const ProjectSpec& project,
                       const RunConfig& config, int seed);

// Writes the per-seed output directory: phase requirement sets, registry,
// trace, model.kaos.json, model.gsn.xml, metrics.json, compliance.json,
// report.md, decisions.json, run_log.json.
void write_seed_outputs(const SeedRunResult& result, const std::string& dir);

// All seeds plus summary.json / summary.csv under out_dir. Returns the
// summary document.
Json run_case(providers::Provider& provider, const ProjectSpec& project, const RunConfig& config,
              const std::string& out_dir);

struct ReplayResult {
    SeedRunResult run;
    std::vector<std::string> divergences; // empty on success
};

// Runs the pipeline against a transcript mock and checks the expectations
// embedded in the transcript file (expected_round_statuses over the
// top-severity conflict, expected_nodes in the final model).
ReplayResult run_replay(const std::string& transcript_path, const ProjectSpec& project,
                        const RunConfig& config, const std::string& out_dir);

// Optional provider-backed drafting of downstream materials (test cases,
// architecture notes). Excluded from acceptance checks by design.
std::string draft_downstream_materials(providers::Provider& provider, const KaosModel& model,
                                       const RunConfig& config, int seed);

} // namespace quare::pipeline
