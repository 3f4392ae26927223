#pragma once

#include <string>
#include <vector>

#include "quare/model.hpp"
#include "quare/providers.hpp"

namespace quare::agents {

struct AgentSpec {
    QualityDimension dimension = QualityDimension::Safety;
    std::string role_definition;
    std::string task_instruction; // chain-of-thought directive
    std::string output_schema;    // JSON schema of the requirement fields

    void validate() const; // all three components non-empty
};

// Loads the five dimension prompt files (<dimension>.json, lowercase) from a
// directory, in axis order.
std::vector<AgentSpec> load_agent_specs(const std::string& prompts_dir);

// Moderator persona used for synthesis calls.
std::string load_orchestrator_prompt(const std::string& prompts_dir);

// System prompt = role definition + task instruction + output schema; user
// prompt = the project description verbatim (zero-shot).
providers::ChatRequest assemble_prompt(const AgentSpec& spec, const std::string& project_description,
                                       const RunConfig& config, int seed);

// Runs one agent and parses its JSON array output. Malformed items are
// dropped and counted into `warnings`; a wholly unparseable response after
// 2 re-prompt attempts raises AgentOutputError with the raw text.
std::vector<Requirement> generate_requirements(providers::Provider& provider, const AgentSpec& spec,
                                               const std::string& project, const RunConfig& config,
                                               int seed, std::vector<std::string>* warnings = nullptr);

// Phase 1: all five agents over the same project description; deterministic
// merge in axis order. A hard agent failure raises PipelineError naming the
// agent.
RequirementSet run_phase1(providers::Provider& provider, const std::string& project,
                          const std::vector<AgentSpec>& specs, const RunConfig& config, int seed,
                          std::vector<std::string>* warnings = nullptr);

// Id scheme helpers: "<agent-prefix>-<level-prefix><counter>", e.g. "S-TG2".
std::string agent_prefix(QualityDimension d);
std::string level_prefix(KaosLevel l);

} // namespace quare::agents
