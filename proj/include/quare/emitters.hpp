#pragma once

#include <map>
#include <string>
#include <vector>

#include "quare/integration.hpp"
#include "quare/model.hpp"
#include "quare/negotiation.hpp"
#include "quare/verification.hpp"

namespace quare::emit {

struct ExportContext {
    integration::AnnotationMap annotations;
    std::map<std::string, std::vector<std::string>> ancestry;         // node id -> ancestor ids
    std::map<std::string, std::vector<std::string>> compliance_flags; // node id -> clause ids
};

// KAOS model document with per-node annotations, ancestry, and compliance
// flags. Deterministic key order; re-importable through the core-model
// decoder. Refuses models that fail validate_dag.
Json export_kaos_json(const KaosModel& model, const ExportContext& ctx);

// GSN document: one Goal element per node, SupportedBy per edge,
// Justification from the backing requirement rationale. Schema
// "quare-gsn-1" is defined by this project.
std::string export_gsn_xml(const KaosModel& model, const RequirementSet* rationale_source = nullptr);

// Per-run markdown report: negotiation round boxes, topology summary, and
// the compliance coverage table.
std::string export_report(const KaosModel& model, const negotiation::NegotiationTrace& trace,
                          const coordinator::ConflictRegistry& registry,
                          const verification::ComplianceReport& compliance, const Json& metrics);

} // namespace quare::emit
