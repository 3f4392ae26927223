#include "quare/emitters.hpp"

#include <algorithm>

#include "quare/errors.hpp"

namespace quare::emit {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

Json export_kaos_json(const KaosModel& model, const ExportContext& ctx) {
    if (!integration::validate_dag(model).empty())
        throw TopologyError("export refused: model fails topology validation");

    Json nodes = Json::array();
    for (const auto& n : model.nodes) {
        Json node{{"id", n.id},
                  {"level", to_string(n.level)},
                  {"text", n.text},
                  {"requirement_refs", n.requirement_refs}};
        Json annotations = Json::array();
        if (auto it = ctx.annotations.find(n.id); it != ctx.annotations.end()) {
            for (const auto& a : it->second)
                annotations.push_back(
                    Json{{"kind", a.kind}, {"text", a.text}, {"source_id", a.source_id}});
        }
        node["annotations"] = annotations;
        node["ancestry"] = ctx.ancestry.count(n.id) ? Json(ctx.ancestry.at(n.id)) : Json::array();
        node["compliance_flags"] =
            ctx.compliance_flags.count(n.id) ? Json(ctx.compliance_flags.at(n.id)) : Json::array();
        nodes.push_back(std::move(node));
    }
    return Json{{"schema_version", "quare-kaos-1"}, {"nodes", nodes}, {"edges", model.edges}};
}

std::string export_gsn_xml(const KaosModel& model, const RequirementSet* rationale_source) {
    if (!integration::validate_dag(model).empty())
        throw TopologyError("export refused: model fails topology validation");

    std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    xml += "<gsn schema=\"quare-gsn-1\">\n";
    for (const auto& n : model.nodes) {
        xml += "  <goal id=\"" + xml_escape(n.id) + "\" level=\"" + to_string(n.level) + "\">\n";
        xml += "    <statement>" + xml_escape(n.text) + "</statement>\n";
        if (rationale_source) {
            for (const auto& ref : n.requirement_refs) {
                const Requirement* r = rationale_source->find(ref);
                if (r && !r->rationale.empty())
                    xml += "    <justification ref=\"" + xml_escape(ref) + "\">" +
                           xml_escape(r->rationale) + "</justification>\n";
            }
        }
        xml += "  </goal>\n";
    }
    for (const auto& e : model.edges) {
        xml += "  <supportedBy parent=\"" + xml_escape(e.parent) + "\" child=\"" +
               xml_escape(e.child) + "\"/>\n";
    }
    xml += "</gsn>\n";
    return xml;
}

std::string export_report(const KaosModel& model, const negotiation::NegotiationTrace& trace,
                          const coordinator::ConflictRegistry& registry,
                          const verification::ComplianceReport& compliance, const Json& metrics) {
    std::string md = "# Run report\n\n";

    md += "## Negotiation\n\n";
    if (trace.events.empty()) {
        md += "No conflicts detected.\n\n";
    } else {
        for (const auto& conflict : registry.conflicts) {
            if (conflict.rounds.empty()) continue;
            md += "### Conflict " + conflict.left_id + " vs " + conflict.right_id + " (" +
                  to_string(conflict.kind) + ", severity " + std::to_string(conflict.severity) +
                  ")\n\n";
            for (const auto& round : conflict.rounds) {
                md += "> **Round " + std::to_string(round.round_index) + "**\n";
                md += "> Thesis (" + round.focus_agent + "): " + round.thesis + "\n";
                for (const auto& c : round.critiques)
                    md += "> Critique (" + c.agent + "): " + c.text + "\n";
                md += "> Synthesis: " + round.synthesis + "\n";
                md += "> Status: **" + to_string(round.status_after) + "**\n\n";
            }
            md += "Final status: **" + to_string(conflict.status) + "**\n\n";
        }
        md += "Total negotiation steps: " + std::to_string(trace.total_steps) + "\n\n";
    }

    md += "## Topology\n\n";
    int strategic = 0, tactical = 0, operational = 0;
    for (const auto& n : model.nodes) {
        if (n.level == KaosLevel::Strategic) ++strategic;
        if (n.level == KaosLevel::Tactical) ++tactical;
        if (n.level == KaosLevel::Operational) ++operational;
    }
    md += "- nodes: " + std::to_string(model.nodes.size()) + " (strategic " +
          std::to_string(strategic) + ", tactical " + std::to_string(tactical) + ", operational " +
          std::to_string(operational) + ")\n";
    md += "- edges: " + std::to_string(model.edges.size()) + "\n";
    md += "- validation: " +
          std::string(integration::validate_dag(model).empty() ? "clean" : "FINDINGS PRESENT") +
          "\n\n";

    md += "## Compliance\n\n";
    if (compliance.verdicts.empty()) {
        md += "No applicable clauses";
        md += compliance.coverage.vacuous ? " (coverage vacuously 1.0).\n\n" : ".\n\n";
    } else {
        md += "| clause | label | best requirement |\n|---|---|---|\n";
        for (const auto& v : compliance.verdicts)
            md += "| " + v.clause_id + " | " + v.label + " | " + v.best_requirement_id + " |\n";
        md += "\nCoverage: " + std::to_string(compliance.coverage.value) + "\n\n";
    }
    md += "S_logic: " + std::to_string(compliance.logic.score) + "\n\n";

    md += "## Metrics\n\n```json\n" + metrics.dump(2) + "\n```\n";
    return md;
}

} // namespace quare::emit
