#include "quare/agents.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "quare/errors.hpp"
#include "quare/prompting.hpp"

namespace quare::agents {

void AgentSpec::validate() const {
    if (role_definition.empty() || task_instruction.empty() || output_schema.empty())
        throw std::invalid_argument("agent spec for " + to_string(dimension) +
                                    " has an empty prompt component");
}

std::string agent_prefix(QualityDimension d) {
    switch (d) {
        case QualityDimension::Safety: return "S";
        case QualityDimension::Efficiency: return "E";
        case QualityDimension::Sustainability: return "G"; // Green agent
        case QualityDimension::Trustworthiness: return "T";
        case QualityDimension::Responsibility: return "R";
    }
    throw std::logic_error("unknown dimension");
}

std::string level_prefix(KaosLevel l) {
    switch (l) {
        case KaosLevel::Strategic: return "SG";
        case KaosLevel::Tactical: return "TG";
        case KaosLevel::Operational: return "OG";
    }
    throw std::logic_error("unknown level");
}

std::vector<AgentSpec> load_agent_specs(const std::string& prompts_dir) {
    std::vector<AgentSpec> specs;
    for (auto d : all_dimensions()) {
        std::string name = to_string(d);
        std::transform(name.begin(), name.end(), name.begin(), ::tolower);
        const std::string path = prompts_dir + "/" + name + ".json";
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("missing agent prompt file: " + path);
        Json j = Json::parse(in);
        AgentSpec spec;
        spec.dimension = dimension_from_string(j.at("dimension").get<std::string>());
        if (spec.dimension != d)
            throw std::invalid_argument("prompt file " + path + " declares wrong dimension");
        spec.role_definition = j.at("role_definition").get<std::string>();
        spec.task_instruction = j.at("task_instruction").get<std::string>();
        spec.output_schema = j.at("output_schema").get<std::string>();
        spec.validate();
        specs.push_back(std::move(spec));
    }
    return specs;
}

std::string load_orchestrator_prompt(const std::string& prompts_dir) {
    const std::string path = prompts_dir + "/orchestrator.json";
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("missing orchestrator prompt file: " + path);
    Json j = Json::parse(in);
    return j.at("role_definition").get<std::string>();
}

providers::ChatRequest assemble_prompt(const AgentSpec& spec, const std::string& project_description,
                                       const RunConfig& config, int seed) {
    spec.validate();
    if (project_description.empty())
        throw std::invalid_argument("project description must be non-empty");
    return prompting::make_request(
        spec.role_definition + "\n" + spec.task_instruction + "\n" + spec.output_schema,
        project_description, config, seed);
}

namespace {

struct ParsedItem {
    Requirement requirement;
    std::string requested_id;
};

// Items must be objects with a non-empty description; level defaults to
// Operational when absent but an unparseable level marks the item malformed.
bool parse_item(const Json& item, QualityDimension dim, ParsedItem& out) {
    if (!item.is_object()) return false;
    if (!item.contains("description") || !item["description"].is_string()) return false;
    Requirement r;
    r.description = item["description"].get<std::string>();
    if (r.description.empty()) return false;
    if (item.contains("level")) {
        if (!item["level"].is_string()) return false;
        try {
            r.level = level_from_string(item["level"].get<std::string>());
        } catch (const std::invalid_argument&) {
            return false;
        }
    } else {
        r.level = KaosLevel::Operational;
    }
    r.dimension = dim;
    r.source_agent = to_string(dim);
    r.phase_of_origin = 1;
    r.rationale = item.value("rationale", "");
    out.requirement = std::move(r);
    out.requested_id = item.value("id", "");
    return true;
}

} // namespace

std::vector<Requirement> generate_requirements(providers::Provider& provider, const AgentSpec& spec,
                                               const std::string& project, const RunConfig& config,
                                               int seed, std::vector<std::string>* warnings) {
    auto request = assemble_prompt(spec, project, config, seed);
    std::string raw;
    auto parsed = prompting::chat_json(provider, request, /*repairs=*/2, &raw);
    if (!parsed) {
        throw AgentOutputError("agent " + to_string(spec.dimension) +
                                   " returned unparseable output after 2 re-prompt attempts",
                               raw);
    }
    const Json* items = &*parsed;
    if (parsed->is_object() && parsed->contains("requirements") && (*parsed)["requirements"].is_array())
        items = &(*parsed)["requirements"];
    if (!items->is_array()) {
        throw AgentOutputError("agent " + to_string(spec.dimension) +
                                   " did not return a JSON array of requirements",
                               raw);
    }

    std::vector<Requirement> out;
    std::set<std::string> used_ids;
    std::map<KaosLevel, int> counters;
    int malformed = 0;

    for (const auto& item : *items) {
        if (static_cast<int>(out.size()) >= config.per_agent_budget) {
            if (warnings)
                warnings->push_back("agent " + to_string(spec.dimension) +
                                    " exceeded the per-agent item budget; extra items dropped");
            break;
        }
        ParsedItem parsed_item;
        if (!parse_item(item, spec.dimension, parsed_item)) {
            ++malformed;
            continue;
        }
        Requirement r = std::move(parsed_item.requirement);
        if (!parsed_item.requested_id.empty() && !used_ids.count(parsed_item.requested_id)) {
            r.id = parsed_item.requested_id;
        } else {
            int& counter = counters[r.level];
            std::string id;
            do {
                ++counter;
                id = agent_prefix(spec.dimension) + "-" + level_prefix(r.level) + std::to_string(counter);
            } while (used_ids.count(id));
            r.id = id;
        }
        used_ids.insert(r.id);
        out.push_back(std::move(r));
    }

    if (malformed > 0 && warnings) {
        warnings->push_back("agent " + to_string(spec.dimension) + " produced " +
                            std::to_string(malformed) + " malformed item(s); dropped");
    }
    return out;
}

RequirementSet run_phase1(providers::Provider& provider, const std::string& project,
                          const std::vector<AgentSpec>& specs, const RunConfig& config, int seed,
                          std::vector<std::string>* warnings) {
    if (specs.size() != static_cast<std::size_t>(kDimensionCount))
        throw std::invalid_argument("phase 1 requires exactly five agent specs");
    std::set<QualityDimension> seen;
    for (const auto& s : specs) seen.insert(s.dimension);
    if (seen.size() != static_cast<std::size_t>(kDimensionCount))
        throw std::invalid_argument("phase 1 requires one spec per quality dimension");

    // deterministic merge: axis order, then per-agent output order
    std::vector<const AgentSpec*> ordered;
    for (auto d : all_dimensions())
        for (const auto& s : specs)
            if (s.dimension == d) ordered.push_back(&s);

    RequirementSet set;
    set.phase_label = 1;
    std::set<std::string> used_ids;
    for (const AgentSpec* spec : ordered) {
        std::vector<Requirement> items;
        try {
            items = generate_requirements(provider, *spec, project, config, seed, warnings);
        } catch (const std::exception& e) {
            throw PipelineError("phase 1 failed for agent " + to_string(spec->dimension) + ": " +
                                e.what());
        }
        for (auto& r : items) {
            if (used_ids.count(r.id)) {
                // cross-agent id collision: qualify with the agent prefix
                std::string qualified = agent_prefix(spec->dimension) + "-" + r.id;
                int bump = 1;
                std::string candidate = qualified;
                while (used_ids.count(candidate)) candidate = qualified + "." + std::to_string(++bump);
                if (warnings)
                    warnings->push_back("id collision across agents: '" + r.id + "' kept as '" +
                                        candidate + "'");
                r.id = candidate;
            }
            used_ids.insert(r.id);
            set.requirements.push_back(std::move(r));
        }
    }
    return set;
}

} // namespace quare::agents
