#include "quare/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "quare/errors.hpp"
#include "quare/prompting.hpp"

namespace quare::pipeline {

namespace fs = std::filesystem;

ProjectSpec load_project(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open project file: " + path);
    Json j = Json::parse(in);
    ProjectSpec project;
    project.name = j.value("name", "case");
    project.description = j.at("description").get<std::string>();
    project.domain_tags = j.value("domain_tags", std::vector<std::string>{});
    if (project.description.empty())
        throw std::invalid_argument("project description must be non-empty");
    return project;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    RunConfig config = Json::parse(in).get<RunConfig>();
    config.validate();
    return config;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

double preservation_between(providers::Provider& provider, const RequirementSet& a,
                            const RequirementSet& b) {
    return metrics::set_preservation(provider, a, b).score;
}

} // namespace

SeedRunResult run_seed(providers::Provider& provider, const ProjectSpec& project,
                       const RunConfig& config, int seed) {
    config.validate();
    SeedRunResult result;
    result.seed = seed;
    result.case_name = project.name;

    const auto specs = agents::load_agent_specs(config.prompts_dir);
    const auto orchestrator = agents::load_orchestrator_prompt(config.prompts_dir);

    // Phase 1: parallel specialized generation
    result.phase1 =
        agents::run_phase1(provider, project.description, specs, config, seed, &result.warnings);

    // Phase 2: conflict detection and dialectical negotiation
    coordinator::ConflictRegistry registry;
    try {
        registry = coordinator::build_registry(provider, result.phase1, config, seed, &result.warnings);
    } catch (const std::exception& e) {
        throw PipelineError(std::string("phase 2 (detection) failed: ") + e.what());
    }
    negotiation::Phase2Result phase2;
    try {
        phase2 = negotiation::run_phase2(provider, result.phase1, std::move(registry), specs,
                                         orchestrator, config, seed);
    } catch (const std::exception& e) {
        throw PipelineError(std::string("phase 2 (negotiation) failed: ") + e.what());
    }
    result.phase2 = phase2.set;
    result.registry = phase2.registry;
    result.trace = phase2.trace;

    // Phase 3: integration and topology validation
    integration::Phase3Result phase3;
    try {
        phase3 = integration::run_phase3(provider, result.phase2, result.registry, result.trace,
                                         config, seed);
    } catch (const std::exception& e) {
        throw PipelineError(std::string("phase 3 failed: ") + e.what());
    }
    result.phase3 = phase3.set;
    result.model = phase3.model;
    result.annotations = phase3.annotations;
    result.retired = phase3.retired;
    result.decisions = phase3.decisions;

    // Phase 4: verification (non-mutating)
    result.phase4 = result.phase3;
    result.phase4.phase_label = 4;
    std::vector<providers::ClauseRecord> corpus;
    if (!config.clause_corpus.empty()) corpus = providers::load_clause_corpus(config.clause_corpus);
    try {
        result.compliance = verification::run_phase4(provider, result.phase4, corpus, config, seed);
    } catch (const std::exception& e) {
        throw PipelineError(std::string("phase 4 failed: ") + e.what());
    }
    for (const auto& [id, list] : result.compliance.annotations) {
        auto& bucket = result.annotations[id];
        bucket.insert(bucket.end(), list.begin(), list.end());
    }
    for (const auto& w : result.compliance.warnings) result.warnings.push_back(w);

    // Metrics over the verified set
    try {
        const auto vectors = metrics::project_set(provider, result.phase4, config, seed);
        const auto hull = metrics::chv(vectors);
        const auto counts = metrics::axis_counts(result.phase4);
        const auto rate = metrics::crr(result.registry);
        result.iso = metrics::iso29148_judge(provider, result.phase4, config, seed);

        Json preservation = Json::array();
        preservation.push_back(Json{{"phase_a", 1},
                                    {"phase_b", 2},
                                    {"score", preservation_between(provider, result.phase1, result.phase2)}});
        preservation.push_back(Json{{"phase_a", 1},
                                    {"phase_b", 3},
                                    {"score", preservation_between(provider, result.phase1, result.phase3)}});
        preservation.push_back(Json{{"phase_a", 3},
                                    {"phase_b", 4},
                                    {"score", preservation_between(provider, result.phase3, result.phase4)}});

        result.metrics_json =
            Json{{"case", result.case_name},
                 {"seed", seed},
                 {"scalars",
                  Json{{"req_count_phase1", result.phase1.requirements.size()},
                       {"req_count_final", result.phase4.requirements.size()},
                       {"chv", hull.volume},
                       {"chv_degenerate", hull.degenerate},
                       {"mdc", result.phase4.requirements.empty() ? 0.0 : metrics::mdc(vectors)},
                       {"cu", metrics::cu(counts)},
                       {"mac", metrics::mac(counts)},
                       {"axis_counts", counts.counts},
                       {"crr", rate.value},
                       {"crr_vacuous", rate.vacuous},
                       {"negotiation_steps", result.trace.total_steps},
                       {"conflicts_detected", result.registry.conflicts.size()},
                       {"s_logic", result.compliance.logic.score},
                       {"coverage", result.compliance.coverage.value},
                       {"coverage_vacuous", result.compliance.coverage.vacuous}}},
                 {"iso29148", result.iso},
                 {"preservation", preservation}};
    } catch (const std::exception& e) {
        throw PipelineError(std::string("phase 5 (metrics) failed: ") + e.what());
    }
    return result;
}

void write_seed_outputs(const SeedRunResult& result, const std::string& dir) {
    fs::create_directories(dir);
    auto dump = [](const Json& j) { return j.dump(2) + "\n"; };

    write_file(dir + "/phase1.requirements.json", dump(result.phase1));
    write_file(dir + "/phase2.requirements.json", dump(result.phase2));
    write_file(dir + "/phase3.requirements.json", dump(result.phase3));
    write_file(dir + "/phase4.requirements.json", dump(result.phase4));
    write_file(dir + "/registry.json", dump(coordinator::registry_to_json(result.registry)));
    write_file(dir + "/trace.json", dump(negotiation::trace_to_json(result.trace)));
    write_file(dir + "/decisions.json", dump(integration::decisions_to_json(result.decisions)));
    write_file(dir + "/topology_report.json",
               dump(integration::topology_report_to_json(integration::validate_dag(result.model))));

    emit::ExportContext ctx;
    ctx.annotations = result.annotations;
    for (const auto& r : result.phase4.requirements)
        if (!r.ancestry.empty()) ctx.ancestry[r.id] = r.ancestry;
    for (const auto& v : result.compliance.verdicts) {
        if (v.label == "NotSatisfied" || v.best_requirement_id.empty()) continue;
        ctx.compliance_flags[v.best_requirement_id].push_back(v.clause_id);
    }
    write_file(dir + "/model.kaos.json", dump(emit::export_kaos_json(result.model, ctx)));
    write_file(dir + "/model.gsn.xml", emit::export_gsn_xml(result.model, &result.phase4));
    write_file(dir + "/compliance.json",
               dump(verification::compliance_report_to_json(result.compliance)));
    write_file(dir + "/metrics.json", dump(result.metrics_json));
    write_file(dir + "/report.md", emit::export_report(result.model, result.trace, result.registry,
                                                       result.compliance, result.metrics_json));

    Json retired = Json::array();
    for (const auto& r : result.retired) retired.push_back(r);
    write_file(dir + "/run_log.json",
               dump(Json{{"warnings", result.warnings}, {"retired", retired}}));
}

namespace {

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", v);
    return buffer;
}

} // namespace

Json run_case(providers::Provider& provider, const ProjectSpec& project, const RunConfig& config,
              const std::string& out_dir) {
    fs::create_directories(out_dir);

    Json per_seed = Json::array();
    std::map<std::string, double> sums;
    std::vector<std::string> numeric_keys = {"req_count_phase1", "req_count_final", "chv",
                                             "mdc",  "cu",  "mac",  "crr",  "negotiation_steps",
                                             "conflicts_detected", "s_logic", "coverage"};

    for (int seed : config.seeds) {
        auto result = run_seed(provider, project, config, seed);
        write_seed_outputs(result, out_dir + "/seed-" + std::to_string(seed));
        per_seed.push_back(result.metrics_json);
        for (const auto& key : numeric_keys)
            sums[key] += result.metrics_json["scalars"][key].get<double>();
    }

    Json means = Json::object();
    for (const auto& [key, total] : sums)
        means[key] = total / static_cast<double>(config.seeds.size());

    Json summary{{"case", project.name},
                 {"seeds", config.seeds},
                 {"per_seed", per_seed},
                 {"means", means}};
    write_file(out_dir + "/summary.json", summary.dump(2) + "\n");

    // CSV shaped like the headline tables: one row per seed plus the mean.
    std::string csv =
        "case,seed,req_count,chv,mdc,cu,mac,steps,crr,p2_vs_p1,p3_vs_p1,p4_vs_p3,s_logic,coverage\n";
    auto preservation_of = [](const Json& record, int a, int b) {
        for (const auto& p : record["preservation"])
            if (p["phase_a"].get<int>() == a && p["phase_b"].get<int>() == b)
                return p["score"].get<double>();
        return 0.0;
    };
    for (const auto& record : per_seed) {
        const auto& s = record["scalars"];
        csv += project.name + "," + std::to_string(record["seed"].get<int>()) + "," +
               std::to_string(s["req_count_final"].get<int>()) + "," +
               format_double(s["chv"].get<double>()) + "," + format_double(s["mdc"].get<double>()) +
               "," + format_double(s["cu"].get<double>()) + "," +
               std::to_string(s["mac"].get<int>()) + "," +
               std::to_string(s["negotiation_steps"].get<int>()) + "," +
               format_double(s["crr"].get<double>()) + "," +
               format_double(preservation_of(record, 1, 2)) + "," +
               format_double(preservation_of(record, 1, 3)) + "," +
               format_double(preservation_of(record, 3, 4)) + "," +
               format_double(s["s_logic"].get<double>()) + "," +
               format_double(s["coverage"].get<double>()) + "\n";
    }
    csv += project.name + ",mean," + format_double(means["req_count_final"].get<double>()) + "," +
           format_double(means["chv"].get<double>()) + "," +
           format_double(means["mdc"].get<double>()) + "," +
           format_double(means["cu"].get<double>()) + "," +
           format_double(means["mac"].get<double>()) + "," +
           format_double(means["negotiation_steps"].get<double>()) + "," +
           format_double(means["crr"].get<double>()) + ",,,," +
           format_double(means["s_logic"].get<double>()) + "," +
           format_double(means["coverage"].get<double>()) + "\n";
    write_file(out_dir + "/summary.csv", csv);

    return summary;
}

ReplayResult run_replay(const std::string& transcript_path, const ProjectSpec& project,
                        const RunConfig& config, const std::string& out_dir) {
    std::ifstream in(transcript_path);
    if (!in) throw std::invalid_argument("cannot open transcript: " + transcript_path);
    Json transcript = Json::parse(in);
    const auto expected_statuses =
        transcript.value("expected_round_statuses", std::vector<std::string>{});
    const auto expected_nodes = transcript.value("expected_nodes", std::vector<std::string>{});

    auto provider = providers::TranscriptProvider::from_file(transcript_path);
    const int seed = config.seeds.empty() ? 101 : config.seeds.front();

    ReplayResult replay;
    replay.run = run_seed(*provider, project, config, seed);
    if (!out_dir.empty()) write_seed_outputs(replay.run, out_dir + "/seed-" + std::to_string(seed));

    if (!expected_statuses.empty()) {
        if (replay.run.registry.conflicts.empty()) {
            replay.divergences.push_back("expected a negotiated conflict but the registry is empty");
        } else {
            const auto& top = replay.run.registry.conflicts.front();
            if (top.rounds.size() != expected_statuses.size()) {
                replay.divergences.push_back(
                    "round count mismatch: expected " + std::to_string(expected_statuses.size()) +
                    ", got " + std::to_string(top.rounds.size()));
            }
            for (std::size_t i = 0; i < std::min(top.rounds.size(), expected_statuses.size()); ++i) {
                const std::string got = to_string(top.rounds[i].status_after);
                if (got != expected_statuses[i]) {
                    replay.divergences.push_back("round " + std::to_string(i + 1) +
                                                 " status mismatch: expected " +
                                                 expected_statuses[i] + ", got " + got);
                }
            }
        }
    }
    for (const auto& id : expected_nodes) {
        if (!replay.run.model.find(id))
            replay.divergences.push_back("expected node '" + id + "' missing from the final model");
    }
    return replay;
}

std::string draft_downstream_materials(providers::Provider& provider, const KaosModel& model,
                                       const RunConfig& config, int seed) {
    std::string listing;
    for (const auto& n : model.nodes)
        listing += "- [" + n.id + ", " + to_string(n.level) + "] " + n.text + "\n";
    auto request = prompting::make_request(
        "You draft downstream engineering materials from a goal model.\n"
        "Task: downstream-materials\n"
        "Produce test case outlines and an architecture sketch in markdown.",
        "Goal model:\n" + listing, config, seed);
    return providers::chat_with_retry(provider, request);
}

} // namespace quare::pipeline
