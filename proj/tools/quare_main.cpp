#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "quare/errors.hpp"
#include "quare/pipeline.hpp"

namespace {

using namespace quare;

// --provider hash-mock | http | transcript:<file>
void apply_provider_flag(RunConfig& config, const std::string& provider_flag) {
    if (provider_flag.empty()) return;
    if (provider_flag == "hash-mock" || provider_flag == "http") {
        config.provider.kind = provider_flag;
        return;
    }
    if (provider_flag.rfind("transcript:", 0) == 0) {
        config.provider.kind = "transcript";
        config.provider.transcript_path = provider_flag.substr(std::string("transcript:").size());
        return;
    }
    throw CLI::ValidationError("--provider expects hash-mock, http, or transcript:<file>");
}

void apply_seeds_flag(RunConfig& config, const std::vector<int>& seeds) {
    if (!seeds.empty()) config.seeds = seeds;
}

RunConfig config_from_options(const std::string& config_path, const std::string& provider_flag,
                              const std::vector<int>& seeds) {
    RunConfig config;
    if (!config_path.empty()) config = pipeline::load_config(config_path);
    apply_provider_flag(config, provider_flag);
    apply_seeds_flag(config, seeds);
    config.validate();
    return config;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return Json::parse(in);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

int cmd_run(const std::string& project_path, const std::string& config_path,
            const std::string& provider_flag, const std::vector<int>& seeds,
            const std::string& out_dir) {
    auto config = config_from_options(config_path, provider_flag, seeds);
    auto project = pipeline::load_project(project_path);
    auto provider = providers::make_provider(config.provider);
    pipeline::run_case(*provider, project, config, out_dir);
    std::cout << "run complete: " << config.seeds.size() << " seed(s) written under " << out_dir
              << "\n";
    return 0;
}

int cmd_eval(const std::string& a_path, const std::string& b_path, const std::string& vectors_path,
             const std::string& matrix_path, const std::string& similarity_mode,
             const std::string& out_path) {
    providers::HashMockProvider mock;
    Json output;

    if (!matrix_path.empty()) {
        const auto matrix = read_json_file(matrix_path).get<std::vector<std::vector<double>>>();
        const auto preservation = metrics::set_preservation_matrix(matrix);
        output["preservation"] = Json{{"score", preservation.score}};
    } else {
        const auto set_a = read_json_file(a_path).get<RequirementSet>();
        const auto set_b = read_json_file(b_path).get<RequirementSet>();

        metrics::PreservationScore preservation;
        if (similarity_mode == "exact") {
            std::vector<std::string> texts_a, texts_b;
            for (const auto& r : set_a.requirements) texts_a.push_back(r.description);
            for (const auto& r : set_b.requirements) texts_b.push_back(r.description);
            preservation =
                metrics::set_preservation(metrics::exact_match_similarity(), texts_a, texts_b);
        } else {
            preservation = metrics::set_preservation(mock, set_a, set_b);
        }
        output["preservation"] = Json{{"score", preservation.score}};

        std::vector<QualityVector> vectors;
        if (!vectors_path.empty()) {
            Json vj = read_json_file(vectors_path);
            if (vj.is_object() && vj.contains("vectors")) vj = vj["vectors"];
            vectors = vj.get<std::vector<QualityVector>>();
        } else {
            RunConfig defaults;
            vectors = metrics::project_set(mock, set_a, defaults, defaults.seeds.front());
        }
        const auto hull = metrics::chv(vectors);
        const auto counts = metrics::axis_counts(set_a);
        output["geometry"] = Json{{"chv", hull.volume},
                                  {"chv_degenerate", hull.degenerate},
                                  {"mdc", vectors.empty() ? 0.0 : metrics::mdc(vectors)},
                                  {"cu", metrics::cu(counts)},
                                  {"mac", metrics::mac(counts)}};
    }

    const std::string rendered = output.dump(2) + "\n";
    if (out_path.empty())
        std::cout << rendered;
    else
        write_text(out_path, rendered);
    return 0;
}

int cmd_replay(const std::string& transcript_path, const std::string& project_path,
               const std::string& config_path, const std::string& out_dir,
               const std::vector<int>& seeds) {
    auto config = config_from_options(config_path, "", seeds);
    config.provider.kind = "transcript";
    config.provider.transcript_path = transcript_path;
    auto project = pipeline::load_project(project_path);

    auto replay = pipeline::run_replay(transcript_path, project, config, out_dir);
    if (!replay.divergences.empty()) {
        std::cerr << "replay diverged from the expected trajectory:\n";
        for (const auto& d : replay.divergences) std::cerr << "  - " << d << "\n";
        return 1;
    }
    std::cout << "replay matched the expected trajectory\n";
    return 0;
}

int cmd_export(const std::string& model_path, const std::string& out_dir, bool downstream,
               const std::string& config_path, const std::string& provider_flag) {
    const Json doc = read_json_file(model_path);
    const auto model = doc.get<KaosModel>();

    std::filesystem::create_directories(out_dir);
    emit::ExportContext ctx;
    for (const auto& node : doc.value("nodes", Json::array())) {
        const std::string id = node.value("id", "");
        if (node.contains("annotations")) {
            for (const auto& a : node["annotations"])
                ctx.annotations[id].push_back({a.value("kind", ""), a.value("text", ""),
                                               a.value("source_id", "")});
        }
        if (node.contains("ancestry") && !node["ancestry"].empty())
            ctx.ancestry[id] = node["ancestry"].get<std::vector<std::string>>();
        if (node.contains("compliance_flags") && !node["compliance_flags"].empty())
            ctx.compliance_flags[id] = node["compliance_flags"].get<std::vector<std::string>>();
    }

    write_text(out_dir + "/model.kaos.json", emit::export_kaos_json(model, ctx).dump(2) + "\n");
    write_text(out_dir + "/model.gsn.xml", emit::export_gsn_xml(model));

    if (downstream) {
        auto config = config_from_options(config_path, provider_flag, {});
        auto provider = providers::make_provider(config.provider);
        write_text(out_dir + "/downstream.md",
                   pipeline::draft_downstream_materials(*provider, model, config,
                                                        config.seeds.front()));
    }
    std::cout << "exported model artifacts to " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QUARE: quality-aware multi-agent requirements pipeline"};
    app.require_subcommand(1);

    std::string project_path, config_path, out_path, provider_flag;
    std::vector<int> seeds;

    auto* run = app.add_subcommand("run", "execute phases 1-5 for every configured seed");
    run->add_option("--project", project_path, "project description JSON")->required();
    run->add_option("--config", config_path, "run configuration JSON");
    run->add_option("--provider", provider_flag, "hash-mock | http | transcript:<file>");
    run->add_option("--seeds", seeds, "override the configured seeds")->delimiter(',');
    run->add_option("--out", out_path, "output directory")->required();

    std::string eval_a, eval_b, eval_vectors, eval_matrix, eval_similarity = "mock";
    auto* eval = app.add_subcommand("eval", "metric suite over two requirement sets");
    eval->add_option("--a", eval_a, "requirement set A (canonical JSON)");
    eval->add_option("--b", eval_b, "requirement set B (canonical JSON)");
    eval->add_option("--vectors", eval_vectors, "precomputed quality vectors JSON");
    eval->add_option("--matrix", eval_matrix, "precomputed similarity matrix JSON");
    eval->add_option("--similarity", eval_similarity, "mock | exact")
        ->check(CLI::IsMember({"mock", "exact"}));
    eval->add_option("--out", out_path, "metrics output file (stdout when omitted)");

    std::string transcript_path;
    auto* replay = app.add_subcommand("replay", "replay a scripted transcript and check statuses");
    replay->add_option("--transcript", transcript_path, "transcript JSON")->required();
    replay->add_option("--project", project_path, "project description JSON")->required();
    replay->add_option("--config", config_path, "run configuration JSON");
    replay->add_option("--seeds", seeds, "override the configured seeds")->delimiter(',');
    replay->add_option("--out", out_path, "output directory");

    std::string model_path;
    bool downstream = false;
    auto* exp = app.add_subcommand("export", "re-emit artifacts from a saved KAOS model");
    exp->add_option("--model", model_path, "model.kaos.json")->required();
    exp->add_option("--out", out_path, "output directory")->required();
    exp->add_flag("--downstream", downstream, "draft downstream materials via the provider");
    exp->add_option("--config", config_path, "run configuration JSON");
    exp->add_option("--provider", provider_flag, "hash-mock | http | transcript:<file>");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(project_path, config_path, provider_flag, seeds, out_path);
        if (eval->parsed()) {
            if (eval_matrix.empty() && (eval_a.empty() || eval_b.empty()))
                throw std::invalid_argument("eval requires --a and --b (or --matrix)");
            return cmd_eval(eval_a, eval_b, eval_vectors, eval_matrix, eval_similarity, out_path);
        }
        if (replay->parsed())
            return cmd_replay(transcript_path, project_path, config_path, out_path, seeds);
        if (exp->parsed())
            return cmd_export(model_path, out_path, downstream, config_path, provider_flag);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
