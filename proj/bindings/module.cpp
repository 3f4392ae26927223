#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quare/assignment.hpp"
#include "quare/hull.hpp"
#include "quare/metrics.hpp"
#include "quare/model.hpp"
#include "quare/pipeline.hpp"
#include "quare/providers.hpp"
#include "quare/verification.hpp"

namespace py = pybind11;
using namespace quare;

namespace {

std::vector<QualityVector> to_quality_vectors(const std::vector<std::vector<double>>& raw) {
    std::vector<QualityVector> points;
    points.reserve(raw.size());
    for (const auto& p : raw) {
        if (p.size() != kDimensionCount)
            throw std::invalid_argument("quality vectors must have 5 components");
        QualityVector v;
        std::copy(p.begin(), p.end(), v.components.begin());
        points.push_back(v);
    }
    return points;
}

metrics::AxisCounts to_axis_counts(const std::vector<int>& counts) {
    if (counts.size() != kDimensionCount)
        throw std::invalid_argument("axis counts must have 5 entries");
    metrics::AxisCounts out;
    std::copy(counts.begin(), counts.end(), out.counts.begin());
    return out;
}

RequirementSet texts_to_set(const std::vector<std::string>& texts) {
    RequirementSet set;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Requirement r;
        r.id = "R" + std::to_string(i + 1);
        r.description = texts[i];
        r.source_agent = "Safety";
        set.requirements.push_back(std::move(r));
    }
    return set;
}

} // namespace

PYBIND11_MODULE(quare, m) {
    m.doc() = "Quality-aware multi-agent requirements pipeline: metrics and pipeline bindings";
    m.attr("__version__") = "0.1.0";

    m.def("uniform_weights", &new_uniform_weights, py::arg("n"),
          "Uniform agent weights 1/n summing to 1.");

    m.def(
        "chv",
        [](const std::vector<std::vector<double>>& points) {
            const auto r = metrics::chv(to_quality_vectors(points));
            return py::make_tuple(r.volume, r.degenerate);
        },
        py::arg("points"), "Convex hull volume in the 5-D quality space -> (volume, degenerate).");

    m.def(
        "mdc",
        [](const std::vector<std::vector<double>>& points) {
            return metrics::mdc(to_quality_vectors(points));
        },
        py::arg("points"), "Mean Euclidean distance to the centroid.");

    m.def(
        "cu", [](const std::vector<int>& counts) { return metrics::cu(to_axis_counts(counts)); },
        py::arg("counts"), "Coverage uniformity: population stddev of per-axis counts.");

    m.def(
        "mac", [](const std::vector<int>& counts) { return metrics::mac(to_axis_counts(counts)); },
        py::arg("counts"), "Minimum axis coverage.");

    m.def(
        "set_preservation",
        [](const std::vector<std::vector<double>>& matrix) {
            return metrics::set_preservation_matrix(matrix).score;
        },
        py::arg("similarity_matrix"),
        "Preservation score from a precomputed pairwise similarity matrix.");

    m.def(
        "set_preservation_texts",
        [](const std::vector<std::string>& a, const std::vector<std::string>& b, bool exact) {
            if (exact) return metrics::set_preservation(metrics::exact_match_similarity(), a, b).score;
            providers::HashMockProvider mock;
            return metrics::set_preservation(
                       [&mock](const std::string& x, const std::string& y) {
                           return providers::similarity_f1(mock, x, y);
                       },
                       a, b)
                .score;
        },
        py::arg("a"), py::arg("b"), py::arg("exact") = false,
        "Preservation score between two text sets (hash-mock or exact-match similarity).");

    m.def(
        "similarity_f1",
        [](const std::string& a, const std::string& b) {
            providers::HashMockProvider mock;
            return providers::similarity_f1(mock, a, b);
        },
        py::arg("a"), py::arg("b"), "Token-level greedy-matching F1 under the hash-mock embedder.");

    m.def(
        "hungarian",
        [](const std::vector<std::vector<double>>& scores) {
            return assignment::max_assignment(scores);
        },
        py::arg("scores"), "Exact max-sum assignment; returns the column for each row.");

    m.def(
        "logic_check",
        [](const std::vector<std::string>& texts) {
            const auto report =
                verification::logic_check(verification::extract_constraints(texts_to_set(texts)));
            py::dict out;
            out["score"] = report.score;
            out["comparable_pairs"] = report.comparable_pairs;
            out["conflicting_pairs"] = report.conflicting_pairs;
            return out;
        },
        py::arg("texts"), "S_logic over numeric constraints extracted from the texts.");

    m.def(
        "extract_constraints",
        [](const std::string& text) {
            py::list out;
            for (const auto& c : verification::extract_constraints(texts_to_set({text}))) {
                py::dict d;
                d["metric"] = c.metric;
                d["comparator"] = verification::to_string(c.comparator);
                d["value"] = c.value;
                d["unit"] = c.unit;
                d["scope"] = c.scope;
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("text"), "Numeric constraints recognized in one requirement text.");

    m.def(
        "validate_requirement_set",
        [](const std::string& json_text) {
            const auto set = Json::parse(json_text).get<RequirementSet>();
            std::vector<std::string> findings;
            for (const auto& f : validate_requirement_set(set).findings)
                findings.push_back(f.kind + ": " + f.message);
            return findings;
        },
        py::arg("json_text"), "Invariant findings for a canonical requirement-set document.");

    m.def(
        "validate_model",
        [](const std::string& json_text) {
            const auto model = Json::parse(json_text).get<KaosModel>();
            std::vector<std::string> findings;
            for (const auto& f : integration::validate_dag(model).findings)
                findings.push_back(f.kind + ": " + f.subject);
            return findings;
        },
        py::arg("json_text"), "Topology findings for a canonical KAOS model document.");

    m.def(
        "run_pipeline",
        [](const std::string& project_json, const std::string& config_json,
           const std::string& out_dir) {
            const Json pj = Json::parse(project_json);
            pipeline::ProjectSpec project;
            project.name = pj.value("name", "case");
            project.description = pj.at("description").get<std::string>();
            project.domain_tags = pj.value("domain_tags", std::vector<std::string>{});
            RunConfig config = Json::parse(config_json).get<RunConfig>();
            config.validate();
            auto provider = providers::make_provider(config.provider);
            return pipeline::run_case(*provider, project, config, out_dir).dump();
        },
        py::arg("project_json"), py::arg("config_json"), py::arg("out_dir"),
        "Full five-phase run for every configured seed; returns the summary JSON.");
}
