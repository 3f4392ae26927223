#include "quare/verification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "quare/errors.hpp"
#include "quare/hashing.hpp"
#include "quare/prompting.hpp"

namespace quare::verification {

std::string to_string(Comparator c) {
    switch (c) {
        case Comparator::Le: return "<=";
        case Comparator::Lt: return "<";
        case Comparator::Ge: return ">=";
        case Comparator::Gt: return ">";
        case Comparator::Eq: return "=";
    }
    throw std::logic_error("unknown comparator");
}

// ---------------------------------------------------------------------------
// Constraint extraction
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& metric_stopwords() {
    static const std::set<std::string> words = {
        "the", "a",    "an",   "of",    "for",  "to",   "shall", "must", "be",   "is",
        "are", "stay", "and",  "with",  "by",   "at",   "in",    "no",   "not",  "than",
        "per", "it",   "its",  "take",  "complete", "reduced",  "least", "most", "exceed",
        "all", "any",  "each", "while", "when"};
    return words;
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    return s;
}

// Word comparators and unicode signs folded into ascii operators.
std::string fold_comparators(std::string s) {
    static const std::vector<std::pair<std::string, std::string>> substitutions = {
        {"≤", "<="},        {"≥", ">="},       {"no more than", "<="},
        {"no less than", ">="},  {"at most", "<="},      {"at least", ">="},
        {"shall not exceed", "<="}, {"must not exceed", "<="}, {"not exceed", "<="},
        {"within", "<="},
    };
    std::string lower = lowercase(std::move(s));
    for (const auto& [from, to] : substitutions) {
        std::size_t pos = 0;
        while ((pos = lower.find(from, pos)) != std::string::npos) {
            lower.replace(pos, from.size(), to);
            pos += to.size();
        }
    }
    return lower;
}

// Sentence split on '.' that is not part of a decimal or a dotted id.
std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            const bool digit_left = i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
            const bool alnum_right =
                i + 1 < text.size() && std::isalnum(static_cast<unsigned char>(text[i + 1]));
            if (digit_left && alnum_right) {
                current.push_back(c);
                continue;
            }
            if (alnum_right && !digit_left) {
                current.push_back(c); // dotted identifier like TG2.1
                continue;
            }
            if (!current.empty()) out.push_back(current);
            current.clear();
            continue;
        }
        current.push_back(c);
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

std::vector<std::string> split_clauses(const std::string& sentence) {
    std::vector<std::string> out;
    std::string current;
    for (char c : sentence) {
        if (c == ',' || c == ';') {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

std::string normalize_unit(const std::string& raw) {
    const std::string u = lowercase(raw);
    if (u == "ms" || u == "millisecond" || u == "milliseconds") return "ms";
    if (u == "s" || u == "sec" || u == "secs" || u == "second" || u == "seconds") return "s";
    if (u == "%" || u == "percent") return "%";
    return "count";
}

std::optional<std::string> find_scope(const std::string& clause_lower) {
    static const std::regex hyphenated("([a-z]+-[a-z]+)");
    std::smatch m;
    if (std::regex_search(clause_lower, m, hyphenated)) return m[1].str();
    static const std::regex during("during ([a-z0-9]+)");
    if (std::regex_search(clause_lower, m, during)) return "during-" + m[1].str();
    return std::nullopt;
}

} // namespace

std::vector<NumericConstraint> extract_constraints(const RequirementSet& set) {
    static const std::regex pattern(R"((<=|>=|<|>|=)\s*([0-9]+(?:\.[0-9]+)?)\s*(%|[A-Za-z]+)?)");

    std::vector<NumericConstraint> out;
    for (const auto& r : set.requirements) {
        for (const auto& sentence : split_sentences(r.description)) {
            for (const auto& clause : split_clauses(sentence)) {
                const std::string folded = fold_comparators(clause);
                std::smatch m;
                if (!std::regex_search(folded, m, pattern)) continue;

                NumericConstraint c;
                c.requirement_id = r.id;
                const std::string op = m[1].str();
                c.comparator = op == "<=" ? Comparator::Le
                               : op == ">=" ? Comparator::Ge
                               : op == "<"  ? Comparator::Lt
                               : op == ">"  ? Comparator::Gt
                                            : Comparator::Eq;
                c.value = std::stod(m[2].str());
                c.unit = normalize_unit(m[3].matched ? m[3].str() : "");

                const auto scope = find_scope(folded);
                c.scope = scope.value_or("");

                // metric = content words before the comparator, scope words
                // excluded, consecutive duplicates collapsed
                std::set<std::string> scope_words;
                if (scope) {
                    for (const auto& w : providers::tokenize(*scope)) scope_words.insert(w);
                }
                std::string before = folded.substr(0, static_cast<std::size_t>(m.position(0)));
                std::string metric;
                std::string last;
                for (const auto& tok : providers::tokenize(before)) {
                    if (metric_stopwords().count(tok) || scope_words.count(tok)) continue;
                    if (std::isdigit(static_cast<unsigned char>(tok[0]))) continue;
                    if (tok == last) continue;
                    metric += (metric.empty() ? "" : " ") + tok;
                    last = tok;
                }
                if (metric.empty()) continue;
                c.metric = metric;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// S_logic
// ---------------------------------------------------------------------------

namespace {

struct Interval {
    double lo;
    double hi;
    bool lo_open;
    bool hi_open;
};

std::string unit_class(const std::string& unit) {
    if (unit == "ms" || unit == "s") return "time";
    return unit;
}

double to_base_unit(double value, const std::string& unit) {
    return unit == "s" ? value * 1000.0 : value; // time in ms
}

Interval to_interval(const NumericConstraint& c) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const double v = to_base_unit(c.value, c.unit);
    switch (c.comparator) {
        case Comparator::Le: return {-kInf, v, true, false};
        case Comparator::Lt: return {-kInf, v, true, true};
        case Comparator::Ge: return {v, kInf, false, true};
        case Comparator::Gt: return {v, kInf, true, true};
        case Comparator::Eq: return {v, v, false, false};
    }
    throw std::logic_error("unknown comparator");
}

bool disjoint(const Interval& a, const Interval& b) {
    auto separated = [](const Interval& x, const Interval& y) {
        if (x.hi < y.lo) return true;
        return x.hi == y.lo && (x.hi_open || y.lo_open);
    };
    return separated(a, b) || separated(b, a);
}

bool comparable(const NumericConstraint& a, const NumericConstraint& b) {
    return a.metric == b.metric && a.scope == b.scope && unit_class(a.unit) == unit_class(b.unit);
}

} // namespace

SLogicReport logic_check(const std::vector<NumericConstraint>& constraints) {
    SLogicReport report;

    struct PairState {
        bool conflict = false;
        LogicFinding finding;
    };
    std::map<std::pair<std::string, std::string>, PairState> pairs;

    for (std::size_t i = 0; i < constraints.size(); ++i) {
        for (std::size_t j = i + 1; j < constraints.size(); ++j) {
            const auto& a = constraints[i];
            const auto& b = constraints[j];
            if (a.requirement_id == b.requirement_id) continue;
            if (!comparable(a, b)) continue;
            const auto key = std::minmax(a.requirement_id, b.requirement_id);
            auto& state = pairs[key];
            if (!state.conflict && disjoint(to_interval(a), to_interval(b))) {
                state.conflict = true;
                state.finding = {key.first, key.second, a.metric, a.scope,
                                 to_string(a.comparator) + " " + std::to_string(a.value) + " " + a.unit +
                                     " vs " + to_string(b.comparator) + " " + std::to_string(b.value) +
                                     " " + b.unit};
            }
        }
    }

    report.comparable_pairs = static_cast<int>(pairs.size());
    for (const auto& [key, state] : pairs) {
        if (state.conflict) {
            ++report.conflicting_pairs;
            report.findings.push_back(state.finding);
        }
    }
    report.score = report.comparable_pairs == 0
                       ? 1.0
                       : 1.0 - static_cast<double>(report.conflicting_pairs) /
                                   static_cast<double>(report.comparable_pairs);
    return report;
}

Json logic_report_to_json(const SLogicReport& report) {
    Json findings = Json::array();
    for (const auto& f : report.findings)
        findings.push_back(Json{{"left_id", f.left_id},
                                {"right_id", f.right_id},
                                {"metric", f.metric},
                                {"scope", f.scope},
                                {"detail", f.detail}});
    return Json{{"score", report.score},
                {"comparable_pairs", report.comparable_pairs},
                {"conflicting_pairs", report.conflicting_pairs},
                {"findings", findings}};
}

// ---------------------------------------------------------------------------
// Compliance
// ---------------------------------------------------------------------------

std::vector<providers::ClauseRecord> filter_applicable(
    providers::Provider& provider, const std::vector<providers::ClauseRecord>& corpus,
    const std::vector<std::string>& case_domain_tags, const RunConfig& config, int seed,
    std::vector<std::string>* warnings) {
    if (corpus.empty()) throw std::invalid_argument("filter_applicable requires a non-empty corpus");

    std::set<std::string> case_tags;
    for (const auto& t : case_domain_tags) case_tags.insert(lowercase(t));

    std::vector<providers::ClauseRecord> applicable;
    for (const auto& clause : corpus) {
        bool tagged = false;
        for (const auto& t : clause.domain_tags)
            if (case_tags.count(lowercase(t))) tagged = true;
        if (!tagged) continue; // deterministic scope filter

        bool keep = true;
        try {
            auto request = prompting::make_request(
                "You decide whether a standard clause applies to a project.\n"
                "Task: clause-applicability\n"
                "Respond with a JSON object {\"applicable\": true|false, \"justification\"}.",
                "Clause [" + clause.clause_id + "]: " + clause.text + "\nProject domain tags: " +
                    Json(case_domain_tags).dump() + "\nclause_key: " +
                    hex16(fnv1a64(clause.clause_id + "|" + clause.text)) + "\n",
                config, seed);
            auto parsed = prompting::chat_json(provider, request, 1);
            if (parsed && parsed->is_object() && parsed->contains("applicable") &&
                (*parsed)["applicable"].is_boolean()) {
                keep = (*parsed)["applicable"].get<bool>();
            } else if (warnings) {
                warnings->push_back("applicability classifier unparseable for clause " +
                                    clause.clause_id + "; retained");
            }
        } catch (const ProviderError& e) {
            if (warnings)
                warnings->push_back("applicability classifier failed for clause " + clause.clause_id +
                                    " (" + e.what() + "); retained");
        }
        if (keep) applicable.push_back(clause);
    }
    return applicable;
}

ComplianceVerdict judge_clause(providers::Provider& provider, const providers::ClauseRecord& clause,
                               const RequirementSet& set,
                               const providers::IndexedCorpus& requirement_index,
                               const RunConfig& config, int seed) {
    if (config.top_k < 1) throw std::invalid_argument("top_k must be >= 1");

    ComplianceVerdict verdict;
    verdict.clause_id = clause.clause_id;

    const auto retrieved =
        requirement_index.items.empty()
            ? std::vector<providers::RetrievedItem>{}
            : providers::retrieve_top_k(provider, clause.text, requirement_index, config.top_k);

    std::string evidence = "Clause [" + clause.clause_id + "]: " + clause.text + "\nContext: " +
                           clause.context + "\nCandidate requirements:\n";
    for (const auto& item : retrieved) {
        const Requirement* r = set.find(item.id);
        if (r) evidence += "- [" + r->id + "] " + r->description + "\n";
    }
    evidence += "clause_key: " + hex16(fnv1a64(clause.clause_id + "|" + clause.text)) + "\n";

    struct Vote {
        std::string label;
        std::string best_id;
        std::string rationale;
        std::string citation;
    };
    std::vector<Vote> votes;
    for (int v = 0; v < 3; ++v) {
        try {
            auto request = prompting::make_request(
                "You are an independent compliance verifier.\n"
                "Task: clause-verdict\n"
                "Decide whether the requirements entail the clause. Respond with a JSON object "
                "{\"label\" (Satisfied|Partially|NotSatisfied), \"best_requirement_id\", "
                "\"rationale\", \"citation\" (verbatim excerpt of the clause)}.",
                evidence, config, seed * 1000 + v + 1);
            auto parsed = prompting::chat_json(provider, request, 1);
            if (!parsed || !parsed->is_object()) continue;
            const std::string label = parsed->value("label", "");
            if (label != "Satisfied" && label != "Partially" && label != "NotSatisfied") continue;
            votes.push_back({label, parsed->value("best_requirement_id", ""),
                             parsed->value("rationale", ""), parsed->value("citation", "")});
        } catch (const ProviderError&) {
            // vote lost; the tally below stays conservative
        }
    }

    for (const auto& v : votes) verdict.votes.push_back(v.label);

    if (votes.empty()) {
        verdict.label = "NotSatisfied";
        verdict.error_note = "all verifier calls failed";
    } else {
        std::map<std::string, int> tally;
        for (const auto& v : votes) ++tally[v.label];
        std::string majority;
        for (const auto& [label, count] : tally)
            if (count >= 2) majority = label;
        verdict.label = majority.empty() ? "NotSatisfied" : majority; // 1-1-1 tie stays conservative
        const Vote* source = &votes.front();
        for (const auto& v : votes)
            if (v.label == verdict.label) {
                source = &v;
                break;
            }
        verdict.best_requirement_id = source->best_id;
        verdict.rationale = source->rationale;
        verdict.citation = source->citation;
    }

    if (verdict.best_requirement_id.empty() || !set.contains(verdict.best_requirement_id)) {
        verdict.best_requirement_id = retrieved.empty() ? "" : retrieved.front().id;
    }
    if (verdict.citation.empty() || clause.text.find(verdict.citation) == std::string::npos) {
        verdict.citation = clause.text.substr(0, std::min<std::size_t>(60, clause.text.size()));
    }
    return verdict;
}

CoverageResult compliance_coverage(const std::vector<ComplianceVerdict>& verdicts) {
    if (verdicts.empty()) return {1.0, true};
    int covered = 0;
    for (const auto& v : verdicts)
        if (v.label == "Satisfied" || v.label == "Partially") ++covered;
    return {static_cast<double>(covered) / static_cast<double>(verdicts.size()), false};
}

// ---------------------------------------------------------------------------
// Hallucination flagging
// ---------------------------------------------------------------------------

HallucinationResult hallucination_check(providers::Provider& provider,
                                        const Requirement& requirement,
                                        const providers::IndexedCorpus& clause_index,
                                        const RunConfig& config, int seed,
                                        std::vector<std::string>* warnings) {
    HallucinationResult result;
    static const std::regex standard_ref(R"((ISO|IEC|IEEE)[\s-]*[0-9]+)");
    if (!std::regex_search(requirement.description, standard_ref)) return result; // skipped
    if (clause_index.items.empty()) return result;
    result.checked = true;

    result.nearest_clauses =
        providers::retrieve_top_k(provider, requirement.description, clause_index, config.top_k);
    std::string evidence = "Requirement [" + requirement.id + "]: " + requirement.description +
                           "\nNearest clauses:\n";
    for (const auto& item : result.nearest_clauses) {
        for (const auto& c : clause_index.items)
            if (c.id == item.id) evidence += "- [" + c.id + "] " + c.text + "\n";
    }
    evidence += "claim_key: " + hex16(fnv1a64(requirement.description)) + "\n";

    try {
        auto request = prompting::make_request(
            "You check whether standard-referencing claims are grounded in the retrieved "
            "clauses.\nTask: hallucination-judge\n"
            "Respond with a JSON object {\"supported\": true|false, \"rationale\"}.",
            evidence, config, seed);
        auto parsed = prompting::chat_json(provider, request, 1);
        if (parsed && parsed->is_object() && parsed->contains("supported") &&
            (*parsed)["supported"].is_boolean()) {
            result.flagged = !(*parsed)["supported"].get<bool>();
            result.rationale = parsed->value("rationale", "");
        } else if (warnings) {
            warnings->push_back("hallucination judge unparseable for " + requirement.id +
                                "; left unflagged");
        }
    } catch (const ProviderError& e) {
        if (warnings)
            warnings->push_back("hallucination judge failed for " + requirement.id + " (" +
                                e.what() + "); left unflagged");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Phase 4 driver
// ---------------------------------------------------------------------------

ComplianceReport run_phase4(providers::Provider& provider, const RequirementSet& set,
                            const std::vector<providers::ClauseRecord>& corpus,
                            const RunConfig& config, int seed) {
    ComplianceReport report;
    report.constraints = extract_constraints(set);
    report.logic = logic_check(report.constraints);

    if (corpus.empty()) {
        report.coverage = {1.0, true};
        report.warnings.push_back("clause corpus empty: no applicable obligations, coverage "
                                  "vacuously 1.0");
        return report;
    }

    const auto applicable =
        filter_applicable(provider, corpus, config.domain_tags, config, seed, &report.warnings);
    for (const auto& c : applicable) report.applicable_clause_ids.push_back(c.clause_id);

    std::vector<std::pair<std::string, std::string>> id_texts;
    for (const auto& r : set.requirements) id_texts.emplace_back(r.id, r.description);
    const auto requirement_index = providers::IndexedCorpus::build(provider, id_texts);

    for (const auto& clause : applicable)
        report.verdicts.push_back(
            judge_clause(provider, clause, set, requirement_index, config, seed));
    report.coverage = compliance_coverage(report.verdicts);
    if (report.coverage.vacuous)
        report.warnings.push_back("no applicable clauses after filtering; coverage vacuously 1.0");

    std::vector<std::pair<std::string, std::string>> clause_texts;
    for (const auto& c : corpus) clause_texts.emplace_back(c.clause_id, c.text);
    const auto clause_index = providers::IndexedCorpus::build(provider, clause_texts);
    for (const auto& r : set.requirements) {
        auto h = hallucination_check(provider, r, clause_index, config, seed, &report.warnings);
        if (h.checked && h.flagged) {
            report.annotations[r.id].push_back(
                {"hallucination-flag",
                 h.rationale.empty() ? "standard reference unsupported by the corpus" : h.rationale,
                 r.id});
        }
    }
    return report;
}

Json compliance_report_to_json(const ComplianceReport& report) {
    Json verdicts = Json::array();
    for (const auto& v : report.verdicts) {
        verdicts.push_back(Json{{"clause_id", v.clause_id},
                                {"label", v.label},
                                {"best_requirement_id", v.best_requirement_id},
                                {"rationale", v.rationale},
                                {"citation", v.citation},
                                {"votes", v.votes},
                                {"error_note", v.error_note}});
    }
    Json constraints = Json::array();
    for (const auto& c : report.constraints) {
        constraints.push_back(Json{{"requirement_id", c.requirement_id},
                                   {"metric", c.metric},
                                   {"comparator", to_string(c.comparator)},
                                   {"value", c.value},
                                   {"unit", c.unit},
                                   {"scope", c.scope}});
    }
    Json annotations = Json::object();
    for (const auto& [id, list] : report.annotations) {
        Json arr = Json::array();
        for (const auto& a : list)
            arr.push_back(Json{{"kind", a.kind}, {"text", a.text}, {"source_id", a.source_id}});
        annotations[id] = arr;
    }
    return Json{{"applicable_clause_ids", report.applicable_clause_ids},
                {"verdicts", verdicts},
                {"coverage", report.coverage.value},
                {"coverage_vacuous", report.coverage.vacuous},
                {"logic", logic_report_to_json(report.logic)},
                {"constraints", constraints},
                {"annotations", annotations},
                {"warnings", report.warnings}};
}

} // namespace quare::verification
