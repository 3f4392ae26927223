#include "quare/providers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "quare/errors.hpp"
#include "quare/hashing.hpp"

namespace quare::providers {

void ChatRequest::validate() const {
    if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
    if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
}

double EmbeddingVector::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

std::vector<ClauseRecord> load_clause_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open clause corpus: " + path);
    std::vector<ClauseRecord> corpus;
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        Json j = Json::parse(line);
        ClauseRecord rec;
        rec.clause_id = j.at("clause_id").get<std::string>();
        rec.text = j.at("text").get<std::string>();
        rec.domain_tags = j.value("domain_tags", std::vector<std::string>{});
        rec.context = j.value("context", "");
        if (!ids.insert(rec.clause_id).second)
            throw std::invalid_argument("duplicate clause_id in corpus: " + rec.clause_id);
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

void save_clause_corpus(const std::string& path, const std::vector<ClauseRecord>& corpus) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write clause corpus: " + path);
    for (const auto& rec : corpus) {
        Json j{{"clause_id", rec.clause_id},
               {"text", rec.text},
               {"domain_tags", rec.domain_tags},
               {"context", rec.context}};
        out << j.dump() << "\n";
    }
}

std::string chat_with_retry(Provider& provider, const ChatRequest& request,
                            int retries, int backoff_ms) {
    for (int attempt = 0;; ++attempt) {
        try {
            return provider.chat(request);
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= retries) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms << attempt));
        }
    }
}

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// ---------------------------------------------------------------------------
// Hash mock
// ---------------------------------------------------------------------------

namespace {

// Value of the first "key:" line found in the text, trimmed to the line end.
std::string extract_marker(const std::string& text, const std::string& key) {
    std::size_t pos = text.find(key);
    if (pos == std::string::npos) return "";
    pos += key.size();
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    std::size_t end = text.find('\n', pos);
    std::string value = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
    return value;
}

std::uint64_t extract_key(const std::string& text, const std::string& key) {
    std::string v = extract_marker(text, key);
    if (v.empty()) return 0;
    try {
        return std::stoull(v, nullptr, 16);
    } catch (...) {
        return fnv1a64(v);
    }
}

const std::vector<std::string>& shared_templates() {
    static const std::vector<std::string> t = {
        "The system shall log all {noun} events to the central audit store.",
        "End to end {noun} latency shall be {cmp} {n} ms.",
        "The system shall sustain at least {n} concurrent {noun} sessions.",
        "Recovery from a {noun} failure shall complete within {n} s.",
    };
    return t;
}

const std::vector<std::string>& dimension_templates(QualityDimension d) {
    static const std::map<QualityDimension, std::vector<std::string>> pools = {
        {QualityDimension::Safety,
         {"The system shall detect {noun} faults within {n} ms and transition to a safe state.",
          "Redundant {noun} channels shall be provided for hazard mitigation.",
          "A hazard analysis shall cover {noun} malfunction scenarios before release.",
          "Loss of the {noun} input shall trigger a degraded mode within {n} ms.",
          "Watchdog supervision shall restart a stalled {noun} task within {n} ms.",
          "Manual intervention shall remain possible during {noun} automation."}},
        {QualityDimension::Efficiency,
         {"The {noun} processing pipeline shall complete within {n} ms.",
          "CPU utilisation while handling {noun} workloads shall stay <= {n} %.",
          "Throughput of the {noun} stage shall be >= {n} requests per s.",
          "Cold start of the {noun} service shall finish within {n} s.",
          "Memory headroom during {noun} bursts shall stay >= {n} %.",
          "Queueing delay ahead of the {noun} stage shall be <= {n} ms."}},
        {QualityDimension::Sustainability,
         {"Energy use of the {noun} subsystem shall be reduced by >= {n} % against baseline.",
          "Idle {noun} components shall power down within {n} s.",
          "Carbon accounting shall include all {noun} operations.",
          "Renewable capacity shall cover >= {n} % of {noun} demand.",
          "Hardware refresh for {noun} nodes shall favour reuse over replacement.",
          "Peak power draw of the {noun} cluster shall stay <= {n} % of rated supply."}},
        {QualityDimension::Trustworthiness,
         {"All {noun} traffic shall be encrypted in transit and at rest.",
          "Access to {noun} records shall require role based authorisation.",
          "Operator sessions touching {noun} data shall expire after {n} s of inactivity.",
          "Keys protecting {noun} data shall rotate at least every {n} s.",
          "Integrity of stored {noun} artefacts shall be verifiable on read.",
          "Anomalous {noun} access patterns shall raise an alert within {n} s."}},
        {QualityDimension::Responsibility,
         {"Every automated {noun} decision shall be auditable by the operator.",
          "Processing of {noun} data shall comply with applicable regulation.",
          "A human override shall be available for {noun} actions.",
          "Retention of {noun} records shall follow the published policy.",
          "Affected users shall be notified of {noun} incidents within {n} s.",
          "Third party use of {noun} outputs shall be contractually bounded."}},
    };
    return pools.at(d);
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

// Content nouns from the project description; keeps mock output coupled to
// the input text.
std::vector<std::string> candidate_nouns(const std::string& user_prompt) {
    static const std::set<std::string> skip = {"the",  "and",   "with",  "that", "this",
                                               "from", "shall", "must",  "will", "system",
                                               "for",  "task",  "into",  "such", "each"};
    std::vector<std::string> nouns;
    for (const auto& tok : tokenize(user_prompt)) {
        if (tok.size() >= 4 && !skip.count(tok) && !std::isdigit(static_cast<unsigned char>(tok[0])))
            nouns.push_back(tok);
    }
    if (nouns.empty()) nouns.push_back("platform");
    return nouns;
}

std::string instantiate_template(const std::string& tmpl, std::uint64_t param_key,
                                 const std::vector<std::string>& nouns) {
    static const int numbers[] = {5, 10, 30, 50, 100, 250, 500, 99};
    static const char* comparators[] = {"<=", ">=", "<", ">"};
    const std::string noun = nouns[splitmix64(param_key) % nouns.size()];
    const int n = numbers[splitmix64(param_key ^ 0x11) % 8];
    const char* cmp = comparators[splitmix64(param_key ^ 0x22) % 4];
    std::string out = replace_all(tmpl, "{noun}", noun);
    out = replace_all(out, "{n}", std::to_string(n));
    out = replace_all(out, "{cmp}", cmp);
    return out;
}

std::string mock_generate(QualityDimension dim, const std::string& user_prompt,
                          std::uint64_t mix) {
    const auto nouns = candidate_nouns(user_prompt);
    const auto& own = dimension_templates(dim);
    const auto& shared = shared_templates();
    const std::uint64_t user_hash = fnv1a64(user_prompt);

    const int count = 3 + static_cast<int>(splitmix64(mix) % 4);
    Json items = Json::array();
    std::vector<std::string> descriptions;
    for (int i = 0; i < count; ++i) {
        std::uint64_t h = splitmix64(mix ^ (0x51ED2700ULL + static_cast<std::uint64_t>(i)));
        std::string desc;
        if (i == 3 && splitmix64(h ^ 0x7) % 10 < 3 && !descriptions.empty()) {
            // planted same-agent duplicate
            desc = descriptions.front();
        } else if (h % 100 < 18) {
            // shared pool: parameters keyed off the project text only, so two
            // agents drawing the same template/slot produce identical text
            std::size_t t = splitmix64(h ^ 0x33) % shared.size();
            std::uint64_t slot = splitmix64(h ^ 0x44) % 4;
            std::uint64_t param_key = user_hash ^ (0xABCDULL * (t + 1)) ^ (slot << 32);
            desc = instantiate_template(shared[t], param_key, nouns);
        } else {
            std::size_t t = splitmix64(h ^ 0x55) % own.size();
            desc = instantiate_template(own[t], h ^ 0x66, nouns);
        }
        descriptions.push_back(desc);

        double lu = hash_u01(h ^ 0x77);
        std::string level = lu < 0.15 ? "Strategic" : (lu < 0.60 ? "Tactical" : "Operational");
        items.push_back(Json{{"id", ""},
                             {"description", desc},
                             {"dimension", to_string(dim)},
                             {"level", level},
                             {"rationale", to_string(dim) + " review note " +
                                               hex16(splitmix64(h ^ 0x88)).substr(0, 8)}});
    }
    return items.dump();
}

std::string pick_word(std::uint64_t h) {
    static const char* words[] = {"staging",  "fallback", "budgeting", "isolation",
                                  "batching", "caching",  "sampling",  "rollout"};
    return words[splitmix64(h) % 8];
}

} // namespace

std::string HashMockProvider::chat(const ChatRequest& request) {
    request.validate();
    const std::string task = extract_marker(request.system_prompt, "Task:");
    const std::uint64_t sys_hash = fnv1a64(request.system_prompt);
    const std::uint64_t user_hash = fnv1a64(request.user_prompt);
    const std::uint64_t seed = static_cast<std::uint64_t>(request.seed);
    const std::uint64_t mix = splitmix64(sys_hash ^ splitmix64(user_hash) ^ (seed * 0x9E3779B97F4A7C15ULL));
    const std::string trace = hex16(mix).substr(0, 8);

    if (task == "generate-requirements") {
        const std::string dim = extract_marker(request.system_prompt, "Dimension:");
        return mock_generate(dimension_from_string(dim.empty() ? "Safety" : dim),
                             request.user_prompt, mix);
    }
    if (task == "classify-conflict") {
        const std::uint64_t k = extract_key(request.user_prompt, "pair_key:");
        const std::uint64_t v = splitmix64(k ^ 0xC1A551F1ULL) % 100;
        const char* kind = v < 40 ? "Redundant" : (v < 75 ? "ResourceBound" : "LogicalIncompatibility");
        const double confidence = 0.5 + static_cast<double>(splitmix64(k ^ 0xC0FF) % 50) / 100.0;
        return Json{{"kind", kind},
                    {"confidence", confidence},
                    {"rationale", std::string("pairwise constraint review ") + trace}}
            .dump();
    }
    if (task == "thesis") {
        const std::string dim = extract_marker(request.system_prompt, "Dimension:");
        const std::uint64_t k = extract_key(request.user_prompt, "conflict_key:");
        const std::uint64_t round = extract_key(request.user_prompt, "round_index:");
        return "Round " + std::to_string(round) + " proposal from " + dim + " for conflict " +
               hex16(k).substr(0, 8) + ": prioritize " + pick_word(mix) + ".";
    }
    if (task == "critique") {
        const std::string dim = extract_marker(request.system_prompt, "Dimension:");
        return Json{{"critique", dim + " constraints reviewed; watch " + pick_word(mix) +
                                     " impact (" + trace + ")"}}
            .dump();
    }
    if (task == "synthesize") {
        const std::uint64_t k = extract_key(request.user_prompt, "conflict_key:");
        const std::uint64_t round = extract_key(request.user_prompt, "round_index:");
        const std::uint64_t v = splitmix64(k ^ (round * 0x9E37ULL)) % 100;
        std::string status;
        if (round <= 1) {
            status = v < 12 ? "Consensus" : (v < 50 ? "Partial" : "Unresolved");
        } else {
            status = v < 45 ? "Consensus" : (v < 80 ? "Partial" : "Unresolved");
        }
        Json out{{"proposal_text", "Round " + std::to_string(round) + " synthesis for conflict " +
                                       hex16(k).substr(0, 8) + ": balanced resolution covering " +
                                       pick_word(mix) + "."},
                 {"status", status},
                 {"focal_id", ""},
                 {"trace", trace}};
        if (status == "Consensus" && v % 3 != 2) {
            Json decomposition = Json::array();
            const int parts = 2 + static_cast<int>(v % 2);
            for (int i = 0; i < parts; ++i) {
                decomposition.push_back(
                    Json{{"suffix", "." + std::to_string(i + 1)},
                         {"text", "Sub goal " + std::to_string(i + 1) + " of resolution " +
                                      hex16(k).substr(0, 8) + ": " + pick_word(splitmix64(k ^ i)) +
                                      " path"}});
            }
            out["decomposition"] = decomposition;
        }
        return out.dump();
    }
    if (task == "project-quality") {
        const std::uint64_t k = extract_key(request.user_prompt, "content_key:");
        const std::string hint = extract_marker(request.user_prompt, "dimension_hint:");
        Json out;
        for (auto d : all_dimensions()) {
            double v = 0.1 + 0.6 * hash_u01(splitmix64(k ^ (0xD1ULL + static_cast<int>(d))));
            if (!hint.empty() && to_string(d) == hint) v = std::min(1.0, v + 0.3);
            std::string key = to_string(d);
            std::transform(key.begin(), key.end(), key.begin(), ::tolower);
            out[key] = std::round(v * 1000.0) / 1000.0;
        }
        out["trace"] = trace;
        return out.dump();
    }
    if (task == "clause-applicability") {
        const std::uint64_t k = extract_key(request.user_prompt, "clause_key:");
        return Json{{"applicable", splitmix64(k ^ 0xA11) % 10 < 8},
                    {"justification", "domain scope review " + trace}}
            .dump();
    }
    if (task == "clause-verdict") {
        const std::uint64_t k = extract_key(request.user_prompt, "clause_key:");
        const std::uint64_t base = splitmix64(k ^ 0x7E2D) % 10;
        int label = base < 6 ? 0 : (base < 8 ? 1 : 2);
        if (hash_u01(splitmix64(k ^ seed)) < 0.15) label = (label + 1) % 3;
        static const char* labels[] = {"Satisfied", "Partially", "NotSatisfied"};
        return Json{{"label", labels[label]},
                    {"best_requirement_id", ""},
                    {"rationale", "entailment review " + trace},
                    {"citation", ""}}
            .dump();
    }
    if (task == "hallucination-judge") {
        const std::uint64_t k = extract_key(request.user_prompt, "claim_key:");
        return Json{{"supported", splitmix64(k ^ 0xBAD) % 4 != 0},
                    {"rationale", "reference check " + trace}}
            .dump();
    }
    if (task == "iso29148-judge") {
        const std::uint64_t k = extract_key(request.user_prompt, "set_key:");
        auto score = [&](int i) {
            return std::round((3.5 + 1.5 * hash_u01(splitmix64(k ^ (0x29148ULL + i)))) * 100.0) / 100.0;
        };
        return Json{{"unambiguous", score(0)},
                    {"correctness", score(1)},
                    {"verifiability", score(2)},
                    {"set_consistency", score(3)},
                    {"set_feasibility", score(4)},
                    {"s_term", score(5)},
                    {"trace", trace}}
            .dump();
    }
    if (task == "propose-parent") {
        return Json{{"parent_id", ""}, {"trace", trace}}.dump();
    }
    if (task == "downstream-materials") {
        return "# Draft materials\n\nOutline " + trace + ": test cases and architecture notes for " +
               pick_word(mix) + ".\n";
    }
    return "ack " + trace;
}

EmbeddingVector HashMockProvider::embed_one(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("cannot embed empty text");
    auto tokens = tokenize(text);
    if (tokens.empty()) tokens.push_back(text);

    EmbeddingVector out;
    out.model_id = "hash-mock-256";
    out.values.assign(kEmbeddingDim, 0.0);
    for (const auto& tok : tokens) {
        const std::uint64_t base = fnv1a64(tok);
        for (int i = 0; i < kEmbeddingDim; i += 2) {
            // Box-Muller over two hash-derived uniforms
            double u1 = hash_u01(base + static_cast<std::uint64_t>(i));
            double u2 = hash_u01(base + static_cast<std::uint64_t>(i) + 1);
            u1 = std::max(u1, 1e-12);
            double r = std::sqrt(-2.0 * std::log(u1));
            out.values[static_cast<std::size_t>(i)] += r * std::cos(2.0 * M_PI * u2);
            out.values[static_cast<std::size_t>(i) + 1] += r * std::sin(2.0 * M_PI * u2);
        }
    }
    double n = out.norm();
    if (n < 1e-12) {
        out.values[fnv1a64(text) % kEmbeddingDim] = 1.0;
        n = 1.0;
    }
    for (double& v : out.values) v /= n;
    return out;
}

std::vector<EmbeddingVector> HashMockProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

// ---------------------------------------------------------------------------
// Transcript provider
// ---------------------------------------------------------------------------

TranscriptProvider::TranscriptProvider(std::vector<TranscriptTurn> turns, bool fallback_to_hash)
    : turns_(std::move(turns)), consumed_(turns_.size(), false), fallback_to_hash_(fallback_to_hash) {}

std::shared_ptr<TranscriptProvider> TranscriptProvider::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open transcript: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw DecodeError("malformed transcript file " + path + ": " + e.what());
    }
    std::vector<TranscriptTurn> turns;
    for (const auto& t : j.at("turns")) {
        TranscriptTurn turn;
        turn.match_hint = t.value("match_hint", "");
        const auto& resp = t.at("response");
        turn.response = resp.is_string() ? resp.get<std::string>() : resp.dump();
        turn.sticky = t.value("sticky", false);
        turns.push_back(std::move(turn));
    }
    const bool fallback = j.value("fallback", "error") == "hash";
    return std::make_shared<TranscriptProvider>(std::move(turns), fallback);
}

std::string TranscriptProvider::chat(const ChatRequest& request) {
    request.validate();
    const std::string haystack = request.system_prompt + "\n" + request.user_prompt;
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < turns_.size(); ++i) {
        if (consumed_[i]) continue;
        if (turns_[i].match_hint.empty() || haystack.find(turns_[i].match_hint) != std::string::npos) {
            if (!turns_[i].sticky) consumed_[i] = true;
            return turns_[i].response;
        }
    }
    if (fallback_to_hash_) return hash_.chat(request);
    throw ProviderError("transcript exhausted: no scripted turn matches request", false);
}

std::vector<EmbeddingVector> TranscriptProvider::embed(const std::vector<std::string>& texts) {
    return hash_.embed(texts);
}

// ---------------------------------------------------------------------------
// Similarity and retrieval
// ---------------------------------------------------------------------------

double similarity_f1(Provider& provider, const std::string& a, const std::string& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("similarity_f1 requires non-empty inputs");
    if (a == b) return 1.0;

    auto tokens_a = tokenize(a);
    auto tokens_b = tokenize(b);
    if (tokens_a.empty()) tokens_a.push_back(a);
    if (tokens_b.empty()) tokens_b.push_back(b);

    std::vector<std::string> unique;
    std::map<std::string, std::size_t> index;
    for (const auto& t : tokens_a)
        if (index.emplace(t, unique.size()).second) unique.push_back(t);
    for (const auto& t : tokens_b)
        if (index.emplace(t, unique.size()).second) unique.push_back(t);

    const auto vectors = provider.embed(unique);

    auto best_against = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
        double total = 0.0;
        for (const auto& ft : from) {
            double best = -1.0;
            const auto& fv = vectors[index.at(ft)];
            for (const auto& tt : to) {
                if (ft == tt) {
                    best = 1.0;
                    break;
                }
                best = std::max(best, cosine(fv, vectors[index.at(tt)]));
            }
            total += best;
        }
        return total / static_cast<double>(from.size());
    };

    const double recall = best_against(tokens_a, tokens_b);
    const double precision = best_against(tokens_b, tokens_a);
    if (recall <= 0.0 || precision <= 0.0) return 0.0;
    return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

IndexedCorpus IndexedCorpus::build(Provider& provider,
                                   const std::vector<std::pair<std::string, std::string>>& id_texts) {
    IndexedCorpus corpus;
    if (id_texts.empty()) return corpus;
    std::vector<std::string> texts;
    texts.reserve(id_texts.size());
    for (const auto& [id, text] : id_texts) texts.push_back(text);
    auto vectors = provider.embed(texts);
    for (std::size_t i = 0; i < id_texts.size(); ++i) {
        corpus.items.push_back({id_texts[i].first, id_texts[i].second, std::move(vectors[i])});
    }
    return corpus;
}

std::vector<RetrievedItem> retrieve_top_k(Provider& provider, const std::string& query,
                                          const IndexedCorpus& corpus, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (corpus.items.empty()) return {};
    const auto qv = provider.embed({query}).front();

    std::vector<RetrievedItem> ranked;
    ranked.reserve(corpus.items.size());
    for (const auto& item : corpus.items) {
        ranked.push_back({item.id, cosine(qv, item.embedding)});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RetrievedItem& x, const RetrievedItem& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.id < y.id;
    });
    if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
    return ranked;
}

} // namespace quare::providers
