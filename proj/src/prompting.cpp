#include "quare/prompting.hpp"

#include "quare/errors.hpp"

namespace quare::prompting {

providers::ChatRequest make_request(std::string system_prompt, std::string user_prompt,
                                    const RunConfig& config, int seed) {
    providers::ChatRequest request;
    request.system_prompt = std::move(system_prompt);
    request.user_prompt = std::move(user_prompt);
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    request.seed = seed;
    return request;
}

std::optional<Json> extract_json(const std::string& text) {
    auto try_parse = [](const std::string& s) -> std::optional<Json> {
        Json j = Json::parse(s, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) return std::nullopt;
        return j;
    };
    if (auto whole = try_parse(text)) return whole;

    // first balanced object or array
    for (char open : {'{', '['}) {
        const char close = open == '{' ? '}' : ']';
        const std::size_t start = text.find(open);
        if (start == std::string::npos) continue;
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            if (c == open) ++depth;
            if (c == close && --depth == 0) {
                if (auto block = try_parse(text.substr(start, i - start + 1))) return block;
                break;
            }
        }
    }
    return std::nullopt;
}

std::optional<Json> chat_json(providers::Provider& provider, providers::ChatRequest request,
                              int repairs, std::string* raw_out) {
    const std::string original_user = request.user_prompt;
    for (int attempt = 0; attempt <= repairs; ++attempt) {
        if (attempt > 0) {
            request.user_prompt = original_user +
                                  "\n\nReminder: respond with valid JSON exactly matching the "
                                  "requested schema, with no surrounding prose.";
        }
        const std::string raw = providers::chat_with_retry(provider, request);
        if (raw_out) *raw_out = raw;
        if (auto parsed = extract_json(raw)) return parsed;
    }
    return std::nullopt;
}

} // namespace quare::prompting
