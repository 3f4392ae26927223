#pragma once

#include <optional>
#include <string>

#include "quare/model.hpp"
#include "quare/providers.hpp"

namespace quare::prompting {

providers::ChatRequest make_request(std::string system_prompt, std::string user_prompt,
                                    const RunConfig& config, int seed);

// Extracts the first JSON value from a completion: either the whole text or
// the first balanced {...} / [...] block (models often wrap JSON in prose or
// code fences).
std::optional<Json> extract_json(const std::string& text);

// Chat call that re-prompts with a format reminder when the response fails
// to parse. `repairs` counts the extra attempts. Returns the parsed JSON or
// nullopt after all attempts; raw_out captures the last raw response.
std::optional<Json> chat_json(providers::Provider& provider, providers::ChatRequest request,
                              int repairs, std::string* raw_out = nullptr);

} // namespace quare::prompting
