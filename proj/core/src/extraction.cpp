// Copyright 2026 The sdgmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sdgmap/extraction.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sdgmap/sha256.hpp"

namespace sdgmap::extract {

using nlohmann::json;

void ExtractionConfig::validate() const {
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (max_retries < 0 || max_retries > 10) {
        throw ConfigError("max_retries must lie in [0, 10]");
    }
    if (retry_backoff_ms < 0) throw ConfigError("retry_backoff_ms must be >= 0");
    if (timeout_ms <= 0) throw ConfigError("timeout_ms must be > 0");
}

std::string_view prompt_text(std::string_view version) {
    if (version == "v1") {
        return "You are an expert patent analyst. Read the document text (a title and "
               "abstract) and extract three lists of short English phrases.\n"
               "- functions: the technological problems or objectives addressed, as "
               "verb-object phrases (e.g. \"remove dyes from effluents\").\n"
               "- solutions: the technical mechanisms or processes proposed to realize "
               "those functions.\n"
               "- applications: the industrial or societal domains where the solution is "
               "deployed.\n"
               "Return a JSON object with exactly the keys \"functions\", \"solutions\" "
               "and \"applications\", each holding an array of strings. Use an empty "
               "array when the text supports no entry for a category. Do not invent "
               "content beyond the text.";
    }
    throw ConfigError("unknown prompt version: " + std::string(version));
}

ConceptExtractor::ConceptExtractor(ExtractionConfig config) : config_(std::move(config)) {
    config_.validate();
    prompt_text(config_.prompt_version);  // reject unknown versions up front
}

std::filesystem::path ConceptExtractor::cache_path(std::string_view text) const {
    std::string key;
    key.reserve(text.size() + config_.model_name.size() + config_.prompt_version.size() + 2);
    key.append(text);
    key += '\x1f';
    key.append(config_.model_name);
    key += '\x1f';
    key.append(config_.prompt_version);
    return config_.cache_dir / (sha256_hex(key) + ".json");
}

namespace {

ConceptTexts parse_response(const std::string& payload) {
    json value = json::parse(payload, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.is_object()) {
        throw SchemaError("malformed extraction response: " + payload);
    }
    auto read_list = [&](const char* name) {
        auto it = value.find(name);
        if (it == value.end() || !it->is_array()) {
            throw SchemaError("extraction response missing array \"" + std::string(name) +
                              "\": " + payload);
        }
        std::vector<std::string> out;
        out.reserve(it->size());
        for (const json& entry : *it) {
            if (!entry.is_string()) {
                throw SchemaError("extraction response entries must be strings: " + payload);
            }
            out.push_back(entry.get<std::string>());
        }
        return out;
    };
    ConceptTexts texts;
    texts.functions = read_list("functions");
    texts.solutions = read_list("solutions");
    texts.applications = read_list("applications");
    return texts;
}

/// Splits "http://host:port/some/path" into the client base and the path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    std::size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("extraction endpoint must include a scheme: " + endpoint);
    }
    std::size_t path_start = endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

ConceptTexts ConceptExtractor::fetch(std::string_view text) const {
    auto [base, path] = split_endpoint(config_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (const char* key = std::getenv(kApiKeyEnv); key != nullptr && key[0] != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json request = {{"text", std::string(text)},
                    {"schema", {"functions", "solutions", "applications"}},
                    {"temperature", config_.temperature}};
    if (!config_.model_name.empty()) request["model"] = config_.model_name;
    const std::string body = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0 && config_.retry_backoff_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms));
        }
        httplib::Result result = client.Post(path, headers, body, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status != 200) {
            last_error = "service returned status " + std::to_string(result->status);
            continue;
        }
        return parse_response(result->body);
    }
    throw TransportError("extraction failed after " + std::to_string(config_.max_retries + 1) +
                         " attempts: " + last_error);
}

ConceptTexts ConceptExtractor::extract(std::string_view text) const {
    if (text.empty()) {
        throw ConfigError("extract requires non-empty text");
    }

    std::filesystem::path cached = cache_path(text);
    if (std::filesystem::exists(cached)) {
        std::ifstream in(cached);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        // A torn or corrupted cache entry falls through to a re-fetch.
        try {
            return parse_response(buffer.str());
        } catch (const SchemaError&) {
        }
    }

    ConceptTexts texts = fetch(text);

    std::filesystem::create_directories(config_.cache_dir);
    json payload = {{"functions", texts.functions},
                    {"solutions", texts.solutions},
                    {"applications", texts.applications}};
    // Write-then-rename keeps concurrent writers safe: both write identical
    // content, so last-writer-wins is harmless.
    std::filesystem::path tmp = cached;
    tmp += ".tmp" + std::to_string(
                        std::hash<std::thread::id>{}(std::this_thread::get_id()) & 0xffff);
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << payload.dump() << '\n';
    }
    std::filesystem::rename(tmp, cached);
    return texts;
}

ConceptSet embed_concepts(const ConceptTexts& texts, EmbeddingProvider& provider,
                          std::size_t corpus_dim) {
    if (provider.dim() != corpus_dim) {
        throw ConfigError("embedding provider dimension " + std::to_string(provider.dim()) +
                          " does not match corpus dimension " + std::to_string(corpus_dim));
    }

    auto embed_list = [&](const std::vector<std::string>& list) {
        std::vector<Concept> out;
        if (list.empty()) return out;
        std::vector<Embedding> embeddings = provider.embed(list);
        if (embeddings.size() != list.size()) {
            throw ConfigError("embedding provider returned " +
                              std::to_string(embeddings.size()) + " vectors for " +
                              std::to_string(list.size()) + " texts");
        }
        out.reserve(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (embeddings[i].size() != corpus_dim) {
                throw ConfigError("embedding provider returned dimension " +
                                  std::to_string(embeddings[i].size()) + ", expected " +
                                  std::to_string(corpus_dim));
            }
            out.push_back({list[i], std::move(embeddings[i])});
        }
        return out;
    };

    ConceptSet set;
    set.functions = embed_list(texts.functions);
    set.solutions = embed_list(texts.solutions);
    set.applications = embed_list(texts.applications);
    return set;
}

}  // namespace sdgmap::extract
