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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdgmap/types.hpp"

namespace sdgmap::extract {

/// Client configuration for the external concept-extraction service. The
/// service owns the prompt; the client sends text plus the expected output
/// schema. The API key, if any, is read from the SDGMAP_API_KEY
/// environment variable.
struct ExtractionConfig {
    std::string endpoint;       // e.g. http://localhost:8080/extract
    std::string model_name;
    double temperature = 0.0;
    int max_retries = 3;        // additional attempts after the first
    std::filesystem::path cache_dir;
    std::string prompt_version = "v1";
    int retry_backoff_ms = 200;
    int timeout_ms = 30000;

    void validate() const;
};

/// Concept strings per category, before embeddings are attached.
struct ConceptTexts {
    std::vector<std::string> functions;
    std::vector<std::string> solutions;
    std::vector<std::string> applications;

    bool operator==(const ConceptTexts&) const = default;
};

/// The instruction text this client assumes on the service side, shipped
/// here so extraction runs are attributable to a prompt version. Bump
/// prompt_version whenever it changes; the cache key includes it.
std::string_view prompt_text(std::string_view version);

/// Name of the environment variable holding the service API key.
inline constexpr const char* kApiKeyEnv = "SDGMAP_API_KEY";

/// HTTP client for the extraction service with a content-addressed
/// response cache keyed on (text, model_name, prompt_version). A cache hit
/// never touches the network, which makes corpus re-runs reproducible and
/// lets the whole pipeline run offline once primed.
class ConceptExtractor {
  public:
    explicit ConceptExtractor(ExtractionConfig config);

    /// Extracts the three concept lists for one document text. Throws
    /// ConfigError on empty text, TransportError when the service stays
    /// unreachable after retries, SchemaError (carrying the raw payload)
    /// on a malformed response.
    ConceptTexts extract(std::string_view text) const;

    /// Cache file for a given text under the current config.
    std::filesystem::path cache_path(std::string_view text) const;

  private:
    ConceptTexts fetch(std::string_view text) const;

    ExtractionConfig config_;
};

/// Pluggable embedding backend. Offline pipelines read embeddings from
/// corpus files; this interface exists for the opt-in online path and for
/// tests.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
};

/// Pairs every concept text with an embedding from the provider. Throws
/// ConfigError when the provider dimension does not match the corpus
/// dimension or when the provider returns the wrong number of vectors.
ConceptSet embed_concepts(const ConceptTexts& texts, EmbeddingProvider& provider,
                          std::size_t corpus_dim);

}  // namespace sdgmap::extract
