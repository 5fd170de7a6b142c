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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sdgmap/types.hpp"

namespace sdgmap::corpus {

// JSONL corpora. The first line of every corpus file is a header
// `{"embedding_dim": N}`; each following line is one record. Keeping the
// dimension in the header makes a mixed-dimension corpus a load error
// instead of a runtime surprise.

struct PatentCorpus {
    std::size_t embedding_dim = 0;
    std::vector<PatentRecord> records;
};

struct SdgCorpus {
    std::size_t embedding_dim = 0;
    std::vector<SdgDocument> documents;
};

/// Loads a patent corpus. Throws SchemaError (with the offending line
/// number) on malformed rows, duplicate patent ids, embedding dimension
/// mismatches, non-finite or zero-norm embeddings. An empty file yields an
/// empty corpus.
PatentCorpus load_patents(const std::filesystem::path& path);

/// Loads an SDG document corpus; same validation as load_patents plus a
/// non-empty `sdg_tags` requirement. Tags are deduplicated and sorted.
SdgCorpus load_sdg_corpus(const std::filesystem::path& path);

void save_patents(const std::filesystem::path& path, const PatentCorpus& corpus);
void save_sdg_corpus(const std::filesystem::path& path, const SdgCorpus& corpus);

// Silver label rows, the labeling function's output artifact.
struct SilverLabel {
    std::string patent_id;
    SdgVector vector;
    bool no_match = false;
};

struct SilverParams {
    double tau_function = 0.0;
    double tau_solution = 0.0;
    double tau_application = 0.0;
    int top_n = 0;
    double rrf_k = 0.0;
    std::vector<Category> categories;
};

void save_silver(const std::filesystem::path& path, std::span<const SilverLabel> labels,
                 const SilverParams& params);
std::vector<SilverLabel> load_silver(const std::filesystem::path& path);

// Externally produced patent features: header `{"embedding_dim": d}` then
// rows `{"patent_id": ..., "features": [d floats]}`.
struct FeatureTable {
    std::size_t dim = 0;
    std::vector<std::pair<std::string, std::vector<double>>> rows;
};

FeatureTable load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const FeatureTable& table);

// Raw text rows for concept extraction: `{"patent_id", "title", "abstract"}`
// per line, no header.
struct RawText {
    std::string id;
    std::string title;
    std::string abstract;
};

std::vector<RawText> load_raw_texts(const std::filesystem::path& path);

}  // namespace sdgmap::corpus
