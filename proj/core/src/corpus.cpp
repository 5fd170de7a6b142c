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

#include "sdgmap/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace sdgmap::corpus {
namespace {

using nlohmann::json;

std::string loc(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

json parse_line(const std::filesystem::path& path, const std::string& text, std::size_t line) {
    json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.is_object()) {
        throw SchemaError(loc(path, line) + "malformed JSON object", line);
    }
    return value;
}

const json& field(const json& obj, const char* name, const std::filesystem::path& path,
                  std::size_t line) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        throw SchemaError(loc(path, line) + "missing field \"" + name + "\"", line);
    }
    return *it;
}

std::string string_field(const json& obj, const char* name, const std::filesystem::path& path,
                         std::size_t line) {
    const json& value = field(obj, name, path, line);
    if (!value.is_string()) {
        throw SchemaError(loc(path, line) + "field \"" + name + "\" must be a string", line);
    }
    return value.get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* name,
                                     const std::filesystem::path& path, std::size_t line) {
    const json& value = field(obj, name, path, line);
    if (!value.is_array()) {
        throw SchemaError(loc(path, line) + "field \"" + name + "\" must be an array", line);
    }
    std::vector<std::string> out;
    out.reserve(value.size());
    for (const json& item : value) {
        if (!item.is_string()) {
            throw SchemaError(loc(path, line) + "field \"" + name + "\" must hold strings", line);
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

Embedding parse_embedding(const json& value, std::size_t expected_dim,
                          const std::filesystem::path& path, std::size_t line) {
    if (!value.is_array() || value.empty()) {
        throw SchemaError(loc(path, line) + "embedding must be a non-empty array", line);
    }
    if (value.size() != expected_dim) {
        throw SchemaError(loc(path, line) + "embedding dimension " + std::to_string(value.size()) +
                              " does not match corpus dimension " + std::to_string(expected_dim),
                          line);
    }
    Embedding embedding;
    embedding.reserve(value.size());
    double norm_sq = 0.0;
    for (const json& entry : value) {
        if (!entry.is_number()) {
            throw SchemaError(loc(path, line) + "embedding entries must be numbers", line);
        }
        double v = entry.get<double>();
        if (!std::isfinite(v)) {
            throw SchemaError(loc(path, line) + "embedding entries must be finite", line);
        }
        norm_sq += v * v;
        embedding.push_back(v);
    }
    if (norm_sq <= 0.0) {
        throw SchemaError(loc(path, line) + "embedding has zero norm", line);
    }
    return embedding;
}

std::vector<Concept> parse_concept_list(const json& value, std::size_t expected_dim,
                                        const std::filesystem::path& path, std::size_t line) {
    if (!value.is_array()) {
        throw SchemaError(loc(path, line) + "concept list must be an array", line);
    }
    std::vector<Concept> out;
    out.reserve(value.size());
    for (const json& item : value) {
        if (!item.is_object()) {
            throw SchemaError(loc(path, line) + "concept entries must be objects", line);
        }
        Concept entry;
        entry.text = string_field(item, "text", path, line);
        if (entry.text.empty()) {
            throw SchemaError(loc(path, line) + "concept text must be non-empty", line);
        }
        entry.embedding = parse_embedding(field(item, "embedding", path, line), expected_dim,
                                          path, line);
        out.push_back(std::move(entry));
    }
    return out;
}

ConceptSet parse_concepts(const json& obj, std::size_t expected_dim,
                          const std::filesystem::path& path, std::size_t line) {
    const json& value = field(obj, "concepts", path, line);
    if (!value.is_object()) {
        throw SchemaError(loc(path, line) + "\"concepts\" must be an object", line);
    }
    ConceptSet set;
    set.functions = parse_concept_list(field(value, "functions", path, line), expected_dim, path, line);
    set.solutions = parse_concept_list(field(value, "solutions", path, line), expected_dim, path, line);
    set.applications =
        parse_concept_list(field(value, "applications", path, line), expected_dim, path, line);
    return set;
}

std::vector<SdgId> parse_sdg_list(const json& obj, const char* name,
                                  const std::filesystem::path& path, std::size_t line) {
    const json& value = field(obj, name, path, line);
    if (!value.is_array()) {
        throw SchemaError(loc(path, line) + "field \"" + name + "\" must be an array", line);
    }
    std::vector<SdgId> out;
    out.reserve(value.size());
    for (const json& item : value) {
        if (!item.is_number_integer()) {
            throw SchemaError(loc(path, line) + "field \"" + name + "\" must hold integers", line);
        }
        int v = item.get<int>();
        if (!SdgId::valid(v)) {
            throw SchemaError(loc(path, line) + "SDG id out of range [1, 17]: " + std::to_string(v),
                              line);
        }
        out.emplace_back(v);
    }
    return out;
}

/// Reads the `{"embedding_dim": N}` header. Returns false on an empty file.
bool read_header(std::ifstream& in, const std::filesystem::path& path, std::size_t& dim) {
    std::string text;
    if (!std::getline(in, text)) return false;
    json header = parse_line(path, text, 1);
    const json& value = field(header, "embedding_dim", path, 1);
    if (!value.is_number_integer() || value.get<long long>() <= 0) {
        throw SchemaError(loc(path, 1) + "\"embedding_dim\" must be a positive integer", 1);
    }
    dim = value.get<std::size_t>();
    return true;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open file: " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw SchemaError("cannot write file: " + path.string());
    }
    return out;
}

json concept_list_json(const std::vector<Concept>& concepts) {
    json list = json::array();
    for (const Concept& c : concepts) {
        list.push_back({{"text", c.text}, {"embedding", c.embedding}});
    }
    return list;
}

json concepts_json(const ConceptSet& set) {
    return {{"functions", concept_list_json(set.functions)},
            {"solutions", concept_list_json(set.solutions)},
            {"applications", concept_list_json(set.applications)}};
}

std::vector<int> sdg_values(const std::vector<SdgId>& ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (SdgId id : ids) out.push_back(id.value());
    return out;
}

}  // namespace

PatentCorpus load_patents(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    PatentCorpus out;
    if (!read_header(in, path, out.embedding_dim)) return out;

    std::unordered_set<std::string> seen_ids;
    std::string text;
    std::size_t line = 1;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json row = parse_line(path, text, line);

        PatentRecord record;
        record.patent_id = string_field(row, "patent_id", path, line);
        if (record.patent_id.empty()) {
            throw SchemaError(loc(path, line) + "patent_id must be non-empty", line);
        }
        if (!seen_ids.insert(record.patent_id).second) {
            throw SchemaError(loc(path, line) + "duplicate patent_id \"" + record.patent_id + "\"",
                              line);
        }
        record.title = string_field(row, "title", path, line);
        record.abstract = string_field(row, "abstract", path, line);
        record.concepts = parse_concepts(row, out.embedding_dim, path, line);
        record.anchor_sdgs = parse_sdg_list(row, "anchor_sdgs", path, line);
        record.cpc3 = string_list(row, "cpc3", path, line);
        record.inventor_ids = string_list(row, "inventor_ids", path, line);
        record.applicant_ids = string_list(row, "applicant_ids", path, line);
        out.records.push_back(std::move(record));
    }
    return out;
}

SdgCorpus load_sdg_corpus(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    SdgCorpus out;
    if (!read_header(in, path, out.embedding_dim)) return out;

    std::unordered_set<std::string> seen_ids;
    std::string text;
    std::size_t line = 1;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json row = parse_line(path, text, line);

        SdgDocument doc;
        doc.doc_id = string_field(row, "doc_id", path, line);
        if (doc.doc_id.empty()) {
            throw SchemaError(loc(path, line) + "doc_id must be non-empty", line);
        }
        if (!seen_ids.insert(doc.doc_id).second) {
            throw SchemaError(loc(path, line) + "duplicate doc_id \"" + doc.doc_id + "\"", line);
        }
        doc.concepts = parse_concepts(row, out.embedding_dim, path, line);
        doc.sdg_tags = parse_sdg_list(row, "sdg_tags", path, line);
        if (doc.sdg_tags.empty()) {
            throw SchemaError(loc(path, line) + "empty sdg_tags for doc \"" + doc.doc_id + "\"",
                              line);
        }
        std::sort(doc.sdg_tags.begin(), doc.sdg_tags.end());
        doc.sdg_tags.erase(std::unique(doc.sdg_tags.begin(), doc.sdg_tags.end()),
                           doc.sdg_tags.end());
        out.documents.push_back(std::move(doc));
    }
    return out;
}

void save_patents(const std::filesystem::path& path, const PatentCorpus& corpus) {
    std::ofstream out = open_output(path);
    out << json{{"embedding_dim", corpus.embedding_dim}}.dump() << '\n';
    for (const PatentRecord& record : corpus.records) {
        json row = {{"patent_id", record.patent_id},
                    {"title", record.title},
                    {"abstract", record.abstract},
                    {"concepts", concepts_json(record.concepts)},
                    {"anchor_sdgs", sdg_values(record.anchor_sdgs)},
                    {"cpc3", record.cpc3},
                    {"inventor_ids", record.inventor_ids},
                    {"applicant_ids", record.applicant_ids}};
        out << row.dump() << '\n';
    }
}

void save_sdg_corpus(const std::filesystem::path& path, const SdgCorpus& corpus) {
    std::ofstream out = open_output(path);
    out << json{{"embedding_dim", corpus.embedding_dim}}.dump() << '\n';
    for (const SdgDocument& doc : corpus.documents) {
        json row = {{"doc_id", doc.doc_id},
                    {"concepts", concepts_json(doc.concepts)},
                    {"sdg_tags", sdg_values(doc.sdg_tags)}};
        out << row.dump() << '\n';
    }
}

void save_silver(const std::filesystem::path& path, std::span<const SilverLabel> labels,
                 const SilverParams& params) {
    std::ofstream out = open_output(path);
    json categories = json::array();
    for (Category c : params.categories) categories.push_back(std::string(to_string(c)));
    json params_json = {{"tau_function", params.tau_function},
                        {"tau_solution", params.tau_solution},
                        {"tau_application", params.tau_application},
                        {"top_n", params.top_n},
                        {"rrf_k", params.rrf_k},
                        {"categories", categories}};
    for (const SilverLabel& label : labels) {
        json row = {{"patent_id", label.patent_id},
                    {"sdg_vector", label.vector.components()},
                    {"no_match", label.no_match},
                    {"params", params_json}};
        out << row.dump() << '\n';
    }
}

std::vector<SilverLabel> load_silver(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<SilverLabel> out;
    std::unordered_set<std::string> seen_ids;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json row = parse_line(path, text, line);
        SilverLabel label;
        label.patent_id = string_field(row, "patent_id", path, line);
        if (!seen_ids.insert(label.patent_id).second) {
            throw SchemaError(loc(path, line) + "duplicate patent_id \"" + label.patent_id + "\"",
                              line);
        }
        const json& vec = field(row, "sdg_vector", path, line);
        if (!vec.is_array() || vec.size() != kNumSdgs) {
            throw SchemaError(loc(path, line) + "sdg_vector must hold 17 numbers", line);
        }
        for (std::size_t i = 0; i < kNumSdgs; ++i) {
            if (!vec[i].is_number()) {
                throw SchemaError(loc(path, line) + "sdg_vector must hold numbers", line);
            }
            double v = vec[i].get<double>();
            if (!std::isfinite(v) || v < 0.0) {
                throw SchemaError(loc(path, line) + "sdg_vector entries must be finite and >= 0",
                                  line);
            }
            label.vector[i] = v;
        }
        const json& no_match = field(row, "no_match", path, line);
        if (!no_match.is_boolean()) {
            throw SchemaError(loc(path, line) + "no_match must be a boolean", line);
        }
        label.no_match = no_match.get<bool>();
        out.push_back(std::move(label));
    }
    return out;
}

FeatureTable load_features(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    FeatureTable out;
    if (!read_header(in, path, out.dim)) return out;

    std::unordered_set<std::string> seen_ids;
    std::string text;
    std::size_t line = 1;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json row = parse_line(path, text, line);
        std::string id = string_field(row, "patent_id", path, line);
        if (!seen_ids.insert(id).second) {
            throw SchemaError(loc(path, line) + "duplicate patent_id \"" + id + "\"", line);
        }
        const json& values = field(row, "features", path, line);
        if (!values.is_array() || values.size() != out.dim) {
            throw SchemaError(loc(path, line) + "features must hold " + std::to_string(out.dim) +
                                  " numbers",
                              line);
        }
        std::vector<double> features;
        features.reserve(out.dim);
        for (const json& v : values) {
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
                throw SchemaError(loc(path, line) + "features must be finite numbers", line);
            }
            features.push_back(v.get<double>());
        }
        out.rows.emplace_back(std::move(id), std::move(features));
    }
    return out;
}

void save_features(const std::filesystem::path& path, const FeatureTable& table) {
    std::ofstream out = open_output(path);
    out << json{{"embedding_dim", table.dim}}.dump() << '\n';
    for (const auto& [id, features] : table.rows) {
        out << json{{"patent_id", id}, {"features", features}}.dump() << '\n';
    }
}

std::vector<RawText> load_raw_texts(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<RawText> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json row = parse_line(path, text, line);
        RawText raw;
        raw.id = string_field(row, "patent_id", path, line);
        raw.title = string_field(row, "title", path, line);
        raw.abstract = string_field(row, "abstract", path, line);
        out.push_back(std::move(raw));
    }
    return out;
}

}  // namespace sdgmap::corpus
