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

#include "sdgmap/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sdgmap::align {

void HyperParams::validate() const {
    auto check_tau = [](double tau, const char* name) {
        if (!(tau >= -1.0 && tau <= 1.0)) {
            throw ConfigError(std::string(name) + " must lie in [-1, 1]");
        }
    };
    check_tau(tau_function, "tau_function");
    check_tau(tau_solution, "tau_solution");
    check_tau(tau_application, "tau_application");
    if (top_n < 1) throw ConfigError("top_n must be >= 1");
    if (!(rrf_k > 0.0)) throw ConfigError("rrf_k must be > 0");
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) {
        throw ConfigError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a <= 0.0 || norm_b <= 0.0) {
        throw ConfigError("cosine: zero-norm embedding");
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

std::optional<double> doc_category_score(const ConceptSet& patent, const ConceptSet& doc,
                                         Category category) {
    const std::vector<Concept>& patent_concepts = patent.by_category(category);
    const std::vector<Concept>& doc_concepts = doc.by_category(category);
    if (patent_concepts.empty() || doc_concepts.empty()) return std::nullopt;

    double best = -2.0;
    for (const Concept& pc : patent_concepts) {
        for (const Concept& dc : doc_concepts) {
            best = std::max(best, cosine(pc.embedding, dc.embedding));
        }
    }
    return best;
}

std::vector<CategoryRanking::Entry> ranking_from_scores(
    std::vector<CategoryRanking::Entry> scored, double tau) {
    std::erase_if(scored, [tau](const CategoryRanking::Entry& e) { return e.score < tau; });
    std::sort(scored.begin(), scored.end(),
              [](const CategoryRanking::Entry& a, const CategoryRanking::Entry& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.doc_id < b.doc_id;
              });
    return scored;
}

CategoryRanking category_ranking(const PatentRecord& patent, std::span<const SdgDocument> docs,
                                 Category category, double tau) {
    std::vector<CategoryRanking::Entry> scored;
    scored.reserve(docs.size());
    for (const SdgDocument& doc : docs) {
        if (auto score = doc_category_score(patent.concepts, doc.concepts, category)) {
            scored.push_back({doc.doc_id, *score});
        }
    }
    return CategoryRanking{category, ranking_from_scores(std::move(scored), tau)};
}

FusedRanking rrf_fuse(std::span<const CategoryRanking> rankings, double rrf_k) {
    if (!(rrf_k > 0.0)) throw ConfigError("rrf_k must be > 0");

    // Accumulate per document in the order rankings are given so the
    // floating-point sum is reproducible. std::map keeps doc ids sorted,
    // which also fixes the tie order below.
    std::map<std::string, double> scores;
    for (const CategoryRanking& ranking : rankings) {
        for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
            double rank = static_cast<double>(i + 1);
            scores[ranking.entries[i].doc_id] += 1.0 / (rrf_k + rank);
        }
    }

    FusedRanking fused;
    fused.entries.reserve(scores.size());
    for (const auto& [doc_id, score] : scores) {
        fused.entries.push_back({doc_id, score});
    }
    std::stable_sort(fused.entries.begin(), fused.entries.end(),
                     [](const FusedRanking::Entry& a, const FusedRanking::Entry& b) {
                         return a.rrf_score > b.rrf_score;
                     });
    return fused;
}

TagMap make_tag_map(std::span<const SdgDocument> docs) {
    TagMap tags;
    tags.reserve(docs.size());
    for (const SdgDocument& doc : docs) {
        tags.emplace(doc.doc_id, doc.sdg_tags);
    }
    return tags;
}

LabelResult sdg_vector(const FusedRanking& fused, const TagMap& tags, int top_n) {
    if (top_n < 1) throw ConfigError("top_n must be >= 1");

    LabelResult result;
    result.no_match = fused.entries.empty();

    std::array<int, kNumSdgs> counts{};
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(top_n),
                                             fused.entries.size());
    for (std::size_t i = 0; i < take; ++i) {
        auto it = tags.find(fused.entries[i].doc_id);
        if (it == tags.end()) {
            throw ConfigError("fused ranking references unknown doc_id \"" +
                              fused.entries[i].doc_id + "\"");
        }
        for (SdgId id : it->second) counts[id.index()] += 1;
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
        result.vector[j] = static_cast<double>(counts[j]) / static_cast<double>(top_n);
    }
    return result;
}

LabelResult label_patent(const PatentRecord& patent, std::span<const SdgDocument> docs,
                         const TagMap& tags, const HyperParams& params,
                         std::span<const Category> categories) {
    params.validate();
    if (categories.empty()) {
        throw ConfigError("label_patent requires at least one category");
    }

    std::vector<CategoryRanking> rankings;
    rankings.reserve(3);
    for (Category category : kAllCategories) {
        if (std::find(categories.begin(), categories.end(), category) == categories.end()) {
            continue;
        }
        rankings.push_back(category_ranking(patent, docs, category, params.tau(category)));
    }
    if (rankings.empty()) {
        throw ConfigError("label_patent: no valid categories selected");
    }

    FusedRanking fused = rrf_fuse(rankings, params.rrf_k);
    return sdg_vector(fused, tags, params.top_n);
}

LabelResult label_patent(const PatentRecord& patent, std::span<const SdgDocument> docs,
                         const HyperParams& params, std::span<const Category> categories) {
    return label_patent(patent, docs, make_tag_map(docs), params, categories);
}

}  // namespace sdgmap::align
