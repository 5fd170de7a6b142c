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

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdgmap/types.hpp"

namespace sdgmap::align {

/// Free parameters of the labeling function: one similarity threshold per
/// concept category, the top-N cutoff and the rank-fusion constant.
struct HyperParams {
    double tau_function = 0.0;
    double tau_solution = 0.0;
    double tau_application = 0.0;
    int top_n = 30;
    double rrf_k = 60.0;

    double tau(Category category) const {
        switch (category) {
            case Category::kFunction: return tau_function;
            case Category::kSolution: return tau_solution;
            case Category::kApplication: return tau_application;
        }
        throw ConfigError("invalid concept category");
    }

    void validate() const;

    /// The published optimum for the full-scale corpus; shipped for
    /// downstream parity, not reproducible on toy fixtures.
    static HyperParams reference_optimum() {
        return HyperParams{0.260, 0.165, 0.873, 30, 60.0};
    }
};

/// One thresholded per-category ranking: documents whose best concept-pair
/// similarity cleared tau, sorted by score descending, ties by ascending
/// doc id.
struct CategoryRanking {
    struct Entry {
        std::string doc_id;
        double score;

        bool operator==(const Entry&) const = default;
    };

    Category category = Category::kFunction;
    std::vector<Entry> entries;
};

/// Rank-fused document list; an entry exists iff the document survived at
/// least one category threshold, so every rrf_score is > 0.
struct FusedRanking {
    struct Entry {
        std::string doc_id;
        double rrf_score;

        bool operator==(const Entry&) const = default;
    };

    std::vector<Entry> entries;
};

/// Labeling output: the soft SDG vector plus a flag telling apart a
/// genuine all-zero result (nothing survived any threshold) from a small
/// but non-empty one.
struct LabelResult {
    SdgVector vector;
    bool no_match = false;
};

/// Cosine similarity dot(a,b) / (|a||b|). Throws ConfigError on dimension
/// mismatch or zero-norm input.
double cosine(const Embedding& a, const Embedding& b);

/// Best concept-pair similarity between a patent and a document in one
/// category: max over all (patent concept, doc concept) cosine pairs.
/// Empty when either side has no concepts in the category; the aggregation
/// is a max so it is order-invariant and favors the strongest match.
std::optional<double> doc_category_score(const ConceptSet& patent, const ConceptSet& doc,
                                         Category category);

/// Sort/filter core shared by category_ranking: keeps scores >= tau,
/// orders by score descending with ties broken by ascending id.
std::vector<CategoryRanking::Entry> ranking_from_scores(
    std::vector<CategoryRanking::Entry> scored, double tau);

CategoryRanking category_ranking(const PatentRecord& patent, std::span<const SdgDocument> docs,
                                 Category category, double tau);

/// Reciprocal Rank Fusion over up to three category rankings. Ranks are
/// 1-based; a document absent from a ranking contributes nothing for that
/// category. Output sorted by fused score descending, ties by ascending
/// doc id.
FusedRanking rrf_fuse(std::span<const CategoryRanking> rankings, double rrf_k);

using TagMap = std::unordered_map<std::string, std::vector<SdgId>>;

TagMap make_tag_map(std::span<const SdgDocument> docs);

/// Derives the SDG vector from the top-N fused documents: component j is
/// the count of SDG j among the selected documents divided by top_n. The
/// denominator is always top_n, even when fewer documents survive, so
/// magnitudes stay comparable across patents; the no_match flag marks an
/// empty fused ranking.
LabelResult sdg_vector(const FusedRanking& fused, const TagMap& tags, int top_n);

/// The composite labeling function: per-category rankings for the selected
/// categories -> rank fusion -> top-N SDG vector. Categories are always
/// processed in (function, solution, application) order regardless of the
/// order given.
LabelResult label_patent(const PatentRecord& patent, std::span<const SdgDocument> docs,
                         const HyperParams& params, std::span<const Category> categories);

/// Same, with a prebuilt tag map (avoids rebuilding it per patent when
/// labeling a whole corpus).
LabelResult label_patent(const PatentRecord& patent, std::span<const SdgDocument> docs,
                         const TagMap& tags, const HyperParams& params,
                         std::span<const Category> categories);

}  // namespace sdgmap::align
