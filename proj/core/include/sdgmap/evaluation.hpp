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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdgmap/alignment.hpp"
#include "sdgmap/types.hpp"

namespace sdgmap::eval {

/// A set of SDG labels, stored as a 17-bit mask.
class LabelSet {
  public:
    LabelSet() = default;

    void insert(SdgId id) { bits_ |= (1u << id.index()); }
    bool contains(SdgId id) const { return (bits_ >> id.index()) & 1u; }
    std::size_t size() const { return static_cast<std::size_t>(__builtin_popcount(bits_)); }
    bool empty() const { return bits_ == 0; }

    std::vector<SdgId> to_vector() const {
        std::vector<SdgId> out;
        for (int j = 1; j <= kNumSdgs; ++j) {
            SdgId id(j);
            if (contains(id)) out.push_back(id);
        }
        return out;
    }

    static LabelSet of(std::initializer_list<int> values) {
        LabelSet set;
        for (int v : values) set.insert(SdgId(v));
        return set;
    }

    bool operator==(const LabelSet&) const = default;

  private:
    std::uint32_t bits_ = 0;
};

/// Support of a soft SDG vector: every SDG with a strictly positive
/// component.
LabelSet binarize(const SdgVector& vector);

/// Recall against a positive-only reference. Per-SDG recall is computed
/// over patents whose reference contains that SDG; macro averages the
/// per-SDG recalls over SDGs that occur in the references; micro pools
/// TP/(TP+FN) over all (patent, SDG) reference pairs. Extra predicted
/// labels are never penalized.
struct RecallScores {
    double macro = 0.0;
    double micro = 0.0;
    std::array<std::optional<double>, kNumSdgs> per_sdg;
};

RecallScores recall_scores(const std::map<std::string, LabelSet>& preds,
                           const std::map<std::string, LabelSet>& refs);

/// One row of the concept-category ablation table.
struct AblationRow {
    std::vector<Category> subset;
    double macro = 0.0;
    double micro = 0.0;
};

/// Runs the labeling function once per category subset and scores each run
/// against the patents' anchor SDGs. Patents without anchors are skipped
/// (they carry no reference). The canonical seven subsets of the ablation
/// study are in `ablation_subsets()`.
std::vector<AblationRow> ablation_suite(std::span<const SdgDocument> docs,
                                        std::span<const PatentRecord> patents,
                                        const align::HyperParams& params,
                                        std::span<const std::vector<Category>> subsets);

std::vector<std::vector<Category>> ablation_subsets();

/// Okapi BM25 over a document list. IDF = ln(1 + (N - n + 0.5)/(n + 0.5));
/// tokens are lowercased maximal alphanumeric runs. Returns (doc index,
/// score) sorted by score descending, ties by ascending index.
std::vector<std::pair<std::size_t, double>> bm25_scores(std::string_view query,
                                                        std::span<const std::string> docs,
                                                        double k1 = 1.2, double b = 0.75);

std::vector<std::string> tokenize(std::string_view text);

/// Symmetric 17x17 SDG co-occurrence matrix with zero diagonal.
class CoocMatrix {
  public:
    double at(std::size_t i, std::size_t j) const { return cells_[i][j]; }
    double& at(std::size_t i, std::size_t j) { return cells_[i][j]; }
    bool normalized() const { return normalized_; }
    void set_normalized(bool value) { normalized_ = value; }

  private:
    std::array<std::array<double, kNumSdgs>, kNumSdgs> cells_{};
    bool normalized_ = false;
};

/// Counts unordered SDG pairs within each label set.
CoocMatrix cooccurrence(std::span<const LabelSet> labels);

/// Divides every non-zero row by its sum; zero rows stay zero.
CoocMatrix row_normalize(const CoocMatrix& matrix);

/// Product-moment correlation. Requires equal lengths >= 3 and non-zero
/// variance in both arguments.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation: Pearson on average ranks (ties receive the
/// mean of their rank positions).
double spearman(std::span<const double> x, std::span<const double> y);

/// External baseline predictions: JSONL rows `{"patent_id": ..., "sdgs":
/// [ints]}`, e.g. top-k retrieval output of an embedding model.
std::map<std::string, LabelSet> load_label_sets(const std::filesystem::path& path);

}  // namespace sdgmap::eval
