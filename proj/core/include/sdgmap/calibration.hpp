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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdgmap/alignment.hpp"
#include "sdgmap/types.hpp"

namespace sdgmap::calib {

/// Normalized empirical distribution of a patent's cited-paper SDG tags
/// plus its support set S+.
struct AnchorDistribution {
    SdgVector distribution;
    std::vector<SdgId> support;  // sorted, distinct
};

/// Throws SchemaError when the patent has no anchors (it cannot be used
/// for calibration).
AnchorDistribution anchor_distribution(const PatentRecord& patent);

/// Positive-only squared error for one patent: mean over j in S+ of
/// (pred_j - anchor_j)^2. Components outside S+ never contribute.
double positive_mse(const SdgVector& pred, const SdgVector& anchor,
                    std::span<const SdgId> s_plus);

/// Deterministic stratified split. Patents are stratified on their single
/// most frequent anchor SDG (ties resolved to the lowest SdgId); exact
/// iterative multi-label stratification is out of scope. Strata too small
/// to stratify are merged into a remainder stratum and reported in
/// `warnings`. The validation size is round(fraction * n), apportioned
/// across strata by largest remainder.
struct SplitResult {
    std::vector<std::size_t> validation;  // indices into the input span
    std::vector<std::size_t> remainder;
    std::vector<std::string> warnings;
};

SplitResult stratified_split(std::span<const PatentRecord> patents, double fraction,
                             std::uint64_t seed);

/// Eq.-style calibration objective: mean positive-only MSE of the full
/// labeling function (all three categories) over the validation patents.
/// Throws on an empty validation set or anchorless patents.
double objective(const align::HyperParams& params, std::span<const PatentRecord> validation,
                 std::span<const SdgDocument> docs);

/// Precomputed per-(patent, category) score tables so one optimization
/// trial costs a threshold scan instead of a full cosine pass. Produces
/// results identical to label_patent.
class CalibrationContext {
  public:
    CalibrationContext(std::span<const PatentRecord> validation,
                       std::span<const SdgDocument> docs);

    double objective(const align::HyperParams& params) const;

    std::size_t num_patents() const { return patents_.size(); }

  private:
    struct ScoredDoc {
        double score;
        std::uint32_t doc_index;
    };
    struct PatentEntry {
        std::array<std::vector<ScoredDoc>, 3> by_category;  // sorted desc, ties by doc id
        SdgVector anchor;
        std::vector<SdgId> support;
    };

    std::vector<PatentEntry> patents_;
    std::vector<std::string> doc_ids_;
    std::vector<std::vector<SdgId>> doc_tags_;
};

/// Hyperparameter search space. Ranges are inclusive; top_n is drawn from
/// an explicit candidate list; rrf_k stays fixed during search.
struct TauRange {
    double lo = -1.0;
    double hi = 1.0;
};

struct SearchSpace {
    TauRange tau_function;
    TauRange tau_solution;
    TauRange tau_application;
    std::vector<int> top_n_candidates;
    int budget = 200;
    std::uint64_t seed = 0;
    double rrf_k = 60.0;

    void validate() const;
};

SearchSpace load_search_space(const std::filesystem::path& path);
void save_search_space(const std::filesystem::path& path, const SearchSpace& space);

enum class Strategy { kRandom, kTpe };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

struct Trial {
    int index = 0;
    align::HyperParams params;
    double objective = 0.0;
};

struct OptimizeResult {
    align::HyperParams best;
    double best_objective = 0.0;
    std::vector<Trial> trials;
};

using ObjectiveFn = std::function<double(const align::HyperParams&)>;
using TrialSink = std::function<void(const Trial&)>;

/// Minimizes `fn` over the search space with the chosen strategy. Random
/// search draws each trial from an independent seed-derived substream; the
/// TPE sampler splits past trials at the gamma = 0.25 quantile and samples
/// candidates from a kernel density over the good trials. Deterministic
/// under (seed, strategy); returns the trial with minimum objective (ties:
/// earliest trial).
OptimizeResult optimize(const SearchSpace& space, Strategy strategy, const ObjectiveFn& fn,
                        const TrialSink& on_trial = {});

/// Convenience wrapper evaluating the calibration objective on a corpus.
OptimizeResult optimize(const SearchSpace& space, Strategy strategy,
                        std::span<const PatentRecord> validation,
                        std::span<const SdgDocument> docs, const TrialSink& on_trial = {});

}  // namespace sdgmap::calib
