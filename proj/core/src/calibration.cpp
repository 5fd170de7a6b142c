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

#include "sdgmap/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "sdgmap/rng.hpp"

namespace sdgmap::calib {

using align::HyperParams;

AnchorDistribution anchor_distribution(const PatentRecord& patent) {
    if (patent.anchor_sdgs.empty()) {
        throw SchemaError("patent \"" + patent.patent_id +
                          "\" has no anchor SDGs; not usable for calibration");
    }
    std::array<int, kNumSdgs> counts{};
    for (SdgId id : patent.anchor_sdgs) counts[id.index()] += 1;

    AnchorDistribution out;
    const double total = static_cast<double>(patent.anchor_sdgs.size());
    for (int j = 0; j < kNumSdgs; ++j) {
        if (counts[j] == 0) continue;
        out.distribution[static_cast<std::size_t>(j)] = static_cast<double>(counts[j]) / total;
        out.support.emplace_back(j + 1);
    }
    return out;
}

double positive_mse(const SdgVector& pred, const SdgVector& anchor,
                    std::span<const SdgId> s_plus) {
    if (s_plus.empty()) {
        throw ConfigError("positive_mse requires a non-empty support set");
    }
    double sum = 0.0;
    for (SdgId id : s_plus) {
        double diff = pred.get(id) - anchor.get(id);
        sum += diff * diff;
    }
    return sum / static_cast<double>(s_plus.size());
}

namespace {

/// Dominant anchor SDG (highest multiplicity, ties to the lowest id);
/// the stratification key.
int dominant_anchor(const PatentRecord& patent) {
    std::array<int, kNumSdgs> counts{};
    for (SdgId id : patent.anchor_sdgs) counts[id.index()] += 1;
    int best = -1;
    int best_count = 0;
    for (int j = 0; j < kNumSdgs; ++j) {
        if (counts[j] > best_count) {
            best_count = counts[j];
            best = j + 1;
        }
    }
    return best;
}

}  // namespace

SplitResult stratified_split(std::span<const PatentRecord> patents, double fraction,
                             std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("split fraction must lie in (0, 1)");
    }
    if (patents.empty()) {
        throw ConfigError("stratified_split requires a non-empty patent set");
    }

    SplitResult result;

    // Stratum key 0 is the remainder stratum collecting classes too small
    // to stratify on their own.
    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < patents.size(); ++i) {
        if (patents[i].anchor_sdgs.empty()) {
            throw SchemaError("patent \"" + patents[i].patent_id +
                              "\" has no anchor SDGs; not usable for a stratified split");
        }
        strata[dominant_anchor(patents[i])].push_back(i);
    }

    const double min_side = std::min(fraction, 1.0 - fraction);
    std::map<int, std::vector<std::size_t>> merged;
    for (auto& [key, members] : strata) {
        // A stratum must be able to land at least one patent on the
        // smaller side of the split.
        if (static_cast<double>(members.size()) * min_side < 1.0) {
            result.warnings.push_back("stratum SDG" + std::to_string(key) + " too small (n=" +
                                      std::to_string(members.size()) +
                                      "); merged into remainder stratum");
            auto& pool = merged[0];
            pool.insert(pool.end(), members.begin(), members.end());
        } else {
            merged[key] = std::move(members);
        }
    }

    // Sort members by patent_id and shuffle with a per-stratum substream so
    // the split does not depend on input order.
    for (auto& [key, members] : merged) {
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return patents[a].patent_id < patents[b].patent_id;
        });
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(key));
        rng.shuffle(members);
    }

    // Largest-remainder apportionment of round(fraction * n) slots.
    const auto target =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(patents.size())));
    std::map<int, std::size_t> alloc;
    std::vector<std::pair<double, int>> remainders;
    std::size_t allocated = 0;
    for (const auto& [key, members] : merged) {
        double quota = fraction * static_cast<double>(members.size());
        auto base = static_cast<std::size_t>(std::floor(quota));
        alloc[key] = base;
        allocated += base;
        remainders.emplace_back(quota - static_cast<double>(base), key);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    while (allocated < target) {
        bool progressed = false;
        for (const auto& [rem, key] : remainders) {
            if (allocated == target) break;
            if (alloc[key] < merged[key].size()) {
                alloc[key] += 1;
                allocated += 1;
                progressed = true;
            }
        }
        if (!progressed) break;  // every stratum exhausted
    }

    for (const auto& [key, members] : merged) {
        std::size_t take = alloc[key];
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < take ? result.validation : result.remainder).push_back(members[i]);
        }
    }
    std::sort(result.validation.begin(), result.validation.end());
    std::sort(result.remainder.begin(), result.remainder.end());
    return result;
}

double objective(const HyperParams& params, std::span<const PatentRecord> validation,
                 std::span<const SdgDocument> docs) {
    if (validation.empty()) {
        throw ConfigError("calibration objective requires a non-empty validation set");
    }
    align::TagMap tags = align::make_tag_map(docs);
    double sum = 0.0;
    for (const PatentRecord& patent : validation) {
        AnchorDistribution anchor = anchor_distribution(patent);
        align::LabelResult label =
            align::label_patent(patent, docs, tags, params, kAllCategories);
        sum += positive_mse(label.vector, anchor.distribution, anchor.support);
    }
    return sum / static_cast<double>(validation.size());
}

// ---------------------------------------------------------------------------
// CalibrationContext
// ---------------------------------------------------------------------------

CalibrationContext::CalibrationContext(std::span<const PatentRecord> validation,
                                       std::span<const SdgDocument> docs) {
    if (validation.empty()) {
        throw ConfigError("calibration objective requires a non-empty validation set");
    }
    doc_ids_.reserve(docs.size());
    doc_tags_.reserve(docs.size());
    for (const SdgDocument& doc : docs) {
        doc_ids_.push_back(doc.doc_id);
        doc_tags_.push_back(doc.sdg_tags);
    }

    patents_.reserve(validation.size());
    for (const PatentRecord& patent : validation) {
        PatentEntry entry;
        AnchorDistribution anchor = anchor_distribution(patent);
        entry.anchor = anchor.distribution;
        entry.support = std::move(anchor.support);
        for (std::size_t c = 0; c < kAllCategories.size(); ++c) {
            std::vector<ScoredDoc>& scored = entry.by_category[c];
            for (std::uint32_t d = 0; d < docs.size(); ++d) {
                if (auto score = align::doc_category_score(patent.concepts, docs[d].concepts,
                                                           kAllCategories[c])) {
                    scored.push_back({*score, d});
                }
            }
            std::sort(scored.begin(), scored.end(), [&](const ScoredDoc& a, const ScoredDoc& b) {
                if (a.score != b.score) return a.score > b.score;
                return doc_ids_[a.doc_index] < doc_ids_[b.doc_index];
            });
        }
        patents_.push_back(std::move(entry));
    }
}

double CalibrationContext::objective(const HyperParams& params) const {
    params.validate();
    double sum = 0.0;
    std::unordered_map<std::uint32_t, double> fused;
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (const PatentEntry& patent : patents_) {
        fused.clear();
        // Same per-document accumulation order as label_patent: categories
        // in canonical order, ranks 1-based within the thresholded prefix.
        for (std::size_t c = 0; c < kAllCategories.size(); ++c) {
            const std::vector<ScoredDoc>& scored = patent.by_category[c];
            const double tau = params.tau(kAllCategories[c]);
            auto end = std::partition_point(scored.begin(), scored.end(),
                                            [tau](const ScoredDoc& s) { return s.score >= tau; });
            double rank = 1.0;
            for (auto it = scored.begin(); it != end; ++it, rank += 1.0) {
                fused[it->doc_index] += 1.0 / (params.rrf_k + rank);
            }
        }

        entries.assign(fused.begin(), fused.end());
        std::sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return doc_ids_[a.first] < doc_ids_[b.first];
        });

        std::array<int, kNumSdgs> counts{};
        std::size_t take =
            std::min<std::size_t>(static_cast<std::size_t>(params.top_n), entries.size());
        for (std::size_t i = 0; i < take; ++i) {
            for (SdgId id : doc_tags_[entries[i].first]) counts[id.index()] += 1;
        }

        double mse = 0.0;
        for (SdgId id : patent.support) {
            double pred = static_cast<double>(counts[id.index()]) /
                          static_cast<double>(params.top_n);
            double diff = pred - patent.anchor.get(id);
            mse += diff * diff;
        }
        sum += mse / static_cast<double>(patent.support.size());
    }
    return sum / static_cast<double>(patents_.size());
}

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

void SearchSpace::validate() const {
    auto check_range = [](const TauRange& r, const char* name) {
        if (!(r.lo < r.hi) || r.lo < -1.0 || r.hi > 1.0) {
            throw ConfigError(std::string(name) + " range must satisfy -1 <= lo < hi <= 1");
        }
    };
    check_range(tau_function, "tau_function");
    check_range(tau_solution, "tau_solution");
    check_range(tau_application, "tau_application");
    if (top_n_candidates.empty()) {
        throw ConfigError("top_n_candidates must be non-empty");
    }
    for (int n : top_n_candidates) {
        if (n < 1) throw ConfigError("top_n candidates must be >= 1");
    }
    if (budget < 1) throw ConfigError("budget must be >= 1");
    if (!(rrf_k > 0.0)) throw ConfigError("rrf_k must be > 0");
}

namespace {

using nlohmann::json;

TauRange range_from_json(const json& value, const char* name) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
        throw ConfigError(std::string("search space field \"") + name +
                          "\" must be a [lo, hi] pair");
    }
    return TauRange{value[0].get<double>(), value[1].get<double>()};
}

}  // namespace

SearchSpace load_search_space(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open search space file: " + path.string());
    json value = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.is_object()) {
        throw ConfigError("search space file is not a JSON object: " + path.string());
    }
    SearchSpace space;
    auto require = [&](const char* name) -> const json& {
        auto it = value.find(name);
        if (it == value.end()) {
            throw ConfigError("search space missing field \"" + std::string(name) + "\"");
        }
        return *it;
    };
    try {
        space.tau_function = range_from_json(require("tau_function"), "tau_function");
        space.tau_solution = range_from_json(require("tau_solution"), "tau_solution");
        space.tau_application = range_from_json(require("tau_application"), "tau_application");
        for (const json& n : require("top_n_candidates")) {
            space.top_n_candidates.push_back(n.get<int>());
        }
        space.budget = require("budget").get<int>();
        space.seed = require("seed").get<std::uint64_t>();
        if (auto it = value.find("rrf_k"); it != value.end()) space.rrf_k = it->get<double>();
    } catch (const json::exception& e) {
        throw ConfigError("invalid search space file " + path.string() + ": " + e.what());
    }
    space.validate();
    return space;
}

void save_search_space(const std::filesystem::path& path, const SearchSpace& space) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write search space file: " + path.string());
    json value = {{"tau_function", {space.tau_function.lo, space.tau_function.hi}},
                  {"tau_solution", {space.tau_solution.lo, space.tau_solution.hi}},
                  {"tau_application", {space.tau_application.lo, space.tau_application.hi}},
                  {"top_n_candidates", space.top_n_candidates},
                  {"budget", space.budget},
                  {"seed", space.seed},
                  {"rrf_k", space.rrf_k}};
    out << value.dump(2) << '\n';
}

Strategy parse_strategy(std::string_view name) {
    if (name == "random") return Strategy::kRandom;
    if (name == "tpe") return Strategy::kTpe;
    throw ConfigError("unknown strategy: " + std::string(name));
}

std::string_view to_string(Strategy strategy) {
    return strategy == Strategy::kRandom ? "random" : "tpe";
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

namespace {

HyperParams random_sample(const SearchSpace& space, Rng& rng) {
    HyperParams params;
    params.tau_function = rng.uniform(space.tau_function.lo, space.tau_function.hi);
    params.tau_solution = rng.uniform(space.tau_solution.lo, space.tau_solution.hi);
    params.tau_application = rng.uniform(space.tau_application.lo, space.tau_application.hi);
    params.top_n = space.top_n_candidates[rng.below(space.top_n_candidates.size())];
    params.rrf_k = space.rrf_k;
    return params;
}

/// TPE-style adaptive sampler: trials observed so far are split at the
/// gamma quantile into good/bad sets; candidates are drawn from a mixture
/// of a uniform prior and a rank-weighted Gaussian kernel density over the
/// good set, then scored by the density ratio l(x)/g(x); top_n is treated
/// as a categorical with add-one smoothing. Rank weighting makes the best
/// trials dominate the proposal so the sampler refines the leading basin
/// instead of the largest plateau, and a uniform trial is interleaved
/// every kExploreEvery steps so coverage never collapses.
class TpeSampler {
  public:
    static constexpr double kGamma = 0.25;
    static constexpr int kCandidates = 24;
    static constexpr std::size_t kMaxGood = 25;
    static constexpr double kPriorWeight = 1.0;
    static constexpr int kExploreEvery = 3;

    explicit TpeSampler(const SearchSpace& space) : space_(space) {
        n_startup_ = std::clamp(space.budget / 3, 10, 100);
    }

    HyperParams next(const std::vector<Trial>& observed, Rng& rng) const {
        std::vector<const Trial*> ok;
        ok.reserve(observed.size());
        for (const Trial& t : observed) {
            if (std::isfinite(t.objective)) ok.push_back(&t);
        }
        if (static_cast<int>(ok.size()) < n_startup_) {
            return random_sample(space_, rng);
        }
        if (static_cast<int>(observed.size() + 1) % kExploreEvery == 0) {
            return random_sample(space_, rng);
        }

        std::sort(ok.begin(), ok.end(), [](const Trial* a, const Trial* b) {
            if (a->objective != b->objective) return a->objective < b->objective;
            return a->index < b->index;
        });
        std::size_t n_good = std::min<std::size_t>(
            kMaxGood,
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         std::ceil(kGamma * static_cast<double>(ok.size())))));
        std::span<const Trial*> good(ok.data(), n_good);
        std::span<const Trial*> bad(ok.data() + n_good, ok.size() - n_good);
        if (bad.empty()) return random_sample(space_, rng);

        std::vector<double> good_weights = rank_weights(n_good);

        // Candidates that essentially repeat an evaluated trial are
        // skipped: re-evaluating a known point cannot improve the search.
        auto already_seen = [&](const HyperParams& params) {
            constexpr double kTolerance = 2e-3;
            for (const Trial& t : observed) {
                if (t.params.top_n != params.top_n) continue;
                if (std::abs(t.params.tau_function - params.tau_function) < kTolerance &&
                    std::abs(t.params.tau_solution - params.tau_solution) < kTolerance &&
                    std::abs(t.params.tau_application - params.tau_application) < kTolerance) {
                    return true;
                }
            }
            return false;
        };

        HyperParams best;
        bool have_best = false;
        double best_score = -std::numeric_limits<double>::infinity();
        HyperParams fallback;
        double fallback_score = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < kCandidates; ++c) {
            HyperParams candidate = sample_candidate(good, good_weights, rng);
            double score = density_ratio(candidate, good, good_weights, bad);
            if (score > fallback_score) {
                fallback_score = score;
                fallback = candidate;
            }
            if (already_seen(candidate)) continue;
            if (score > best_score) {
                best_score = score;
                best = candidate;
                have_best = true;
            }
        }
        return have_best ? best : fallback;
    }

  private:
    struct Dim {
        double HyperParams::* member;
        TauRange SearchSpace::* range;
    };
    static constexpr std::array<Dim, 3> kDims = {
        Dim{&HyperParams::tau_function, &SearchSpace::tau_function},
        Dim{&HyperParams::tau_solution, &SearchSpace::tau_solution},
        Dim{&HyperParams::tau_application, &SearchSpace::tau_application}};

    /// Geometrically decaying rank weights. The leading trials dominate
    /// the proposal density, so refinement concentrates on the best basin
    /// found so far instead of the widest plateau in the good set.
    static std::vector<double> rank_weights(std::size_t n) {
        std::vector<double> weights(n);
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = w;
            w *= 0.6;
            if (w < 0.02) w = 0.02;  // tail stays reachable
        }
        return weights;
    }

    double bandwidth(std::span<const Trial*> set, const Dim& dim) const {
        const TauRange& range = space_.*(dim.range);
        double mean = 0.0;
        for (const Trial* t : set) mean += t->params.*(dim.member);
        mean /= static_cast<double>(set.size());
        double var = 0.0;
        for (const Trial* t : set) {
            double d = t->params.*(dim.member) - mean;
            var += d * d;
        }
        var /= static_cast<double>(set.size());
        double scott = 1.06 * std::sqrt(var) *
                       std::pow(static_cast<double>(set.size()), -0.2);
        return std::max(scott, 0.05 * (range.hi - range.lo));
    }

    HyperParams sample_candidate(std::span<const Trial*> good,
                                 std::span<const double> good_weights, Rng& rng) const {
        HyperParams params;
        params.rrf_k = space_.rrf_k;
        // Mixture component: uniform prior with weight kPriorWeight against
        // the rank-weighted kernels.
        double total = kPriorWeight;
        for (double w : good_weights) total += w;
        bool from_prior = rng.uniform() * total < kPriorWeight;
        const Trial* center =
            from_prior ? nullptr : good[rng.weighted_index(good_weights)];
        // Point-mass/Gaussian mixture per dimension: keeping some
        // coordinates verbatim lets the proposal walk one coordinate at a
        // time, which matters when the objective is a staircase. At least
        // one dimension always mutates so no candidate is a clone of an
        // already-evaluated trial.
        std::uint64_t mutate_mask = rng.below(1u << kDims.size());
        if (mutate_mask == 0) mutate_mask = 1ull << rng.below(kDims.size());
        for (std::size_t d = 0; d < kDims.size(); ++d) {
            const Dim& dim = kDims[d];
            const TauRange& range = space_.*(dim.range);
            if (center == nullptr) {
                params.*(dim.member) = rng.uniform(range.lo, range.hi);
                continue;
            }
            double x = center->params.*(dim.member);
            if ((mutate_mask >> d) & 1ull) {
                x += rng.normal() * bandwidth(good, dim);
            }
            params.*(dim.member) = std::clamp(x, range.lo, range.hi);
        }

        // Categorical kernel centered on the same trial as the continuous
        // dims, so the joint (tau, top_n) structure of good trials is
        // preserved; a flat smoothing term keeps every candidate reachable.
        if (center != nullptr && rng.uniform() < 0.8) {
            params.top_n = center->params.top_n;
        } else {
            params.top_n = space_.top_n_candidates[rng.below(space_.top_n_candidates.size())];
        }
        return params;
    }

    double log_kde(double x, std::span<const Trial*> set, std::span<const double> set_weights,
                   const Dim& dim) const {
        const TauRange& range = space_.*(dim.range);
        double bw = bandwidth(set, dim);
        // Mixture of weighted kernels and the uniform prior over the range.
        double density = kPriorWeight / (range.hi - range.lo);
        double total = kPriorWeight;
        constexpr double inv_sqrt_2pi = 0.3989422804014327;
        for (std::size_t i = 0; i < set.size(); ++i) {
            double weight = set_weights.empty() ? 1.0 : set_weights[i];
            double d = (x - set[i]->params.*(dim.member)) / bw;
            density += weight * inv_sqrt_2pi / bw * std::exp(-0.5 * d * d);
            total += weight;
        }
        return std::log(density / total);
    }

    double log_categorical(int top_n, std::span<const Trial*> set,
                           std::span<const double> set_weights) const {
        double count = 1.0;
        double total = static_cast<double>(space_.top_n_candidates.size());
        for (std::size_t i = 0; i < set.size(); ++i) {
            double weight = set_weights.empty() ? 1.0 : set_weights[i];
            if (set[i]->params.top_n == top_n) count += weight;
            total += weight;
        }
        return std::log(count / total);
    }

    double density_ratio(const HyperParams& params, std::span<const Trial*> good,
                         std::span<const double> good_weights,
                         std::span<const Trial*> bad) const {
        double score = 0.0;
        for (const Dim& dim : kDims) {
            double x = params.*(dim.member);
            score += log_kde(x, good, good_weights, dim) - log_kde(x, bad, {}, dim);
        }
        score += log_categorical(params.top_n, good, good_weights) -
                 log_categorical(params.top_n, bad, {});
        return score;
    }

    const SearchSpace& space_;
    int n_startup_;
};

}  // namespace

OptimizeResult optimize(const SearchSpace& space, Strategy strategy, const ObjectiveFn& fn,
                        const TrialSink& on_trial) {
    space.validate();
    if (!fn) throw ConfigError("optimize requires an objective function");

    TpeSampler tpe(space);
    OptimizeResult result;
    result.trials.reserve(static_cast<std::size_t>(space.budget));

    std::size_t failures = 0;
    for (int i = 0; i < space.budget; ++i) {
        Rng rng = Rng::substream(space.seed, static_cast<std::uint64_t>(i));
        Trial trial;
        trial.index = i;
        trial.params = strategy == Strategy::kRandom ? random_sample(space, rng)
                                                     : tpe.next(result.trials, rng);
        try {
            trial.objective = fn(trial.params);
        } catch (const Error&) {
            trial.objective = std::numeric_limits<double>::quiet_NaN();
            ++failures;
        }
        result.trials.push_back(trial);
        if (on_trial) on_trial(trial);
    }

    if (failures == result.trials.size()) {
        throw Error("all " + std::to_string(failures) + " optimization trials failed");
    }

    const Trial* best = nullptr;
    for (const Trial& trial : result.trials) {
        if (!std::isfinite(trial.objective)) continue;
        if (best == nullptr || trial.objective < best->objective) best = &trial;
    }
    result.best = best->params;
    result.best_objective = best->objective;
    return result;
}

OptimizeResult optimize(const SearchSpace& space, Strategy strategy,
                        std::span<const PatentRecord> validation,
                        std::span<const SdgDocument> docs, const TrialSink& on_trial) {
    CalibrationContext context(validation, docs);
    return optimize(space, strategy,
                    [&context](const HyperParams& params) { return context.objective(params); },
                    on_trial);
}

}  // namespace sdgmap::calib
