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

// Shared fixtures and independent oracles for the test suites. The oracle
// implementations here deliberately re-derive everything with plain loops
// and must never call into the library paths they check.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdgmap/alignment.hpp"
#include "sdgmap/calibration.hpp"
#include "sdgmap/homophily.hpp"
#include "sdgmap/rng.hpp"
#include "sdgmap/types.hpp"

namespace sdgmap::test {

// ---------------------------------------------------------------------------
// Fixture builders
// ---------------------------------------------------------------------------

/// Unit vector whose cosine against (1, 0) is exactly `score`.
inline Embedding embedding_for_score(double score) {
    return {score, std::sqrt(std::max(0.0, 1.0 - score * score))};
}

inline Concept concept_of(std::string text, Embedding embedding) {
    return {std::move(text), std::move(embedding)};
}

inline SdgDocument make_doc(std::string id, std::vector<int> tags, ConceptSet concepts) {
    SdgDocument doc;
    doc.doc_id = std::move(id);
    doc.concepts = std::move(concepts);
    for (int tag : tags) doc.sdg_tags.emplace_back(tag);
    std::sort(doc.sdg_tags.begin(), doc.sdg_tags.end());
    doc.sdg_tags.erase(std::unique(doc.sdg_tags.begin(), doc.sdg_tags.end()), doc.sdg_tags.end());
    return doc;
}

inline PatentRecord make_patent(std::string id, ConceptSet concepts,
                                std::vector<int> anchors = {}) {
    PatentRecord record;
    record.patent_id = std::move(id);
    record.title = "title of " + record.patent_id;
    record.abstract = "abstract of " + record.patent_id;
    record.concepts = std::move(concepts);
    for (int anchor : anchors) record.anchor_sdgs.emplace_back(anchor);
    return record;
}

/// Random embedding with entries in [-1, 1] and a guaranteed non-zero norm.
inline Embedding random_embedding(Rng& rng, std::size_t dim) {
    Embedding embedding(dim);
    for (;;) {
        double norm_sq = 0.0;
        for (double& v : embedding) {
            v = rng.uniform(-1.0, 1.0);
            norm_sq += v * v;
        }
        if (norm_sq > 1e-6) return embedding;
    }
}

inline ConceptSet random_concepts(Rng& rng, std::size_t dim, std::size_t max_per_category) {
    ConceptSet set;
    int serial = 0;
    for (Category category : kAllCategories) {
        std::size_t count = rng.below(max_per_category + 1);
        for (std::size_t i = 0; i < count; ++i) {
            set.by_category(category).push_back(
                concept_of("c" + std::to_string(serial++), random_embedding(rng, dim)));
        }
    }
    return set;
}

// ---------------------------------------------------------------------------
// Brute-force labeling oracle (independent re-derivation)
// ---------------------------------------------------------------------------

inline double oracle_cosine(const Embedding& a, const Embedding& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct OracleLabel {
    SdgVector vector;
    bool no_match = false;
};

/// Plain-loop evaluation of the whole labeling chain: per-category max
/// pair similarity, threshold, rank, reciprocal-rank fusion, top-N tag
/// counting. Sorting is insertion sort to stay independent of the
/// library's sort calls.
inline OracleLabel oracle_label(const PatentRecord& patent,
                                const std::vector<SdgDocument>& docs,
                                const align::HyperParams& params,
                                const std::vector<Category>& categories) {
    struct Scored {
        std::string id;
        double value;
    };
    auto insertion_sort = [](std::vector<Scored>& items) {
        for (std::size_t i = 1; i < items.size(); ++i) {
            Scored current = items[i];
            std::size_t j = i;
            while (j > 0 && (items[j - 1].value < current.value ||
                             (items[j - 1].value == current.value &&
                              items[j - 1].id > current.id))) {
                items[j] = items[j - 1];
                --j;
            }
            items[j] = current;
        }
    };

    std::map<std::string, double> fused;
    for (Category category : kAllCategories) {
        if (std::find(categories.begin(), categories.end(), category) == categories.end()) {
            continue;
        }
        std::vector<Scored> ranking;
        for (const SdgDocument& doc : docs) {
            const auto& pc = patent.concepts.by_category(category);
            const auto& dc = doc.concepts.by_category(category);
            if (pc.empty() || dc.empty()) continue;
            double best = -2.0;
            for (const Concept& a : pc) {
                for (const Concept& b : dc) {
                    double value = oracle_cosine(a.embedding, b.embedding);
                    if (value > best) best = value;
                }
            }
            if (best >= params.tau(category)) ranking.push_back({doc.doc_id, best});
        }
        insertion_sort(ranking);
        for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
            fused[ranking[rank].id] += 1.0 / (params.rrf_k + static_cast<double>(rank + 1));
        }
    }

    std::vector<Scored> order;
    for (const auto& [id, score] : fused) order.push_back({id, score});
    insertion_sort(order);

    OracleLabel result;
    result.no_match = order.empty();
    std::array<int, kNumSdgs> counts{};
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(params.top_n), order.size());
    for (std::size_t i = 0; i < take; ++i) {
        for (const SdgDocument& doc : docs) {
            if (doc.doc_id != order[i].id) continue;
            for (SdgId tag : doc.sdg_tags) counts[tag.index()] += 1;
        }
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
        result.vector[j] = static_cast<double>(counts[j]) / static_cast<double>(params.top_n);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Naive modularity oracles (nested loops, O(V^2) per community)
// ---------------------------------------------------------------------------

/// Expected term as the configuration-model average of the power affinity
/// over every ordered node pair, weighted by out/in degrees.
inline double naive_q_degree(const graph::Graph& g, const graph::MembershipMatrix& w,
                             int community, double p) {
    const double m = static_cast<double>(g.num_arcs());
    const std::size_t n = g.num_nodes();
    auto x = [&](std::size_t node) {
        return std::pow(w.at(node, static_cast<std::size_t>(community)), p);
    };

    double observed = 0.0;
    for (const auto& [src, dst] : g.arcs) observed += x(src) * x(dst);
    observed /= m;

    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            expected += static_cast<double>(g.out_degree[i]) *
                        static_cast<double>(g.in_degree[j]) * x(i) * x(j);
        }
    }
    expected /= m * m;
    return observed - expected;
}

/// Expected term built from per-node average affinities
/// beta_i = (1/|V|) sum_u f(x_i, x_u).
inline double naive_q_nicosia(const graph::Graph& g, const graph::MembershipMatrix& w,
                              int community, double p) {
    const double m = static_cast<double>(g.num_arcs());
    const std::size_t n = g.num_nodes();
    auto x = [&](std::size_t node) {
        return std::pow(w.at(node, static_cast<std::size_t>(community)), p);
    };

    double observed = 0.0;
    for (const auto& [src, dst] : g.arcs) observed += x(src) * x(dst);
    observed /= m;

    double sum_out = 0.0;
    double sum_in = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double beta_out = 0.0;
        double beta_in = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            beta_out += x(i) * x(u);
            beta_in += x(u) * x(i);
        }
        beta_out /= static_cast<double>(n);
        beta_in /= static_cast<double>(n);
        sum_out += static_cast<double>(g.out_degree[i]) * beta_out;
        sum_in += static_cast<double>(g.in_degree[i]) * beta_in;
    }
    return observed - (sum_out / m) * (sum_in / m);
}

inline double naive_overlapping_modularity(const graph::Graph& g,
                                           const graph::MembershipMatrix& w, double p,
                                           graph::NullModel null_model) {
    double q = 0.0;
    for (int c = 0; c < kNumSdgs; ++c) {
        q += null_model == graph::NullModel::kDegree ? naive_q_degree(g, w, c, p)
                                                     : naive_q_nicosia(g, w, c, p);
    }
    return q;
}

inline graph::Graph random_graph(Rng& rng, std::size_t n, double arc_density) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (rng.uniform() < arc_density) arcs.emplace_back(i, j);
        }
    }
    if (arcs.empty()) {
        arcs.emplace_back(0, static_cast<std::uint32_t>(n > 1 ? 1 : 0));
        if (n == 1) arcs.clear();
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    return graph::make_graph(graph::GraphKind::kCitation, std::move(ids), arcs);
}

inline graph::MembershipMatrix random_memberships(Rng& rng, std::size_t n) {
    graph::MembershipMatrix w;
    w.rows = n;
    w.values.resize(n * kNumSdgs);
    for (double& v : w.values) v = rng.uniform();
    return w;
}

// ---------------------------------------------------------------------------
// Planted calibration corpus
// ---------------------------------------------------------------------------

/// A synthetic corpus whose calibration objective has its minimum at
/// tau = (0.30, 0.20, 0.80) and top_n = 36.
///
/// Each category owns a block of three SDGs (functions 1-3, solutions 4-6,
/// applications 7-9):
///  - 9 "signal" documents per category score tau_c + 0.005..0.045 against
///    every patent; ranks 1-3 carry the block's first SDG, 4-6 the second,
///    7-9 the third;
///  - 9 "noise" documents per category score tau_c - 0.005..0.045 and
///    carry the block's first SDG;
///  - anchors are three cites of each SDG 1..9 plus nine filler cites of
///    SDG 10 (no document carries SDG 10, so that term is constant).
///
/// With top_n = 36 the fused pool at the planted thresholds (27 signal
/// docs) fits entirely, giving components 3/36 that match the anchor
/// distribution exactly. Dropping a threshold admits noise into the
/// selection (over-counting a component of the category's own block);
/// raising it drops signal (under-counting); both strictly increase the
/// loss step by step. Because the blocks are disjoint, suppressing a whole
/// category changes the shape of the prediction and no top_n rescaling can
/// compensate, so the planted point is the unique basin.
struct PlantedCorpus {
    std::vector<SdgDocument> docs;
    std::vector<PatentRecord> patents;
    align::HyperParams planted;
    calib::SearchSpace space;
    /// Constant loss floor at the optimum: the unreachable SDG10 filler
    /// term (0.25^2) averaged over the 10 observed components.
    double floor = 0.0625 / 10.0;
};

inline PlantedCorpus planted_calibration_corpus(int num_patents = 12) {
    const std::array<double, 3> tau = {0.30, 0.20, 0.80};
    PlantedCorpus out;

    out.planted = align::HyperParams{tau[0], tau[1], tau[2], 36, 60.0};

    out.space.tau_function = {0.22, 0.38};
    out.space.tau_solution = {0.12, 0.28};
    out.space.tau_application = {0.72, 0.88};
    out.space.top_n_candidates = {12, 36, 108};
    out.space.budget = 300;
    out.space.seed = 20260810;

    const char* prefix[3] = {"f", "s", "a"};
    for (std::size_t c = 0; c < 3; ++c) {
        Category category = kAllCategories[c];
        const int block_base = static_cast<int>(c) * 3 + 1;
        for (int rank = 1; rank <= 9; ++rank) {
            double score = tau[c] + 0.005 * static_cast<double>(10 - rank);
            ConceptSet concepts;
            concepts.by_category(category)
                .push_back(concept_of("sig", embedding_for_score(score)));
            int tag = block_base + (rank - 1) / 3;
            out.docs.push_back(make_doc(std::string(prefix[c]) + "sig" + std::to_string(rank),
                                        {tag}, std::move(concepts)));
        }
        for (int step = 1; step <= 9; ++step) {
            double score = tau[c] - 0.005 * static_cast<double>(step);
            ConceptSet concepts;
            concepts.by_category(category)
                .push_back(concept_of("noise", embedding_for_score(score)));
            out.docs.push_back(make_doc(std::string(prefix[c]) + "noise" + std::to_string(step),
                                        {block_base}, std::move(concepts)));
        }
    }

    std::vector<int> anchors;
    for (int repeat = 0; repeat < 3; ++repeat) {
        for (int sdg = 1; sdg <= 9; ++sdg) anchors.push_back(sdg);
    }
    for (int filler = 0; filler < 9; ++filler) anchors.push_back(10);
    for (int i = 0; i < num_patents; ++i) {
        ConceptSet concepts;
        for (Category category : kAllCategories) {
            concepts.by_category(category).push_back(concept_of("probe", {1.0, 0.0}));
        }
        char id[16];
        std::snprintf(id, sizeof(id), "p%02d", i);
        out.patents.push_back(make_patent(id, std::move(concepts), anchors));
    }
    return out;
}

/// Directed two-block graph with constant weak membership (0.4) of each
/// block in its own community and zero elsewhere. All arcs stay within a
/// block, so Q(p) is proportional to 0.4^(2p): strictly decreasing in p.
struct PlantedTwoCommunity {
    graph::Graph graph;
    graph::MembershipMatrix memberships;
};

inline PlantedTwoCommunity planted_two_community_graph(std::size_t block = 20) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
    auto ring = [&](std::uint32_t base) {
        for (std::uint32_t i = 0; i < block; ++i) {
            arcs.emplace_back(base + i, base + (i + 1) % block);
            arcs.emplace_back(base + i, base + (i + 2) % block);
        }
    };
    ring(0);
    ring(static_cast<std::uint32_t>(block));

    std::vector<std::string> ids;
    for (std::size_t i = 0; i < 2 * block; ++i) ids.push_back("v" + std::to_string(i));

    PlantedTwoCommunity out{graph::make_graph(graph::GraphKind::kCitation, std::move(ids), arcs),
                            {}};
    out.memberships.rows = 2 * block;
    out.memberships.values.assign(2 * block * kNumSdgs, 0.0);
    for (std::size_t i = 0; i < 2 * block; ++i) {
        std::size_t community = i < block ? 0 : 1;
        out.memberships.at(i, community) = 0.4;
    }
    return out;
}

}  // namespace sdgmap::test
