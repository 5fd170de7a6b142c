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

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "sdgmap/evaluation.hpp"
#include "sdgmap/rng.hpp"
#include "test_support.hpp"

using namespace sdgmap;
using namespace sdgmap::eval;
using sdgmap::test::concept_of;
using sdgmap::test::embedding_for_score;
using sdgmap::test::make_doc;
using sdgmap::test::make_patent;

TEST_CASE("binarize keeps strictly positive components") {
    SdgVector v;
    v.set(SdgId(2), 0.6);
    v.set(SdgId(4), 0.4);
    CHECK(binarize(v) == LabelSet::of({2, 4}));

    CHECK(binarize(SdgVector{}).empty());

    SdgVector full;
    for (int j = 1; j <= kNumSdgs; ++j) full.set(SdgId(j), 1.0 / 17.0);
    CHECK(binarize(full).size() == 17);
}

TEST_CASE("recall_scores: perfect recovery, hand-counted case, superset") {
    std::map<std::string, LabelSet> refs = {{"p1", LabelSet::of({3})},
                                            {"p2", LabelSet::of({7})}};

    SUBCASE("identical predictions give 1/1") {
        RecallScores scores = recall_scores(refs, refs);
        CHECK(scores.macro == doctest::Approx(1.0));
        CHECK(scores.micro == doctest::Approx(1.0));
    }

    SUBCASE("one hit one miss gives 0.5/0.5") {
        std::map<std::string, LabelSet> preds = {{"p1", LabelSet::of({3})}, {"p2", LabelSet{}}};
        RecallScores scores = recall_scores(preds, refs);
        CHECK(scores.macro == doctest::Approx(0.5));
        CHECK(scores.micro == doctest::Approx(0.5));
        CHECK(scores.per_sdg[2].value() == doctest::Approx(1.0));
        CHECK(scores.per_sdg[6].value() == doctest::Approx(0.0));
    }

    SUBCASE("strict supersets are never penalized") {
        std::map<std::string, LabelSet> preds = {
            {"p1", LabelSet::of({3, 5, 9})}, {"p2", LabelSet::of({1, 7, 17})}};
        RecallScores scores = recall_scores(preds, refs);
        CHECK(scores.macro == doctest::Approx(1.0));
        CHECK(scores.micro == doctest::Approx(1.0));
    }

    SUBCASE("missing prediction id is an error") {
        std::map<std::string, LabelSet> preds = {{"p1", LabelSet::of({3})}};
        CHECK_THROWS_AS(recall_scores(preds, refs), ConfigError);
    }
}

TEST_CASE("adding predicted labels never lowers recall") {
    Rng rng(31);
    for (int round = 0; round < 100; ++round) {
        std::map<std::string, LabelSet> refs;
        std::map<std::string, LabelSet> preds;
        std::map<std::string, LabelSet> extended;
        std::size_t n = 2 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            std::string id = "p" + std::to_string(i);
            LabelSet ref;
            std::size_t n_ref = 1 + rng.below(3);
            for (std::size_t k = 0; k < n_ref; ++k) {
                ref.insert(SdgId(static_cast<int>(rng.below(17)) + 1));
            }
            refs[id] = ref;

            LabelSet pred;
            for (SdgId sdg : ref.to_vector()) {
                if (rng.uniform() < 0.6) pred.insert(sdg);
            }
            preds[id] = pred;

            LabelSet more = pred;
            std::size_t n_extra = rng.below(4);
            for (std::size_t k = 0; k < n_extra; ++k) {
                more.insert(SdgId(static_cast<int>(rng.below(17)) + 1));
            }
            extended[id] = more;
        }
        RecallScores base = recall_scores(preds, refs);
        RecallScores grown = recall_scores(extended, refs);
        CHECK(grown.macro >= base.macro - 1e-15);
        CHECK(grown.micro >= base.micro - 1e-15);
    }
}

TEST_CASE("micro recall lies between the per-SDG extremes") {
    Rng rng(37);
    for (int round = 0; round < 50; ++round) {
        std::map<std::string, LabelSet> refs;
        std::map<std::string, LabelSet> preds;
        std::size_t n = 3 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            std::string id = "p" + std::to_string(i);
            LabelSet ref;
            ref.insert(SdgId(static_cast<int>(rng.below(5)) + 1));
            if (rng.uniform() < 0.5) ref.insert(SdgId(static_cast<int>(rng.below(17)) + 1));
            refs[id] = ref;
            LabelSet pred;
            for (SdgId sdg : ref.to_vector()) {
                if (rng.uniform() < 0.5) pred.insert(sdg);
            }
            preds[id] = pred;
        }
        RecallScores scores = recall_scores(preds, refs);
        double lo = 1.0;
        double hi = 0.0;
        for (const auto& r : scores.per_sdg) {
            if (!r) continue;
            lo = std::min(lo, *r);
            hi = std::max(hi, *r);
        }
        CHECK(scores.micro >= lo - 1e-15);
        CHECK(scores.micro <= hi + 1e-15);
    }
}

TEST_CASE("ablation_suite emits one row per subset and flags signal channels") {
    // Only function concepts carry signal: docs expose solution/application
    // concepts with sub-threshold scores.
    std::vector<SdgDocument> docs;
    for (int d = 0; d < 4; ++d) {
        ConceptSet concepts;
        concepts.functions.push_back(concept_of("f", embedding_for_score(0.9)));
        concepts.solutions.push_back(concept_of("s", embedding_for_score(0.05)));
        concepts.applications.push_back(concept_of("a", embedding_for_score(0.05)));
        docs.push_back(make_doc("d" + std::to_string(d), {d + 1}, std::move(concepts)));
    }
    std::vector<PatentRecord> patents;
    for (int i = 0; i < 3; ++i) {
        ConceptSet concepts;
        for (Category category : kAllCategories) {
            concepts.by_category(category).push_back(concept_of("probe", {1.0, 0.0}));
        }
        patents.push_back(make_patent("p" + std::to_string(i), std::move(concepts),
                                      {1, 2, 3, 4}));
    }

    align::HyperParams params{0.5, 0.5, 0.5, 10, 60.0};
    auto subsets = ablation_subsets();
    REQUIRE(subsets.size() == 7);
    auto rows = ablation_suite(docs, patents, params, subsets);
    REQUIRE(rows.size() == 7);

    double function_only = 0.0;
    double solution_only = 0.0;
    double application_only = 0.0;
    for (const AblationRow& row : rows) {
        if (row.subset == std::vector<Category>{Category::kFunction}) {
            function_only = row.macro;
        }
        if (row.subset == std::vector<Category>{Category::kSolution}) {
            solution_only = row.macro;
        }
        if (row.subset == std::vector<Category>{Category::kApplication}) {
            application_only = row.macro;
        }
    }
    CHECK(function_only == doctest::Approx(1.0));
    CHECK(function_only > solution_only);
    CHECK(function_only > application_only);

    std::vector<std::vector<Category>> empty_subset = {{}};
    CHECK_THROWS_AS(ablation_suite(docs, patents, params, empty_subset), ConfigError);
}

TEST_CASE("bm25: absent terms score zero everywhere") {
    std::vector<std::string> docs = {"solar energy storage", "water filtration membrane"};
    auto scores = bm25_scores("quantum cryptography", docs);
    for (const auto& [doc, score] : scores) CHECK(score == 0.0);
}

TEST_CASE("bm25: a document equal to the query ranks first with positive score") {
    std::vector<std::string> docs = {"solar energy storage", "water filtration membrane"};
    auto scores = bm25_scores("water filtration membrane", docs);
    CHECK(scores[0].first == 1);
    CHECK(scores[0].second > 0.0);
}

TEST_CASE("bm25 matches a hand evaluation on a 3-doc corpus") {
    const double k1 = 1.2;
    const double b = 0.75;
    std::vector<std::string> docs = {
        "clean water treatment",            // 3 tokens
        "water and energy",                 // 3 tokens
        "renewable energy storage systems"  // 4 tokens
    };
    // Query "water energy": hand evaluation of the scoring formula.
    // N = 3, avgdl = 10/3.
    auto idf = [&](double df) { return std::log(1.0 + (3.0 - df + 0.5) / (df + 0.5)); };
    auto tf_term = [&](double tf, double dl) {
        return tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / (10.0 / 3.0)));
    };
    double d0 = idf(2) * tf_term(1, 3);                       // water only
    double d1 = idf(2) * tf_term(1, 3) + idf(2) * tf_term(1, 3);  // both terms
    double d2 = idf(2) * tf_term(1, 4);                       // energy only

    auto scores = bm25_scores("water energy", docs, k1, b);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0].first == 1);
    CHECK(scores[0].second == doctest::Approx(d1).epsilon(1e-12));
    std::array<double, 3> by_doc{};
    for (const auto& [doc, score] : scores) by_doc[doc] = score;
    CHECK(by_doc[0] == doctest::Approx(d0).epsilon(1e-12));
    CHECK(by_doc[2] == doctest::Approx(d2).epsilon(1e-12));
}

TEST_CASE("cooccurrence counts unordered pairs symmetrically") {
    std::vector<LabelSet> one_pair = {LabelSet::of({3, 7})};
    CoocMatrix m = cooccurrence(one_pair);
    CHECK(m.at(2, 6) == 1.0);
    CHECK(m.at(6, 2) == 1.0);
    CHECK(m.at(2, 2) == 0.0);

    std::vector<LabelSet> disjoint = {LabelSet::of({3}), LabelSet::of({7})};
    CoocMatrix zero = cooccurrence(disjoint);
    for (int i = 0; i < kNumSdgs; ++i) {
        for (int j = 0; j < kNumSdgs; ++j) {
            CHECK(zero.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == 0.0);
        }
    }

    std::vector<LabelSet> triple = {LabelSet::of({1, 2, 3})};
    CoocMatrix m3 = cooccurrence(triple);
    CHECK(m3.at(0, 1) == 1.0);
    CHECK(m3.at(0, 2) == 1.0);
    CHECK(m3.at(1, 2) == 1.0);
    CHECK(m3.at(1, 0) == 1.0);
}

TEST_CASE("cooccurrence is invariant under patent order") {
    Rng rng(41);
    std::vector<LabelSet> labels;
    for (int i = 0; i < 20; ++i) {
        LabelSet set;
        std::size_t k = 1 + rng.below(4);
        for (std::size_t j = 0; j < k; ++j) {
            set.insert(SdgId(static_cast<int>(rng.below(17)) + 1));
        }
        labels.push_back(set);
    }
    std::vector<LabelSet> shuffled = labels;
    rng.shuffle(shuffled);
    CoocMatrix a = cooccurrence(labels);
    CoocMatrix b = cooccurrence(shuffled);
    for (int i = 0; i < kNumSdgs; ++i) {
        for (int j = 0; j < kNumSdgs; ++j) {
            CHECK(a.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ==
                  b.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        }
    }
}

TEST_CASE("row_normalize: rows sum to one, zero rows stay zero, diagonal stays zero") {
    CoocMatrix m;
    m.at(0, 1) = 2.0;
    m.at(0, 2) = 2.0;
    CoocMatrix n = row_normalize(m);
    CHECK(n.at(0, 1) == doctest::Approx(0.5));
    CHECK(n.at(0, 2) == doctest::Approx(0.5));
    CHECK(n.at(5, 5) == 0.0);

    Rng rng(43);
    std::vector<LabelSet> labels;
    for (int i = 0; i < 30; ++i) {
        LabelSet set;
        std::size_t k = 1 + rng.below(4);
        for (std::size_t j = 0; j < k; ++j) {
            set.insert(SdgId(static_cast<int>(rng.below(17)) + 1));
        }
        labels.push_back(set);
    }
    CoocMatrix normalized = row_normalize(cooccurrence(labels));
    CHECK(normalized.normalized());
    for (std::size_t i = 0; i < static_cast<std::size_t>(kNumSdgs); ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            row_sum += normalized.at(i, j);
        }
        CHECK(normalized.at(i, i) == 0.0);
        if (row_sum != 0.0) CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("pearson: affine relation gives 1, hand-computed 5-point value") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y = {3, 5, 7, 9, 11};  // y = 2x + 1
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));

    // Pinned 5-point dataset; hand sums: means (3, 4), sum dx*dy = 16,
    // sum dx^2 = 10, sum dy^2 = 30.
    std::vector<double> u = {1, 2, 3, 4, 5};
    std::vector<double> v = {2, 1, 4, 5, 8};
    double expected = 16.0 / std::sqrt(10.0 * 30.0);
    CHECK(pearson(u, v) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("spearman: reversal gives -1 and ties get average ranks") {
    std::vector<double> x = {1, 2, 3, 4};
    std::vector<double> y = {10, 8, 5, 1};
    CHECK(spearman(x, y) == doctest::Approx(-1.0).epsilon(1e-12));

    // Ties: ranks of {1, 2, 2, 4} are {1, 2.5, 2.5, 4}.
    std::vector<double> tied = {1, 2, 2, 4};
    std::vector<double> linear = {1, 2, 3, 4};
    double rho = spearman(tied, linear);
    // Pearson over ranks {1, 2.5, 2.5, 4} vs {1, 2, 3, 4}.
    std::vector<double> rt = {1.0, 2.5, 2.5, 4.0};
    CHECK(rho == doctest::Approx(pearson(rt, linear)).epsilon(1e-12));
}

TEST_CASE("correlation input validation") {
    std::vector<double> two = {1, 2};
    CHECK_THROWS_AS(pearson(two, two), ConfigError);
    std::vector<double> constant = {1, 1, 1, 1};
    std::vector<double> rising = {1, 2, 3, 4};
    CHECK_THROWS_AS(pearson(constant, rising), ConfigError);
    std::vector<double> short_one = {1, 2, 3};
    std::vector<double> long_one = {1, 2, 3, 4};
    CHECK_THROWS_AS(pearson(short_one, long_one), ConfigError);
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
    Rng rng(47);
    for (int round = 0; round < 100; ++round) {
        std::size_t n = 4 + rng.below(8);
        std::vector<double> x;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(rng.uniform(-5.0, 5.0));
            y.push_back(rng.uniform(-5.0, 5.0));
        }
        // Degenerate draws (all equal) would make the coefficient
        // undefined; the generator range makes that practically
        // impossible, but guard anyway.
        std::vector<double> tx;
        std::vector<double> ty;
        for (double v : x) tx.push_back(std::exp(0.5 * v));      // strictly increasing
        for (double v : y) ty.push_back(v * v * v + 2.0 * v);    // strictly increasing
        double base = spearman(x, y);
        double transformed = spearman(tx, ty);
        CHECK(transformed == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("load_label_sets parses baseline prediction files") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "sdgmap_eval_tests";
    fs::create_directories(dir);
    fs::path path = dir / "preds.jsonl";
    {
        std::ofstream out(path, std::ios::trunc);
        out << R"({"patent_id": "p1", "sdgs": [3, 7]})" << '\n';
        out << R"({"patent_id": "p2", "sdgs": []})" << '\n';
    }
    auto sets = load_label_sets(path);
    REQUIRE(sets.size() == 2);
    CHECK(sets.at("p1") == LabelSet::of({3, 7}));
    CHECK(sets.at("p2").empty());
}
