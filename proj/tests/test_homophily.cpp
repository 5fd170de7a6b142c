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

#include "sdgmap/homophily.hpp"
#include "sdgmap/rng.hpp"
#include "test_support.hpp"

using namespace sdgmap;
using namespace sdgmap::graph;
using sdgmap::test::naive_q_degree;
using sdgmap::test::naive_q_nicosia;
using sdgmap::test::random_graph;
using sdgmap::test::random_memberships;

namespace {

PatentRecord patent_with(const std::string& id, std::vector<std::string> inventors,
                         std::vector<std::string> applicants = {}) {
    PatentRecord record;
    record.patent_id = id;
    record.title = "t";
    record.abstract = "a";
    record.inventor_ids = std::move(inventors);
    record.applicant_ids = std::move(applicants);
    return record;
}

}  // namespace

TEST_CASE("three patents sharing an inventor form a 6-arc clique") {
    std::vector<PatentRecord> records = {patent_with("a", {"inv1"}),
                                         patent_with("b", {"inv1"}),
                                         patent_with("c", {"inv1", "inv2"})};
    Graph g = build_graph(records, GraphKind::kInventor);
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_arcs() == 6);
    // Symmetric arcs make in/out degrees coincide.
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        CHECK(g.out_degree[i] == g.in_degree[i]);
        CHECK(g.out_degree[i] == 2);
    }
}

TEST_CASE("citation builder drops self-loops and duplicate arcs") {
    std::vector<PatentRecord> records = {patent_with("a", {}), patent_with("b", {})};
    std::vector<std::pair<std::string, std::string>> edges = {
        {"a", "a"},  // self-loop
        {"a", "b"},
        {"a", "b"},  // duplicate
        {"b", "a"},
    };
    Graph g = build_graph(records, GraphKind::kCitation, edges);
    CHECK(g.num_arcs() == 2);
}

TEST_CASE("citation builder names unknown ids") {
    std::vector<PatentRecord> records = {patent_with("a", {})};
    std::vector<std::pair<std::string, std::string>> edges = {{"a", "ghost"}};
    try {
        build_graph(records, GraphKind::kCitation, edges);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
}

TEST_CASE("memberships: raw clips, binary takes support, row_norm rescales") {
    std::vector<PatentRecord> records = {patent_with("p1", {}), patent_with("p2", {})};
    std::vector<std::pair<std::string, std::string>> edges = {{"p1", "p2"}};
    Graph g = build_graph(records, GraphKind::kCitation, edges);

    SdgVector footnote;
    footnote.set(SdgId(2), 0.6);
    footnote.set(SdgId(4), 0.4);
    std::unordered_map<std::string, SdgVector> vectors = {{"p1", footnote}};

    MembershipMatrix raw = memberships(g, vectors, MembershipMode::kRaw);
    CHECK(raw.at(0, 1) == doctest::Approx(0.6));
    CHECK(raw.at(0, 3) == doctest::Approx(0.4));
    // p2 has no vector: zero row.
    for (int c = 0; c < kNumSdgs; ++c) CHECK(raw.at(1, static_cast<std::size_t>(c)) == 0.0);

    MembershipMatrix binary = memberships(g, vectors, MembershipMode::kBinary);
    CHECK(binary.at(0, 1) == 1.0);
    CHECK(binary.at(0, 3) == 1.0);
    CHECK(binary.at(0, 0) == 0.0);

    // Already sums to one: row_norm leaves it unchanged.
    MembershipMatrix norm = memberships(g, vectors, MembershipMode::kRowNorm);
    CHECK(norm.at(0, 1) == doctest::Approx(0.6));
    CHECK(norm.at(0, 3) == doctest::Approx(0.4));

    // Clipping: components above 1 are capped in raw mode.
    SdgVector big;
    big.set(SdgId(1), 3.0);
    vectors["p2"] = big;
    MembershipMatrix clipped = memberships(g, vectors, MembershipMode::kRaw);
    CHECK(clipped.at(1, 0) == 1.0);
}

TEST_CASE("all-ones memberships give zero modularity under both null models") {
    Rng rng(53);
    Graph g = random_graph(rng, 12, 0.2);
    MembershipMatrix w;
    w.rows = g.num_nodes();
    w.values.assign(w.rows * kNumSdgs, 1.0);
    for (double p : {0.35, 0.5, 1.0}) {
        CHECK(overlapping_modularity(g, w, p, NullModel::kDegree) ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK(overlapping_modularity(g, w, p, NullModel::kNicosiaBeta) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("all-zero community contributes zero") {
    Rng rng(59);
    Graph g = random_graph(rng, 10, 0.3);
    MembershipMatrix w;
    w.rows = g.num_nodes();
    w.values.assign(w.rows * kNumSdgs, 0.0);
    CHECK(q_community(g, w, SdgId(5), 0.35) == 0.0);
    CHECK(q_community(g, w, SdgId(5), 0.35, NullModel::kNicosiaBeta) == 0.0);
}

TEST_CASE("3-node path fixture pins both null models' values") {
    // Arcs a->b->c with community weights (1, 1, 0) at p = 1.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs = {{0, 1}, {1, 2}};
    Graph g = make_graph(GraphKind::kCitation, {"a", "b", "c"}, arcs);
    MembershipMatrix w;
    w.rows = 3;
    w.values.assign(3 * kNumSdgs, 0.0);
    w.at(0, 0) = 1.0;
    w.at(1, 0) = 1.0;

    // Degree null: observed = (1*1 + 1*0)/2 = 0.5; expected =
    // (sum k_out x)(sum k_in x)/m^2 = (2 * 1)/4 = 0.5; Q = 0.
    double degree = q_community(g, w, SdgId(1), 1.0, NullModel::kDegree);
    CHECK(degree == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(degree == doctest::Approx(naive_q_degree(g, w, 0, 1.0)).epsilon(1e-12));

    // Beta null: mean affinity A = 2/3 multiplies the expected term:
    // expected = 0.5 * (2/3)^2 = 2/9; Q = 0.5 - 2/9 = 5/18.
    double beta = q_community(g, w, SdgId(1), 1.0, NullModel::kNicosiaBeta);
    CHECK(beta == doctest::Approx(5.0 / 18.0).epsilon(1e-12));
    CHECK(beta == doctest::Approx(naive_q_nicosia(g, w, 0, 1.0)).epsilon(1e-12));
}

TEST_CASE("fast path equals the nested-loop oracle on random graphs") {
    Rng rng(61);
    for (int round = 0; round < 15; ++round) {
        std::size_t n = 5 + rng.below(46);
        Graph g = random_graph(rng, n, 0.1);
        MembershipMatrix w = random_memberships(rng, g.num_nodes());
        for (double p : {0.35, 0.5, 1.0}) {
            double fast_degree = overlapping_modularity(g, w, p, NullModel::kDegree);
            double naive_degree =
                sdgmap::test::naive_overlapping_modularity(g, w, p, NullModel::kDegree);
            CHECK(std::abs(fast_degree - naive_degree) < 1e-9);

            double fast_beta = overlapping_modularity(g, w, p, NullModel::kNicosiaBeta);
            double naive_beta =
                sdgmap::test::naive_overlapping_modularity(g, w, p, NullModel::kNicosiaBeta);
            CHECK(std::abs(fast_beta - naive_beta) < 1e-9);
        }
    }
}

TEST_CASE("node permutation leaves Q unchanged") {
    Rng rng(67);
    Graph g = random_graph(rng, 20, 0.15);
    MembershipMatrix w = random_memberships(rng, g.num_nodes());

    // Permute node indices and relabel arcs/memberships consistently.
    std::vector<std::uint32_t> perm(g.num_nodes());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<std::uint32_t>(i);
    std::vector<std::uint32_t> shuffled = perm;
    rng.shuffle(shuffled);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
    for (const auto& [src, dst] : g.arcs) arcs.emplace_back(shuffled[src], shuffled[dst]);
    std::vector<std::string> ids(g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) ids[shuffled[i]] = g.node_ids[i];
    Graph permuted = make_graph(GraphKind::kCitation, std::move(ids), arcs);

    MembershipMatrix wp;
    wp.rows = w.rows;
    wp.values.assign(w.values.size(), 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
        for (int c = 0; c < kNumSdgs; ++c) {
            wp.at(shuffled[i], static_cast<std::size_t>(c)) =
                w.at(i, static_cast<std::size_t>(c));
        }
    }

    for (double p : {0.35, 1.0}) {
        CHECK(std::abs(overlapping_modularity(g, w, p) -
                       overlapping_modularity(permuted, wp, p)) < 1e-9);
    }
}

TEST_CASE("uniform constant memberships give zero Q for any level") {
    Rng rng(71);
    Graph g = random_graph(rng, 15, 0.2);
    for (double level : {0.25, 0.5, 0.9, 1.0}) {
        MembershipMatrix w;
        w.rows = g.num_nodes();
        w.values.assign(w.rows * kNumSdgs, level);
        for (double p : {0.35, 0.5, 1.0}) {
            CHECK(std::abs(overlapping_modularity(g, w, p, NullModel::kDegree)) < 1e-9);
        }
    }
}

TEST_CASE("scaling one community's memberships scales its Q by lambda^(2p)") {
    Rng rng(73);
    for (int round = 0; round < 10; ++round) {
        Graph g = random_graph(rng, 20, 0.15);
        MembershipMatrix w = random_memberships(rng, g.num_nodes());
        double lambda = rng.uniform(0.1, 1.0);
        double p = 0.35 + 0.65 * rng.uniform();

        MembershipMatrix scaled = w;
        for (std::size_t i = 0; i < w.rows; ++i) scaled.at(i, 4) = lambda * w.at(i, 4);

        double base = q_community(g, w, SdgId(5), p);
        double after = q_community(g, scaled, SdgId(5), p);
        CHECK(after == doctest::Approx(std::pow(lambda, 2.0 * p) * base).epsilon(1e-9));
    }
}

TEST_CASE("modularity argument validation") {
    Graph empty = make_graph(GraphKind::kCitation, {"a", "b"}, {});
    MembershipMatrix w;
    w.rows = 2;
    w.values.assign(2 * kNumSdgs, 0.5);
    CHECK_THROWS_AS(overlapping_modularity(empty, w, 0.35), ConfigError);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs = {{0, 1}};
    Graph g = make_graph(GraphKind::kCitation, {"a", "b"}, arcs);
    CHECK_THROWS_AS(overlapping_modularity(g, w, 0.0), ConfigError);
    CHECK_THROWS_AS(overlapping_modularity(g, w, 1.5), ConfigError);
    MembershipMatrix wrong;
    wrong.rows = 1;
    wrong.values.assign(kNumSdgs, 0.5);
    CHECK_THROWS_AS(overlapping_modularity(g, wrong, 0.35), ConfigError);
}

TEST_CASE("planted two-community graph: Q(p) strictly decreasing in p") {
    auto fixture = sdgmap::test::planted_two_community_graph();
    std::vector<double> ps = {0.35, 0.5, 0.75, 1.0};
    auto sweep = modularity_sweep(fixture.graph, fixture.memberships, ps);
    REQUIRE(sweep.size() == 4);
    for (std::size_t i = 0; i + 1 < sweep.size(); ++i) {
        CHECK(sweep[i].second > sweep[i + 1].second);
    }
    // Constant within-block membership 0.4 makes Q proportional to
    // 0.4^(2p); check the closed form.
    for (const auto& [p, q] : sweep) {
        CHECK(q == doctest::Approx(0.5 * std::pow(0.4, 2.0 * p)).epsilon(1e-9));
    }
}

TEST_CASE("modularity_sweep: empty input, uniform membership zero") {
    auto fixture = sdgmap::test::planted_two_community_graph();
    CHECK(modularity_sweep(fixture.graph, fixture.memberships, {}).empty());

    MembershipMatrix ones;
    ones.rows = fixture.graph.num_nodes();
    ones.values.assign(ones.rows * kNumSdgs, 1.0);
    auto sweep = modularity_sweep(fixture.graph, ones, std::vector<double>{1.0});
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].second == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("edge list loader: header row, CRLF, malformed rows") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "sdgmap_graph_tests";
    fs::create_directories(dir);
    fs::path path = dir / "edges.csv";
    {
        std::ofstream out(path, std::ios::trunc);
        out << "src_id,dst_id\n";
        out << "a,b\r\n";
        out << "b,c\n";
    }
    auto edges = load_citation_edges(path);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == std::pair<std::string, std::string>{"a", "b"});

    {
        std::ofstream out(path, std::ios::trunc);
        out << "justonefield\n";
    }
    CHECK_THROWS_AS(load_citation_edges(path), SchemaError);
}
