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
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sdgmap/types.hpp"

namespace sdgmap::graph {

enum class GraphKind { kCitation, kInventor, kApplicant };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view name);

/// Directed multigraph-free arc list over a dense node index. Citation
/// graphs keep their natural direction (citing -> cited); inventor and
/// applicant graphs expand each undirected link into two opposite arcs so
/// one directed modularity formula serves all three networks (and in/out
/// degrees coincide per node).
struct Graph {
    GraphKind kind = GraphKind::kCitation;
    std::vector<std::string> node_ids;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;  // (src, dst), deduplicated
    std::vector<std::uint32_t> out_degree;
    std::vector<std::uint32_t> in_degree;

    std::size_t num_nodes() const { return node_ids.size(); }
    std::size_t num_arcs() const { return arcs.size(); }
};

/// Citation edge list: CSV rows `src_id,dst_id`; an optional header row
/// equal to "src_id,dst_id" is skipped.
std::vector<std::pair<std::string, std::string>> load_citation_edges(
    const std::filesystem::path& path);

/// Builds the graph for one relational dimension. Citation arcs come from
/// the edge list (unknown ids are an error); inventor/applicant links are
/// derived from record metadata (two patents are linked when they share at
/// least one inventor/applicant). Self-loops and duplicate arcs are
/// dropped. Every record becomes a node whether or not it has edges.
Graph build_graph(std::span<const PatentRecord> records, GraphKind kind,
                  std::span<const std::pair<std::string, std::string>> citation_edges = {});

/// Convenience builder from raw arcs over explicit node ids (fixtures,
/// synthetic graphs).
Graph make_graph(GraphKind kind, std::vector<std::string> node_ids,
                 std::span<const std::pair<std::uint32_t, std::uint32_t>> arcs);

enum class MembershipMode { kRaw, kBinary, kRowNorm };

std::string_view to_string(MembershipMode mode);
MembershipMode parse_membership_mode(std::string_view name);

/// Node-by-community belonging coefficients in [0, 1], row-major
/// |V| x 17. Rows may be all-zero.
struct MembershipMatrix {
    std::size_t rows = 0;
    std::vector<double> values;  // rows * kNumSdgs

    double at(std::size_t node, std::size_t community) const {
        return values[node * kNumSdgs + community];
    }
    double& at(std::size_t node, std::size_t community) {
        return values[node * kNumSdgs + community];
    }
};

/// Builds belonging coefficients for the graph's nodes from soft SDG
/// vectors. raw clips components into [0, 1]; binary puts 1 on the
/// support; row_norm rescales each non-zero row to sum 1. Nodes missing
/// from the map get a zero row.
MembershipMatrix memberships(const Graph& graph,
                             const std::unordered_map<std::string, SdgVector>& vectors,
                             MembershipMode mode);

/// Null model for the expected-affinity term of the modularity.
///
/// kDegree (default): expected term (1/m^2) * sum_i k_i_out w_ic^p *
/// sum_j k_j_in w_jc^p — the configuration-model expectation of the power
/// affinity over random endpoints. Under it, uniform memberships give
/// exactly zero modularity and scaling one community's memberships by
/// lambda scales its contribution by lambda^(2p).
///
/// kNicosiaBeta: multiplies the expected term by the squared mean
/// affinity (1/|V| * sum_u w_uc^p)^2, matching the beta-normalized
/// formulation. It does not have the two properties above for
/// memberships below 1.
enum class NullModel { kDegree, kNicosiaBeta };

std::string_view to_string(NullModel model);
NullModel parse_null_model(std::string_view name);

/// Contribution of one community: (1/m) * sum over arcs of w_ic^p w_jc^p
/// minus the null model's expected term. Requires m > 0 and p in (0, 1].
/// Both terms factorize exactly because the affinity is a product of
/// powers, so the cost is O(V + E) per community.
double q_community(const Graph& graph, const MembershipMatrix& w, SdgId community, double p,
                   NullModel null_model = NullModel::kDegree);

/// Overlapping modularity: sum of q_community over the 17 communities.
double overlapping_modularity(const Graph& graph, const MembershipMatrix& w, double p,
                              NullModel null_model = NullModel::kDegree);

/// Q(p) sweep, one value per requested exponent.
std::vector<std::pair<double, double>> modularity_sweep(const Graph& graph,
                                                        const MembershipMatrix& w,
                                                        std::span<const double> ps,
                                                        NullModel null_model = NullModel::kDegree);

}  // namespace sdgmap::graph
