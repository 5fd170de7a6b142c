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

#include "sdgmap/homophily.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace sdgmap::graph {

std::string_view to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::kCitation: return "citation";
        case GraphKind::kInventor: return "inventor";
        case GraphKind::kApplicant: return "applicant";
    }
    throw ConfigError("invalid graph kind");
}

GraphKind parse_graph_kind(std::string_view name) {
    if (name == "citation") return GraphKind::kCitation;
    if (name == "inventor") return GraphKind::kInventor;
    if (name == "applicant") return GraphKind::kApplicant;
    throw ConfigError("unknown graph kind: " + std::string(name));
}

std::string_view to_string(MembershipMode mode) {
    switch (mode) {
        case MembershipMode::kRaw: return "raw";
        case MembershipMode::kBinary: return "binary";
        case MembershipMode::kRowNorm: return "row_norm";
    }
    throw ConfigError("invalid membership mode");
}

MembershipMode parse_membership_mode(std::string_view name) {
    if (name == "raw") return MembershipMode::kRaw;
    if (name == "binary") return MembershipMode::kBinary;
    if (name == "row_norm") return MembershipMode::kRowNorm;
    throw ConfigError("unknown membership mode: " + std::string(name));
}

std::string_view to_string(NullModel model) {
    return model == NullModel::kDegree ? "degree" : "nicosia_beta";
}

NullModel parse_null_model(std::string_view name) {
    if (name == "degree") return NullModel::kDegree;
    if (name == "nicosia_beta") return NullModel::kNicosiaBeta;
    throw ConfigError("unknown null model: " + std::string(name));
}

std::vector<std::pair<std::string, std::string>> load_citation_edges(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open edge list: " + path.string());

    std::vector<std::pair<std::string, std::string>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "src_id,dst_id") continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size()) {
            throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected \"src_id,dst_id\"",
                              line_no);
        }
        edges.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    return edges;
}

namespace {

std::uint64_t arc_key(std::uint32_t src, std::uint32_t dst) {
    return (static_cast<std::uint64_t>(src) << 32) | dst;
}

void finalize_degrees(Graph& graph) {
    graph.out_degree.assign(graph.num_nodes(), 0);
    graph.in_degree.assign(graph.num_nodes(), 0);
    for (const auto& [src, dst] : graph.arcs) {
        graph.out_degree[src] += 1;
        graph.in_degree[dst] += 1;
    }
}

/// Expands "records sharing a key" into undirected clique links, emitted
/// as two opposite arcs per link.
void add_shared_key_arcs(Graph& graph, std::span<const PatentRecord> records,
                         const std::vector<std::string> PatentRecord::* key_field) {
    std::unordered_map<std::string, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i = 0; i < records.size(); ++i) {
        for (const std::string& key : records[i].*key_field) {
            groups[key].push_back(i);
        }
    }

    std::unordered_set<std::uint64_t> seen;
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                std::uint32_t u = members[a];
                std::uint32_t v = members[b];
                if (seen.insert(arc_key(u, v)).second) {
                    graph.arcs.emplace_back(u, v);
                    graph.arcs.emplace_back(v, u);
                }
            }
        }
    }
}

}  // namespace

Graph build_graph(std::span<const PatentRecord> records, GraphKind kind,
                  std::span<const std::pair<std::string, std::string>> citation_edges) {
    Graph graph;
    graph.kind = kind;
    graph.node_ids.reserve(records.size());
    std::unordered_map<std::string, std::uint32_t> index_of;
    index_of.reserve(records.size());
    for (const PatentRecord& record : records) {
        index_of.emplace(record.patent_id, static_cast<std::uint32_t>(graph.node_ids.size()));
        graph.node_ids.push_back(record.patent_id);
    }

    if (kind == GraphKind::kCitation) {
        std::unordered_set<std::uint64_t> seen;
        for (const auto& [src_id, dst_id] : citation_edges) {
            auto src_it = index_of.find(src_id);
            if (src_it == index_of.end()) {
                throw SchemaError("edge references unknown patent_id \"" + src_id + "\"");
            }
            auto dst_it = index_of.find(dst_id);
            if (dst_it == index_of.end()) {
                throw SchemaError("edge references unknown patent_id \"" + dst_id + "\"");
            }
            std::uint32_t src = src_it->second;
            std::uint32_t dst = dst_it->second;
            if (src == dst) continue;  // self-loop
            if (seen.insert(arc_key(src, dst)).second) {
                graph.arcs.emplace_back(src, dst);
            }
        }
    } else {
        add_shared_key_arcs(graph, records,
                            kind == GraphKind::kInventor ? &PatentRecord::inventor_ids
                                                         : &PatentRecord::applicant_ids);
    }

    // Arc order independent of hash iteration order.
    std::sort(graph.arcs.begin(), graph.arcs.end());
    finalize_degrees(graph);
    return graph;
}

Graph make_graph(GraphKind kind, std::vector<std::string> node_ids,
                 std::span<const std::pair<std::uint32_t, std::uint32_t>> arcs) {
    Graph graph;
    graph.kind = kind;
    graph.node_ids = std::move(node_ids);
    std::unordered_set<std::uint64_t> seen;
    for (const auto& [src, dst] : arcs) {
        if (src >= graph.num_nodes() || dst >= graph.num_nodes()) {
            throw ConfigError("arc endpoint out of range");
        }
        if (src == dst) continue;
        if (seen.insert(arc_key(src, dst)).second) {
            graph.arcs.emplace_back(src, dst);
        }
    }
    std::sort(graph.arcs.begin(), graph.arcs.end());
    finalize_degrees(graph);
    return graph;
}

MembershipMatrix memberships(const Graph& graph,
                             const std::unordered_map<std::string, SdgVector>& vectors,
                             MembershipMode mode) {
    MembershipMatrix matrix;
    matrix.rows = graph.num_nodes();
    matrix.values.assign(matrix.rows * kNumSdgs, 0.0);

    for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
        auto it = vectors.find(graph.node_ids[i]);
        if (it == vectors.end()) continue;  // isolated from SDG signal: zero row
        const auto& components = it->second.components();

        switch (mode) {
            case MembershipMode::kRaw:
                for (std::size_t c = 0; c < static_cast<std::size_t>(kNumSdgs); ++c) {
                    matrix.at(i, c) = std::clamp(components[c], 0.0, 1.0);
                }
                break;
            case MembershipMode::kBinary:
                for (std::size_t c = 0; c < static_cast<std::size_t>(kNumSdgs); ++c) {
                    matrix.at(i, c) = components[c] > 0.0 ? 1.0 : 0.0;
                }
                break;
            case MembershipMode::kRowNorm: {
                double row_sum = 0.0;
                for (double v : components) row_sum += std::max(v, 0.0);
                for (std::size_t c = 0; c < static_cast<std::size_t>(kNumSdgs); ++c) {
                    double v = std::max(components[c], 0.0);
                    matrix.at(i, c) = row_sum > 0.0 ? v / row_sum : 0.0;
                }
                break;
            }
        }
    }
    return matrix;
}

namespace {

void check_modularity_args(const Graph& graph, const MembershipMatrix& w, double p) {
    if (graph.num_arcs() == 0) {
        throw ConfigError("modularity undefined on a graph with no arcs");
    }
    if (w.rows != graph.num_nodes()) {
        throw ConfigError("membership matrix rows (" + std::to_string(w.rows) +
                          ") do not match node count (" + std::to_string(graph.num_nodes()) + ")");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw ConfigError("modularity exponent p must lie in (0, 1]");
    }
}

double q_community_powered(const Graph& graph, std::span<const double> x, NullModel null_model) {
    const double m = static_cast<double>(graph.num_arcs());

    double observed = 0.0;
    for (const auto& [src, dst] : graph.arcs) {
        observed += x[src] * x[dst];
    }
    observed /= m;

    double sum_out = 0.0;
    double sum_in = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum_out += static_cast<double>(graph.out_degree[i]) * x[i];
        sum_in += static_cast<double>(graph.in_degree[i]) * x[i];
    }
    double expected = (sum_out / m) * (sum_in / m);

    if (null_model == NullModel::kNicosiaBeta) {
        double mean_affinity = 0.0;
        for (double v : x) mean_affinity += v;
        mean_affinity /= static_cast<double>(x.size());
        expected *= mean_affinity * mean_affinity;
    }
    return observed - expected;
}

}  // namespace

double q_community(const Graph& graph, const MembershipMatrix& w, SdgId community, double p,
                   NullModel null_model) {
    check_modularity_args(graph, w, p);

    std::vector<double> x(graph.num_nodes());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::pow(w.at(i, community.index()), p);
    }
    return q_community_powered(graph, x, null_model);
}

double overlapping_modularity(const Graph& graph, const MembershipMatrix& w, double p,
                              NullModel null_model) {
    check_modularity_args(graph, w, p);

    double q = 0.0;
    std::vector<double> x(graph.num_nodes());
    for (int community = 0; community < kNumSdgs; ++community) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = std::pow(w.at(i, static_cast<std::size_t>(community)), p);
        }
        q += q_community_powered(graph, x, null_model);
    }
    return q;
}

std::vector<std::pair<double, double>> modularity_sweep(const Graph& graph,
                                                        const MembershipMatrix& w,
                                                        std::span<const double> ps,
                                                        NullModel null_model) {
    std::vector<std::pair<double, double>> out;
    out.reserve(ps.size());
    for (double p : ps) {
        out.emplace_back(p, overlapping_modularity(graph, w, p, null_model));
    }
    return out;
}

}  // namespace sdgmap::graph
