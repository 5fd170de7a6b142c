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

#include <benchmark/benchmark.h>

#include <unordered_set>
#include <vector>

#include "sdgmap/homophily.hpp"
#include "sdgmap/rng.hpp"

namespace {

using namespace sdgmap;

struct Instance {
    graph::Graph graph;
    graph::MembershipMatrix memberships;
};

Instance make_instance(std::size_t n_nodes, std::size_t n_arcs) {
    Rng rng(1234);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
    arcs.reserve(n_arcs);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(n_arcs * 2);
    while (arcs.size() < n_arcs) {
        auto src = static_cast<std::uint32_t>(rng.below(n_nodes));
        auto dst = static_cast<std::uint32_t>(rng.below(n_nodes));
        if (src == dst) continue;
        std::uint64_t key = (static_cast<std::uint64_t>(src) << 32) | dst;
        if (seen.insert(key).second) arcs.emplace_back(src, dst);
    }
    std::vector<std::string> ids(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) ids[i] = "n" + std::to_string(i);

    Instance instance{graph::make_graph(graph::GraphKind::kApplicant, std::move(ids), arcs),
                      {}};
    instance.memberships.rows = n_nodes;
    instance.memberships.values.resize(n_nodes * kNumSdgs);
    for (double& v : instance.memberships.values) v = rng.uniform();
    return instance;
}

void BM_OverlappingModularity(benchmark::State& state) {
    auto n_nodes = static_cast<std::size_t>(state.range(0));
    auto n_arcs = static_cast<std::size_t>(state.range(1));
    Instance instance = make_instance(n_nodes, n_arcs);
    for (auto _ : state) {
        double q = graph::overlapping_modularity(instance.graph, instance.memberships, 0.35);
        benchmark::DoNotOptimize(q);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_arcs) * kNumSdgs);
}

BENCHMARK(BM_OverlappingModularity)
    ->Args({1000, 30000})
    ->Args({10000, 300000})
    ->Args({33000, 1000000})
    ->Unit(benchmark::kMillisecond);

void BM_ModularitySweep(benchmark::State& state) {
    Instance instance = make_instance(5000, 150000);
    std::vector<double> ps = {0.35, 0.5, 0.75, 1.0};
    for (auto _ : state) {
        auto sweep = graph::modularity_sweep(instance.graph, instance.memberships, ps);
        benchmark::DoNotOptimize(sweep);
    }
}

BENCHMARK(BM_ModularitySweep)->Unit(benchmark::kMillisecond);

}  // namespace
