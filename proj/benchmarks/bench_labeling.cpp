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

#include <vector>

#include "sdgmap/alignment.hpp"
#include "sdgmap/calibration.hpp"
#include "sdgmap/rng.hpp"
#include "test_support.hpp"

namespace {

using namespace sdgmap;

void BM_LabelPatent(benchmark::State& state) {
    auto n_docs = static_cast<std::size_t>(state.range(0));
    Rng rng(99);
    const std::size_t dim = 64;

    PatentRecord patent = test::make_patent("p", test::random_concepts(rng, dim, 3), {1});
    std::vector<SdgDocument> docs;
    docs.reserve(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        ConceptSet concepts = test::random_concepts(rng, dim, 3);
        if (concepts.functions.empty()) {
            concepts.functions.push_back(
                test::concept_of("x", test::random_embedding(rng, dim)));
        }
        docs.push_back(test::make_doc("d" + std::to_string(d),
                                      {static_cast<int>(d % 17) + 1}, std::move(concepts)));
    }
    align::TagMap tags = align::make_tag_map(docs);
    align::HyperParams params{0.1, 0.1, 0.1, 30, 60.0};
    const std::vector<Category> all(kAllCategories.begin(), kAllCategories.end());

    for (auto _ : state) {
        align::LabelResult result = align::label_patent(patent, docs, tags, params, all);
        benchmark::DoNotOptimize(result);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_docs));
}

BENCHMARK(BM_LabelPatent)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_CalibrationTrial(benchmark::State& state) {
    test::PlantedCorpus fixture = test::planted_calibration_corpus(12);
    calib::CalibrationContext context(fixture.patents, fixture.docs);
    Rng rng(3);
    for (auto _ : state) {
        align::HyperParams params = fixture.planted;
        params.tau_function += rng.uniform(-0.02, 0.02);
        double value = context.objective(params);
        benchmark::DoNotOptimize(value);
    }
}

BENCHMARK(BM_CalibrationTrial)->Unit(benchmark::kMicrosecond);

}  // namespace
