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
#include <optional>
#include <string>
#include <vector>

#include "sdgmap/alignment.hpp"
#include "sdgmap/calibration.hpp"
#include "sdgmap/extraction.hpp"
#include "sdgmap/homophily.hpp"
#include "sdgmap/query_splitter.hpp"
#include "sdgmap/types.hpp"

namespace sdgmap::pipeline {

/// Whole-pipeline configuration, loaded from one JSON file. Subcommand
/// flags override individual fields; flags win over file values. Every
/// numeric artifact produced under this config is byte-identical across
/// reruns with identical inputs and seeds.
struct PipelineConfig {
    struct Paths {
        std::filesystem::path patents;
        std::filesystem::path sdg_docs;
        std::filesystem::path citations;    // citation edge list (optional)
        std::filesystem::path features;     // regression features (optional)
        std::filesystem::path predictions;  // external baseline labels (optional)
        std::filesystem::path raw_texts;    // extraction input (optional)
        std::filesystem::path output_dir = "out";
    } paths;

    struct Label {
        align::HyperParams params{0.2, 0.2, 0.8, 30, 60.0};
        /// Silver production default drops the application channel.
        std::vector<Category> categories = {Category::kSolution, Category::kFunction};
    } label;

    struct Calibrate {
        calib::SearchSpace space;
        calib::Strategy strategy = calib::Strategy::kTpe;
        double fraction = 0.4;       // validation share of anchored patents
        std::uint64_t split_seed = 17;
    } calibrate;

    struct Evaluate {
        bool run_bm25 = true;
        double bm25_k1 = 1.2;
        double bm25_b = 0.75;
    } evaluate;

    struct Modularity {
        std::vector<double> ps = {0.35};
        std::vector<graph::GraphKind> kinds = {graph::GraphKind::kCitation};
        graph::MembershipMode membership_mode = graph::MembershipMode::kRaw;
        graph::NullModel null_model = graph::NullModel::kDegree;
        std::string method = "silver";
        /// silver | npl | predictions (binary memberships from the
        /// external predictions file).
        std::string source = "silver";
    } modularity;

    struct Regress {
        double learning_rate = 0.05;
        int epochs = 200;
        std::uint64_t seed = 3;
        bool weighted = false;
    } regress;

    struct SplitQuery {
        std::size_t max_chars = 2000;
        std::size_t max_and_chain = 64;
        bool check_equivalence = false;
    } split_query;

    extract::ExtractionConfig extraction;

    int threads = 1;

    void validate() const;
};

/// Loads the config file; missing sections keep their defaults. Throws
/// ConfigError with a field-level message on invalid values.
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON dump of a config (alphabetical keys); hashed into run
/// manifests.
std::string config_fingerprint(const PipelineConfig& config);

/// Every subcommand writes `manifest_<command>.json` next to its
/// artifacts: the config hash, the seed in effect and one entry per
/// artifact. Entries written before a failure are marked stale. Manifests
/// carry no timestamps so reruns stay byte-identical.
class RunManifest {
  public:
    RunManifest(std::string command, const PipelineConfig& config,
                std::uint64_t seed);

    void record(const std::filesystem::path& artifact);
    void finish(bool stale);

    std::filesystem::path path() const;

  private:
    std::string command_;
    std::filesystem::path output_dir_;
    std::string config_hash_;
    std::uint64_t seed_;
    std::vector<std::filesystem::path> artifacts_;
};

/// Subcommand runners; each returns the artifacts it wrote. Paths are
/// resolved against the config. See the CLI for flag-level overrides.
std::vector<std::filesystem::path> run_label(const PipelineConfig& config);
std::vector<std::filesystem::path> run_calibrate(const PipelineConfig& config);
std::vector<std::filesystem::path> run_evaluate(const PipelineConfig& config);
std::vector<std::filesystem::path> run_cooccur(const PipelineConfig& config);
std::vector<std::filesystem::path> run_modularity(const PipelineConfig& config);
std::vector<std::filesystem::path> run_regress(const PipelineConfig& config);
std::vector<std::filesystem::path> run_split_query(const PipelineConfig& config,
                                                   const std::filesystem::path& query_file,
                                                   const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> run_extract(const PipelineConfig& config);

/// Reads hyperparameters back from a calibrate run's best_params.json.
align::HyperParams load_hyper_params(const std::filesystem::path& path);

}  // namespace sdgmap::pipeline
