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

// sdgmap command-line pipeline. Subcommands mirror the stages:
//   extract | label | calibrate | evaluate | cooccur | modularity |
//   split-query | regress
// One JSON config file drives everything; flags override file values.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdgmap/pipeline.hpp"
#include "sdgmap/types.hpp"

namespace {

using sdgmap::pipeline::PipelineConfig;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Pipeline config file (JSON)")
        ->required();
    cmd->add_option("--out", flags.output_dir, "Override paths.output_dir");
    cmd->add_option("--threads", flags.threads, "Worker threads for per-patent stages");
}

PipelineConfig resolve(const CommonFlags& flags) {
    PipelineConfig config = sdgmap::pipeline::load_config(flags.config_path);
    if (!flags.output_dir.empty()) config.paths.output_dir = flags.output_dir;
    if (flags.threads > 0) config.threads = flags.threads;
    return config;
}

void print_artifacts(const std::vector<std::filesystem::path>& artifacts) {
    for (const std::filesystem::path& artifact : artifacts) {
        std::cout << "wrote " << artifact.string() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weak-supervision SDG labeling pipeline for patent corpora"};
    app.require_subcommand(1);

    // label
    auto* label_cmd = app.add_subcommand("label", "Produce silver SDG vectors for all patents");
    CommonFlags label_flags;
    std::string params_file;
    std::vector<std::string> label_categories;
    add_common(label_cmd, label_flags);
    label_cmd->add_option("--params", params_file,
                          "Hyperparameter JSON (e.g. best_params.json from calibrate)");
    label_cmd->add_option("--categories", label_categories,
                          "Concept categories to fuse (function/solution/application)");

    // calibrate
    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "Optimize labeling thresholds against citation anchors");
    CommonFlags calibrate_flags;
    std::string space_file;
    std::string strategy_name;
    int budget_override = 0;
    std::int64_t seed_override = -1;
    add_common(calibrate_cmd, calibrate_flags);
    calibrate_cmd->add_option("--space", space_file, "Search space JSON file");
    calibrate_cmd->add_option("--strategy", strategy_name, "random | tpe");
    calibrate_cmd->add_option("--budget", budget_override, "Trial budget");
    calibrate_cmd->add_option("--seed", seed_override, "Search seed");

    // evaluate
    auto* evaluate_cmd =
        app.add_subcommand("evaluate", "Recall tables, ablations and frequency histograms");
    CommonFlags evaluate_flags;
    std::string predictions_file;
    add_common(evaluate_cmd, evaluate_flags);
    evaluate_cmd->add_option("--preds", predictions_file,
                             "External baseline predictions (JSONL label sets)");

    // cooccur
    auto* cooccur_cmd =
        app.add_subcommand("cooccur", "SDG co-occurrence matrices and signal correlations");
    CommonFlags cooccur_flags;
    add_common(cooccur_cmd, cooccur_flags);

    // modularity
    auto* modularity_cmd = app.add_subcommand(
        "modularity", "Overlapping modularity of citation/inventor/applicant graphs");
    CommonFlags modularity_flags;
    std::vector<double> ps_override;
    std::vector<std::string> kinds_override;
    std::string membership_mode;
    std::string method_name;
    std::string source_name;
    add_common(modularity_cmd, modularity_flags);
    modularity_cmd->add_option("--p", ps_override, "Affinity exponent(s) in (0, 1]");
    modularity_cmd->add_option("--kind", kinds_override,
                               "Graph kind(s): citation | inventor | applicant");
    modularity_cmd->add_option("--membership-mode", membership_mode, "raw | binary | row_norm");
    modularity_cmd->add_option("--method", method_name, "Method name for the CSV output");
    modularity_cmd->add_option("--source", source_name,
                               "Membership source: silver | npl | predictions");

    // regress
    auto* regress_cmd =
        app.add_subcommand("regress", "Train the linear head on silver labels");
    CommonFlags regress_flags;
    add_common(regress_cmd, regress_flags);

    // split-query
    auto* split_cmd =
        app.add_subcommand("split-query", "Split an oversized Boolean query into subqueries");
    CommonFlags split_flags;
    std::string query_in;
    std::string query_out;
    int max_chars_override = 0;
    bool check_equivalence = false;
    add_common(split_cmd, split_flags);
    split_cmd->add_option("--in", query_in, "Query text file")->required();
    split_cmd->add_option("--out-dir", query_out, "Directory for subquery files")->required();
    split_cmd->add_option("--max-chars", max_chars_override, "Per-subquery character budget");
    split_cmd->add_flag("--check", check_equivalence,
                        "Run the truth-table equivalence oracle on the result");

    // extract
    auto* extract_cmd =
        app.add_subcommand("extract", "Call the concept-extraction service for raw texts");
    CommonFlags extract_flags;
    std::string endpoint_override;
    add_common(extract_cmd, extract_flags);
    extract_cmd->add_option("--endpoint", endpoint_override, "Extraction service endpoint");

    CLI11_PARSE(app, argc, argv);

    try {
        if (label_cmd->parsed()) {
            PipelineConfig config = resolve(label_flags);
            if (!params_file.empty()) {
                config.label.params = sdgmap::pipeline::load_hyper_params(params_file);
            }
            if (!label_categories.empty()) {
                config.label.categories.clear();
                for (const std::string& name : label_categories) {
                    config.label.categories.push_back(sdgmap::parse_category(name));
                }
            }
            print_artifacts(sdgmap::pipeline::run_label(config));
        } else if (calibrate_cmd->parsed()) {
            PipelineConfig config = resolve(calibrate_flags);
            if (!space_file.empty()) {
                config.calibrate.space = sdgmap::calib::load_search_space(space_file);
            }
            if (!strategy_name.empty()) {
                config.calibrate.strategy = sdgmap::calib::parse_strategy(strategy_name);
            }
            if (budget_override > 0) config.calibrate.space.budget = budget_override;
            if (seed_override >= 0) {
                config.calibrate.space.seed = static_cast<std::uint64_t>(seed_override);
            }
            print_artifacts(sdgmap::pipeline::run_calibrate(config));
        } else if (evaluate_cmd->parsed()) {
            PipelineConfig config = resolve(evaluate_flags);
            if (!predictions_file.empty()) config.paths.predictions = predictions_file;
            print_artifacts(sdgmap::pipeline::run_evaluate(config));
        } else if (cooccur_cmd->parsed()) {
            print_artifacts(sdgmap::pipeline::run_cooccur(resolve(cooccur_flags)));
        } else if (modularity_cmd->parsed()) {
            PipelineConfig config = resolve(modularity_flags);
            if (!ps_override.empty()) config.modularity.ps = ps_override;
            if (!kinds_override.empty()) {
                config.modularity.kinds.clear();
                for (const std::string& kind : kinds_override) {
                    config.modularity.kinds.push_back(sdgmap::graph::parse_graph_kind(kind));
                }
            }
            if (!membership_mode.empty()) {
                config.modularity.membership_mode =
                    sdgmap::graph::parse_membership_mode(membership_mode);
            }
            if (!method_name.empty()) config.modularity.method = method_name;
            if (!source_name.empty()) config.modularity.source = source_name;
            print_artifacts(sdgmap::pipeline::run_modularity(config));
        } else if (regress_cmd->parsed()) {
            print_artifacts(sdgmap::pipeline::run_regress(resolve(regress_flags)));
        } else if (split_cmd->parsed()) {
            PipelineConfig config = resolve(split_flags);
            if (max_chars_override > 0) {
                config.split_query.max_chars = static_cast<std::size_t>(max_chars_override);
            }
            if (check_equivalence) config.split_query.check_equivalence = true;
            print_artifacts(sdgmap::pipeline::run_split_query(config, query_in, query_out));
        } else if (extract_cmd->parsed()) {
            PipelineConfig config = resolve(extract_flags);
            if (!endpoint_override.empty()) config.extraction.endpoint = endpoint_override;
            print_artifacts(sdgmap::pipeline::run_extract(config));
        }
    } catch (const sdgmap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const sdgmap::SchemaError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const sdgmap::query::ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}
