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

#include "sdgmap/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "sdgmap/corpus.hpp"
#include "sdgmap/evaluation.hpp"
#include "sdgmap/format.hpp"
#include "sdgmap/regressor.hpp"
#include "sdgmap/sha256.hpp"

namespace sdgmap::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
    label.params.validate();
    if (label.categories.empty()) {
        throw ConfigError("label.categories must be non-empty");
    }
    calibrate.space.validate();
    if (!(calibrate.fraction > 0.0 && calibrate.fraction < 1.0)) {
        throw ConfigError("calibrate.fraction must lie in (0, 1)");
    }
    if (!(evaluate.bm25_k1 > 0.0) || evaluate.bm25_b < 0.0 || evaluate.bm25_b > 1.0) {
        throw ConfigError("evaluate.bm25 parameters out of range (k1 > 0, 0 <= b <= 1)");
    }
    if (modularity.ps.empty() || modularity.kinds.empty()) {
        throw ConfigError("modularity.ps and modularity.kinds must be non-empty");
    }
    for (double p : modularity.ps) {
        if (!(p > 0.0 && p <= 1.0)) {
            throw ConfigError("modularity exponent p must lie in (0, 1]");
        }
    }
    if (modularity.source != "silver" && modularity.source != "npl" &&
        modularity.source != "predictions") {
        throw ConfigError("modularity.source must be silver, npl or predictions");
    }
    if (!(regress.learning_rate > 0.0) || regress.epochs < 0) {
        throw ConfigError("regress.learning_rate must be > 0 and regress.epochs >= 0");
    }
    if (split_query.max_chars < 1 || split_query.max_and_chain < 1) {
        throw ConfigError("split_query limits must be >= 1");
    }
    extraction.validate();
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

namespace {

calib::SearchSpace default_search_space() {
    calib::SearchSpace space;
    space.tau_function = {0.0, 0.6};
    space.tau_solution = {0.0, 0.6};
    space.tau_application = {0.4, 1.0};
    space.top_n_candidates = {10, 30, 50};
    space.budget = 200;
    space.seed = 7;
    return space;
}

const json* find_section(const json& root, const char* name) {
    auto it = root.find(name);
    if (it == root.end()) return nullptr;
    if (!it->is_object()) {
        throw ConfigError(std::string("config section \"") + name + "\" must be an object");
    }
    return &*it;
}

template <typename T>
void read_field(const json& section, const char* name, T& out) {
    auto it = section.find(name);
    if (it == section.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field \"") + name + "\" has the wrong type");
    }
}

void read_path(const json& section, const char* name, fs::path& out) {
    std::string value;
    read_field(section, name, value);
    if (!value.empty()) out = value;
}

std::vector<Category> parse_categories(const json& value, const char* name) {
    if (!value.is_array() || value.empty()) {
        throw ConfigError(std::string("config field \"") + name +
                          "\" must be a non-empty array of category names");
    }
    std::vector<Category> out;
    for (const json& entry : value) {
        if (!entry.is_string()) {
            throw ConfigError(std::string("config field \"") + name +
                              "\" must hold category names");
        }
        out.push_back(parse_category(entry.get<std::string>()));
    }
    return out;
}

align::HyperParams params_from_json(const json& value) {
    align::HyperParams params;
    read_field(value, "tau_function", params.tau_function);
    read_field(value, "tau_solution", params.tau_solution);
    read_field(value, "tau_application", params.tau_application);
    read_field(value, "top_n", params.top_n);
    read_field(value, "rrf_k", params.rrf_k);
    return params;
}

json params_to_json(const align::HyperParams& params) {
    return {{"tau_function", params.tau_function},
            {"tau_solution", params.tau_solution},
            {"tau_application", params.tau_application},
            {"top_n", params.top_n},
            {"rrf_k", params.rrf_k}};
}

calib::SearchSpace space_from_json(const json& value) {
    calib::SearchSpace space = default_search_space();
    auto read_range = [&](const char* name, calib::TauRange& range) {
        auto it = value.find(name);
        if (it == value.end()) return;
        if (!it->is_array() || it->size() != 2) {
            throw ConfigError(std::string("search space field \"") + name +
                              "\" must be a [lo, hi] pair");
        }
        range.lo = (*it)[0].get<double>();
        range.hi = (*it)[1].get<double>();
    };
    read_range("tau_function", space.tau_function);
    read_range("tau_solution", space.tau_solution);
    read_range("tau_application", space.tau_application);
    if (auto it = value.find("top_n_candidates"); it != value.end()) {
        space.top_n_candidates.clear();
        for (const json& n : *it) space.top_n_candidates.push_back(n.get<int>());
    }
    read_field(value, "budget", space.budget);
    read_field(value, "seed", space.seed);
    read_field(value, "rrf_k", space.rrf_k);
    return space;
}

void ensure_exists(const fs::path& path, const char* what) {
    if (path.empty()) {
        throw ConfigError(std::string("config paths.") + what + " is not set");
    }
    if (!fs::exists(path)) {
        throw ConfigError(std::string("config paths.") + what + " does not exist: " +
                          path.string());
    }
}

std::ofstream open_artifact(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write artifact: " + path.string());
    return out;
}

}  // namespace

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json root = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (root.is_discarded() || !root.is_object()) {
        throw ConfigError("config file is not a JSON object: " + path.string());
    }

    PipelineConfig config;
    config.calibrate.space = default_search_space();

    if (const json* paths = find_section(root, "paths")) {
        read_path(*paths, "patents", config.paths.patents);
        read_path(*paths, "sdg_docs", config.paths.sdg_docs);
        read_path(*paths, "citations", config.paths.citations);
        read_path(*paths, "features", config.paths.features);
        read_path(*paths, "predictions", config.paths.predictions);
        read_path(*paths, "raw_texts", config.paths.raw_texts);
        read_path(*paths, "output_dir", config.paths.output_dir);
    }
    if (const json* label = find_section(root, "label")) {
        if (auto it = label->find("params"); it != label->end()) {
            config.label.params = params_from_json(*it);
        }
        if (auto it = label->find("categories"); it != label->end()) {
            config.label.categories = parse_categories(*it, "label.categories");
        }
    }
    if (const json* cal = find_section(root, "calibrate")) {
        if (auto it = cal->find("space"); it != cal->end()) {
            config.calibrate.space = space_from_json(*it);
        }
        std::string strategy;
        read_field(*cal, "strategy", strategy);
        if (!strategy.empty()) config.calibrate.strategy = calib::parse_strategy(strategy);
        read_field(*cal, "fraction", config.calibrate.fraction);
        read_field(*cal, "split_seed", config.calibrate.split_seed);
    }
    if (const json* ev = find_section(root, "evaluate")) {
        read_field(*ev, "run_bm25", config.evaluate.run_bm25);
        read_field(*ev, "bm25_k1", config.evaluate.bm25_k1);
        read_field(*ev, "bm25_b", config.evaluate.bm25_b);
    }
    if (const json* mod = find_section(root, "modularity")) {
        if (auto it = mod->find("ps"); it != mod->end()) {
            config.modularity.ps.clear();
            for (const json& p : *it) config.modularity.ps.push_back(p.get<double>());
        }
        if (auto it = mod->find("kinds"); it != mod->end()) {
            config.modularity.kinds.clear();
            for (const json& kind : *it) {
                config.modularity.kinds.push_back(
                    graph::parse_graph_kind(kind.get<std::string>()));
            }
        }
        std::string mode;
        read_field(*mod, "membership_mode", mode);
        if (!mode.empty()) config.modularity.membership_mode = graph::parse_membership_mode(mode);
        std::string null_model;
        read_field(*mod, "null_model", null_model);
        if (!null_model.empty()) {
            config.modularity.null_model = graph::parse_null_model(null_model);
        }
        read_field(*mod, "method", config.modularity.method);
        read_field(*mod, "source", config.modularity.source);
    }
    if (const json* reg = find_section(root, "regress")) {
        read_field(*reg, "learning_rate", config.regress.learning_rate);
        read_field(*reg, "epochs", config.regress.epochs);
        read_field(*reg, "seed", config.regress.seed);
        read_field(*reg, "weighted", config.regress.weighted);
    }
    if (const json* sq = find_section(root, "split_query")) {
        read_field(*sq, "max_chars", config.split_query.max_chars);
        read_field(*sq, "max_and_chain", config.split_query.max_and_chain);
        read_field(*sq, "check_equivalence", config.split_query.check_equivalence);
    }
    if (const json* ex = find_section(root, "extract")) {
        read_field(*ex, "endpoint", config.extraction.endpoint);
        read_field(*ex, "model_name", config.extraction.model_name);
        read_field(*ex, "temperature", config.extraction.temperature);
        read_field(*ex, "max_retries", config.extraction.max_retries);
        std::string cache_dir;
        read_field(*ex, "cache_dir", cache_dir);
        if (!cache_dir.empty()) config.extraction.cache_dir = cache_dir;
        read_field(*ex, "prompt_version", config.extraction.prompt_version);
        read_field(*ex, "retry_backoff_ms", config.extraction.retry_backoff_ms);
        read_field(*ex, "timeout_ms", config.extraction.timeout_ms);
    }
    read_field(root, "threads", config.threads);

    config.validate();
    return config;
}

std::string config_fingerprint(const PipelineConfig& config) {
    json categories = json::array();
    for (Category c : config.label.categories) categories.push_back(std::string(to_string(c)));
    json kinds = json::array();
    for (graph::GraphKind kind : config.modularity.kinds) {
        kinds.push_back(std::string(graph::to_string(kind)));
    }
    const calib::SearchSpace& space = config.calibrate.space;
    // The output directory is deliberately absent: where artifacts land
    // must not change what they contain, so reruns into different
    // directories hash identically.
    json root = {
        {"paths",
         {{"patents", config.paths.patents.string()},
          {"sdg_docs", config.paths.sdg_docs.string()},
          {"citations", config.paths.citations.string()},
          {"features", config.paths.features.string()},
          {"predictions", config.paths.predictions.string()},
          {"raw_texts", config.paths.raw_texts.string()}}},
        {"label", {{"params", params_to_json(config.label.params)}, {"categories", categories}}},
        {"calibrate",
         {{"strategy", std::string(calib::to_string(config.calibrate.strategy))},
          {"fraction", config.calibrate.fraction},
          {"split_seed", config.calibrate.split_seed},
          {"space",
           {{"tau_function", {space.tau_function.lo, space.tau_function.hi}},
            {"tau_solution", {space.tau_solution.lo, space.tau_solution.hi}},
            {"tau_application", {space.tau_application.lo, space.tau_application.hi}},
            {"top_n_candidates", space.top_n_candidates},
            {"budget", space.budget},
            {"seed", space.seed},
            {"rrf_k", space.rrf_k}}}}},
        {"evaluate",
         {{"run_bm25", config.evaluate.run_bm25},
          {"bm25_k1", config.evaluate.bm25_k1},
          {"bm25_b", config.evaluate.bm25_b}}},
        {"modularity",
         {{"ps", config.modularity.ps},
          {"kinds", kinds},
          {"membership_mode", std::string(graph::to_string(config.modularity.membership_mode))},
          {"null_model", std::string(graph::to_string(config.modularity.null_model))},
          {"method", config.modularity.method},
          {"source", config.modularity.source}}},
        {"regress",
         {{"learning_rate", config.regress.learning_rate},
          {"epochs", config.regress.epochs},
          {"seed", config.regress.seed},
          {"weighted", config.regress.weighted}}},
        {"split_query",
         {{"max_chars", config.split_query.max_chars},
          {"max_and_chain", config.split_query.max_and_chain},
          {"check_equivalence", config.split_query.check_equivalence}}},
        {"extract",
         {{"endpoint", config.extraction.endpoint},
          {"model_name", config.extraction.model_name},
          {"temperature", config.extraction.temperature},
          {"max_retries", config.extraction.max_retries},
          {"cache_dir", config.extraction.cache_dir.string()},
          {"prompt_version", config.extraction.prompt_version}}},
        {"threads", config.threads}};
    return root.dump();
}

// ---------------------------------------------------------------------------
// RunManifest
// ---------------------------------------------------------------------------

RunManifest::RunManifest(std::string command, const PipelineConfig& config, std::uint64_t seed)
    : command_(std::move(command)),
      output_dir_(config.paths.output_dir),
      config_hash_(sha256_hex(config_fingerprint(config))),
      seed_(seed) {}

void RunManifest::record(const fs::path& artifact) { artifacts_.push_back(artifact); }

fs::path RunManifest::path() const { return output_dir_ / ("manifest_" + command_ + ".json"); }

void RunManifest::finish(bool stale) {
    json entries = json::array();
    for (const fs::path& artifact : artifacts_) {
        // Artifacts under the output directory are recorded relative to
        // it; the manifest then reads the same no matter where the run
        // landed.
        std::string name = artifact.lexically_normal().string();
        std::string prefix = output_dir_.lexically_normal().string();
        if (!prefix.empty() && name.rfind(prefix, 0) == 0) {
            name = name.substr(prefix.size());
            while (!name.empty() && name.front() == '/') name.erase(name.begin());
        }
        entries.push_back({{"path", name}, {"stale", stale}});
    }
    json root = {{"command", command_},
                 {"config_sha256", config_hash_},
                 {"seed", seed_},
                 {"artifacts", entries}};
    std::ofstream out = open_artifact(path());
    out << root.dump(2) << '\n';
}

namespace {

template <typename Fn>
std::vector<fs::path> with_manifest(const char* command, const PipelineConfig& config,
                                    std::uint64_t seed, Fn&& body) {
    RunManifest manifest(command, config, seed);
    try {
        std::vector<fs::path> artifacts = body(manifest);
        manifest.finish(/*stale=*/false);
        return artifacts;
    } catch (...) {
        manifest.finish(/*stale=*/true);
        throw;
    }
}

struct Corpora {
    corpus::PatentCorpus patents;
    corpus::SdgCorpus docs;
};

Corpora load_corpora(const PipelineConfig& config) {
    ensure_exists(config.paths.patents, "patents");
    ensure_exists(config.paths.sdg_docs, "sdg_docs");
    Corpora corpora;
    corpora.patents = corpus::load_patents(config.paths.patents);
    corpora.docs = corpus::load_sdg_corpus(config.paths.sdg_docs);
    if (corpora.patents.embedding_dim != 0 && corpora.docs.embedding_dim != 0 &&
        corpora.patents.embedding_dim != corpora.docs.embedding_dim) {
        throw SchemaError("patent corpus dimension " +
                          std::to_string(corpora.patents.embedding_dim) +
                          " does not match SDG corpus dimension " +
                          std::to_string(corpora.docs.embedding_dim));
    }
    return corpora;
}

/// Labels every patent, optionally across threads; results keep record
/// order, so the artifact is identical no matter the thread count.
std::vector<corpus::SilverLabel> label_all(const corpus::PatentCorpus& patents,
                                           const corpus::SdgCorpus& docs,
                                           const align::HyperParams& params,
                                           const std::vector<Category>& categories, int threads) {
    std::vector<corpus::SilverLabel> labels(patents.records.size());
    align::TagMap tags = align::make_tag_map(docs.documents);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const PatentRecord& record = patents.records[i];
            align::LabelResult result =
                align::label_patent(record, docs.documents, tags, params, categories);
            labels[i] = {record.patent_id, result.vector, result.no_match};
        }
    };

    const std::size_t n = patents.records.size();
    if (threads <= 1 || n < 2) {
        work(0, n);
        return labels;
    }
    std::size_t worker_count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    std::size_t chunk = (n + worker_count - 1) / worker_count;
    for (std::size_t w = 0; w < worker_count; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back(work, begin, end);
    }
    for (std::thread& worker : workers) worker.join();
    return labels;
}

corpus::SilverParams silver_params(const PipelineConfig& config) {
    const align::HyperParams& p = config.label.params;
    return {p.tau_function, p.tau_solution,      p.tau_application,
            p.top_n,        p.rrf_k,             config.label.categories};
}

fs::path silver_path(const PipelineConfig& config) {
    return config.paths.output_dir / "silver.jsonl";
}

std::vector<corpus::SilverLabel> load_silver_or_fail(const PipelineConfig& config) {
    fs::path path = silver_path(config);
    if (!fs::exists(path)) {
        throw ConfigError("missing " + path.string() + "; run the label subcommand first");
    }
    return corpus::load_silver(path);
}

std::string categories_name(const std::vector<Category>& subset) {
    std::string name;
    for (Category c : subset) {
        if (!name.empty()) name += '+';
        name += to_string(c);
    }
    return name;
}

}  // namespace

// ---------------------------------------------------------------------------
// label
// ---------------------------------------------------------------------------

std::vector<fs::path> run_label(const PipelineConfig& config) {
    config.validate();
    return with_manifest("label", config, 0, [&](RunManifest& manifest) {
        Corpora corpora = load_corpora(config);
        std::vector<corpus::SilverLabel> labels =
            label_all(corpora.patents, corpora.docs, config.label.params,
                      config.label.categories, config.threads);

        fs::path out = silver_path(config);
        corpus::save_silver(out, labels, silver_params(config));
        manifest.record(out);
        return std::vector<fs::path>{out};
    });
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

std::vector<fs::path> run_calibrate(const PipelineConfig& config) {
    config.validate();
    const calib::SearchSpace& space = config.calibrate.space;
    return with_manifest("calibrate", config, space.seed, [&](RunManifest& manifest) {
        Corpora corpora = load_corpora(config);

        std::vector<PatentRecord> anchored;
        for (const PatentRecord& record : corpora.patents.records) {
            if (!record.anchor_sdgs.empty()) anchored.push_back(record);
        }
        if (anchored.empty()) {
            throw SchemaError("no patents with anchor SDGs; cannot calibrate");
        }

        calib::SplitResult split = calib::stratified_split(anchored, config.calibrate.fraction,
                                                           config.calibrate.split_seed);
        std::vector<PatentRecord> validation;
        validation.reserve(split.validation.size());
        for (std::size_t index : split.validation) validation.push_back(anchored[index]);

        fs::path trials_path = config.paths.output_dir / "trials.jsonl";
        std::ofstream trials_out = open_artifact(trials_path);
        auto sink = [&](const calib::Trial& trial) {
            json row = {{"trial", trial.index},
                        {"tau_function", trial.params.tau_function},
                        {"tau_solution", trial.params.tau_solution},
                        {"tau_application", trial.params.tau_application},
                        {"top_n", trial.params.top_n},
                        {"objective", std::isfinite(trial.objective)
                                          ? json(trial.objective)
                                          : json(nullptr)}};
            trials_out << row.dump() << '\n';
        };

        calib::OptimizeResult result = calib::optimize(space, config.calibrate.strategy,
                                                       validation, corpora.docs.documents, sink);
        trials_out.close();
        manifest.record(trials_path);

        fs::path best_path = config.paths.output_dir / "best_params.json";
        json best = params_to_json(result.best);
        best["objective"] = result.best_objective;
        best["strategy"] = std::string(calib::to_string(config.calibrate.strategy));
        best["seed"] = space.seed;
        best["budget"] = space.budget;
        best["validation_size"] = validation.size();
        std::ofstream best_out = open_artifact(best_path);
        best_out << best.dump(2) << '\n';
        best_out.close();
        manifest.record(best_path);

        return std::vector<fs::path>{trials_path, best_path};
    });
}

align::HyperParams load_hyper_params(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open params file: " + path.string());
    json value = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.is_object()) {
        throw ConfigError("params file is not a JSON object: " + path.string());
    }
    align::HyperParams params = params_from_json(value);
    params.validate();
    return params;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, eval::LabelSet> anchor_label_sets(
    std::span<const PatentRecord> records) {
    std::map<std::string, eval::LabelSet> refs;
    for (const PatentRecord& record : records) {
        if (record.anchor_sdgs.empty()) continue;
        eval::LabelSet set;
        for (SdgId id : record.anchor_sdgs) set.insert(id);
        refs.emplace(record.patent_id, set);
    }
    return refs;
}

std::string doc_text(const SdgDocument& doc) {
    std::string text;
    for (Category category : kAllCategories) {
        for (const Concept& entry : doc.concepts.by_category(category)) {
            if (!text.empty()) text += ' ';
            text += entry.text;
        }
    }
    return text;
}

}  // namespace

std::vector<fs::path> run_evaluate(const PipelineConfig& config) {
    config.validate();
    return with_manifest("evaluate", config, 0, [&](RunManifest& manifest) {
        Corpora corpora = load_corpora(config);
        std::vector<corpus::SilverLabel> silver = load_silver_or_fail(config);

        std::map<std::string, eval::LabelSet> refs = anchor_label_sets(corpora.patents.records);
        if (refs.empty()) {
            throw SchemaError("no patents with anchor SDGs; nothing to evaluate");
        }

        // Method -> (macro, micro, per-SDG) recall rows.
        std::vector<std::pair<std::string, eval::RecallScores>> methods;

        std::map<std::string, eval::LabelSet> silver_preds;
        for (const corpus::SilverLabel& label : silver) {
            silver_preds.emplace(label.patent_id, eval::binarize(label.vector));
        }
        methods.emplace_back("silver", eval::recall_scores(silver_preds, refs));

        if (config.evaluate.run_bm25) {
            std::vector<std::string> doc_texts;
            doc_texts.reserve(corpora.docs.documents.size());
            for (const SdgDocument& doc : corpora.docs.documents) {
                doc_texts.push_back(doc_text(doc));
            }
            std::map<std::string, eval::LabelSet> bm25_preds;
            for (const PatentRecord& record : corpora.patents.records) {
                if (!refs.contains(record.patent_id)) continue;
                auto ranked = eval::bm25_scores(record.title + " " + record.abstract, doc_texts,
                                                config.evaluate.bm25_k1, config.evaluate.bm25_b);
                eval::LabelSet set;
                std::size_t take = std::min<std::size_t>(
                    static_cast<std::size_t>(config.label.params.top_n), ranked.size());
                for (std::size_t i = 0; i < take; ++i) {
                    if (ranked[i].second <= 0.0) break;  // lexical misses carry no signal
                    for (SdgId id : corpora.docs.documents[ranked[i].first].sdg_tags) {
                        set.insert(id);
                    }
                }
                bm25_preds.emplace(record.patent_id, set);
            }
            methods.emplace_back("bm25", eval::recall_scores(bm25_preds, refs));
        }

        if (!config.paths.predictions.empty()) {
            ensure_exists(config.paths.predictions, "predictions");
            std::map<std::string, eval::LabelSet> external =
                eval::load_label_sets(config.paths.predictions);
            // External files may cover extra patents; recall only needs the
            // reference ids.
            methods.emplace_back(config.paths.predictions.stem().string(),
                                 eval::recall_scores(external, refs));
        }

        std::vector<fs::path> artifacts;

        fs::path recall_path = config.paths.output_dir / "recall.csv";
        {
            std::ofstream out = open_artifact(recall_path);
            out << "method,macro_recall,micro_recall\n";
            for (const auto& [name, scores] : methods) {
                out << csv_escape(name) << ',' << format_double(scores.macro) << ','
                    << format_double(scores.micro) << '\n';
            }
        }
        manifest.record(recall_path);
        artifacts.push_back(recall_path);

        fs::path per_sdg_path = config.paths.output_dir / "recall_per_sdg.csv";
        {
            std::ofstream out = open_artifact(per_sdg_path);
            out << "method,sdg,recall\n";
            for (const auto& [name, scores] : methods) {
                for (int j = 1; j <= kNumSdgs; ++j) {
                    const auto& value = scores.per_sdg[static_cast<std::size_t>(j - 1)];
                    if (!value) continue;
                    out << csv_escape(name) << ',' << j << ',' << format_double(*value) << '\n';
                }
            }
        }
        manifest.record(per_sdg_path);
        artifacts.push_back(per_sdg_path);

        fs::path ablation_path = config.paths.output_dir / "ablation.csv";
        {
            std::vector<std::vector<Category>> subsets = eval::ablation_subsets();
            std::vector<eval::AblationRow> rows = eval::ablation_suite(
                corpora.docs.documents, corpora.patents.records, config.label.params, subsets);
            std::ofstream out = open_artifact(ablation_path);
            out << "categories,macro_recall,micro_recall\n";
            for (const eval::AblationRow& row : rows) {
                out << csv_escape(categories_name(row.subset)) << ','
                    << format_double(row.macro) << ',' << format_double(row.micro) << '\n';
            }
        }
        manifest.record(ablation_path);
        artifacts.push_back(ablation_path);

        fs::path freq_path = config.paths.output_dir / "sdg_frequency.csv";
        {
            std::array<long, kNumSdgs> npl_counts{};
            std::array<long, kNumSdgs> silver_counts{};
            for (const auto& [id, set] : refs) {
                for (SdgId sdg : set.to_vector()) npl_counts[sdg.index()] += 1;
            }
            for (const corpus::SilverLabel& label : silver) {
                for (SdgId sdg : eval::binarize(label.vector).to_vector()) {
                    silver_counts[sdg.index()] += 1;
                }
            }
            std::ofstream out = open_artifact(freq_path);
            out << "sdg,npl_count,silver_count\n";
            for (int j = 1; j <= kNumSdgs; ++j) {
                out << j << ',' << npl_counts[static_cast<std::size_t>(j - 1)] << ','
                    << silver_counts[static_cast<std::size_t>(j - 1)] << '\n';
            }
        }
        manifest.record(freq_path);
        artifacts.push_back(freq_path);

        return artifacts;
    });
}

// ---------------------------------------------------------------------------
// cooccur
// ---------------------------------------------------------------------------

namespace {

void write_cooc_csv(const fs::path& path, const eval::CoocMatrix& matrix) {
    std::ofstream out = open_artifact(path);
    out << "sdg";
    for (int j = 1; j <= kNumSdgs; ++j) out << ",sdg_" << j;
    out << '\n';
    for (int i = 0; i < kNumSdgs; ++i) {
        out << (i + 1);
        for (int j = 0; j < kNumSdgs; ++j) {
            out << ',' << format_double(matrix.at(static_cast<std::size_t>(i),
                                                  static_cast<std::size_t>(j)));
        }
        out << '\n';
    }
}

/// Off-diagonal cells in row-major order, the vectors the matrix
/// correlations run over.
std::vector<double> off_diagonal(const eval::CoocMatrix& matrix) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(kNumSdgs) * (kNumSdgs - 1));
    for (std::size_t i = 0; i < static_cast<std::size_t>(kNumSdgs); ++i) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            if (i != j) out.push_back(matrix.at(i, j));
        }
    }
    return out;
}

}  // namespace

std::vector<fs::path> run_cooccur(const PipelineConfig& config) {
    config.validate();
    return with_manifest("cooccur", config, 0, [&](RunManifest& manifest) {
        Corpora corpora = load_corpora(config);
        std::vector<corpus::SilverLabel> silver = load_silver_or_fail(config);

        std::vector<eval::LabelSet> npl_labels;
        for (const PatentRecord& record : corpora.patents.records) {
            if (record.anchor_sdgs.empty()) continue;
            eval::LabelSet set;
            for (SdgId id : record.anchor_sdgs) set.insert(id);
            npl_labels.push_back(set);
        }
        std::vector<eval::LabelSet> silver_labels;
        silver_labels.reserve(silver.size());
        for (const corpus::SilverLabel& label : silver) {
            silver_labels.push_back(eval::binarize(label.vector));
        }

        eval::CoocMatrix npl_raw = eval::cooccurrence(npl_labels);
        eval::CoocMatrix silver_raw = eval::cooccurrence(silver_labels);
        eval::CoocMatrix npl_norm = eval::row_normalize(npl_raw);
        eval::CoocMatrix silver_norm = eval::row_normalize(silver_raw);

        std::vector<fs::path> artifacts;
        auto emit = [&](const char* name, const eval::CoocMatrix& matrix) {
            fs::path path = config.paths.output_dir / name;
            write_cooc_csv(path, matrix);
            manifest.record(path);
            artifacts.push_back(path);
        };
        emit("cooc_npl_raw.csv", npl_raw);
        emit("cooc_npl_norm.csv", npl_norm);
        emit("cooc_silver_raw.csv", silver_raw);
        emit("cooc_silver_norm.csv", silver_norm);

        // Frequency vectors (label counts per SDG) and matrix-profile
        // correlations between the two signals.
        std::vector<double> npl_freq(kNumSdgs, 0.0);
        std::vector<double> silver_freq(kNumSdgs, 0.0);
        for (const eval::LabelSet& set : npl_labels) {
            for (SdgId id : set.to_vector()) npl_freq[id.index()] += 1.0;
        }
        for (const eval::LabelSet& set : silver_labels) {
            for (SdgId id : set.to_vector()) silver_freq[id.index()] += 1.0;
        }

        fs::path corr_path = config.paths.output_dir / "correlations.csv";
        {
            std::ofstream out = open_artifact(corr_path);
            out << "name,value\n";
            out << "frequency_pearson," << format_double(eval::pearson(npl_freq, silver_freq))
                << '\n';
            out << "frequency_spearman," << format_double(eval::spearman(npl_freq, silver_freq))
                << '\n';
            std::vector<double> npl_cells = off_diagonal(npl_norm);
            std::vector<double> silver_cells = off_diagonal(silver_norm);
            out << "cooccurrence_pearson,"
                << format_double(eval::pearson(npl_cells, silver_cells)) << '\n';
            out << "cooccurrence_spearman,"
                << format_double(eval::spearman(npl_cells, silver_cells)) << '\n';
        }
        manifest.record(corr_path);
        artifacts.push_back(corr_path);

        return artifacts;
    });
}

// ---------------------------------------------------------------------------
// modularity
// ---------------------------------------------------------------------------

std::vector<fs::path> run_modularity(const PipelineConfig& config) {
    config.validate();
    return with_manifest("modularity", config, 0, [&](RunManifest& manifest) {
        Corpora corpora = load_corpora(config);

        std::unordered_map<std::string, SdgVector> vectors;
        if (config.modularity.source == "silver") {
            for (const corpus::SilverLabel& label : load_silver_or_fail(config)) {
                vectors.emplace(label.patent_id, label.vector);
            }
        } else if (config.modularity.source == "npl") {
            for (const PatentRecord& record : corpora.patents.records) {
                if (record.anchor_sdgs.empty()) continue;
                vectors.emplace(record.patent_id,
                                calib::anchor_distribution(record).distribution);
            }
        } else {  // predictions
            ensure_exists(config.paths.predictions, "predictions");
            for (const auto& [id, set] : eval::load_label_sets(config.paths.predictions)) {
                SdgVector vector;
                for (SdgId sdg : set.to_vector()) vector.set(sdg, 1.0);
                vectors.emplace(id, vector);
            }
        }

        std::vector<std::pair<std::string, std::string>> citation_edges;
        bool needs_citations =
            std::find(config.modularity.kinds.begin(), config.modularity.kinds.end(),
                      graph::GraphKind::kCitation) != config.modularity.kinds.end();
        if (needs_citations) {
            ensure_exists(config.paths.citations, "citations");
            citation_edges = graph::load_citation_edges(config.paths.citations);
        }

        fs::path out_path = config.paths.output_dir / "modularity.csv";
        std::ofstream out = open_artifact(out_path);
        out << "kind,method,p,Q\n";
        for (graph::GraphKind kind : config.modularity.kinds) {
            graph::Graph g = graph::build_graph(corpora.patents.records, kind, citation_edges);
            graph::MembershipMatrix w =
                graph::memberships(g, vectors, config.modularity.membership_mode);
            auto sweep =
                graph::modularity_sweep(g, w, config.modularity.ps, config.modularity.null_model);
            for (const auto& [p, q] : sweep) {
                out << graph::to_string(kind) << ',' << csv_escape(config.modularity.method)
                    << ',' << format_double(p) << ',' << format_double(q) << '\n';
            }
        }
        out.close();
        manifest.record(out_path);
        return std::vector<fs::path>{out_path};
    });
}

// ---------------------------------------------------------------------------
// regress
// ---------------------------------------------------------------------------

std::vector<fs::path> run_regress(const PipelineConfig& config) {
    config.validate();
    return with_manifest("regress", config, config.regress.seed, [&](RunManifest& manifest) {
        ensure_exists(config.paths.features, "features");
        corpus::FeatureTable features = corpus::load_features(config.paths.features);
        std::vector<corpus::SilverLabel> silver = load_silver_or_fail(config);

        std::unordered_map<std::string, const SdgVector*> targets;
        for (const corpus::SilverLabel& label : silver) {
            targets.emplace(label.patent_id, &label.vector);
        }

        regress::RegressionBatch batch;
        batch.dim = features.dim;
        std::vector<SdgVector> matched_targets;
        for (const auto& [id, row] : features.rows) {
            auto it = targets.find(id);
            if (it == targets.end()) continue;  // feature rows without silver labels
            batch.features.insert(batch.features.end(), row.begin(), row.end());
            matched_targets.push_back(*it->second);
        }
        batch.n = matched_targets.size();
        if (batch.n == 0) {
            throw SchemaError("no feature rows matched silver patent ids");
        }
        batch.targets.reserve(batch.n * kNumSdgs);
        for (const SdgVector& target : matched_targets) {
            for (double v : target.components()) batch.targets.push_back(v);
        }

        regress::TrainConfig train_config;
        train_config.learning_rate = config.regress.learning_rate;
        train_config.epochs = config.regress.epochs;
        train_config.seed = config.regress.seed;
        if (config.regress.weighted) {
            train_config.weights = regress::ClassWeights::inverse_frequency(matched_targets);
        }

        regress::TrainResult result = regress::train(batch, train_config);
        regress::ErrorReport report = regress::error_report(result.model, batch);

        std::vector<fs::path> artifacts;

        fs::path report_path = config.paths.output_dir / "regression_report.csv";
        {
            std::ofstream out = open_artifact(report_path);
            out << "sdg,mse,mae\n";
            for (int j = 0; j < kNumSdgs; ++j) {
                out << (j + 1) << ',' << format_double(report.mse[static_cast<std::size_t>(j)])
                    << ',' << format_double(report.mae[static_cast<std::size_t>(j)]) << '\n';
            }
            out << "overall," << format_double(report.overall_mse) << ','
                << format_double(report.overall_mae) << '\n';
        }
        manifest.record(report_path);
        artifacts.push_back(report_path);

        fs::path history_path = config.paths.output_dir / "training_history.csv";
        {
            std::ofstream out = open_artifact(history_path);
            out << "epoch,loss\n";
            for (std::size_t epoch = 0; epoch < result.history.size(); ++epoch) {
                out << (epoch + 1) << ',' << format_double(result.history[epoch]) << '\n';
            }
        }
        manifest.record(history_path);
        artifacts.push_back(history_path);

        fs::path model_path = config.paths.output_dir / "model.json";
        {
            json model = {{"dim", result.model.dim},
                          {"weights", result.model.weights},
                          {"bias", result.model.bias}};
            std::ofstream out = open_artifact(model_path);
            out << model.dump() << '\n';
        }
        manifest.record(model_path);
        artifacts.push_back(model_path);

        return artifacts;
    });
}

// ---------------------------------------------------------------------------
// split-query
// ---------------------------------------------------------------------------

std::vector<fs::path> run_split_query(const PipelineConfig& config, const fs::path& query_file,
                                      const fs::path& out_dir) {
    config.validate();
    return with_manifest("split_query", config, 0, [&](RunManifest& manifest) {
        if (!fs::exists(query_file)) {
            throw ConfigError("query file does not exist: " + query_file.string());
        }
        std::ifstream in(query_file);
        std::ostringstream buffer;
        buffer << in.rdbuf();

        std::string sanitized = query::sanitize(buffer.str());
        query::QueryNode root = query::parse(sanitized);
        query::SplitConfig split_config{config.split_query.max_chars,
                                        config.split_query.max_and_chain};
        std::vector<std::string> parts = query::split(root, split_config);

        fs::create_directories(out_dir);
        std::vector<fs::path> artifacts;
        json part_files = json::array();
        for (std::size_t i = 0; i < parts.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "part_%03zu.txt", i);
            fs::path part_path = out_dir / name;
            std::ofstream out = open_artifact(part_path);
            out << parts[i] << '\n';
            out.close();
            manifest.record(part_path);
            artifacts.push_back(part_path);
            part_files.push_back(std::string(name));
        }

        json summary = {{"source", query_file.string()},
                        {"max_chars", config.split_query.max_chars},
                        {"parts", part_files},
                        {"original_chars", sanitized.size()}};
        if (config.split_query.check_equivalence) {
            std::vector<query::QueryNode> parsed;
            parsed.reserve(parts.size());
            for (const std::string& part : parts) parsed.push_back(query::parse(part));
            summary["equivalent"] = query::equivalent(parsed, root);
        }

        fs::path summary_path = out_dir / "manifest.json";
        std::ofstream summary_out = open_artifact(summary_path);
        summary_out << summary.dump(2) << '\n';
        summary_out.close();
        manifest.record(summary_path);
        artifacts.push_back(summary_path);

        return artifacts;
    });
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

std::vector<fs::path> run_extract(const PipelineConfig& config) {
    config.validate();
    return with_manifest("extract", config, 0, [&](RunManifest& manifest) {
        if (config.extraction.endpoint.empty()) {
            throw ConfigError(
                "extract.endpoint is not configured; offline corpora already carry concepts");
        }
        ensure_exists(config.paths.raw_texts, "raw_texts");
        std::vector<corpus::RawText> rows = corpus::load_raw_texts(config.paths.raw_texts);

        extract::ConceptExtractor extractor(config.extraction);
        fs::path out_path = config.paths.output_dir / "concepts.jsonl";
        std::ofstream out = open_artifact(out_path);
        for (const corpus::RawText& row : rows) {
            // Titles and abstracts are concatenated into one extraction
            // input.
            extract::ConceptTexts texts = extractor.extract(row.title + " " + row.abstract);
            json record = {{"patent_id", row.id},
                           {"functions", texts.functions},
                           {"solutions", texts.solutions},
                           {"applications", texts.applications}};
            out << record.dump() << '\n';
        }
        out.close();
        manifest.record(out_path);
        return std::vector<fs::path>{out_path};
    });
}

}  // namespace sdgmap::pipeline
