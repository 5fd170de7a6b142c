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

#include "sdgmap/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

namespace sdgmap::eval {

LabelSet binarize(const SdgVector& vector) {
    LabelSet set;
    for (int j = 1; j <= kNumSdgs; ++j) {
        SdgId id(j);
        if (vector.get(id) > 0.0) set.insert(id);
    }
    return set;
}

RecallScores recall_scores(const std::map<std::string, LabelSet>& preds,
                           const std::map<std::string, LabelSet>& refs) {
    if (refs.empty()) {
        throw ConfigError("recall_scores requires non-empty references");
    }

    std::array<long, kNumSdgs> tp{};
    std::array<long, kNumSdgs> fn{};
    for (const auto& [id, ref] : refs) {
        auto pred_it = preds.find(id);
        if (pred_it == preds.end()) {
            throw ConfigError("reference patent \"" + id + "\" missing from predictions");
        }
        for (int j = 1; j <= kNumSdgs; ++j) {
            SdgId sdg(j);
            if (!ref.contains(sdg)) continue;
            if (pred_it->second.contains(sdg)) {
                tp[sdg.index()] += 1;
            } else {
                fn[sdg.index()] += 1;
            }
        }
    }

    RecallScores scores;
    double macro_sum = 0.0;
    int macro_count = 0;
    long total_tp = 0;
    long total = 0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
        long denom = tp[j] + fn[j];
        if (denom == 0) continue;
        double r = static_cast<double>(tp[j]) / static_cast<double>(denom);
        scores.per_sdg[j] = r;
        macro_sum += r;
        macro_count += 1;
        total_tp += tp[j];
        total += denom;
    }
    if (macro_count == 0) {
        throw ConfigError("recall_scores: references carry no SDG labels");
    }
    scores.macro = macro_sum / static_cast<double>(macro_count);
    scores.micro = static_cast<double>(total_tp) / static_cast<double>(total);
    return scores;
}

std::vector<std::vector<Category>> ablation_subsets() {
    using enum Category;
    return {
        {kFunction, kSolution, kApplication},  // full
        {kSolution, kApplication},
        {kFunction, kApplication},
        {kSolution, kFunction},
        {kFunction},
        {kSolution},
        {kApplication},
    };
}

std::vector<AblationRow> ablation_suite(std::span<const SdgDocument> docs,
                                        std::span<const PatentRecord> patents,
                                        const align::HyperParams& params,
                                        std::span<const std::vector<Category>> subsets) {
    align::TagMap tags = align::make_tag_map(docs);

    std::map<std::string, LabelSet> refs;
    for (const PatentRecord& patent : patents) {
        if (patent.anchor_sdgs.empty()) continue;
        LabelSet set;
        for (SdgId id : patent.anchor_sdgs) set.insert(id);
        refs.emplace(patent.patent_id, set);
    }
    if (refs.empty()) {
        throw ConfigError("ablation_suite: no patents with anchor SDGs");
    }

    std::vector<AblationRow> rows;
    rows.reserve(subsets.size());
    for (const std::vector<Category>& subset : subsets) {
        if (subset.empty()) {
            throw ConfigError("ablation_suite: category subset must be non-empty");
        }
        std::map<std::string, LabelSet> preds;
        for (const PatentRecord& patent : patents) {
            if (!refs.contains(patent.patent_id)) continue;
            align::LabelResult result = align::label_patent(patent, docs, tags, params, subset);
            preds.emplace(patent.patent_id, binarize(result.vector));
        }
        RecallScores scores = recall_scores(preds, refs);
        rows.push_back({subset, scores.macro, scores.micro});
    }
    return rows;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::pair<std::size_t, double>> bm25_scores(std::string_view query,
                                                        std::span<const std::string> docs,
                                                        double k1, double b) {
    if (docs.empty()) {
        throw ConfigError("bm25_scores requires a non-empty document list");
    }

    std::vector<std::vector<std::string>> doc_tokens;
    doc_tokens.reserve(docs.size());
    double total_len = 0.0;
    for (const std::string& doc : docs) {
        doc_tokens.push_back(tokenize(doc));
        total_len += static_cast<double>(doc_tokens.back().size());
    }
    const double avg_len = total_len / static_cast<double>(docs.size());
    const double n_docs = static_cast<double>(docs.size());

    // Unique query terms; repeated terms are scored once.
    std::vector<std::string> terms = tokenize(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    std::vector<std::pair<std::size_t, double>> scores;
    scores.reserve(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) scores.emplace_back(d, 0.0);

    for (const std::string& term : terms) {
        // Document frequency and per-document term frequency.
        std::vector<std::pair<std::size_t, double>> tfs;
        for (std::size_t d = 0; d < doc_tokens.size(); ++d) {
            double tf = static_cast<double>(
                std::count(doc_tokens[d].begin(), doc_tokens[d].end(), term));
            if (tf > 0.0) tfs.emplace_back(d, tf);
        }
        if (tfs.empty()) continue;
        double df = static_cast<double>(tfs.size());
        double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& [d, tf] : tfs) {
            double doc_len = static_cast<double>(doc_tokens[d].size());
            double denom = tf + k1 * (1.0 - b + b * doc_len / (avg_len > 0.0 ? avg_len : 1.0));
            scores[d].second += idf * tf * (k1 + 1.0) / denom;
        }
    }

    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return scores;
}

CoocMatrix cooccurrence(std::span<const LabelSet> labels) {
    CoocMatrix matrix;
    for (const LabelSet& set : labels) {
        std::vector<SdgId> ids = set.to_vector();
        for (std::size_t a = 0; a < ids.size(); ++a) {
            for (std::size_t c = a + 1; c < ids.size(); ++c) {
                matrix.at(ids[a].index(), ids[c].index()) += 1.0;
                matrix.at(ids[c].index(), ids[a].index()) += 1.0;
            }
        }
    }
    return matrix;
}

CoocMatrix row_normalize(const CoocMatrix& matrix) {
    CoocMatrix out = matrix;
    for (std::size_t i = 0; i < static_cast<std::size_t>(kNumSdgs); ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            row_sum += matrix.at(i, j);
        }
        if (row_sum > 0.0) {
            for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
                out.at(i, j) = matrix.at(i, j) / row_sum;
            }
        }
    }
    out.set_normalized(true);
    return out;
}

namespace {

void check_correlation_input(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ConfigError("correlation inputs must have equal length");
    }
    if (x.size() < 3) {
        throw ConfigError("correlation requires at least 3 points");
    }
}

/// Average ranks, ties get the mean of their positions (1-based).
std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    check_correlation_input(x, y);
    const double n = static_cast<double>(x.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;

    double cov = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mean_x;
        double dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) {
        throw ConfigError("correlation undefined for zero-variance input");
    }
    return cov / std::sqrt(var_x * var_y);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    check_correlation_input(x, y);
    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    return pearson(rx, ry);
}

std::map<std::string, LabelSet> load_label_sets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path.string());

    std::map<std::string, LabelSet> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        nlohmann::json row = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
        if (row.is_discarded() || !row.is_object()) {
            throw SchemaError(path.string() + ":" + std::to_string(line) +
                                  ": malformed JSON object",
                              line);
        }
        auto id_it = row.find("patent_id");
        auto sdgs_it = row.find("sdgs");
        if (id_it == row.end() || !id_it->is_string() || sdgs_it == row.end() ||
            !sdgs_it->is_array()) {
            throw SchemaError(path.string() + ":" + std::to_string(line) +
                                  ": expected {\"patent_id\": str, \"sdgs\": [int]}",
                              line);
        }
        LabelSet set;
        for (const nlohmann::json& v : *sdgs_it) {
            if (!v.is_number_integer() || !SdgId::valid(v.get<int>())) {
                throw SchemaError(path.string() + ":" + std::to_string(line) +
                                      ": SDG ids must be integers in [1, 17]",
                                  line);
            }
            set.insert(SdgId(v.get<int>()));
        }
        auto [it, inserted] = out.emplace(id_it->get<std::string>(), set);
        if (!inserted) {
            throw SchemaError(path.string() + ":" + std::to_string(line) +
                                  ": duplicate patent_id \"" + it->first + "\"",
                              line);
        }
    }
    return out;
}

}  // namespace sdgmap::eval
