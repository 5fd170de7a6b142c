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

#include <array>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdgmap {

/// Number of UN Sustainable Development Goals; the label space is fixed.
inline constexpr int kNumSdgs = 17;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for all sdgmap errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data (corpus files, edge lists, wire payloads).
/// `line` is 1-based when the source is a line-oriented file, 0 otherwise.
struct SchemaError : Error {
    explicit SchemaError(const std::string& message, std::size_t line_no = 0)
        : Error(message), line(line_no) {}
    std::size_t line = 0;
};

/// Invalid configuration or parameters supplied by the caller.
struct ConfigError : Error {
    using Error::Error;
};

/// Transport or protocol failure while talking to an external service.
struct TransportError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// SdgId
// ---------------------------------------------------------------------------

/// One of the 17 SDGs, validated to lie in [1, 17].
class SdgId {
  public:
    explicit SdgId(int value) : value_(value) {
        if (!valid(value)) {
            throw ConfigError("SDG id out of range [1, 17]: " + std::to_string(value));
        }
    }

    static bool valid(int value) { return value >= 1 && value <= kNumSdgs; }

    int value() const { return value_; }
    /// 0-based index for array storage.
    std::size_t index() const { return static_cast<std::size_t>(value_ - 1); }

    auto operator<=>(const SdgId&) const = default;

  private:
    int value_;
};

// ---------------------------------------------------------------------------
// Embeddings and concepts
// ---------------------------------------------------------------------------

/// Dense embedding vector. Corpus loaders guarantee uniform dimension,
/// finite entries and a strictly positive Euclidean norm.
using Embedding = std::vector<double>;

/// A single extracted concept with its embedding.
struct Concept {
    std::string text;
    Embedding embedding;

    bool operator==(const Concept&) const = default;
};

/// The three concept categories shared by patents and SDG publications.
enum class Category { kFunction, kSolution, kApplication };

inline constexpr std::array<Category, 3> kAllCategories = {
    Category::kFunction, Category::kSolution, Category::kApplication};

inline std::string_view to_string(Category category) {
    switch (category) {
        case Category::kFunction: return "function";
        case Category::kSolution: return "solution";
        case Category::kApplication: return "application";
    }
    throw ConfigError("invalid concept category");
}

inline Category parse_category(std::string_view name) {
    if (name == "function" || name == "functions") return Category::kFunction;
    if (name == "solution" || name == "solutions") return Category::kSolution;
    if (name == "application" || name == "applications") return Category::kApplication;
    throw ConfigError("unknown concept category: " + std::string(name));
}

/// Per-document concept lists, one per category. Any list may be empty.
struct ConceptSet {
    std::vector<Concept> functions;
    std::vector<Concept> solutions;
    std::vector<Concept> applications;

    const std::vector<Concept>& by_category(Category category) const {
        switch (category) {
            case Category::kFunction: return functions;
            case Category::kSolution: return solutions;
            case Category::kApplication: return applications;
        }
        throw ConfigError("invalid concept category");
    }

    std::vector<Concept>& by_category(Category category) {
        return const_cast<std::vector<Concept>&>(
            static_cast<const ConceptSet&>(*this).by_category(category));
    }

    bool operator==(const ConceptSet&) const = default;
};

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One patent: text, extracted concepts, the (possibly empty) multiset of
/// SDG tags carried by its cited scientific papers, and the metadata used
/// to build inventor/applicant graphs.
struct PatentRecord {
    std::string patent_id;
    std::string title;
    std::string abstract;
    ConceptSet concepts;
    /// SDG tags of cited papers; multiplicities matter, order preserved.
    std::vector<SdgId> anchor_sdgs;
    std::vector<std::string> cpc3;
    std::vector<std::string> inventor_ids;
    std::vector<std::string> applicant_ids;

    bool operator==(const PatentRecord&) const = default;
};

/// One SDG-tagged scientific document. `sdg_tags` is non-empty, sorted and
/// deduplicated by the loaders.
struct SdgDocument {
    std::string doc_id;
    ConceptSet concepts;
    std::vector<SdgId> sdg_tags;

    bool operator==(const SdgDocument&) const = default;
};

// ---------------------------------------------------------------------------
// SdgVector
// ---------------------------------------------------------------------------

/// 17 non-negative reals indexed by SdgId: the soft relevance profile of
/// one patent. The all-zero vector is representable; consumers that need
/// to distinguish it carry a separate no-match flag.
class SdgVector {
  public:
    SdgVector() = default;
    explicit SdgVector(const std::array<double, kNumSdgs>& components)
        : components_(components) {}

    double get(SdgId id) const { return components_[id.index()]; }
    void set(SdgId id, double value) { components_[id.index()] = value; }

    /// 0-based component access.
    double operator[](std::size_t index) const { return components_.at(index); }
    double& operator[](std::size_t index) { return components_.at(index); }

    const std::array<double, kNumSdgs>& components() const { return components_; }

    double sum() const {
        double total = 0.0;
        for (double c : components_) total += c;
        return total;
    }

    bool all_zero() const {
        for (double c : components_) {
            if (c != 0.0) return false;
        }
        return true;
    }

    bool operator==(const SdgVector&) const = default;

  private:
    std::array<double, kNumSdgs> components_{};
};

}  // namespace sdgmap
