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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdgmap/types.hpp"

namespace sdgmap::query {

/// Parse/sanitize failure with the 0-based character offset of the
/// offending input position.
struct ParseError : Error {
    ParseError(const std::string& message, std::size_t at)
        : Error(message + " (offset " + std::to_string(at) + ")"), offset(at) {}
    std::size_t offset;
};

/// Boolean query syntax tree. And/Or nodes are flattened (no And directly
/// under And, no Or under Or) and carry at least two children; Not never
/// wraps Not; atom phrases are non-empty. Use the factory functions below
/// to keep the invariants.
struct QueryNode {
    enum class Kind { kAtom, kAnd, kOr, kNot };

    Kind kind = Kind::kAtom;
    std::string field;   // atoms only
    std::string phrase;  // atoms only
    std::vector<QueryNode> children;

    bool operator==(const QueryNode&) const = default;
};

QueryNode atom(std::string field, std::string phrase);
QueryNode and_node(std::vector<QueryNode> children);
QueryNode or_node(std::vector<QueryNode> children);
QueryNode not_node(QueryNode child);

struct SplitConfig {
    std::size_t max_chars = 2000;
    /// Upper bound on conjuncts per emitted subquery; distribution that
    /// would exceed it is reported instead of silently exploding.
    std::size_t max_and_chain = 64;
};

/// Normalizes a raw query string: whitespace outside quotes is collapsed
/// to single spaces, and bare field terms are quoted, e.g.
/// AUTHKEY(rural) -> AUTHKEY("rural"). Already-quoted terms are left
/// untouched, so sanitize is idempotent. Unbalanced quotes or parentheses
/// raise ParseError with the character offset.
std::string sanitize(std::string_view raw);

/// Recursive-descent parser over sanitized input. Precedence NOT > AND >
/// OR; `AND NOT x` parses as a conjunction with a negated operand;
/// operators are case-insensitive; anything inside a quoted phrase is
/// literal.
QueryNode parse(std::string_view sanitized);

/// Canonical rendering: ` OR ` / ` AND ` separators, parentheses exactly
/// where precedence demands them, `AND NOT x` for negated conjuncts.
/// parse(render(n)) reproduces n.
std::string render(const QueryNode& node);

enum class ExpansionMode {
    /// De Morgan-correct: (A v B) ^ ~(C v D) -> {A^~C^~D, B^~C^~D}. The
    /// union of the parts is equivalent to the input.
    kConjunctive,
    /// Pairwise form {A^~C, A^~D, B^~C, B^~D}. Kept for compatibility with
    /// the pairwise expansion convention; NOT union-equivalent to the
    /// input, so it is excluded from budget splitting.
    kPermutation,
};

/// Expands an exclusion query of shape And(positives..., Not(block)...)
/// into a list of conjunctions. Queries without negated blocks are
/// returned unchanged; shapes that cannot be expanded (e.g. a bare
/// negation) raise ConfigError and should go through split() instead.
std::vector<QueryNode> expand_exclusions(const QueryNode& node,
                                         ExpansionMode mode = ExpansionMode::kConjunctive);

/// Splits a query into subquery strings, each within cfg.max_chars, whose
/// disjunction is logically equivalent to the input (union semantics).
/// Disjunctions are greedily packed first-fit; conjunctions are reduced by
/// distributing their disjunctive children; negated blocks are rewritten
/// by De Morgan when that unlocks a split. An indivisible conjunction that
/// cannot fit raises Error naming the conjunct.
std::vector<std::string> split(const QueryNode& node, const SplitConfig& cfg);

/// Truth-table oracle: true iff Or(parts) <=> original over all
/// assignments to the distinct atoms (identified by exact (field, phrase)
/// equality). Throws ConfigError beyond 20 distinct atoms.
bool equivalent(std::span<const QueryNode> parts, const QueryNode& original);

}  // namespace sdgmap::query
