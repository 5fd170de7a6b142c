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

#include "sdgmap/query_splitter.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>

namespace sdgmap::query {

// ---------------------------------------------------------------------------
// Node factories
// ---------------------------------------------------------------------------

QueryNode atom(std::string field, std::string phrase) {
    if (field.empty()) throw ConfigError("atom field must be non-empty");
    if (phrase.empty()) throw ConfigError("atom phrase must be non-empty");
    QueryNode node;
    node.kind = QueryNode::Kind::kAtom;
    node.field = std::move(field);
    node.phrase = std::move(phrase);
    return node;
}

namespace {

QueryNode nary(QueryNode::Kind kind, std::vector<QueryNode> children) {
    std::vector<QueryNode> flat;
    flat.reserve(children.size());
    for (QueryNode& child : children) {
        if (child.kind == kind) {
            for (QueryNode& grandchild : child.children) {
                flat.push_back(std::move(grandchild));
            }
        } else {
            flat.push_back(std::move(child));
        }
    }
    if (flat.empty()) throw ConfigError("And/Or requires at least one child");
    if (flat.size() == 1) return std::move(flat.front());
    QueryNode node;
    node.kind = kind;
    node.children = std::move(flat);
    return node;
}

}  // namespace

QueryNode and_node(std::vector<QueryNode> children) {
    return nary(QueryNode::Kind::kAnd, std::move(children));
}

QueryNode or_node(std::vector<QueryNode> children) {
    return nary(QueryNode::Kind::kOr, std::move(children));
}

QueryNode not_node(QueryNode child) {
    if (child.kind == QueryNode::Kind::kNot) {
        return std::move(child.children.front());  // double negation
    }
    QueryNode node;
    node.kind = QueryNode::Kind::kNot;
    node.children.push_back(std::move(child));
    return node;
}

// ---------------------------------------------------------------------------
// sanitize
// ---------------------------------------------------------------------------

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

bool is_operator_word(std::string_view word) {
    auto equals_ci = [&](std::string_view upper) {
        if (word.size() != upper.size()) return false;
        for (std::size_t i = 0; i < word.size(); ++i) {
            if (std::toupper(static_cast<unsigned char>(word[i])) != upper[i]) return false;
        }
        return true;
    };
    return equals_ci("AND") || equals_ci("OR") || equals_ci("NOT");
}

void check_balance(std::string_view raw) {
    std::optional<std::size_t> quote_open;
    std::vector<std::size_t> paren_stack;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '"') {
            if (quote_open) {
                quote_open.reset();
            } else {
                quote_open = i;
            }
            continue;
        }
        if (quote_open) continue;
        if (c == '(') paren_stack.push_back(i);
        if (c == ')') {
            if (paren_stack.empty()) throw ParseError("unmatched ')'", i);
            paren_stack.pop_back();
        }
    }
    if (quote_open) throw ParseError("unbalanced quote", *quote_open);
    if (!paren_stack.empty()) throw ParseError("unmatched '('", paren_stack.back());
}

std::string collapse_spaces(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool in_quote = false;
    for (char c : raw) {
        if (c == '"') in_quote = !in_quote;
        if (!in_quote && std::isspace(static_cast<unsigned char>(c)) != 0) {
            if (!out.empty() && out.back() != ' ') out += ' ';
        } else {
            out += c;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    std::size_t start = out.find_first_not_of(' ');
    return start == std::string::npos ? std::string() : out.substr(start);
}

}  // namespace

std::string sanitize(std::string_view raw) {
    check_balance(raw);
    std::string text = collapse_spaces(raw);

    std::string out;
    out.reserve(text.size() + 8);
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '"') {
            // Copy quoted phrases verbatim.
            std::size_t close = text.find('"', i + 1);
            out.append(text, i, close - i + 1);
            i = close + 1;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t end = i;
            while (end < text.size() && is_ident_char(text[end])) ++end;
            std::string_view word(text.data() + i, end - i);
            // A field name directly followed by '(' marks an atom; quote
            // its argument if the query author left it bare.
            if (!is_operator_word(word) && end < text.size() && text[end] == '(') {
                std::size_t depth = 0;
                std::size_t close = end;
                bool in_quote = false;
                for (; close < text.size(); ++close) {
                    char t = text[close];
                    if (t == '"') in_quote = !in_quote;
                    if (in_quote) continue;
                    if (t == '(') ++depth;
                    if (t == ')' && --depth == 0) break;
                }
                std::string_view inner(text.data() + end + 1, close - end - 1);
                bool bare = !inner.empty() &&
                            inner.find_first_of("()\"") == std::string_view::npos;
                out.append(word);
                out += '(';
                if (bare) {
                    // Trim the bare term and quote it whole; field
                    // arguments are phrases, so any operator words inside
                    // become literals.
                    std::size_t b = inner.find_first_not_of(' ');
                    std::size_t e = inner.find_last_not_of(' ');
                    out += '"';
                    out.append(inner.substr(b, e - b + 1));
                    out += '"';
                } else {
                    out.append(inner);
                }
                out += ')';
                i = close + 1;
                continue;
            }
            out.append(word);
            i = end;
            continue;
        }
        out += c;
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum class Kind { kAnd, kOr, kNot, kLParen, kRParen, kAtom, kEnd };
    Kind kind = Kind::kEnd;
    std::string field;
    std::string phrase;
    std::size_t offset = 0;
};

class Lexer {
  public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        std::size_t i = 0;
        while (i < text_.size()) {
            char c = text_[i];
            if (c == ' ') {
                ++i;
                continue;
            }
            if (c == '(') {
                tokens.push_back({Token::Kind::kLParen, "", "", i});
                ++i;
                continue;
            }
            if (c == ')') {
                tokens.push_back({Token::Kind::kRParen, "", "", i});
                ++i;
                continue;
            }
            if (is_ident_start(c)) {
                std::size_t end = i;
                while (end < text_.size() && is_ident_char(text_[end])) ++end;
                std::string word(text_.substr(i, end - i));
                std::string upper = word;
                for (char& u : upper) u = static_cast<char>(std::toupper(static_cast<unsigned char>(u)));
                if (upper == "AND") {
                    tokens.push_back({Token::Kind::kAnd, "", "", i});
                    i = end;
                    continue;
                }
                if (upper == "OR") {
                    tokens.push_back({Token::Kind::kOr, "", "", i});
                    i = end;
                    continue;
                }
                if (upper == "NOT") {
                    tokens.push_back({Token::Kind::kNot, "", "", i});
                    i = end;
                    continue;
                }
                tokens.push_back(lex_atom(word, i, end));
                i = pos_;
                continue;
            }
            throw ParseError("unexpected character '" + std::string(1, c) + "'", i);
        }
        tokens.push_back({Token::Kind::kEnd, "", "", text_.size()});
        return tokens;
    }

  private:
    Token lex_atom(std::string field, std::size_t start, std::size_t after_ident) {
        std::size_t i = after_ident;
        if (i >= text_.size() || text_[i] != '(') {
            throw ParseError("expected '(' after field \"" + field + "\"", i);
        }
        ++i;
        if (i >= text_.size() || text_[i] != '"') {
            throw ParseError("field term must be quoted", i);
        }
        std::size_t close = text_.find('"', i + 1);
        if (close == std::string_view::npos) {
            throw ParseError("unbalanced quote", i);
        }
        std::string phrase(text_.substr(i + 1, close - i - 1));
        if (phrase.empty()) {
            throw ParseError("empty field term", i);
        }
        i = close + 1;
        if (i >= text_.size() || text_[i] != ')') {
            throw ParseError("expected ')' after field term", i);
        }
        pos_ = i + 1;
        return {Token::Kind::kAtom, std::move(field), std::move(phrase), start};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    QueryNode run() {
        QueryNode node = parse_or();
        if (peek().kind != Token::Kind::kEnd) {
            throw ParseError("unexpected trailing input", peek().offset);
        }
        return node;
    }

  private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_++]; }
    bool accept(Token::Kind kind) {
        if (peek().kind == kind) {
            ++pos_;
            return true;
        }
        return false;
    }

    QueryNode parse_or() {
        std::vector<QueryNode> children;
        children.push_back(parse_and());
        while (accept(Token::Kind::kOr)) {
            children.push_back(parse_and());
        }
        return or_node(std::move(children));
    }

    QueryNode parse_and() {
        std::vector<QueryNode> children;
        children.push_back(parse_unary());
        while (accept(Token::Kind::kAnd)) {
            if (accept(Token::Kind::kNot)) {
                children.push_back(not_node(parse_unary()));
            } else {
                children.push_back(parse_unary());
            }
        }
        return and_node(std::move(children));
    }

    QueryNode parse_unary() {
        const Token& token = peek();
        switch (token.kind) {
            case Token::Kind::kNot:
                advance();
                return not_node(parse_unary());
            case Token::Kind::kLParen: {
                advance();
                if (peek().kind == Token::Kind::kRParen) {
                    throw ParseError("empty parentheses", peek().offset);
                }
                QueryNode inner = parse_or();
                if (!accept(Token::Kind::kRParen)) {
                    throw ParseError("expected ')'", peek().offset);
                }
                return inner;
            }
            case Token::Kind::kAtom: {
                const Token& t = advance();
                return atom(t.field, t.phrase);
            }
            default:
                throw ParseError("expected expression", token.offset);
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace

QueryNode parse(std::string_view sanitized) {
    Lexer lexer(sanitized);
    Parser parser(lexer.run());
    return parser.run();
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

namespace {

void render_into(const QueryNode& node, std::string& out);

/// Atoms render bare; compound operands get parentheses.
void render_operand(const QueryNode& node, std::string& out) {
    if (node.kind == QueryNode::Kind::kAtom || node.kind == QueryNode::Kind::kNot) {
        render_into(node, out);
        return;
    }
    out += '(';
    render_into(node, out);
    out += ')';
}

void render_into(const QueryNode& node, std::string& out) {
    switch (node.kind) {
        case QueryNode::Kind::kAtom:
            out += node.field;
            out += "(\"";
            out += node.phrase;
            out += "\")";
            return;
        case QueryNode::Kind::kNot:
            out += "NOT ";
            render_operand(node.children.front(), out);
            return;
        case QueryNode::Kind::kAnd: {
            // Negated children come out as "... AND NOT x" because the Not
            // node renders itself with the NOT prefix.
            bool first = true;
            for (const QueryNode& child : node.children) {
                if (!first) out += " AND ";
                if (child.kind == QueryNode::Kind::kOr) {
                    out += '(';
                    render_into(child, out);
                    out += ')';
                } else {
                    render_into(child, out);
                }
                first = false;
            }
            return;
        }
        case QueryNode::Kind::kOr: {
            bool first = true;
            for (const QueryNode& child : node.children) {
                if (!first) out += " OR ";
                render_into(child, out);
                first = false;
            }
            return;
        }
    }
}

}  // namespace

std::string render(const QueryNode& node) {
    std::string out;
    render_into(node, out);
    return out;
}

// ---------------------------------------------------------------------------
// expand_exclusions
// ---------------------------------------------------------------------------

namespace {

std::vector<QueryNode> disjuncts_of(const QueryNode& node) {
    if (node.kind == QueryNode::Kind::kOr) return node.children;
    return {node};
}

}  // namespace

std::vector<QueryNode> expand_exclusions(const QueryNode& node, ExpansionMode mode) {
    if (node.kind == QueryNode::Kind::kAtom || node.kind == QueryNode::Kind::kOr) {
        return {node};  // nothing to expand
    }
    if (node.kind == QueryNode::Kind::kNot) {
        throw ConfigError("cannot expand a bare negation; use split()");
    }

    std::vector<QueryNode> positives;
    std::vector<QueryNode> negated_blocks;  // operands of the Not children
    for (const QueryNode& child : node.children) {
        if (child.kind == QueryNode::Kind::kNot) {
            negated_blocks.push_back(child.children.front());
        } else {
            positives.push_back(child);
        }
    }
    if (positives.empty()) {
        throw ConfigError("cannot expand a conjunction without positive terms; use split()");
    }
    if (negated_blocks.empty()) {
        return {node};
    }
    for (const QueryNode& block : negated_blocks) {
        if (block.kind == QueryNode::Kind::kAnd) {
            throw ConfigError("cannot expand NOT over a conjunction; use split()");
        }
    }

    // Cartesian product over the disjunctive positive blocks.
    std::vector<std::vector<QueryNode>> positive_combos{{}};
    for (const QueryNode& positive : positives) {
        std::vector<std::vector<QueryNode>> next;
        for (const std::vector<QueryNode>& combo : positive_combos) {
            for (const QueryNode& choice : disjuncts_of(positive)) {
                std::vector<QueryNode> extended = combo;
                extended.push_back(choice);
                next.push_back(std::move(extended));
            }
        }
        positive_combos = std::move(next);
    }

    std::vector<QueryNode> parts;
    if (mode == ExpansionMode::kConjunctive) {
        // Every part carries the negation of every excluded disjunct.
        for (const std::vector<QueryNode>& combo : positive_combos) {
            std::vector<QueryNode> conjuncts = combo;
            for (const QueryNode& block : negated_blocks) {
                for (const QueryNode& d : disjuncts_of(block)) {
                    conjuncts.push_back(not_node(d));
                }
            }
            parts.push_back(and_node(std::move(conjuncts)));
        }
    } else {
        // Pairwise form: one excluded disjunct per part.
        for (const std::vector<QueryNode>& combo : positive_combos) {
            for (const QueryNode& block : negated_blocks) {
                for (const QueryNode& d : disjuncts_of(block)) {
                    std::vector<QueryNode> conjuncts = combo;
                    conjuncts.push_back(not_node(d));
                    parts.push_back(and_node(std::move(conjuncts)));
                }
            }
        }
    }
    return parts;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kOrSeparatorLen = 4;  // " OR "

class Splitter {
  public:
    explicit Splitter(const SplitConfig& cfg) : cfg_(cfg) {
        if (cfg.max_chars < 1) throw ConfigError("max_chars must be >= 1");
        if (cfg.max_and_chain < 1) throw ConfigError("max_and_chain must be >= 1");
    }

    std::vector<std::string> run(const QueryNode& node) { return split_node(node, 0); }

  private:
    std::vector<std::string> split_node(const QueryNode& node, int depth) {
        if (depth > 128) throw Error("query splitting did not converge");

        std::string rendered = render(node);
        if (rendered.size() <= cfg_.max_chars) return {rendered};

        switch (node.kind) {
            case QueryNode::Kind::kAtom:
                throw Error("atom exceeds max_chars and cannot be split: " + rendered);
            case QueryNode::Kind::kOr:
                return split_or(node, depth);
            case QueryNode::Kind::kAnd:
                return split_and(node, rendered, depth);
            case QueryNode::Kind::kNot:
                return split_not(node, depth);
        }
        throw Error("unreachable");
    }

    std::vector<std::string> split_or(const QueryNode& node, int depth) {
        std::vector<std::string> parts;
        std::string group;
        auto flush = [&] {
            if (!group.empty()) {
                parts.push_back(std::move(group));
                group.clear();
            }
        };
        for (const QueryNode& child : node.children) {
            std::string rendered = render(child);
            if (rendered.size() > cfg_.max_chars) {
                flush();
                std::vector<std::string> inner = split_node(child, depth + 1);
                parts.insert(parts.end(), std::make_move_iterator(inner.begin()),
                             std::make_move_iterator(inner.end()));
                continue;
            }
            if (group.empty()) {
                group = std::move(rendered);
            } else if (group.size() + kOrSeparatorLen + rendered.size() <= cfg_.max_chars) {
                group += " OR ";
                group += rendered;
            } else {
                flush();
                group = std::move(rendered);
            }
        }
        flush();
        return parts;
    }

    std::vector<std::string> split_and(const QueryNode& node, const std::string& rendered,
                                       int depth) {
        // Prefer distributing the longest disjunctive conjunct: that is
        // the largest single reduction in rendered length.
        std::size_t best = node.children.size();
        std::size_t best_len = 0;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            if (node.children[i].kind != QueryNode::Kind::kOr) continue;
            std::size_t len = render(node.children[i]).size();
            if (best == node.children.size() || len > best_len) {
                best = i;
                best_len = len;
            }
        }
        if (best < node.children.size()) {
            std::vector<QueryNode> instances;
            instances.reserve(node.children[best].children.size());
            for (const QueryNode& choice : node.children[best].children) {
                std::vector<QueryNode> conjuncts;
                conjuncts.reserve(node.children.size());
                for (std::size_t i = 0; i < node.children.size(); ++i) {
                    conjuncts.push_back(i == best ? choice : node.children[i]);
                }
                QueryNode instance = and_node(std::move(conjuncts));
                if (instance.kind == QueryNode::Kind::kAnd &&
                    instance.children.size() > cfg_.max_and_chain) {
                    throw Error("conjunction exceeds max_and_chain while splitting: " +
                                render(instance));
                }
                instances.push_back(std::move(instance));
            }
            return split_node(or_node(std::move(instances)), depth + 1);
        }

        // No positive disjunction to distribute. De Morgan on a negated
        // block may unlock one (NOT over AND becomes a disjunction).
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            const QueryNode& child = node.children[i];
            if (child.kind != QueryNode::Kind::kNot) continue;
            const QueryNode& inner = child.children.front();
            if (inner.kind == QueryNode::Kind::kAtom) continue;

            std::vector<QueryNode> replaced;
            replaced.reserve(node.children.size() + inner.children.size());
            for (std::size_t k = 0; k < node.children.size(); ++k) {
                if (k != i) replaced.push_back(node.children[k]);
            }
            if (inner.kind == QueryNode::Kind::kOr) {
                // ~(C v D) == ~C ^ ~D
                for (const QueryNode& d : inner.children) {
                    replaced.push_back(not_node(d));
                }
            } else {
                // ~(C ^ D) == ~C v ~D
                std::vector<QueryNode> alternatives;
                for (const QueryNode& d : inner.children) {
                    alternatives.push_back(not_node(d));
                }
                replaced.push_back(or_node(std::move(alternatives)));
            }
            return split_node(and_node(std::move(replaced)), depth + 1);
        }

        throw Error("indivisible conjunct exceeds max_chars: " + rendered);
    }

    std::vector<std::string> split_not(const QueryNode& node, int depth) {
        const QueryNode& inner = node.children.front();
        if (inner.kind == QueryNode::Kind::kAtom) {
            throw Error("negated atom exceeds max_chars and cannot be split: " + render(node));
        }
        std::vector<QueryNode> negated;
        negated.reserve(inner.children.size());
        for (const QueryNode& child : inner.children) {
            negated.push_back(not_node(child));
        }
        QueryNode rewritten = inner.kind == QueryNode::Kind::kOr ? and_node(std::move(negated))
                                                                 : or_node(std::move(negated));
        return split_node(rewritten, depth + 1);
    }

    const SplitConfig& cfg_;
};

}  // namespace

std::vector<std::string> split(const QueryNode& node, const SplitConfig& cfg) {
    Splitter splitter(cfg);
    return splitter.run(node);
}

// ---------------------------------------------------------------------------
// equivalent
// ---------------------------------------------------------------------------

namespace {

void collect_atoms(const QueryNode& node, std::map<std::pair<std::string, std::string>, int>& ids) {
    if (node.kind == QueryNode::Kind::kAtom) {
        auto key = std::make_pair(node.field, node.phrase);
        if (!ids.contains(key)) {
            int next = static_cast<int>(ids.size());
            ids.emplace(std::move(key), next);
        }
        return;
    }
    for (const QueryNode& child : node.children) collect_atoms(child, ids);
}

bool evaluate(const QueryNode& node,
              const std::map<std::pair<std::string, std::string>, int>& ids,
              std::uint32_t assignment) {
    switch (node.kind) {
        case QueryNode::Kind::kAtom: {
            int bit = ids.at({node.field, node.phrase});
            return (assignment >> bit) & 1u;
        }
        case QueryNode::Kind::kNot:
            return !evaluate(node.children.front(), ids, assignment);
        case QueryNode::Kind::kAnd:
            for (const QueryNode& child : node.children) {
                if (!evaluate(child, ids, assignment)) return false;
            }
            return true;
        case QueryNode::Kind::kOr:
            for (const QueryNode& child : node.children) {
                if (evaluate(child, ids, assignment)) return true;
            }
            return false;
    }
    throw Error("unreachable");
}

}  // namespace

bool equivalent(std::span<const QueryNode> parts, const QueryNode& original) {
    std::map<std::pair<std::string, std::string>, int> ids;
    collect_atoms(original, ids);
    for (const QueryNode& part : parts) collect_atoms(part, ids);
    if (ids.size() > 20) {
        throw ConfigError("equivalence oracle limited to 20 distinct atoms, got " +
                          std::to_string(ids.size()));
    }

    const std::uint32_t combinations = 1u << ids.size();
    for (std::uint32_t assignment = 0; assignment < combinations; ++assignment) {
        bool union_value = false;
        for (const QueryNode& part : parts) {
            if (evaluate(part, ids, assignment)) {
                union_value = true;
                break;
            }
        }
        if (union_value != evaluate(original, ids, assignment)) return false;
    }
    return true;
}

}  // namespace sdgmap::query
