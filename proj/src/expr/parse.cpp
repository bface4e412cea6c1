// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

// Both dialects share one tokenizer and one recursive-descent parser. LatexLite
// switches on backslash commands, brace groups and juxtaposition as
// multiplication; everything Infix accepts is also accepted there.

#include "lmsr/error.hpp"
#include "lmsr/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <string>

namespace lmsr::expr {

std::optional<Dialect> dialect_from_string(std::string_view name) {
    if (name == "infix") return Dialect::infix;
    if (name == "latex" || name == "latex_lite" || name == "latexlite") return Dialect::latex_lite;
    return std::nullopt;
}

std::string_view to_string(Dialect d) { return d == Dialect::infix ? "infix" : "latex_lite"; }

namespace {

enum class Tok { number, ident, command, op, lparen, rparen, lbrace, rbrace, lbracket, rbracket, comma, equals, end };

struct Token {
    Tok kind;
    std::string text;
    double value = 0.0;
    std::size_t pos = 0;
};

[[noreturn]] void syntax_error(const std::string& msg, std::size_t pos) {
    throw Error(Errc::syntax, msg + " at offset " + std::to_string(pos));
}

bool is_known_unsupported_function(std::string_view name) {
    static constexpr std::string_view names[] = {
        "sin",   "cos",    "tan",    "cot",  "sec",  "csc",   "arcsin", "arccos", "arctan", "asin", "acos",
        "atan",  "atan2",  "sinh",   "cosh", "tanh", "abs",   "log10",  "log2",   "log1p",  "expm1", "floor",
        "ceil",  "max",    "min",    "sign", "erf",  "gamma", "cbrt",   "sigmoid", "relu",  "mod",  "round"};
    for (auto n : names)
        if (n == name) return true;
    return false;
}

class Lexer {
public:
    Lexer(std::string_view src, bool latex) : src_(src), latex_(latex) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (pos_ >= src_.size()) break;
            out.push_back(next());
        }
        out.push_back({Tok::end, "", 0.0, src_.size()});
        return out;
    }

private:
    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (latex_ && c == '\\' && pos_ + 1 < src_.size() &&
                       (src_[pos_ + 1] == ',' || src_[pos_ + 1] == ';' || src_[pos_ + 1] == '!' ||
                        src_[pos_ + 1] == ' ' || src_[pos_ + 1] == ':')) {
                pos_ += 2;
            } else {
                break;
            }
        }
    }

    Token next() {
        const std::size_t start = pos_;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return number(start);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return ident(start);
        if (c == '\\') {
            if (!latex_) syntax_error("unexpected '\\'", start);
            ++pos_;
            std::size_t b = pos_;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (b == pos_) syntax_error("empty command", start);
            return {Tok::command, std::string(src_.substr(b, pos_ - b)), 0.0, start};
        }
        ++pos_;
        switch (c) {
            case '(': return {Tok::lparen, "(", 0.0, start};
            case ')': return {Tok::rparen, ")", 0.0, start};
            case '{':
                if (!latex_) syntax_error("unexpected '{'", start);
                return {Tok::lbrace, "{", 0.0, start};
            case '}':
                if (!latex_) syntax_error("unexpected '}'", start);
                return {Tok::rbrace, "}", 0.0, start};
            case '[': return {Tok::lbracket, "[", 0.0, start};
            case ']': return {Tok::rbracket, "]", 0.0, start};
            case ',': return {Tok::comma, ",", 0.0, start};
            case '=':
                if (pos_ < src_.size() && src_[pos_] == '=') syntax_error("'==' is not an equation", start);
                return {Tok::equals, "=", 0.0, start};
            case '*':
                if (pos_ < src_.size() && src_[pos_] == '*') {
                    ++pos_;
                    return {Tok::op, "^", 0.0, start};
                }
                return {Tok::op, "*", 0.0, start};
            case '+':
            case '-':
            case '/':
            case '^': return {Tok::op, std::string(1, c), 0.0, start};
            default: break;
        }
        syntax_error(std::string("unexpected character '") + c + "'", start);
    }

    Token number(std::size_t start) {
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                digits();
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        double v = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || !std::isfinite(v)) syntax_error("bad number '" + text + "'", start);
        return {Tok::number, text, v, start};
    }

    Token ident(std::size_t start) {
        std::string name;
        auto word = [&] {
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) name += src_[pos_++];
        };
        word();
        // Module prefixes such as np.exp or math.sqrt.
        while (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
            name += src_[pos_++];
            word();
        }
        // Subscripts: c_1, x_{12}.
        if (pos_ < src_.size() && src_[pos_] == '_') {
            ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '{') {
                ++pos_;
                std::size_t b = pos_;
                while (pos_ < src_.size() && src_[pos_] != '}') ++pos_;
                if (pos_ >= src_.size()) syntax_error("unbalanced subscript brace", start);
                for (char ch : src_.substr(b, pos_ - b))
                    if (!std::isspace(static_cast<unsigned char>(ch))) name += ch;
                ++pos_;
            } else if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) name += src_[pos_++];
            } else if (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
                name += src_[pos_++];
            } else {
                syntax_error("dangling subscript", start);
            }
        }
        for (std::string_view prefix : {"numpy.", "np.", "math.", "sympy.", "sp."}) {
            if (name.rfind(prefix, 0) == 0) {
                name = name.substr(prefix.size());
                break;
            }
        }
        return {Tok::ident, name, 0.0, start};
    }

    std::string_view src_;
    bool latex_;
    std::size_t pos_ = 0;
};

// Intermediate tree: literals are kept as `number` nodes until placement is
// known, then turned into fitted constants unless they sit in an exponent.
class Parser {
public:
    Parser(std::vector<Token> toks, bool latex, std::span<const std::string> vars, const ParseOptions& opts)
        : toks_(std::move(toks)), latex_(latex), vars_(vars), opts_(opts) {}

    NodePtr parse_all() {
        auto root = expr();
        if (peek().kind != Tok::end) {
            if (peek().kind == Tok::rparen || peek().kind == Tok::rbrace || peek().kind == Tok::rbracket)
                syntax_error("unbalanced closing delimiter", peek().pos);
            syntax_error("unexpected '" + peek().text + "'", peek().pos);
        }
        return root;
    }

    std::map<std::string, std::uint32_t> labels;
    std::uint32_t next_id = 0;

private:
    const Token& peek() const { return toks_[i_]; }
    Token take() { return toks_[i_++]; }
    bool accept_op(char c) {
        if (peek().kind == Tok::op && peek().text[0] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect(Tok k, const char* what) {
        if (peek().kind != k) {
            if (peek().kind == Tok::end) syntax_error(std::string("unbalanced delimiters: expected ") + what, peek().pos);
            syntax_error(std::string("expected ") + what, peek().pos);
        }
        ++i_;
    }

    NodePtr expr() {
        auto lhs = term();
        while (true) {
            if (accept_op('+')) {
                lhs = make_binary(BinaryOp::add, lhs, term());
            } else if (accept_op('-')) {
                lhs = make_binary(BinaryOp::sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    bool starts_implicit_factor() const {
        const auto& t = peek();
        switch (t.kind) {
            case Tok::number:
            case Tok::ident:
            case Tok::lparen:
            case Tok::lbrace: return true;
            case Tok::command:
                return t.text != "cdot" && t.text != "times" && t.text != "div" && t.text != "right";
            default: return false;
        }
    }

    NodePtr term() {
        auto lhs = signed_factor();
        while (true) {
            if (accept_op('*')) {
                lhs = make_binary(BinaryOp::mul, lhs, signed_factor());
            } else if (accept_op('/')) {
                lhs = make_binary(BinaryOp::div, lhs, signed_factor());
            } else if (latex_ && peek().kind == Tok::command &&
                       (peek().text == "cdot" || peek().text == "times")) {
                ++i_;
                lhs = make_binary(BinaryOp::mul, lhs, signed_factor());
            } else if (latex_ && peek().kind == Tok::command && peek().text == "div") {
                ++i_;
                lhs = make_binary(BinaryOp::div, lhs, signed_factor());
            } else if (latex_ && starts_implicit_factor()) {
                lhs = make_binary(BinaryOp::mul, lhs, power());
            } else {
                return lhs;
            }
        }
    }

    NodePtr signed_factor() {
        if (accept_op('-')) {
            auto inner = signed_factor();
            if (inner->is(NodeKind::number)) return make_number(-inner->value);
            return make_unary(UnaryOp::neg, inner);
        }
        if (accept_op('+')) return signed_factor();
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept_op('^')) {
            NodePtr exponent;
            if (latex_ && peek().kind == Tok::lbrace) {
                exponent = group(Tok::lbrace, Tok::rbrace, "'}'");
            } else {
                exponent = signed_factor();
            }
            if (base->is(NodeKind::variable) && base->index == 0) {
                // 'e^{...}' in LaTeX.
                return make_unary(UnaryOp::exp, exponent);
            }
            return make_binary(BinaryOp::pow, base, exponent);
        }
        if (base->is(NodeKind::variable) && base->index == 0) syntax_error("bare 'e'", peek().pos);
        return base;
    }

    NodePtr group(Tok open, Tok close, const char* what) {
        expect(open, what);
        auto inner = expr();
        expect(close, what);
        return inner;
    }

    NodePtr call_argument() {
        if (peek().kind == Tok::lparen) return group(Tok::lparen, Tok::rparen, "')'");
        if (latex_ && peek().kind == Tok::lbrace) return group(Tok::lbrace, Tok::rbrace, "'}'");
        if (latex_ && peek().kind == Tok::command && peek().text == "left") return primary();
        syntax_error("expected '(' after function name", peek().pos);
    }

    NodePtr function(std::string_view name, std::size_t pos) {
        if (name == "sqrt") return make_unary(UnaryOp::sqrt, call_argument());
        if (name == "log" || name == "ln") return make_unary(UnaryOp::log, call_argument());
        if (name == "exp") return make_unary(UnaryOp::exp, call_argument());
        if (name == "square") return make_unary(UnaryOp::square, call_argument());
        if (name == "cube") return make_unary(UnaryOp::cube, call_argument());
        if (name == "pow" || name == "power") {
            expect(Tok::lparen, "'('");
            auto a = expr();
            expect(Tok::comma, "','");
            auto b = expr();
            expect(Tok::rparen, "')'");
            return make_binary(BinaryOp::pow, a, b);
        }
        throw Error(Errc::unknown_operator, "unknown operator '" + std::string(name) + "' at offset " +
                                                std::to_string(pos));
    }

    static bool is_constant_label(std::string_view s) {
        if (s.size() < 2 || (s[0] != 'c' && s[0] != 'C')) return false;
        for (std::size_t k = 1; k < s.size(); ++k)
            if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
        return true;
    }

    NodePtr identifier(const Token& t) {
        const std::string& name = t.text;
        for (std::size_t k = 0; k < vars_.size(); ++k)
            if (vars_[k] == name) return make_variable(static_cast<std::uint32_t>(k + 1));
        for (const auto& [alias, idx] : opts_.aliases)
            if (alias == name) return make_variable(idx);
        if (is_constant_label(name)) {
            std::string key = name;
            key[0] = 'c';
            auto [it, inserted] = labels.try_emplace(key, next_id + 1);
            if (inserted) ++next_id;
            return make_constant(it->second);
        }
        if (!opts_.dependent.empty() && name == opts_.dependent)
            throw Error(Errc::implicit_form, "dependent variable '" + name + "' appears inside the expression");
        if (peek().kind == Tok::lparen || (latex_ && peek().kind == Tok::lbrace)) return function(name, t.pos);
        if (name == "sqrt" || name == "log" || name == "ln" || name == "exp" || name == "square" || name == "cube")
            syntax_error("function '" + name + "' without argument", t.pos);
        if (is_known_unsupported_function(name))
            throw Error(Errc::unknown_operator, "unknown operator '" + name + "'");
        if (latex_ && name == "e") return make_variable(0);
        syntax_error("unknown symbol '" + name + "'", t.pos);
    }

    NodePtr command(const Token& t) {
        const std::string& c = t.text;
        if (c == "frac" || c == "dfrac" || c == "tfrac") {
            auto num = group(Tok::lbrace, Tok::rbrace, "'{'");
            auto den = group(Tok::lbrace, Tok::rbrace, "'{'");
            return make_binary(BinaryOp::div, num, den);
        }
        if (c == "sqrt") {
            if (peek().kind == Tok::lbracket) syntax_error("\\sqrt with an index is not supported", t.pos);
            return make_unary(UnaryOp::sqrt, group(Tok::lbrace, Tok::rbrace, "'{'"));
        }
        if (c == "exp" || c == "log" || c == "ln") return function(c, t.pos);
        if (c == "left") {
            auto open = take();
            if (open.kind == Tok::lparen) {
                auto inner = expr();
                right_close(Tok::rparen);
                return inner;
            }
            if (open.kind == Tok::lbracket) {
                auto inner = expr();
                right_close(Tok::rbracket);
                return inner;
            }
            syntax_error("unsupported \\left delimiter", open.pos);
        }
        if (c == "mathrm" || c == "operatorname" || c == "text") {
            expect(Tok::lbrace, "'{'");
            if (peek().kind != Tok::ident) syntax_error("expected a name", peek().pos);
            auto name = take();
            expect(Tok::rbrace, "'}'");
            return function(name.text, name.pos);
        }
        if (is_known_unsupported_function(c)) throw Error(Errc::unknown_operator, "unknown operator '\\" + c + "'");
        syntax_error("unsupported command '\\" + c + "'", t.pos);
    }

    void right_close(Tok close) {
        if (!(peek().kind == Tok::command && peek().text == "right"))
            syntax_error("unbalanced delimiters: expected \\right", peek().pos);
        ++i_;
        expect(close, "closing delimiter");
    }

    NodePtr primary() {
        const Token t = take();
        switch (t.kind) {
            case Tok::number: return make_number(t.value);
            case Tok::ident: return identifier(t);
            case Tok::lparen: {
                auto inner = expr();
                expect(Tok::rparen, "')'");
                return inner;
            }
            case Tok::lbrace: {
                auto inner = expr();
                expect(Tok::rbrace, "'}'");
                return inner;
            }
            case Tok::lbracket: {
                auto inner = expr();
                expect(Tok::rbracket, "']'");
                return inner;
            }
            case Tok::command: return command(t);
            case Tok::end: syntax_error("unexpected end of expression", t.pos);
            case Tok::rparen:
            case Tok::rbrace:
            case Tok::rbracket: syntax_error("unbalanced closing delimiter", t.pos);
            default: break;
        }
        syntax_error("unexpected '" + t.text + "'", t.pos);
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    bool latex_;
    std::span<const std::string> vars_;
    const ParseOptions& opts_;
};

bool pure_literal(const Node& n) {
    switch (n.kind) {
        case NodeKind::number: return true;
        case NodeKind::unary: return n.unary_op() == UnaryOp::neg && pure_literal(*n.lhs);
        case NodeKind::binary: return n.binary_op() != BinaryOp::pow && pure_literal(*n.lhs) && pure_literal(*n.rhs);
        default: return false;
    }
}

double literal_value(const Node& n) {
    switch (n.kind) {
        case NodeKind::number: return n.value;
        case NodeKind::unary: return -literal_value(*n.lhs);
        case NodeKind::binary: {
            double a = literal_value(*n.lhs), b = literal_value(*n.rhs);
            switch (n.binary_op()) {
                case BinaryOp::add: return a + b;
                case BinaryOp::sub: return a - b;
                case BinaryOp::mul: return a * b;
                case BinaryOp::div: return a / b;
                default: break;
            }
        }
        default: break;
    }
    return std::nan("");
}

struct LiteralLowering {
    std::uint32_t next_id;
    std::vector<double> initial;

    NodePtr visit(const NodePtr& n) {
        switch (n->kind) {
            case NodeKind::number: {
                initial.resize(next_id, 1.0);
                initial.push_back(n->value);
                return make_constant(++next_id);
            }
            case NodeKind::unary: return make_unary(n->unary_op(), visit(n->lhs));
            case NodeKind::binary: {
                auto l = visit(n->lhs);
                if (n->binary_op() == BinaryOp::pow && pure_literal(*n->rhs)) {
                    double v = literal_value(*n->rhs);
                    if (std::isfinite(v)) return make_binary(BinaryOp::pow, l, make_number(v));
                }
                return make_binary(n->binary_op(), l, visit(n->rhs));
            }
            default: return n;
        }
    }
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view strip_wrappers(std::string_view s) {
    s = trim(s);
    bool changed = true;
    while (changed && s.size() >= 2) {
        changed = false;
        auto wrapped = [&](std::string_view open, std::string_view close) {
            if (s.size() >= open.size() + close.size() && s.substr(0, open.size()) == open &&
                s.substr(s.size() - close.size()) == close) {
                s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
                changed = true;
            }
        };
        wrapped("$$", "$$");
        wrapped("$", "$");
        wrapped("\\(", "\\)");
        wrapped("\\[", "\\]");
        wrapped("`", "`");
        wrapped("\"", "\"");
        wrapped("'", "'");
    }
    return s;
}

}  // namespace

Expression parse(std::string_view text, Dialect dialect, std::span<const std::string> vars,
                 const ParseOptions& options) {
    if (vars.empty()) throw Error(Errc::invalid_argument, "variable list is empty");
    std::string_view body = strip_wrappers(text);
    if (body.empty()) throw Error(Errc::syntax, "empty expression");
    const bool latex = dialect == Dialect::latex_lite;

    auto toks = Lexer(body, latex).run();

    // Equation handling: only "<dependent> = rhs" is explicit.
    std::size_t eq_count = 0, eq_at = 0;
    for (std::size_t k = 0; k < toks.size(); ++k) {
        if (toks[k].kind == Tok::equals) {
            ++eq_count;
            eq_at = k;
        }
    }
    if (eq_count > 1) throw Error(Errc::implicit_form, "more than one '=' in expression");
    if (eq_count == 1) {
        bool explicit_lhs = eq_at == 1 && toks[0].kind == Tok::ident && toks[0].text == options.dependent;
        if (!explicit_lhs) {
            throw Error(Errc::implicit_form, "left-hand side is not the dependent variable '" + options.dependent + "'");
        }
        toks.erase(toks.begin(), toks.begin() + 2);
        if (toks.front().kind == Tok::end) throw Error(Errc::syntax, "empty right-hand side");
    }

    Parser p(std::move(toks), latex, vars, options);
    NodePtr raw = p.parse_all();
    LiteralLowering lower{p.next_id, {}};
    NodePtr root = lower.visit(raw);
    lower.initial.resize(lower.next_id, 1.0);
    return Expression(root, std::move(lower.initial));
}

}  // namespace lmsr::expr
