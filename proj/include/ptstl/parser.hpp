// ============================================================================
// ptstl/parser.hpp — concrete formula syntax
// ============================================================================
//
// Grammar (whitespace-insensitive, ASCII only):
//
//   formula  := or ( 'S' window or )?          -- S is non-associative
//   or       := and ( '||' and )*
//   and      := unary ( '&&' unary )*
//   unary    := '!' unary | 'X' ('^' nat)? unary
//             | 'P' window unary | 'H' window unary | primary
//   primary  := '(' formula ')' | 'true' | atom
//   atom     := x<i> ('<'|'>') (number | slot)
//             | u<i> '==' (number | slot)
//   window   := '[' nat ',' nat ']' | '[' slot ']'
//   slot     := '?' ident
//
// 'P' is the past-eventually operator F^-, 'H' the past-always operator
// G^-, 'X^n' the n-step shift.  Windows are [a,b] with a >= b.  Parse
// errors carry the byte span of the offending token.
// ============================================================================

#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "ptstl/formula.hpp"
#include "ptstl/signature.hpp"

namespace ptstl {

namespace detail {

enum class Tok : std::uint8_t {
    LParen, RParen, Bang, AndAnd, OrOr, Less, Greater, EqEq,
    LBracket, RBracket, Comma, Caret,
    Number, Slot, Var, KwTrue, KwS, KwP, KwH, KwX, End,
};

struct Token {
    Tok kind;
    SourceSpan span;
    std::string text;   // Var / Slot / Number payload
    double number = 0;  // Number payload
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, {pos_, pos_}, "", 0});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    Token next() {
        const std::size_t start = pos_;
        const char c = src_[pos_];
        auto one = [&](Tok k) {
            ++pos_;
            return Token{k, {start, pos_}, "", 0};
        };
        switch (c) {
            case '(': return one(Tok::LParen);
            case ')': return one(Tok::RParen);
            case '!': return one(Tok::Bang);
            case '<': return one(Tok::Less);
            case '>': return one(Tok::Greater);
            case '[': return one(Tok::LBracket);
            case ']': return one(Tok::RBracket);
            case ',': return one(Tok::Comma);
            case '^': return one(Tok::Caret);
            case '&':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '&') {
                    pos_ += 2;
                    return {Tok::AndAnd, {start, pos_}, "", 0};
                }
                throw ParseError("expected '&&'", {start, start + 1});
            case '|':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '|') {
                    pos_ += 2;
                    return {Tok::OrOr, {start, pos_}, "", 0};
                }
                throw ParseError("expected '||'", {start, start + 1});
            case '=':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                    pos_ += 2;
                    return {Tok::EqEq, {start, pos_}, "", 0};
                }
                throw ParseError("expected '==' (control atoms use '==')", {start, start + 1});
            case '?': {
                ++pos_;
                std::string name;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    name += src_[pos_++];
                if (name.empty()) throw ParseError("empty slot name after '?'", {start, pos_});
                return {Tok::Slot, {start, pos_}, name, 0};
            }
            default:
                break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-') {
            std::size_t p = pos_;
            if (c == '-') ++p;
            bool any_digit = false;
            while (p < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[p])) || src_[p] == '.')) {
                any_digit = any_digit || std::isdigit(static_cast<unsigned char>(src_[p]));
                ++p;
            }
            // exponent part
            if (any_digit && p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
                std::size_t q = p + 1;
                if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
                if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
                    while (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) ++q;
                    p = q;
                }
            }
            if (!any_digit) throw ParseError("malformed number", {start, p});
            std::string text = src_.substr(start, p - start);
            pos_ = p;
            return {Tok::Number, {start, pos_}, text, std::strtod(text.c_str(), nullptr)};
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t p = pos_;
            while (p < src_.size() && std::isalnum(static_cast<unsigned char>(src_[p]))) ++p;
            std::string word = src_.substr(start, p - start);
            pos_ = p;
            if (word == "true") return {Tok::KwTrue, {start, pos_}, word, 0};
            if (word == "S") return {Tok::KwS, {start, pos_}, word, 0};
            if (word == "P") return {Tok::KwP, {start, pos_}, word, 0};
            if (word == "H") return {Tok::KwH, {start, pos_}, word, 0};
            if (word == "X") return {Tok::KwX, {start, pos_}, word, 0};
            if ((word[0] == 'x' || word[0] == 'u') && word.size() > 1) {
                bool digits = true;
                for (std::size_t i = 1; i < word.size(); ++i)
                    digits = digits && std::isdigit(static_cast<unsigned char>(word[i]));
                if (digits) return {Tok::Var, {start, pos_}, word, 0};
            }
            throw ParseError("unknown token '" + word + "'", {start, pos_});
        }
        throw ParseError(std::string("unexpected character '") + c + "'", {start, start + 1});
    }

    const std::string& src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    Parser(const std::string& src, const SystemSignature& sig)
        : sig_(sig), toks_(Lexer(src).run()) {}

    FormulaPtr run() {
        FormulaPtr f = parse_since();
        if (peek().kind != Tok::End) throw ParseError("trailing input after formula", peek().span);
        return f;
    }

private:
    const Token& peek() const { return toks_[idx_]; }
    const Token& advance() { return toks_[idx_++]; }

    const Token& expect(Tok kind, const char* what) {
        if (peek().kind != kind) throw ParseError(std::string("expected ") + what, peek().span);
        return advance();
    }

    SlotPtr intern_slot(const std::string& name, SlotKind kind, int index, SourceSpan span) {
        for (const auto& s : slots_) {
            if (s->name == name) {
                if (s->kind != kind || s->index != index)
                    throw ParseError("slot '?" + name + "' already used with a different kind",
                                     span);
                return s;
            }
        }
        auto s = std::make_shared<Slot>(Slot{name, kind, index});
        slots_.push_back(s);
        return s;
    }

    unsigned parse_nat(const char* what) {
        const Token& t = expect(Tok::Number, what);
        if (t.number < 0 || t.number != static_cast<double>(static_cast<unsigned>(t.number)))
            throw ParseError(std::string(what) + " must be a non-negative integer", t.span);
        return static_cast<unsigned>(t.number);
    }

    WindowParam parse_window() {
        expect(Tok::LBracket, "'['");
        if (peek().kind == Tok::Slot) {
            const Token& t = advance();
            auto slot = intern_slot(t.text, SlotKind::WindowPair, -1, t.span);
            expect(Tok::RBracket, "']'");
            return WindowParam::hole(slot);
        }
        const SourceSpan from = peek().span;
        unsigned a = parse_nat("window bound");
        expect(Tok::Comma, "','");
        unsigned b = parse_nat("window bound");
        const SourceSpan to = peek().span;
        expect(Tok::RBracket, "']'");
        if (a < b)
            throw ParseError("window [" + std::to_string(a) + "," + std::to_string(b) +
                                 "] must satisfy a >= b",
                             {from.start, to.start});
        return WindowParam::of(a, b);
    }

    FormulaPtr parse_since() {
        FormulaPtr lhs = parse_or();
        if (peek().kind != Tok::KwS) return lhs;
        advance();
        WindowParam w = parse_window();
        FormulaPtr rhs = parse_or();
        if (peek().kind == Tok::KwS)
            throw ParseError("'S' is non-associative; parenthesize nested uses", peek().span);
        return since(std::move(lhs), std::move(rhs), std::move(w));
    }

    FormulaPtr parse_or() {
        FormulaPtr f = parse_and();
        while (peek().kind == Tok::OrOr) {
            advance();
            f = or_of(std::move(f), parse_and());
        }
        return f;
    }

    FormulaPtr parse_and() {
        FormulaPtr f = parse_unary();
        while (peek().kind == Tok::AndAnd) {
            advance();
            f = and_of(std::move(f), parse_unary());
        }
        return f;
    }

    FormulaPtr parse_unary() {
        switch (peek().kind) {
            case Tok::Bang:
                advance();
                return not_of(parse_unary());
            case Tok::KwX: {
                advance();
                unsigned n = 1;
                if (peek().kind == Tok::Caret) {
                    advance();
                    n = parse_nat("shift amount");
                }
                return shifted(n, parse_unary());
            }
            case Tok::KwP: {
                advance();
                WindowParam w = parse_window();
                return prev(parse_unary(), std::move(w));
            }
            case Tok::KwH: {
                advance();
                WindowParam w = parse_window();
                return hist(parse_unary(), std::move(w));
            }
            default:
                return parse_primary();
        }
    }

    FormulaPtr parse_primary() {
        switch (peek().kind) {
            case Tok::LParen: {
                advance();
                FormulaPtr f = parse_since();
                expect(Tok::RParen, "')'");
                return f;
            }
            case Tok::KwTrue:
                advance();
                return true_const();
            case Tok::Var:
                return parse_atom();
            default:
                throw ParseError("expected a formula", peek().span);
        }
    }

    FormulaPtr parse_atom() {
        const Token& v = advance();
        const bool is_state = v.text[0] == 'x';
        const int index = std::atoi(v.text.c_str() + 1);
        if (is_state) {
            if (static_cast<std::size_t>(index) >= sig_.n)
                throw ParseError("unknown state variable '" + v.text + "' (n=" +
                                     std::to_string(sig_.n) + ")",
                                 v.span);
            bool less;
            if (peek().kind == Tok::Less)
                less = true;
            else if (peek().kind == Tok::Greater)
                less = false;
            else
                throw ParseError("expected '<' or '>' after state variable", peek().span);
            advance();
            Param p = parse_scalar(SlotKind::StateThreshold, index);
            return less ? state_lt(index, std::move(p)) : state_gt(index, std::move(p));
        }
        if (static_cast<std::size_t>(index) >= sig_.m)
            throw ParseError("unknown control input '" + v.text + "' (m=" +
                                 std::to_string(sig_.m) + ")",
                             v.span);
        expect(Tok::EqEq, "'==' after control input");
        Param p = parse_scalar(SlotKind::ControlValue, index);
        return ctrl_eq(index, std::move(p));
    }

    Param parse_scalar(SlotKind kind, int index) {
        if (peek().kind == Tok::Slot) {
            const Token& t = advance();
            return Param::hole(intern_slot(t.text, kind, index, t.span));
        }
        const Token& t = expect(Tok::Number, "a number or '?slot'");
        return Param::of(t.number);
    }

    const SystemSignature& sig_;
    std::vector<Token> toks_;
    std::size_t idx_ = 0;
    std::vector<SlotPtr> slots_;
};

}  // namespace detail

// Parses a formula or template.  Variable indices are validated against the
// signature; all failures raise ParseError with a source span.
inline FormulaPtr parse(const std::string& text, const SystemSignature& sig) {
    return detail::Parser(text, sig).run();
}

namespace detail {

inline std::string print_window(const WindowParam& w) {
    if (w.is_slot()) return "[?" + w.slot->name + "]";
    return "[" + std::to_string(w.win.a) + "," + std::to_string(w.win.b) + "]";
}

}  // namespace detail

// Fully parenthesised concrete syntax; parse(print(f)) reproduces f.
inline std::string print(const FormulaPtr& f) {
    switch (f->kind) {
        case NodeKind::True:
            return "(true)";
        case NodeKind::StateLT:
        case NodeKind::StateGT: {
            const char* op = f->kind == NodeKind::StateLT ? " < " : " > ";
            std::string rhs = f->param.is_slot() ? "?" + f->param.slot->name
                                                 : detail::fmt_num(f->param.value);
            return "(x" + std::to_string(f->var) + op + rhs + ")";
        }
        case NodeKind::CtrlEQ: {
            std::string rhs = f->param.is_slot() ? "?" + f->param.slot->name
                                                 : detail::fmt_num(f->param.value);
            return "(u" + std::to_string(f->var) + " == " + rhs + ")";
        }
        case NodeKind::Not:
            return "(! " + print(f->lhs) + ")";
        case NodeKind::And:
            return "(" + print(f->lhs) + " && " + print(f->rhs) + ")";
        case NodeKind::Or:
            return "(" + print(f->lhs) + " || " + print(f->rhs) + ")";
        case NodeKind::Since:
            return "(" + print(f->lhs) + " S" + detail::print_window(f->window) + " " +
                   print(f->rhs) + ")";
        case NodeKind::Prev:
            return "(P" + detail::print_window(f->window) + " " + print(f->lhs) + ")";
        case NodeKind::Hist:
            return "(H" + detail::print_window(f->window) + " " + print(f->lhs) + ")";
        case NodeKind::Shift:
            return "(X^" + std::to_string(f->shift) + " " + print(f->lhs) + ")";
    }
    return {};
}

}  // namespace ptstl
