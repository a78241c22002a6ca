#ifndef UNIDEX_SPEC_PARSER_HPP
#define UNIDEX_SPEC_PARSER_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unidex/error.hpp"

namespace unidex::dsl {

inline constexpr std::array<std::string_view, 4> kKnownClasses = {"Table", "Robot", "Tray", "Cube"};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// on V3D(x, y, z)
struct OnPoint {
    Vec3 point;
    friend bool operator==(const OnPoint&, const OnPoint&) = default;
};
/// on (top back t)
struct OnRegionExpr {
    std::string surface;  // "top"
    std::string edge;     // "back"
    std::string target;
    friend bool operator==(const OnRegionExpr&, const OnRegionExpr&) = default;
};
struct CompletelyOn {
    std::string target;
    friend bool operator==(const CompletelyOn&, const CompletelyOn&) = default;
};
struct AheadOf {
    std::string target;
    friend bool operator==(const AheadOf&, const AheadOf&) = default;
};
struct Behind {
    std::string target;
    friend bool operator==(const Behind&, const Behind&) = default;
};
struct LeftOf {
    std::string target;
    friend bool operator==(const LeftOf&, const LeftOf&) = default;
};
struct RightOf {
    std::string target;
    friend bool operator==(const RightOf&, const RightOf&) = default;
};
/// with <property> (lo, hi)
struct WithRange {
    std::string property;
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const WithRange&, const WithRange&) = default;
};

using SpecifierValue = std::variant<OnPoint, OnRegionExpr, CompletelyOn, AheadOf, Behind, LeftOf, RightOf, WithRange>;

struct Specifier {
    SpecifierValue value;
    SourceLocation loc;

    /// Referenced object name, if the specifier names one.
    std::optional<std::string> target() const {
        return std::visit(
            [](const auto& s) -> std::optional<std::string> {
                if constexpr (requires { s.target; }) {
                    return s.target;
                } else {
                    return std::nullopt;
                }
            },
            value);
    }

    friend bool operator==(const Specifier& a, const Specifier& b) { return a.value == b.value; }
};

struct ObjectDecl {
    std::optional<std::string> name;
    std::string class_name;
    std::vector<Specifier> specifiers;
    SourceLocation loc;
    std::size_t index = 0;  // statement index

    /// User-given name, or `_obj<k>` for the k-th statement.
    std::string resolved_name() const { return name ? *name : "_obj" + std::to_string(index); }

    friend bool operator==(const ObjectDecl& a, const ObjectDecl& b) {
        return a.name == b.name && a.class_name == b.class_name && a.specifiers == b.specifiers && a.index == b.index;
    }
};

struct SceneSpec {
    std::vector<ObjectDecl> statements;
    friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

namespace detail {

enum class TokenKind { Ident, Number, LParen, RParen, Comma, Equals, End };

struct Token {
    TokenKind kind;
    std::string text;
    SourceLocation loc;
};

inline bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            const SourceLocation at = here();
            if (pos_ >= src_.size()) {
                out.push_back({TokenKind::End, "", end_location()});
                return out;
            }
            const char c = src_[pos_];
            if (is_ident_start(c)) {
                const std::size_t start = pos_;
                while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
                out.push_back({TokenKind::Ident, std::string(src_.substr(start, pos_ - start)), at});
            } else if (is_digit(c) || c == '-' || c == '+' || c == '.') {
                out.push_back({TokenKind::Number, number(), at});
            } else {
                TokenKind kind;
                switch (c) {
                    case '(': kind = TokenKind::LParen; break;
                    case ')': kind = TokenKind::RParen; break;
                    case ',': kind = TokenKind::Comma; break;
                    case '=': kind = TokenKind::Equals; break;
                    default:
                        throw ParseError(ParseErrorKind::Syntax, std::string("unexpected character '") + c + "'", at);
                }
                advance();
                out.push_back({kind, std::string(1, c), at});
            }
        }
    }

private:
    SourceLocation here() const { return {line_, column_, pos_}; }

    // Errors at end of input point at the last character so that every
    // reported location stays inside the text.
    SourceLocation end_location() const {
        if (src_.empty()) return {1, 1, 0};
        return last_;
    }

    void advance() {
        last_ = here();
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    // [+-]? digits ('.' digits)? | [+-]? '.' digits
    std::string number() {
        const SourceLocation at = here();
        const std::size_t start = pos_;
        if (src_[pos_] == '-' || src_[pos_] == '+') advance();
        std::size_t int_digits = 0;
        while (pos_ < src_.size() && is_digit(src_[pos_])) {
            advance();
            ++int_digits;
        }
        std::size_t frac_digits = 0;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (pos_ < src_.size() && is_digit(src_[pos_])) {
                advance();
                ++frac_digits;
            }
        }
        if (int_digits + frac_digits == 0) {
            throw ParseError(ParseErrorKind::Syntax, "malformed number", at);
        }
        if (pos_ < src_.size() && is_ident_start(src_[pos_])) {
            throw ParseError(ParseErrorKind::Syntax, "unexpected suffix after number", here());
        }
        return std::string(src_.substr(start, pos_ - start));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
    SourceLocation last_{};
};

inline const std::set<std::string, std::less<>>& reserved_words() {
    static const std::set<std::string, std::less<>> words = {"on",  "completely", "ahead", "of",  "behind",
                                                             "left", "right",     "with",  "V3D", "top",
                                                             "back"};
    return words;
}

inline bool is_auto_name(std::string_view name) {
    if (name.size() <= 4 || name.substr(0, 4) != "_obj") return false;
    for (char c : name.substr(4)) {
        if (!is_digit(c)) return false;
    }
    return true;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    SceneSpec run() {
        SceneSpec spec;
        while (peek().kind != TokenKind::End) {
            spec.statements.push_back(statement(spec.statements.size()));
        }
        return spec;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& take() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    static std::string describe(const Token& t) {
        if (t.kind == TokenKind::End) return "end of input";
        return "'" + t.text + "'";
    }

    const Token& expect(TokenKind kind, std::string_view what) {
        if (peek().kind != kind) {
            throw ParseError(ParseErrorKind::Syntax,
                             "expected " + std::string(what) + ", found " + describe(peek()), peek().loc);
        }
        return take();
    }

    void expect_word(std::string_view word) {
        if (peek().kind != TokenKind::Ident || peek().text != word) {
            throw ParseError(ParseErrorKind::Syntax,
                             "expected '" + std::string(word) + "', found " + describe(peek()), peek().loc);
        }
        take();
    }

    bool at_word(std::string_view word) const { return peek().kind == TokenKind::Ident && peek().text == word; }

    double number() {
        const Token& t = expect(TokenKind::Number, "number");
        std::string_view text = t.text;
        if (!text.empty() && text.front() == '+') text.remove_prefix(1);
        double value = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec == std::errc::result_out_of_range) {
            // Keep the literal; grammar_check reports non-finite values.
            value = (text.front() == '-' ? -1.0 : 1.0) * std::numeric_limits<double>::infinity();
        } else if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            throw ParseError(ParseErrorKind::Syntax, "malformed number '" + t.text + "'", t.loc);
        }
        return value;
    }

    std::string reference() {
        const Token& t = expect(TokenKind::Ident, "object identifier");
        if (declared_.find(t.text) == declared_.end()) {
            throw ParseError(ParseErrorKind::UnknownIdentifier, "'" + t.text + "' is not declared before use", t.loc);
        }
        return t.text;
    }

    std::string declaration_name() {
        const Token& t = take();
        if (reserved_words().contains(t.text) || is_auto_name(t.text)) {
            throw ParseError(ParseErrorKind::Syntax, "'" + t.text + "' is reserved", t.loc);
        }
        if (declared_.contains(t.text)) {
            throw ParseError(ParseErrorKind::DuplicateIdentifier, "'" + t.text + "' is already declared", t.loc);
        }
        return t.text;
    }

    ObjectDecl statement(std::size_t index) {
        ObjectDecl decl;
        decl.index = index;
        decl.loc = peek().loc;
        std::optional<Token> name_tok;
        if (peek().kind == TokenKind::Ident && peek(1).kind == TokenKind::Equals) {
            name_tok = peek();
            decl.name = declaration_name();
            take();  // '='
        }
        const Token& cls = expect(TokenKind::Ident, "class name");
        if (std::find(kKnownClasses.begin(), kKnownClasses.end(), cls.text) == kKnownClasses.end()) {
            if (reserved_words().contains(cls.text) || peek().kind != TokenKind::Ident) {
                throw ParseError(ParseErrorKind::Syntax, "expected class name, found '" + cls.text + "'", cls.loc);
            }
            throw ParseError(ParseErrorKind::UnknownClass, "unknown class '" + cls.text + "'", cls.loc);
        }
        decl.class_name = cls.text;
        decl.specifiers.push_back(specifier());
        while (peek().kind == TokenKind::Comma) {
            take();
            decl.specifiers.push_back(specifier());
        }
        check_conflicts(decl);
        if (decl.name) declared_.insert(*decl.name);
        return decl;
    }

    Specifier specifier() {
        Specifier spec;
        spec.loc = peek().loc;
        if (peek().kind != TokenKind::Ident) {
            throw ParseError(ParseErrorKind::Syntax, "expected specifier, found " + describe(peek()), peek().loc);
        }
        const std::string word = take().text;
        if (word == "on") {
            if (at_word("V3D")) {
                take();
                expect(TokenKind::LParen, "'('");
                Vec3 v;
                v.x = number();
                expect(TokenKind::Comma, "','");
                v.y = number();
                expect(TokenKind::Comma, "','");
                v.z = number();
                expect(TokenKind::RParen, "')'");
                spec.value = OnPoint{v};
            } else {
                expect(TokenKind::LParen, "'(' or V3D");
                const Token surface = expect(TokenKind::Ident, "surface keyword");
                const Token edge = expect(TokenKind::Ident, "edge keyword");
                if (surface.text != "top" || edge.text != "back") {
                    throw ParseError(ParseErrorKind::Syntax,
                                     "unsupported location expression '" + surface.text + " " + edge.text +
                                         "' (only 'top back' is supported)",
                                     surface.loc);
                }
                OnRegionExpr expr{surface.text, edge.text, reference()};
                expect(TokenKind::RParen, "')'");
                spec.value = expr;
            }
        } else if (word == "completely") {
            expect_word("on");
            spec.value = CompletelyOn{reference()};
        } else if (word == "ahead") {
            expect_word("of");
            spec.value = AheadOf{reference()};
        } else if (word == "behind") {
            spec.value = Behind{reference()};
        } else if (word == "left") {
            expect_word("of");
            spec.value = LeftOf{reference()};
        } else if (word == "right") {
            expect_word("of");
            spec.value = RightOf{reference()};
        } else if (word == "with") {
            const Token& prop = expect(TokenKind::Ident, "property name");
            if (reserved_words().contains(prop.text)) {
                throw ParseError(ParseErrorKind::Syntax, "'" + prop.text + "' is reserved", prop.loc);
            }
            WithRange range;
            range.property = prop.text;
            expect(TokenKind::LParen, "'('");
            range.lo = number();
            expect(TokenKind::Comma, "','");
            range.hi = number();
            expect(TokenKind::RParen, "')'");
            spec.value = range;
        } else {
            throw ParseError(ParseErrorKind::Syntax, "unknown specifier '" + word + "'", spec.loc);
        }
        return spec;
    }

    // One position-determining specifier per object; relational half-spaces
    // only constrain free positions; each property ranged at most once.
    static void check_conflicts(const ObjectDecl& decl) {
        const Specifier* position = nullptr;
        const Specifier* relational = nullptr;
        std::set<std::string> props;
        for (const auto& s : decl.specifiers) {
            const bool determines = std::holds_alternative<OnPoint>(s.value) ||
                                    std::holds_alternative<OnRegionExpr>(s.value) ||
                                    std::holds_alternative<CompletelyOn>(s.value);
            if (determines) {
                if (position) {
                    throw ParseError(ParseErrorKind::ConflictingSpecifiers,
                                     "more than one position specifier for " + decl.resolved_name(), s.loc);
                }
                position = &s;
            } else if (const auto* w = std::get_if<WithRange>(&s.value)) {
                if (!props.insert(w->property).second) {
                    throw ParseError(ParseErrorKind::ConflictingSpecifiers,
                                     "property '" + w->property + "' ranged twice for " + decl.resolved_name(), s.loc);
                }
            } else if (!relational) {
                relational = &s;
            }
        }
        if (position && relational && !std::holds_alternative<CompletelyOn>(position->value)) {
            throw ParseError(ParseErrorKind::ConflictingSpecifiers,
                             "relational specifier constrains the fixed position of " + decl.resolved_name(),
                             relational->loc);
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::set<std::string, std::less<>> declared_;
};

}  // namespace detail

/// Parse environment-specification source text into a validated AST.
inline SceneSpec parse(std::string_view source) {
    return detail::Parser(detail::Lexer(source).run()).run();
}

namespace detail {

inline std::string format_number(double v) {
    std::array<char, 512> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    return std::string(buf.data(), res.ptr);
}

}  // namespace detail

/// Canonical source text; parse(print(s)) reproduces s.
inline std::string print(const SceneSpec& spec) {
    using detail::format_number;
    std::string out;
    for (const auto& decl : spec.statements) {
        if (decl.name) out += *decl.name + " = ";
        out += decl.class_name;
        bool first = true;
        for (const auto& s : decl.specifiers) {
            out += first ? " " : ", ";
            first = false;
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, OnPoint>) {
                        out += "on V3D(" + format_number(v.point.x) + ", " + format_number(v.point.y) + ", " +
                               format_number(v.point.z) + ")";
                    } else if constexpr (std::is_same_v<T, OnRegionExpr>) {
                        out += "on (" + v.surface + " " + v.edge + " " + v.target + ")";
                    } else if constexpr (std::is_same_v<T, CompletelyOn>) {
                        out += "completely on " + v.target;
                    } else if constexpr (std::is_same_v<T, AheadOf>) {
                        out += "ahead of " + v.target;
                    } else if constexpr (std::is_same_v<T, Behind>) {
                        out += "behind " + v.target;
                    } else if constexpr (std::is_same_v<T, LeftOf>) {
                        out += "left of " + v.target;
                    } else if constexpr (std::is_same_v<T, RightOf>) {
                        out += "right of " + v.target;
                    } else {
                        out += "with " + v.property + " (" + format_number(v.lo) + ", " + format_number(v.hi) + ")";
                    }
                },
                s.value);
        }
        out += "\n";
    }
    return out;
}

struct Diagnostic {
    std::string message;
    SourceLocation loc;
};

struct ValidationReport {
    std::vector<Diagnostic> errors;
    std::vector<Diagnostic> warnings;

    bool ok() const { return errors.empty(); }
    bool empty() const { return errors.empty() && warnings.empty(); }
};

/// Semantic checks that do not stop parsing: range ordering, finiteness and
/// unused objects that contribute nothing to the design space.
inline ValidationReport grammar_check(const SceneSpec& spec) {
    ValidationReport report;
    std::set<std::string> referenced;
    for (const auto& decl : spec.statements) {
        for (const auto& s : decl.specifiers) {
            if (auto t = s.target()) referenced.insert(*t);
            if (const auto* w = std::get_if<WithRange>(&s.value)) {
                if (!std::isfinite(w->lo) || !std::isfinite(w->hi)) {
                    report.errors.push_back({"range bound is not finite", s.loc});
                } else if (!(w->lo < w->hi)) {
                    report.errors.push_back({"range lo >= hi for '" + w->property + "'", s.loc});
                }
            }
            if (const auto* p = std::get_if<OnPoint>(&s.value)) {
                if (!std::isfinite(p->point.x) || !std::isfinite(p->point.y) || !std::isfinite(p->point.z)) {
                    report.errors.push_back({"V3D component is not finite", s.loc});
                }
            }
        }
    }
    for (const auto& decl : spec.statements) {
        if (!decl.name || referenced.contains(*decl.name)) continue;
        bool has_free = false;
        for (const auto& s : decl.specifiers) {
            has_free = has_free || std::holds_alternative<WithRange>(s.value) ||
                       std::holds_alternative<CompletelyOn>(s.value) || std::holds_alternative<AheadOf>(s.value) ||
                       std::holds_alternative<Behind>(s.value) || std::holds_alternative<LeftOf>(s.value) ||
                       std::holds_alternative<RightOf>(s.value);
        }
        if (!has_free) {
            report.warnings.push_back({"object '" + *decl.name + "' is never referenced and has no free dimensions",
                                       decl.loc});
        }
    }
    return report;
}

}  // namespace unidex::dsl

#endif  // UNIDEX_SPEC_PARSER_HPP
