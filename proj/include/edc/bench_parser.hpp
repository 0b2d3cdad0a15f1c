#pragma once

// Parser and validator for `.bench` files.
//
//   # comment
//   source laser { rate = 1 MHz; duty = 50%; signal = S1; }
//   signal S2 { rate = 1 MHz; duty = 50%; delay = 750 ns; }
//   element BS1 : beam_splitter { }
//   element EOM2 : gated_router { signal = S2; }
//   detector D1
//   connect laser.out -> BS1.in1
//   connect vacuum.out -> BS1.in2
//   sweep phi { start = 0; stop = 2 pi; steps = 101; }
//
// Whitespace and line breaks between tokens are insignificant. Every diagnostic carries a
// 1-based line/column inside the input.

#include "edc/bench.hpp"
#include "edc/optics.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edc::bench {

enum class Severity { error, warning };

enum class DiagCode {
    lexical,
    syntax,
    unknown_kind,
    bad_value,
    unknown_key,
    duplicate_name,
    dangling_port,
    duplicate_connection,
    unconnected_port,
    cyclic_wiring,
    undeclared_signal,
    signal_out_of_period,
    no_source,
    multiple_sources,
    no_detector,
    bad_sweep,
};

constexpr std::string_view to_string(DiagCode c) noexcept
{
    switch (c) {
    case DiagCode::lexical: return "lexical";
    case DiagCode::syntax: return "syntax";
    case DiagCode::unknown_kind: return "unknown-kind";
    case DiagCode::bad_value: return "bad-value";
    case DiagCode::unknown_key: return "unknown-key";
    case DiagCode::duplicate_name: return "duplicate-name";
    case DiagCode::dangling_port: return "dangling-port";
    case DiagCode::duplicate_connection: return "duplicate-connection";
    case DiagCode::unconnected_port: return "unconnected-port";
    case DiagCode::cyclic_wiring: return "cyclic-wiring";
    case DiagCode::undeclared_signal: return "undeclared-signal";
    case DiagCode::signal_out_of_period: return "signal-out-of-period";
    case DiagCode::no_source: return "no-source";
    case DiagCode::multiple_sources: return "multiple-sources";
    case DiagCode::no_detector: return "no-detector";
    case DiagCode::bad_sweep: return "bad-sweep";
    }
    return "?";
}

struct Position {
    std::size_t line = 1;
    std::size_t column = 1;
};

struct ParseDiagnostic {
    Severity severity = Severity::error;
    DiagCode code = DiagCode::syntax;
    std::size_t line = 1;
    std::size_t column = 1;
    std::string message;
    std::string source_excerpt;

    /// `file:line:col: error[code]: message` followed by the excerpt.
    [[nodiscard]] std::string render(std::string_view file = "<input>") const
    {
        std::string out = std::string(file) + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                          (severity == Severity::error ? "error" : "warning") + "[" + std::string(to_string(code)) +
                          "]: " + message + "\n";
        if (!source_excerpt.empty()) {
            out += "    " + source_excerpt + "\n";
            out += "    " + std::string(column > 0 ? column - 1 : 0, ' ') + "^\n";
        }
        return out;
    }

    friend bool operator==(const ParseDiagnostic&, const ParseDiagnostic&) = default;
};

struct ParseResult {
    std::optional<BenchProgram> program;
    std::vector<ParseDiagnostic> diagnostics;

    [[nodiscard]] bool ok() const noexcept { return program.has_value(); }
    [[nodiscard]] std::size_t error_count() const noexcept
    {
        return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                      [](const auto& d) { return d.severity == Severity::error; }));
    }
};

namespace detail {

enum class Tok { ident, number, lbrace, rbrace, colon, semicolon, equals, dot, arrow, percent, slash, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    Position pos;
};

struct Fatal {};

class Source {
public:
    explicit Source(std::string_view text) : text_(text)
    {
        std::size_t start = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '\n' || text[i] == '\r') {
                lines_.emplace_back(text.substr(start, i - start));
                if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
                start = i + 1;
            }
        }
        if (start < text.size() || lines_.empty()) lines_.emplace_back(text.substr(start));
    }

    [[nodiscard]] std::string excerpt(std::size_t line) const
    {
        return line >= 1 && line <= lines_.size() ? std::string(lines_[line - 1]) : std::string{};
    }

    /// Last position that still lies inside the text.
    [[nodiscard]] Position last_position() const
    {
        for (std::size_t l = lines_.size(); l >= 1; --l)
            if (!lines_[l - 1].empty()) return {l, lines_[l - 1].size()};
        return {1, 1};
    }

    [[nodiscard]] std::string_view text() const noexcept { return text_; }

private:
    std::string_view text_;
    std::vector<std::string_view> lines_;
};

class Diagnostics {
public:
    explicit Diagnostics(const Source& src) : src_(src) {}

    void error(DiagCode code, Position pos, std::string message)
    {
        add(Severity::error, code, pos, std::move(message));
    }
    void warning(DiagCode code, Position pos, std::string message)
    {
        add(Severity::warning, code, pos, std::move(message));
    }
    [[noreturn]] void fatal(DiagCode code, Position pos, std::string message)
    {
        error(code, pos, std::move(message));
        throw Fatal{};
    }

    [[nodiscard]] bool has_errors() const
    {
        return std::any_of(list_.begin(), list_.end(), [](const auto& d) { return d.severity == Severity::error; });
    }
    std::vector<ParseDiagnostic> take() { return std::move(list_); }

private:
    void add(Severity sev, DiagCode code, Position pos, std::string message)
    {
        list_.push_back({sev, code, pos.line, pos.column, std::move(message), src_.excerpt(pos.line)});
    }

    const Source& src_;
    std::vector<ParseDiagnostic> list_;
};

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a valid UTF-8 sequence starting at s[i], or 0.
inline std::size_t utf8_length(std::string_view s, std::size_t i)
{
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t n = 0;
    if (b < 0x80) return 1;
    if ((b & 0xE0) == 0xC0 && b >= 0xC2) n = 2;
    else if ((b & 0xF0) == 0xE0) n = 3;
    else if ((b & 0xF8) == 0xF0 && b <= 0xF4) n = 4;
    else return 0;
    if (i + n > s.size()) return 0;
    for (std::size_t k = 1; k < n; ++k)
        if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 0;
    return n;
}

inline std::vector<Token> lex(const Source& src, Diagnostics& diag)
{
    const std::string_view s = src.text();
    std::vector<Token> out;
    std::size_t i = 0;
    Position pos;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < s.size(); ++k) {
            const char c = s[i++];
            if (c == '\n' || (c == '\r' && (i >= s.size() || s[i] != '\n'))) {
                ++pos.line;
                pos.column = 1;
            } else if (c != '\r') {
                ++pos.column;
            }
        }
    };

    while (i < s.size()) {
        const char c = s[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < s.size() && s[i] != '\n' && s[i] != '\r') {
                const std::size_t n = utf8_length(s, i);
                if (n == 0) diag.fatal(DiagCode::lexical, pos, "invalid UTF-8 byte in comment");
                advance(n);
            }
            continue;
        }
        const Position start = pos;
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < s.size() && is_ident_char(s[j])) ++j;
            out.push_back({Tok::ident, std::string(s.substr(i, j - i)), start});
            advance(j - i);
            continue;
        }
        const bool signed_number = c == '-' && i + 1 < s.size() && (is_digit(s[i + 1]) || s[i + 1] == '.');
        if (is_digit(c) || signed_number || (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
            std::size_t j = i + (signed_number ? 1 : 0);
            bool digits = false;
            while (j < s.size() && is_digit(s[j])) { ++j; digits = true; }
            if (j < s.size() && s[j] == '.') {
                ++j;
                while (j < s.size() && is_digit(s[j])) { ++j; digits = true; }
            }
            if (!digits) diag.fatal(DiagCode::lexical, start, "malformed number");
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                if (k < s.size() && is_digit(s[k])) {
                    const std::size_t first = k;
                    while (k < s.size() && is_digit(s[k])) ++k;
                    if (k - first > 3) diag.fatal(DiagCode::lexical, start, "exponent out of range");
                    j = k;
                }
            }
            if (j < s.size() && s[j] == '.') {
                Position bad = start;
                bad.column += j - i;
                diag.fatal(DiagCode::lexical, bad, "malformed number");
            }
            out.push_back({Tok::number, std::string(s.substr(i, j - i)), start});
            advance(j - i);
            continue;
        }
        Tok kind = Tok::end;
        std::size_t len = 1;
        switch (c) {
        case '{': kind = Tok::lbrace; break;
        case '}': kind = Tok::rbrace; break;
        case ':': kind = Tok::colon; break;
        case ';': kind = Tok::semicolon; break;
        case '=': kind = Tok::equals; break;
        case '.': kind = Tok::dot; break;
        case '%': kind = Tok::percent; break;
        case '/': kind = Tok::slash; break;
        case '-':
            if (i + 1 < s.size() && s[i + 1] == '>') {
                kind = Tok::arrow;
                len = 2;
            }
            break;
        default: break;
        }
        if (kind == Tok::end) {
            const std::size_t n = utf8_length(s, i);
            if (n == 0) diag.fatal(DiagCode::lexical, start, "invalid UTF-8 byte");
            diag.fatal(DiagCode::lexical, start, "unexpected character '" + std::string(s.substr(i, n)) + "'");
        }
        out.push_back({kind, std::string(s.substr(i, len)), start});
        advance(len);
    }
    out.push_back({Tok::end, "", src.last_position()});
    return out;
}

inline std::string_view describe(Tok t)
{
    switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::colon: return "':'";
    case Tok::semicolon: return "';'";
    case Tok::equals: return "'='";
    case Tok::dot: return "'.'";
    case Tok::arrow: return "'->'";
    case Tok::percent: return "'%'";
    case Tok::slash: return "'/'";
    case Tok::end: return "end of input";
    }
    return "token";
}

/// Decimal literal to exact rational.
inline Rational parse_decimal(std::string_view text)
{
    using boost::multiprecision::cpp_int;
    bool negative = false;
    if (!text.empty() && text.front() == '-') {
        negative = true;
        text.remove_prefix(1);
    }
    std::string digits;
    long exponent = 0;
    std::size_t i = 0;
    for (; i < text.size() && is_digit(text[i]); ++i) digits += text[i];
    if (i < text.size() && text[i] == '.') {
        for (++i; i < text.size() && is_digit(text[i]); ++i) {
            digits += text[i];
            --exponent;
        }
    }
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) exponent += std::stol(std::string(text.substr(i + 1)));
    if (digits.empty()) digits = "0";
    Rational r{cpp_int(digits)};
    const cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::labs(exponent)));
    r = exponent >= 0 ? r * Rational(scale) : r / Rational(scale);
    return negative ? -r : r;
}

struct Value {
    enum class Kind { number, ident } kind = Kind::number;
    std::string text;  ///< identifier, or literal as written
    Rational exact{0}; ///< numbers only
    std::string unit;  ///< "", "%", or a unit identifier
    Position pos;
};

struct Entry {
    std::string key;
    Position key_pos;
    Value value;
};

struct Block {
    std::vector<Entry> entries;
    Position open_pos;
};

inline const std::set<std::string, std::less<>> known_units{"ns", "us", "ms", "s", "Hz", "kHz", "MHz", "GHz", "pi", "rad"};

class Parser {
public:
    Parser(std::vector<Token> toks, Diagnostics& diag) : toks_(std::move(toks)), diag_(diag) {}

    struct SourceDecl {
        Token name;
        Block block;
    };
    struct SignalDecl {
        Token name;
        Block block;
    };
    struct ElementDecl {
        Token name;
        Token kind;
        Block block;
    };
    struct ConnectDecl {
        Token from_node, from_port, to_node, to_port;
    };
    struct SweepDecl {
        Token variable;
        Block block;
    };

    std::vector<SourceDecl> sources;
    std::vector<SignalDecl> signals;
    std::vector<ElementDecl> elements;
    std::vector<Token> detectors;
    std::vector<ConnectDecl> connects;
    std::vector<SweepDecl> sweeps;

    void parse_program()
    {
        while (peek().kind != Tok::end) {
            const Token kw = expect(Tok::ident, "a statement keyword");
            if (kw.text == "source") {
                Token name = expect(Tok::ident, "a source name");
                sources.push_back({name, parse_block()});
            } else if (kw.text == "signal") {
                Token name = expect(Tok::ident, "a signal name");
                signals.push_back({name, parse_block()});
            } else if (kw.text == "element") {
                Token name = expect(Tok::ident, "an element name");
                expect(Tok::colon, "':' before the element kind");
                Token kind = expect(Tok::ident, "an element kind");
                elements.push_back({name, kind, parse_block()});
            } else if (kw.text == "detector") {
                detectors.push_back(expect(Tok::ident, "a detector name"));
                accept(Tok::semicolon);
            } else if (kw.text == "connect") {
                ConnectDecl c;
                c.from_node = expect(Tok::ident, "a node name");
                expect(Tok::dot, "'.' between node and port");
                c.from_port = expect(Tok::ident, "a port name");
                expect(Tok::arrow, "'->'");
                c.to_node = expect(Tok::ident, "a node name");
                expect(Tok::dot, "'.' between node and port");
                c.to_port = expect(Tok::ident, "a port name");
                accept(Tok::semicolon);
                connects.push_back(c);
            } else if (kw.text == "sweep") {
                Token var = expect(Tok::ident, "a sweep variable");
                sweeps.push_back({var, parse_block()});
            } else {
                diag_.fatal(DiagCode::syntax, kw.pos,
                            "unknown statement '" + kw.text +
                                "' (expected source, signal, element, detector, connect or sweep)");
            }
        }
    }

private:
    const Token& peek() const { return toks_[pos_]; }

    Token next()
    {
        Token t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    bool accept(Tok kind)
    {
        if (peek().kind != kind) return false;
        next();
        return true;
    }

    Token expect(Tok kind, std::string_view what)
    {
        if (peek().kind != kind) {
            const Token& t = peek();
            diag_.fatal(DiagCode::syntax, t.pos,
                        "expected " + std::string(what) + ", found " +
                            (t.kind == Tok::end ? std::string("end of input") : "'" + t.text + "'"));
        }
        return next();
    }

    Block parse_block()
    {
        Block b;
        b.open_pos = expect(Tok::lbrace, "'{'").pos;
        while (!accept(Tok::rbrace)) {
            Entry e;
            const Token key = expect(Tok::ident, "a key or '}'");
            e.key = key.text;
            e.key_pos = key.pos;
            expect(Tok::equals, "'=' after key");
            e.value = parse_value();
            expect(Tok::semicolon, "';' after value");
            b.entries.push_back(std::move(e));
        }
        return b;
    }

    Value parse_value()
    {
        Value v;
        const Token& t = peek();
        v.pos = t.pos;
        if (t.kind == Tok::ident) {
            v.kind = Value::Kind::ident;
            v.text = next().text;
            return v;
        }
        if (t.kind != Tok::number) diag_.fatal(DiagCode::syntax, t.pos, "expected a value, found " + std::string(describe(t.kind)));
        Token num = next();
        v.text = num.text;
        v.exact = parse_decimal(num.text);
        if (accept(Tok::slash)) {
            const Token den = expect(Tok::number, "a denominator");
            const Rational d = parse_decimal(den.text);
            if (d == 0) diag_.fatal(DiagCode::bad_value, den.pos, "division by zero");
            v.exact /= d;
            v.text += "/" + den.text;
        }
        if (accept(Tok::percent)) {
            v.unit = "%";
        } else if (peek().kind == Tok::ident) {
            const Token u = next();
            if (!known_units.contains(u.text)) diag_.fatal(DiagCode::bad_value, u.pos, "unknown unit '" + u.text + "'");
            v.unit = u.text;
        }
        return v;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Diagnostics& diag_;
};

// Converts raw blocks to typed fields, reporting every problem it finds.
class Binder {
public:
    explicit Binder(Diagnostics& diag) : diag_(diag) {}

    std::optional<Rational> duration(const Entry& e)
    {
        if (e.value.kind != Value::Kind::number) return bad(e, "expected a duration such as '250 ns'");
        static const std::map<std::string, Rational, std::less<>> scale{
            {"ns", Rational(1, 1000000000)}, {"us", Rational(1, 1000000)}, {"ms", Rational(1, 1000)}, {"s", Rational(1)}};
        const auto it = scale.find(e.value.unit);
        if (it == scale.end()) return bad(e, "duration needs a time unit (ns, us, ms, s)");
        return e.value.exact * it->second;
    }

    std::optional<Rational> period_from_rate(const Entry& e)
    {
        if (e.value.kind != Value::Kind::number) return bad(e, "expected a rate such as '1 MHz'");
        static const std::map<std::string, Rational, std::less<>> scale{
            {"Hz", Rational(1)}, {"kHz", Rational(1000)}, {"MHz", Rational(1000000)}, {"GHz", Rational(1000000000)}};
        const auto it = scale.find(e.value.unit);
        if (it == scale.end()) return bad(e, "rate needs a frequency unit (Hz, kHz, MHz, GHz)");
        const Rational hz = e.value.exact * it->second;
        if (hz <= 0) return bad(e, "rate must be positive");
        return Rational(1) / hz;
    }

    std::optional<Rational> fraction(const Entry& e)
    {
        if (e.value.kind != Value::Kind::number) return bad(e, "expected a fraction such as '50%'");
        if (e.value.unit == "%") return e.value.exact / 100;
        if (e.value.unit.empty()) return e.value.exact;
        return bad(e, "fraction takes '%' or no unit");
    }

    std::optional<double> number(const Entry& e)
    {
        if (e.value.kind != Value::Kind::number || !e.value.unit.empty()) return bad(e, "expected a plain number");
        return bench::to_double(e.value.exact);
    }

    std::optional<double> angle(const Entry& e)
    {
        if (e.value.kind != Value::Kind::number) return bad(e, "expected an angle in radians");
        if (e.value.unit.empty() || e.value.unit == "rad") {
            // Decimal literals go through strtod so formatted doubles read back bit-identical.
            if (e.value.text.find('/') == std::string::npos) return std::stod(e.value.text);
            return bench::to_double(e.value.exact);
        }
        if (e.value.unit == "pi") return bench::to_double(e.value.exact) * std::numbers::pi;
        return bad(e, "angle takes 'rad', 'pi' or no unit");
    }

    std::optional<std::size_t> count(const Entry& e)
    {
        if (e.value.kind != Value::Kind::number || !e.value.unit.empty() || denominator(e.value.exact) != 1 ||
            e.value.exact < 0 || e.value.exact > Rational(100000000))
            return bad(e, "expected a non-negative integer");
        return numerator(e.value.exact).convert_to<std::size_t>();
    }

    std::optional<std::string> ident(const Entry& e)
    {
        if (e.value.kind != Value::Kind::ident) return bad(e, "expected a name");
        return e.value.text;
    }

    void unknown_key(const Entry& e, std::string_view where)
    {
        diag_.error(DiagCode::unknown_key, e.key_pos, "unknown key '" + e.key + "' in " + std::string(where));
    }

    /// Rejects repeated keys; returns false for the repeat.
    bool first_use(std::set<std::string>& seen, const Entry& e)
    {
        if (seen.insert(e.key).second) return true;
        diag_.error(DiagCode::bad_value, e.key_pos, "key '" + e.key + "' given more than once");
        return false;
    }

private:
    std::nullopt_t bad(const Entry& e, const std::string& msg)
    {
        diag_.error(DiagCode::bad_value, e.value.pos, "'" + e.key + "': " + msg);
        return std::nullopt;
    }

    Diagnostics& diag_;
};

} // namespace detail

/// Parses and validates `text`. Deterministic: the same bytes give the same result.
inline ParseResult parse(std::string_view text)
{
    using namespace detail;
    const Source src(text);
    Diagnostics diag(src);
    ParseResult result;

    std::vector<Token> toks;
    try {
        toks = lex(src, diag);
    } catch (const Fatal&) {
        result.diagnostics = diag.take();
        return result;
    }
    Parser parser(std::move(toks), diag);
    try {
        parser.parse_program();
    } catch (const Fatal&) {
        result.diagnostics = diag.take();
        return result;
    }

    Binder bind(diag);
    BenchProgram prog;
    std::map<std::string, Position> names;
    auto declare = [&](const Token& name) {
        if (name.text == vacuum_node) {
            diag.error(DiagCode::duplicate_name, name.pos, "'vacuum' is reserved for the empty input");
            return;
        }
        auto [it, inserted] = names.emplace(name.text, name.pos);
        if (!inserted)
            diag.error(DiagCode::duplicate_name, name.pos,
                       "name '" + name.text + "' already declared at line " + std::to_string(it->second.line));
    };

    // Source.
    Position source_pos{1, 1};
    if (parser.sources.empty()) {
        diag.error(DiagCode::no_source, {1, 1}, "no source declared");
    } else {
        for (std::size_t k = 1; k < parser.sources.size(); ++k)
            diag.error(DiagCode::multiple_sources, parser.sources[k].name.pos, "only one source may be declared");
        const auto& decl = parser.sources.front();
        source_pos = decl.name.pos;
        declare(decl.name);
        prog.source.name = decl.name.text;
        bool has_period = false;
        std::set<std::string> seen;
        for (const auto& e : decl.block.entries) {
            if (!bind.first_use(seen, e)) continue;
            if (e.key == "period" || e.key == "rate") {
                if (has_period) {
                    diag.error(DiagCode::bad_value, e.key_pos, "give either period or rate, not both");
                    continue;
                }
                has_period = true;
                auto p = e.key == "period" ? bind.duration(e) : bind.period_from_rate(e);
                if (p) prog.source.period = *p;
            } else if (e.key == "duty") {
                if (auto f = bind.fraction(e)) prog.source.duty = *f;
            } else if (e.key == "norm") {
                if (auto v = bind.number(e)) prog.source.normalization = *v;
            } else if (e.key == "samples") {
                if (auto n = bind.count(e)) prog.source.samples = *n;
            } else if (e.key == "signal") {
                if (auto s = bind.ident(e)) prog.source.signal = *s;
            } else {
                bind.unknown_key(e, "source");
            }
        }
        if (!has_period) diag.error(DiagCode::bad_value, decl.name.pos, "source needs a period or rate");
        else if (prog.source.period <= 0) diag.error(DiagCode::bad_value, decl.name.pos, "source period must be positive");
        if (prog.source.duty <= 0 || prog.source.duty > 1)
            diag.error(DiagCode::bad_value, decl.name.pos, "source duty must lie in (0, 100%]");
        if (!(prog.source.normalization > 0.0) || !std::isfinite(prog.source.normalization))
            diag.error(DiagCode::bad_value, decl.name.pos, "source norm must be positive");
        if (prog.source.samples < 2) diag.error(DiagCode::bad_value, decl.name.pos, "source needs at least 2 samples");
    }

    // Signals.
    std::map<std::string, Position> signal_pos;
    for (const auto& decl : parser.signals) {
        declare(decl.name);
        signal_pos.emplace(decl.name.text, decl.name.pos);
        Signal sig;
        sig.name = decl.name.text;
        bool has_period = false;
        std::set<std::string> seen;
        for (const auto& e : decl.block.entries) {
            if (!bind.first_use(seen, e)) continue;
            if (e.key == "period" || e.key == "rate") {
                if (has_period) {
                    diag.error(DiagCode::bad_value, e.key_pos, "give either period or rate, not both");
                    continue;
                }
                has_period = true;
                auto p = e.key == "period" ? bind.duration(e) : bind.period_from_rate(e);
                if (p) sig.period = *p;
            } else if (e.key == "duty") {
                if (auto f = bind.fraction(e)) sig.duty = *f;
            } else if (e.key == "delay") {
                if (auto d = bind.duration(e)) sig.delay = *d;
            } else {
                bind.unknown_key(e, "signal");
            }
        }
        if (!has_period) {
            diag.error(DiagCode::bad_value, decl.name.pos, "signal needs a period or rate");
        } else if (sig.period <= 0) {
            diag.error(DiagCode::signal_out_of_period, decl.name.pos, "signal period must be positive");
        } else {
            if (sig.duty <= 0 || sig.duty > 1)
                diag.error(DiagCode::signal_out_of_period, decl.name.pos, "signal duty must lie in (0, 100%]");
            if (sig.delay < 0 || sig.delay >= sig.period)
                diag.error(DiagCode::signal_out_of_period, decl.name.pos,
                           "signal delay must lie within one period [0, " + format_duration(sig.period) + ")");
            if (!parser.sources.empty() && prog.source.period > 0 && sig.period != prog.source.period)
                diag.error(DiagCode::signal_out_of_period, decl.name.pos,
                           "signal period differs from the source period");
        }
        prog.signals.push_back(std::move(sig));
    }
    auto require_signal = [&](const std::string& name, Position pos) {
        if (!signal_pos.contains(name))
            diag.error(DiagCode::undeclared_signal, pos, "signal '" + name + "' is not declared");
    };
    if (!parser.sources.empty() && !prog.source.signal.empty()) {
        for (const auto& e : parser.sources.front().block.entries)
            if (e.key == "signal") require_signal(prog.source.signal, e.value.pos);
    }

    // Elements.
    for (const auto& decl : parser.elements) {
        declare(decl.name);
        ElementSpec el;
        el.name = decl.name.text;
        const auto kind = parse_element_kind(decl.kind.text);
        if (!kind) {
            diag.error(DiagCode::unknown_kind, decl.kind.pos,
                       "unknown element kind '" + decl.kind.text +
                           "' (expected beam_splitter, phase_shifter, mirror or gated_router)");
            continue;
        }
        el.kind = *kind;
        std::set<std::string> seen;
        for (const auto& e : decl.block.entries) {
            if (!bind.first_use(seen, e)) continue;
            if (el.kind == ElementKind::phase_shifter && e.key == "phi") {
                if (auto a = bind.angle(e)) el.phase = *a;
            } else if (el.kind == ElementKind::gated_router && e.key == "signal") {
                if (auto s = bind.ident(e)) {
                    el.signal = *s;
                    require_signal(*s, e.value.pos);
                }
            } else if (el.kind == ElementKind::beam_splitter && (e.key == "insert" || e.key == "choice")) {
                if (el.insertion != Insertion::fixed) {
                    diag.error(DiagCode::bad_value, e.key_pos, "give either insert or choice, not both");
                    continue;
                }
                auto s = bind.ident(e);
                if (!s) continue;
                if (e.key == "insert") {
                    el.insertion = Insertion::signal;
                    el.signal = *s;
                    require_signal(*s, e.value.pos);
                } else if (*s == "insert" || *s == "omit") {
                    el.insertion = *s == "insert" ? Insertion::choice_insert : Insertion::choice_omit;
                } else {
                    diag.error(DiagCode::bad_value, e.value.pos, "'choice' must be 'insert' or 'omit'");
                }
            } else {
                bind.unknown_key(e, std::string(to_string(el.kind)));
            }
        }
        if (el.kind == ElementKind::gated_router && el.signal.empty() && !seen.contains("signal"))
            diag.error(DiagCode::bad_value, decl.name.pos, "gated_router needs a 'signal'");
        prog.elements.push_back(std::move(el));
    }

    // Detectors.
    for (const auto& d : parser.detectors) {
        declare(d);
        prog.detectors.push_back(d.text);
    }
    if (parser.detectors.empty()) diag.error(DiagCode::no_detector, source_pos, "no detector declared");

    // Wiring.
    std::map<std::pair<std::string, std::string>, Position> inputs_used;
    std::map<std::pair<std::string, std::string>, Position> outputs_used;
    std::map<std::string, std::vector<std::pair<std::string, Position>>> edges; // node -> (next node, pos)
    auto is_source = [&](const std::string& n) { return !parser.sources.empty() && n == prog.source.name; };
    auto valid_output = [&](const std::string& node, const std::string& port) -> std::optional<std::string> {
        if (node == vacuum_node || is_source(node)) {
            if (port == "out") return std::nullopt;
            return "'" + node + "' has only the output port 'out'";
        }
        if (const auto* el = prog.find_element(node)) {
            const auto outs = el->outputs();
            if (std::find(outs.begin(), outs.end(), port) != outs.end()) return std::nullopt;
            std::string list;
            for (const auto& o : outs) list += (list.empty() ? "" : ", ") + o;
            return "'" + node + "' (" + std::string(to_string(el->kind)) + ") has no output port '" + port +
                   "' (outputs: " + list + ")";
        }
        if (prog.is_detector(node)) return "detector '" + node + "' has no output ports";
        return "unknown node '" + node + "'";
    };
    auto valid_input = [&](const std::string& node, const std::string& port) -> std::optional<std::string> {
        if (prog.is_detector(node)) {
            if (port == "in") return std::nullopt;
            return "detector '" + node + "' has only the input port 'in'";
        }
        if (const auto* el = prog.find_element(node)) {
            const auto ins = el->inputs();
            if (std::find(ins.begin(), ins.end(), port) != ins.end()) return std::nullopt;
            std::string list;
            for (const auto& o : ins) list += (list.empty() ? "" : ", ") + o;
            return "'" + node + "' (" + std::string(to_string(el->kind)) + ") has no input port '" + port +
                   "' (inputs: " + list + ")";
        }
        if (node == vacuum_node || is_source(node)) return "'" + node + "' has no input ports";
        return "unknown node '" + node + "'";
    };
    for (const auto& c : parser.connects) {
        Connection conn{{c.from_node.text, c.from_port.text}, {c.to_node.text, c.to_port.text}};
        bool ok = true;
        if (auto err = valid_output(conn.from.node, conn.from.port)) {
            diag.error(DiagCode::dangling_port, c.from_node.pos, *err);
            ok = false;
        }
        if (auto err = valid_input(conn.to.node, conn.to.port)) {
            diag.error(DiagCode::dangling_port, c.to_node.pos, *err);
            ok = false;
        }
        if (ok) {
            const auto in_key = std::make_pair(conn.to.node, conn.to.port);
            if (auto [it, inserted] = inputs_used.emplace(in_key, c.to_node.pos); !inserted)
                diag.error(DiagCode::duplicate_connection, c.to_node.pos,
                           "input " + conn.to.node + "." + conn.to.port + " already connected at line " +
                               std::to_string(it->second.line));
            if (conn.from.node != vacuum_node) {
                const auto out_key = std::make_pair(conn.from.node, conn.from.port);
                if (auto [it, inserted] = outputs_used.emplace(out_key, c.from_node.pos); !inserted)
                    diag.error(DiagCode::duplicate_connection, c.from_node.pos,
                               "output " + conn.from.node + "." + conn.from.port + " already connected at line " +
                                   std::to_string(it->second.line));
            }
            edges[conn.from.node].emplace_back(conn.to.node, c.from_node.pos);
        }
        prog.wiring.push_back(std::move(conn));
    }
    for (std::size_t k = 0; k < parser.elements.size(); ++k) {
        const auto kind = parse_element_kind(parser.elements[k].kind.text);
        if (!kind) continue;
        const std::string& name = parser.elements[k].name.text;
        for (const auto& port : in_ports(*kind))
            if (!inputs_used.contains({name, port}))
                diag.error(DiagCode::unconnected_port, parser.elements[k].name.pos,
                           "input " + name + "." + port + " is not connected (use vacuum.out for an empty input)");
        for (const auto& port : out_ports(*kind))
            if (!outputs_used.contains({name, port}))
                diag.warning(DiagCode::unconnected_port, parser.elements[k].name.pos,
                             "output " + name + "." + port + " is not connected; its light is lost");
    }
    for (const auto& d : parser.detectors)
        if (!inputs_used.contains({d.text, "in"}))
            diag.error(DiagCode::unconnected_port, d.pos, "detector '" + d.text + "' is not connected");
    if (!parser.sources.empty() && !outputs_used.contains({prog.source.name, "out"}))
        diag.error(DiagCode::unconnected_port, source_pos, "source output is not connected");

    // Cycles: depth-first search over element-to-element edges.
    {
        std::map<std::string, int> state; // 0 new, 1 on stack, 2 done
        bool reported = false;
        auto dfs = [&](auto&& self, const std::string& node) -> void {
            state[node] = 1;
            for (const auto& [to, pos] : edges[node]) {
                if (state[to] == 1) {
                    if (!reported) diag.error(DiagCode::cyclic_wiring, pos, "wiring forms a cycle through '" + to + "'");
                    reported = true;
                } else if (state[to] == 0) {
                    self(self, to);
                }
            }
            state[node] = 2;
        };
        std::vector<std::string> nodes;
        for (const auto& [n, _] : edges) nodes.push_back(n);
        for (const auto& n : nodes)
            if (state[n] == 0) dfs(dfs, n);
    }

    // Sweeps.
    std::set<std::string> swept;
    for (const auto& decl : parser.sweeps) {
        Sweep sw;
        if (decl.variable.text == "phi") {
            sw.variable = SweepVariable::phi;
        } else if (decl.variable.text == "td_frac") {
            sw.variable = SweepVariable::td_frac;
        } else {
            diag.error(DiagCode::bad_sweep, decl.variable.pos, "sweep variable must be 'phi' or 'td_frac'");
            continue;
        }
        if (!swept.insert(decl.variable.text).second)
            diag.error(DiagCode::bad_sweep, decl.variable.pos, "'" + decl.variable.text + "' is swept twice");
        bool has_start = false;
        bool has_stop = false;
        bool has_steps = false;
        std::set<std::string> seen;
        for (const auto& e : decl.block.entries) {
            if (!bind.first_use(seen, e)) continue;
            if (e.key == "start") {
                if (auto v = bind.angle(e)) { sw.start = *v; has_start = true; }
            } else if (e.key == "stop") {
                if (auto v = bind.angle(e)) { sw.stop = *v; has_stop = true; }
            } else if (e.key == "steps") {
                if (auto n = bind.count(e)) { sw.steps = *n; has_steps = true; }
            } else if (e.key == "fixed") {
                if (auto v = bind.angle(e)) sw.fixed = *v;
            } else {
                bind.unknown_key(e, "sweep");
            }
        }
        if (!has_start || !has_stop || !has_steps) {
            diag.error(DiagCode::bad_sweep, decl.variable.pos, "sweep needs start, stop and steps");
        } else {
            if (sw.steps < 2) diag.error(DiagCode::bad_sweep, decl.variable.pos, "sweep needs at least 2 steps");
            if (!(sw.start < sw.stop)) diag.error(DiagCode::bad_sweep, decl.variable.pos, "sweep start must be below stop");
            const bool td_out = sw.variable == SweepVariable::td_frac && (sw.start < 0.0 || sw.stop > 1.0);
            const bool fixed_out = sw.variable == SweepVariable::phi && sw.fixed && (*sw.fixed < 0.0 || *sw.fixed > 1.0);
            if (td_out || fixed_out) diag.error(DiagCode::bad_sweep, decl.variable.pos, "td_frac must lie in [0, 1]");
        }
        prog.sweeps.push_back(sw);
    }

    result.diagnostics = diag.take();
    if (std::none_of(result.diagnostics.begin(), result.diagnostics.end(),
                     [](const auto& d) { return d.severity == Severity::error; }))
        result.program = std::move(prog);
    return result;
}

} // namespace edc::bench
