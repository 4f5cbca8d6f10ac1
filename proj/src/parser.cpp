#include <algorithm>
#include <cctype>
#include <string>

#include "lexer.hpp"
#include "pullproto/events.hpp"
#include "pullproto/order.hpp"
#include "pullproto/rules.hpp"

namespace pullproto {

namespace {

using detail::Tok;
using Lex = detail::Token;

bool is_upper_ident(const std::string& s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
}

bool is_lower_start(const std::string& s) { return !s.empty() && std::islower(static_cast<unsigned char>(s[0])); }

bool is_relop(Tok t)
{
    switch (t) {
    case Tok::eq:
    case Tok::ne:
    case Tok::lt:
    case Tok::le:
    case Tok::rev_arrow:
    case Tok::gt:
    case Tok::ge: return true;
    default: return false;
    }
}

RelOp to_relop(Tok t)
{
    switch (t) {
    case Tok::eq: return RelOp::eq;
    case Tok::ne: return RelOp::ne;
    case Tok::lt: return RelOp::lt;
    case Tok::le:
    case Tok::rev_arrow: return RelOp::le;
    case Tok::gt: return RelOp::gt;
    default: return RelOp::ge;
    }
}

const std::set<std::string> kCategories = {"terminate", "terminated", "request", "answer"};
const std::set<std::string> kReserved = {"true", "false", "empty", "exists", "forall"};

enum class NewlineMode { skip, separator, terminator };

class Parser {
public:
    Parser(std::string_view src, std::set<std::string> params)
        : src_(src), toks_(detail::tokenize(src)), params_(std::move(params))
    {
        modes_.push_back(NewlineMode::terminator);
    }

    // -- token access --------------------------------------------------------

    const Lex& cur()
    {
        if (modes_.back() == NewlineMode::skip)
            while (toks_[pos_].kind == Tok::newline) ++pos_;
        return toks_[pos_];
    }

    const Lex& raw(std::size_t ahead = 0) const
    {
        std::size_t p = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[p];
    }

    bool at(Tok t) { return cur().kind == t; }

    const Lex& advance()
    {
        const Lex& t = cur();
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    void skip_newlines()
    {
        while (toks_[pos_].kind == Tok::newline) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg, const Lex& at) const { throw SyntaxError(msg, at.line, at.column); }

    [[noreturn]] void fail_expected(const std::string& what)
    {
        const Lex& t = cur();
        std::string got = t.kind == Tok::ident || t.kind == Tok::number ? "'" + t.text + "'" : detail::describe(t.kind);
        fail("expected " + what + ", found " + got, t);
    }

    const Lex& expect(Tok t, const std::string& what)
    {
        if (!at(t)) fail_expected(what);
        return advance();
    }

    /// A binary operator, possibly at the start of a continuation line.
    bool peek_binop(Tok op)
    {
        if (cur().kind == op) return true;
        if (toks_[pos_].kind != Tok::newline) return false;
        std::size_t p = pos_;
        while (toks_[p].kind == Tok::newline) ++p;
        if (toks_[p].kind != op) return false;
        pos_ = p;
        return true;
    }

    struct ModeGuard {
        Parser& p;
        ModeGuard(Parser& parser, NewlineMode m) : p(parser) { p.modes_.push_back(m); }
        ~ModeGuard() { p.modes_.pop_back(); }
    };

    // -- indexes, values, events ---------------------------------------------

    std::int64_t parse_number()
    {
        const Lex& t = expect(Tok::number, "number");
        try {
            return std::stoll(t.text);
        } catch (const std::exception&) {
            fail("number out of range", t);
        }
    }

    StreamIndex parse_index()
    {
        if (at(Tok::number)) return StreamIndex::concrete(parse_number());
        if (at(Tok::ident) && is_lower_start(cur().text)) return StreamIndex::variable(advance().text);
        if (at(Tok::lbrace)) {
            ModeGuard g(*this, NewlineMode::skip);
            advance();
            StreamIndex idx = parse_offset_index(true);
            expect(Tok::rbrace, "'}'");
            return idx;
        }
        fail_expected("stream index");
    }

    /// `n`, `-n`, `v`, `v+n`, `v-n`.
    StreamIndex parse_offset_index(bool allow_negative)
    {
        if (allow_negative && at(Tok::minus)) {
            advance();
            return StreamIndex::concrete(-parse_number());
        }
        if (at(Tok::number)) return StreamIndex::concrete(parse_number());
        if (!(at(Tok::ident) && is_lower_start(cur().text))) fail_expected("index variable or number");
        std::string name = advance().text;
        std::int64_t off = 0;
        if (raw().kind == Tok::plus || raw().kind == Tok::minus) {
            bool neg = advance().kind == Tok::minus;
            off = parse_number();
            if (neg) off = -off;
        }
        return StreamIndex::variable(name, off);
    }

    int parse_primes()
    {
        int n = 0;
        while (raw().kind == Tok::prime) {
            advance();
            ++n;
        }
        return n;
    }

    Failure parse_failure_tail()
    {
        Failure f;
        if (raw().kind == Tok::underscore) {
            advance();
            f.tag = static_cast<std::uint64_t>(parse_number());
        }
        return f;
    }

    StreamVar parse_stream_var()
    {
        if (!(at(Tok::ident) && is_lower_start(cur().text))) fail_expected("stream variable");
        StreamVar v;
        v.name = advance().text;
        v.prime = parse_primes();
        expect(Tok::underscore, "'_' and index");
        v.index = parse_index();
        return v;
    }

    AnswerValue parse_value()
    {
        if (!(at(Tok::ident) && is_lower_start(cur().text))) fail_expected("answer value");
        const Lex& t = cur();
        if (t.text == "done") {
            advance();
            return Done{};
        }
        if (t.text == "err") {
            advance();
            return parse_failure_tail();
        }
        if (t.text == "v") {
            advance();
            StreamValue v;
            v.prime = parse_primes();
            expect(Tok::underscore, "'_' and index");
            v.index = parse_index();
            return v;
        }
        return pullproto::Token{advance().text};
    }

    Argument parse_argument()
    {
        if (at(Tok::ident) && cur().text == "err") {
            advance();
            return parse_failure_tail();
        }
        if (at(Tok::ident) && cur().text == "v") {
            advance();
            StreamValue v;
            v.prime = parse_primes();
            expect(Tok::underscore, "'_' and index");
            v.index = parse_index();
            return v;
        }
        return parse_stream_var();
    }

    std::string raw_until_rparen()
    {
        // Balanced text between the current '(' and its ')'.
        const Lex& open = expect(Tok::lparen, "'('");
        std::size_t begin = open.offset + 1;
        int depth = 1;
        while (true) {
            const Lex& t = toks_[pos_];
            if (t.kind == Tok::end || t.kind == Tok::newline) fail("unterminated argument list", open);
            if (t.kind == Tok::lparen) ++depth;
            if (t.kind == Tok::rparen && --depth == 0) {
                std::string text(src_.substr(begin, t.offset - begin));
                ++pos_;
                auto first = text.find_first_not_of(" \t");
                auto last = text.find_last_not_of(" \t");
                return first == std::string::npos ? std::string() : text.substr(first, last - first + 1);
            }
            ++pos_;
        }
    }

    /// An event, or a category choice (`terminate(x_i)` ...) when allowed.
    OrderExpr parse_event_expr(bool allow_category)
    {
        std::optional<Port> port;
        if (at(Tok::ident) && is_upper_ident(cur().text)) {
            Port p(advance().text);
            if (raw().kind == Tok::underscore) {
                advance();
                p.index = parse_index();
            }
            expect(Tok::colon, "':' after port");
            port = std::move(p);
        }
        if (!(at(Tok::ident) && is_lower_start(cur().text))) fail_expected("event");
        const Lex& name_tok = cur();
        std::string name = advance().text;

        if (kCategories.count(name) && raw().kind == Tok::lparen) {
            if (!allow_category) fail("event category '" + name + "' is not a single event", name_tok);
            StreamVar v;
            {
                ModeGuard g(*this, NewlineMode::skip);
                advance();
                v = parse_stream_var();
                expect(Tok::rparen, "')'");
            }
            Port p = port.value_or(Port{});
            if (name == "terminate") return terminate_of(p, v);
            if (name == "terminated") return terminated_of(p, v);
            if (name == "request") return request_of(p, v);
            return answer_of(p, v);
        }

        int primes = parse_primes();
        if (raw().kind == Tok::underscore) {
            advance();
            StreamIndex idx = parse_index();
            if (raw().kind == Tok::assign) {
                advance();
                AnswerValue value = parse_value();
                return OrderExpr::event(Event{port, Answer{StreamVar{name, idx, primes}, std::move(value)}});
            }
            if (raw().kind == Tok::lparen && primes == 0) {
                std::string args = raw_until_rparen();
                MethodCall m{name, idx, std::nullopt};
                if (!args.empty()) m.args = args;
                return OrderExpr::event(Event{port, m});
            }
            fail_expected("':=' or '('");
        }
        if (primes) fail("unexpected prime after '" + name + "'", name_tok);
        Request r{name, {}};
        if (raw().kind == Tok::lbracket) {
            ModeGuard g(*this, NewlineMode::skip);
            advance();
            r.args.push_back(parse_argument());
            while (at(Tok::comma)) {
                advance();
                r.args.push_back(parse_argument());
            }
            expect(Tok::rbracket, "']'");
        }
        return OrderExpr::event(Event{port, std::move(r)});
    }

    Event parse_single_event()
    {
        OrderExpr x = parse_event_expr(false);
        return x.event();
    }

    // -- expressions ---------------------------------------------------------

    OrderExpr parse_relation()
    {
        Relation r;
        r.operands.push_back(parse_offset_index(false));
        if (!is_relop(raw().kind)) fail_expected("relation operator");
        while (is_relop(raw().kind)) {
            r.ops.push_back(to_relop(advance().kind));
            r.operands.push_back(parse_offset_index(false));
        }
        return OrderExpr::rel(std::move(r));
    }

    OrderExpr parse_atom()
    {
        const Lex& t = cur();
        switch (t.kind) {
        case Tok::lparen: {
            ModeGuard g(*this, NewlineMode::skip);
            advance();
            OrderExpr x = parse_or();
            expect(Tok::rparen, "')'");
            return x;
        }
        case Tok::lbracket: return parse_vertical();
        case Tok::number: return parse_relation();
        case Tok::ident: break;
        default: fail_expected("expression");
        }
        const std::string& name = t.text;
        if (is_upper_ident(name)) return parse_event_expr(true);
        if (!is_lower_start(name)) fail_expected("expression");
        Tok next = raw(1).kind;
        if (is_relop(next) || next == Tok::plus || next == Tok::minus) return parse_relation();
        if (name == "true" || name == "false") {
            advance();
            return OrderExpr::boolean(name == "true");
        }
        if (name == "empty") {
            advance();
            return OrderExpr::empty();
        }
        bool event_like = next == Tok::lbracket || next == Tok::underscore || next == Tok::prime || next == Tok::lparen;
        if (params_.count(name) && !event_like) {
            std::string p = advance().text;
            return OrderExpr::param(p);
        }
        return parse_event_expr(true);
    }

    OrderExpr parse_vertical()
    {
        ModeGuard g(*this, NewlineMode::separator);
        const Lex& open = advance();
        skip_newlines();
        std::vector<OrderExpr> alts;
        while (true) {
            if (raw().kind == Tok::rbracket) break;
            if (raw().kind == Tok::end) fail("unterminated '['", open);
            alts.push_back(parse_or());
            if (raw().kind == Tok::newline) {
                skip_newlines();
                continue;
            }
            if (raw().kind != Tok::rbracket) fail_expected("']' or a new alternative line");
        }
        advance();
        if (alts.empty()) fail("empty choice block", open);
        return OrderExpr::disj(alts);
    }

    OrderExpr parse_seq()
    {
        std::vector<OrderExpr> items{parse_atom()};
        while (peek_binop(Tok::arrow)) {
            advance();
            skip_newlines();
            items.push_back(parse_atom());
        }
        return OrderExpr::seq(items);
    }

    OrderExpr parse_unary()
    {
        if (at(Tok::bang)) {
            advance();
            return OrderExpr::negate(parse_unary());
        }
        if (at(Tok::ident) && (cur().text == "exists" || cur().text == "forall") && raw(1).kind == Tok::ident) {
            QuantKind k = advance().text == "exists" ? QuantKind::exists : QuantKind::forall;
            std::vector<std::string> vars;
            while (true) {
                const Lex& v = expect(Tok::ident, "quantified variable");
                if (!is_lower_start(v.text) || kReserved.count(v.text)) fail("invalid quantified variable", v);
                if (params_.count(v.text)) fail("cannot quantify over parameter '" + v.text + "'", v);
                vars.push_back(v.text);
                if (!at(Tok::comma)) break;
                advance();
            }
            expect(Tok::dot, "'.'");
            return OrderExpr::quant(k, std::move(vars), parse_unary());
        }
        return parse_seq();
    }

    OrderExpr parse_and()
    {
        std::vector<OrderExpr> items{parse_unary()};
        while (peek_binop(Tok::amp)) {
            advance();
            skip_newlines();
            items.push_back(parse_unary());
        }
        return OrderExpr::conj(items);
    }

    OrderExpr parse_or()
    {
        std::vector<OrderExpr> items{parse_and()};
        while (peek_binop(Tok::bar)) {
            advance();
            skip_newlines();
            items.push_back(parse_and());
        }
        return OrderExpr::disj(items);
    }

    // -- rules ---------------------------------------------------------------

    Rule parse_rule_here()
    {
        Rule rule;
        const Lex& start = cur();
        rule.line = start.line;
        std::size_t saved = pos_;
        bool reversed = false;
        Event consequent;
        try {
            consequent = parse_single_event();
            reversed = at(Tok::rev_arrow);
        } catch (const SyntaxError&) {
        }
        if (reversed) {
            advance();
            skip_newlines();
            rule.consequent = std::move(consequent);
            rule.antecedent = parse_or();
            rule.written = RuleDirection::reversed;
        }
        if (!reversed) {
            pos_ = saved;
            rule.antecedent = parse_or();
            if (!peek_binop(Tok::implies)) fail_expected("'=>' or '<='");
            advance();
            skip_newlines();
            rule.consequent = parse_single_event();
            rule.written = RuleDirection::forward;
        }
        check_rule(rule, start);
        return rule;
    }

    void check_rule(const Rule& rule, const Lex& where) const
    {
        std::set<std::string> available = free_variables(rule.antecedent);
        available.insert("i");
        available.insert(params_.begin(), params_.end());
        for (const auto& v : free_variables(OrderExpr::event(rule.consequent)))
            if (!available.count(v))
                fail("consequent variable '" + v + "' does not occur in the antecedent", where);
    }

    void expect_line_end()
    {
        const Lex& t = toks_[pos_];
        if (t.kind != Tok::newline && t.kind != Tok::end) fail_expected("end of line");
    }

    std::string rest_of_line()
    {
        const Lex& t = toks_[pos_];
        std::size_t begin = t.offset;
        std::size_t end = src_.find('\n', begin);
        if (end == std::string_view::npos) end = src_.size();
        std::string text(src_.substr(begin, end - begin));
        if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
        while (toks_[pos_].kind != Tok::newline && toks_[pos_].kind != Tok::end) ++pos_;
        return text;
    }

    RuleSet parse_rule_file()
    {
        RuleSet rs;
        while (true) {
            skip_newlines();
            if (raw().kind == Tok::end) break;
            const Lex& t = raw();
            Tok next = raw(1).kind;
            if (t.kind == Tok::ident && t.text == "module" && next == Tok::ident) {
                advance();
                if (!rs.name.empty()) fail("duplicate module header", t);
                rs.name = rest_of_line();
                continue;
            }
            if (t.kind == Tok::ident && t.text == "param" && next == Tok::ident) {
                advance();
                const Lex& name = expect(Tok::ident, "parameter name");
                if (!is_lower_start(name.text) || kReserved.count(name.text))
                    fail("invalid parameter name '" + name.text + "'", name);
                if (name.text == "i" || name.text == "j")
                    fail("parameter '" + name.text + "' clashes with a stream index variable", name);
                if (rs.find_param(name.text)) fail("duplicate parameter '" + name.text + "'", name);
                expect(Tok::colon, "':'");
                const Lex& kind = expect(Tok::ident, "'nat' or 'bool'");
                ParamKind k;
                if (kind.text == "nat") k = ParamKind::nat;
                else if (kind.text == "bool") k = ParamKind::boolean;
                else fail("unknown parameter kind '" + kind.text + "'", kind);
                rs.params.push_back(Parameter{name.text, k});
                params_.insert(name.text);
                expect_line_end();
                continue;
            }
            rs.rules.push_back(parse_rule_here());
            expect_line_end();
        }
        return rs;
    }

    void expect_end()
    {
        skip_newlines();
        if (toks_[pos_].kind != Tok::end) fail_expected("end of input");
    }

private:
    std::string_view src_;
    std::vector<Lex> toks_;
    std::size_t pos_ = 0;
    std::set<std::string> params_;
    std::vector<NewlineMode> modes_;
};

std::set<std::string> names_of(const std::vector<Parameter>& params)
{
    std::set<std::string> out;
    for (const auto& p : params) out.insert(p.name);
    return out;
}

}  // namespace

Event parse_event(std::string_view text)
{
    Parser p(text, {});
    p.skip_newlines();
    Event e = p.parse_single_event();
    p.expect_end();
    return e;
}

OrderExpr parse_order(std::string_view text, const std::set<std::string>& params)
{
    Parser p(text, params);
    p.skip_newlines();
    OrderExpr x = p.parse_or();
    p.expect_end();
    return x;
}

Rule parse_rule(std::string_view text, const std::vector<Parameter>& params)
{
    Parser p(text, names_of(params));
    p.skip_newlines();
    Rule r = p.parse_rule_here();
    p.expect_end();
    return r;
}

RuleSet parse_rules(std::string_view text)
{
    Parser p(text, {});
    return p.parse_rule_file();
}

const Parameter* RuleSet::find_param(std::string_view n) const
{
    for (const auto& p : params)
        if (p.name == n) return &p;
    return nullptr;
}

std::string render(const Rule& rule)
{
    if (rule.written == RuleDirection::reversed)
        return render(rule.consequent) + " <= " + render(rule.antecedent);
    return render(rule.antecedent) + " => " + render(rule.consequent);
}

std::string render(const RuleSet& rs)
{
    std::string out;
    if (!rs.name.empty()) out += "module " + rs.name + "\n";
    for (const auto& p : rs.params) out += "param " + p.name + " : " + (p.kind == ParamKind::nat ? "nat" : "bool") + "\n";
    for (const auto& r : rs.rules) out += render(r) + "\n";
    return out;
}

}  // namespace pullproto
