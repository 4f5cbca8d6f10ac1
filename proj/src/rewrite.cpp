#include "pullproto/rewrite.hpp"

#include "pullproto/entailment.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace pullproto {

namespace {

using K = OrderExpr::Kind;

constexpr std::array<RewriteRule, rewrite_rule_count> kRules = {
    RewriteRule::seq_distributes_over_right_and, RewriteRule::seq_distributes_over_left_and,
    RewriteRule::seq_distributes_over_right_or,  RewriteRule::seq_distributes_over_left_or,
    RewriteRule::seq_right_empty,                RewriteRule::seq_left_empty,
    RewriteRule::seq_inner_left_empty,           RewriteRule::seq_inner_right_empty,
    RewriteRule::and_right_empty,                RewriteRule::and_left_empty,
    RewriteRule::or_right_empty,                 RewriteRule::or_left_empty,
};

bool is_empty(const OrderExpr& x) { return x.is(K::empty); }

}  // namespace

std::optional<OrderExpr> rewrite_at_root(RewriteRule rule, const OrderExpr& x)
{
    switch (rule) {
    case RewriteRule::seq_distributes_over_right_and:
        if (x.is(K::seq) && x.rhs().is(K::and_))
            return OrderExpr::conj(OrderExpr::seq(x.lhs(), x.rhs().lhs()), OrderExpr::seq(x.lhs(), x.rhs().rhs()));
        break;
    case RewriteRule::seq_distributes_over_left_and:
        if (x.is(K::seq) && x.lhs().is(K::and_))
            return OrderExpr::conj(OrderExpr::seq(x.lhs().lhs(), x.rhs()), OrderExpr::seq(x.lhs().rhs(), x.rhs()));
        break;
    case RewriteRule::seq_distributes_over_right_or:
        if (x.is(K::seq) && x.rhs().is(K::or_))
            return OrderExpr::disj(OrderExpr::seq(x.lhs(), x.rhs().lhs()), OrderExpr::seq(x.lhs(), x.rhs().rhs()));
        break;
    case RewriteRule::seq_distributes_over_left_or:
        if (x.is(K::seq) && x.lhs().is(K::or_))
            return OrderExpr::disj(OrderExpr::seq(x.lhs().lhs(), x.rhs()), OrderExpr::seq(x.lhs().rhs(), x.rhs()));
        break;
    case RewriteRule::seq_right_empty:
        if (x.is(K::seq) && is_empty(x.rhs())) return x.lhs();
        break;
    case RewriteRule::seq_left_empty:
        if (x.is(K::seq) && is_empty(x.lhs())) return x.rhs();
        break;
    case RewriteRule::seq_inner_left_empty:
        if (x.is(K::seq) && x.lhs().is(K::seq) && is_empty(x.lhs().rhs()))
            return OrderExpr::seq(x.lhs().lhs(), x.rhs());
        break;
    case RewriteRule::seq_inner_right_empty:
        if (x.is(K::seq) && x.rhs().is(K::seq) && is_empty(x.rhs().lhs()))
            return OrderExpr::seq(x.lhs(), x.rhs().rhs());
        break;
    case RewriteRule::and_right_empty:
        if (x.is(K::and_) && is_empty(x.rhs())) return x.lhs();
        break;
    case RewriteRule::and_left_empty:
        if (x.is(K::and_) && is_empty(x.lhs())) return x.rhs();
        break;
    case RewriteRule::or_right_empty:
        if (x.is(K::or_) && is_empty(x.rhs())) return x.lhs();
        break;
    case RewriteRule::or_left_empty:
        if (x.is(K::or_) && is_empty(x.lhs())) return x.rhs();
        break;
    }
    return std::nullopt;
}

namespace {

class Normalizer {
public:
    Normalizer(std::size_t max_steps) : max_steps_(max_steps) {}

    OrderExpr run(const OrderExpr& x)
    {
        switch (x.kind()) {
        case K::not_: throw UnsupportedConstruct("normalization does not support negation");
        case K::quant: throw UnsupportedConstruct("normalization does not support quantifiers");
        case K::seq:
        case K::and_:
        case K::or_: break;
        default: return x;
        }
        OrderExpr l = run(x.lhs());
        OrderExpr r = run(x.rhs());
        OrderExpr cur = x.is(K::seq) ? OrderExpr::seq(l, r) : x.is(K::and_) ? OrderExpr::conj(l, r) : OrderExpr::disj(l, r);
        for (RewriteRule rule : kRules) {
            if (auto next = rewrite_at_root(rule, cur)) {
                if (++steps_ > max_steps_)
                    throw SizeError("normalization exceeded " + std::to_string(max_steps_) + " rewrite steps");
                return run(*next);
            }
        }
        return cur;
    }

    std::size_t steps() const noexcept { return steps_; }

private:
    std::size_t max_steps_;
    std::size_t steps_ = 0;
};

}  // namespace

OrderExpr normalize(const OrderExpr& x, NormalizeStats* stats, std::size_t max_steps)
{
    Normalizer n(max_steps);
    OrderExpr out = n.run(x);
    if (stats) stats->steps = n.steps();
    return out;
}

bool is_normal(const OrderExpr& x)
{
    for (RewriteRule rule : kRules)
        if (rewrite_at_root(rule, x)) return false;
    switch (x.kind()) {
    case K::seq:
    case K::and_:
    case K::or_: return is_normal(x.lhs()) && is_normal(x.rhs());
    case K::not_:
    case K::quant: return is_normal(x.operand());
    default: return true;
    }
}

// ---------------------------------------------------------------------------
// Linearization

namespace {

using Seq = std::vector<Event>;

class Linearizer {
public:
    explicit Linearizer(std::size_t cap) : cap_(cap) {}

    std::vector<Seq> run(const OrderExpr& x)
    {
        switch (x.kind()) {
        case K::empty: return {Seq{}};
        case K::event:
            if (!x.event().is_concrete()) throw UnsupportedConstruct("linearization needs concrete events: " + render(x));
            return {Seq{x.event()}};
        case K::seq: {
            auto a = run(x.lhs());
            auto b = run(x.rhs());
            std::vector<Seq> out;
            for (const auto& s : a)
                for (const auto& t : b) {
                    Seq c = s;
                    c.insert(c.end(), t.begin(), t.end());
                    out.push_back(std::move(c));
                    check(out.size());
                }
            return out;
        }
        case K::and_: {
            auto a = run(x.lhs());
            auto b = run(x.rhs());
            std::vector<Seq> out;
            for (const auto& s : a)
                for (const auto& t : b) {
                    Seq prefix;
                    merge(s, 0, t, 0, prefix, out);
                }
            return out;
        }
        case K::or_: {
            auto a = run(x.lhs());
            auto b = run(x.rhs());
            a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
            check(a.size());
            return a;
        }
        default: throw UnsupportedConstruct("linearization supports only events, ->, & and |: " + render(x));
        }
    }

private:
    void check(std::size_t n) const
    {
        if (n > cap_) throw SizeError("more than " + std::to_string(cap_) + " linearizations");
    }

    static bool occurs(const Seq& s, std::size_t from, const Event& e)
    {
        return std::find(s.begin() + static_cast<std::ptrdiff_t>(from), s.end(), e) != s.end();
    }

    // Order-preserving merges; an event present in both inputs is taken once,
    // when it heads both.
    void merge(const Seq& a, std::size_t i, const Seq& b, std::size_t j, Seq& prefix, std::vector<Seq>& out)
    {
        if (i == a.size() || j == b.size()) {
            Seq done = prefix;
            const Seq& rest = i == a.size() ? b : a;
            std::size_t k = i == a.size() ? j : i;
            done.insert(done.end(), rest.begin() + static_cast<std::ptrdiff_t>(k), rest.end());
            out.push_back(std::move(done));
            check(out.size());
            return;
        }
        if (a[i] == b[j]) {
            prefix.push_back(a[i]);
            merge(a, i + 1, b, j + 1, prefix, out);
            prefix.pop_back();
            return;
        }
        if (!occurs(b, j, a[i])) {
            prefix.push_back(a[i]);
            merge(a, i + 1, b, j, prefix, out);
            prefix.pop_back();
        }
        if (!occurs(a, i, b[j])) {
            prefix.push_back(b[j]);
            merge(a, i, b, j + 1, prefix, out);
            prefix.pop_back();
        }
    }

    std::size_t cap_;
};

bool unique_events(const Seq& s)
{
    std::set<Event> seen;
    for (const auto& e : s)
        if (!seen.insert(e).second) return false;
    return true;
}

}  // namespace

std::vector<History> linearize(const OrderExpr& x, LinearizeOptions opts)
{
    Linearizer lin(opts.max_histories);
    std::set<Seq> uniq;
    for (auto& s : lin.run(x))
        if (unique_events(s)) uniq.insert(std::move(s));
    // A choice copied by distribution must be resolved the same way in every
    // copy; merges that mix alternatives do not satisfy `x`.
    std::vector<History> out;
    out.reserve(uniq.size());
    for (const auto& s : uniq) {
        History h(s);
        if (entails(h, x)) out.push_back(std::move(h));
    }
    return out;
}

}  // namespace pullproto
