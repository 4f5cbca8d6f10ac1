// Random expression generators shared by the property tests and the
// acceptance runner.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "pullproto/order.hpp"

namespace gen {

using namespace pullproto;

/// Concrete events on ports A and B, distinct for distinct k.
inline Event concrete(int k)
{
    Port p(k % 2 ? "B" : "A");
    StreamVar x{"x", StreamIndex::concrete(k / 2 + 1), 0};
    return k % 4 < 2 ? Event::ask(p, x) : Event::assign(p, x, StreamValue{StreamIndex::concrete(k / 2 + 1), 0});
}

/// Seq/And/Or/Empty over concrete events, at most `max_nodes` nodes.
class PartialOrders {
public:
    explicit PartialOrders(std::uint64_t seed, int pool = 6, bool allow_empty = true)
        : rng_(seed), pool_(pool), allow_empty_(allow_empty) {}

    OrderExpr next(int max_nodes)
    {
        std::uniform_int_distribution<int> size(1, max_nodes);
        return build(size(rng_));
    }

private:
    OrderExpr build(int nodes)
    {
        if (nodes < 3) return leaf();
        std::uniform_int_distribution<int> op(0, 2);
        std::uniform_int_distribution<int> split(1, nodes - 2);
        int left = split(rng_);
        auto a = build(left);
        auto b = build(nodes - 1 - left);
        switch (op(rng_)) {
        case 0: return OrderExpr::seq(a, b);
        case 1: return OrderExpr::conj(a, b);
        default: return OrderExpr::disj(a, b);
        }
    }

    OrderExpr leaf()
    {
        std::uniform_int_distribution<int> pick(0, pool_ - 1);
        std::bernoulli_distribution empty(0.15);
        if (allow_empty_ && empty(rng_)) return OrderExpr::empty();
        return OrderExpr::event(concrete(pick(rng_)));
    }

    std::mt19937_64 rng_;
    int pool_;
    bool allow_empty_;
};

/// Antecedent-language expressions: every construct the parser accepts,
/// including patterns with index variables, relations, bool parameters,
/// negation and quantifiers. Bool parameters are named `w` and `err`,
/// the nat parameter `n`.
class Antecedents {
public:
    explicit Antecedents(std::uint64_t seed) : rng_(seed) {}

    OrderExpr next(int max_nodes)
    {
        std::uniform_int_distribution<int> size(1, max_nodes);
        return build(size(rng_));
    }

private:
    int roll(int hi) { return std::uniform_int_distribution<int>(0, hi)(rng_); }

    StreamIndex index()
    {
        switch (roll(3)) {
        case 0: return StreamIndex::concrete(roll(3) + 1);
        case 1: return StreamIndex::variable("i");
        case 2: return StreamIndex::variable("i", -1);
        default: return StreamIndex::variable("j", 1);
        }
    }

    Port port()
    {
        static const char* names[] = {"I", "O", "TI", "UO"};
        if (roll(5) == 0) return Port("TO", StreamIndex::concrete(roll(2) + 1));
        return Port(names[roll(3)]);
    }

    Event event()
    {
        StreamVar x{"x", index(), roll(1)};
        Port p = port();
        switch (roll(8)) {
        case 0: return Event::ask(p, x);
        case 1: return Event::abort(p, x);
        case 2: return Event::error(p, x);
        case 3: return Event::assign(p, x, StreamValue{x.index, x.prime});
        case 4: return Event::assign(p, x, Done{});
        case 5: return Event::assign(p, x, Failure{});
        case 6: return Event::assign(p, x, pullproto::Token{"pong"});
        case 7: return Event{p, Request{"ping", {x}}};
        default: return Event{p, MethodCall{"read", x.index, std::string("cb")}};
        }
    }

    OrderExpr leaf()
    {
        switch (roll(9)) {
        case 0: {
            static const RelOp ops[] = {RelOp::eq, RelOp::ne, RelOp::lt, RelOp::le, RelOp::gt, RelOp::ge};
            Relation r;
            r.operands = {StreamIndex::variable("i", roll(2) - 1), roll(1) ? StreamIndex::variable("n", roll(1))
                                                                           : StreamIndex::concrete(roll(4))};
            r.ops = {ops[roll(5)]};
            return OrderExpr::rel(r);
        }
        case 1: return roll(1) ? OrderExpr::boolean(roll(1) == 1) : OrderExpr::param(roll(1) ? "w" : "err");
        case 2: return OrderExpr::empty();
        case 3: {
            StreamVar x{"x", index(), roll(1)};
            Port p = port();
            switch (roll(3)) {
            case 0: return terminate_of(p, x);
            case 1: return request_of(p, x);
            case 2: return terminated_of(p, x);
            default: return answer_of(p, x);
            }
        }
        default: return OrderExpr::event(event());
        }
    }

    OrderExpr build(int nodes)
    {
        if (nodes < 2) return leaf();
        int kind = roll(5);
        if (kind == 0) return OrderExpr::negate(build(nodes - 1));
        if (kind == 1) {
            std::vector<std::string> vars{"i"};
            if (roll(1)) vars.push_back("j");
            return OrderExpr::quant(roll(1) ? QuantKind::exists : QuantKind::forall, vars, build(nodes - 1));
        }
        if (nodes < 3) return leaf();
        int left = std::uniform_int_distribution<int>(1, nodes - 2)(rng_);
        auto a = build(left);
        auto b = build(nodes - 1 - left);
        switch (kind % 3) {
        case 0: return OrderExpr::seq(a, b);
        case 1: return OrderExpr::conj(a, b);
        default: return OrderExpr::disj(a, b);
        }
    }

    std::mt19937_64 rng_;
};

}  // namespace gen
