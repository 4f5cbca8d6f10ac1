#include <doctest.h>

#include <random>

#include "pullproto/entailment.hpp"
#include "pullproto/reference.hpp"
#include "pullproto/rules.hpp"
#include "support/random_expr.hpp"

using namespace pullproto;

namespace {

OrderExpr P(const char* s, const std::set<std::string>& params = {}) { return parse_order(s, params); }

History H(std::initializer_list<const char*> evs)
{
    History h;
    for (const char* e : evs) h.append(parse_event(e));
    return h;
}

RuleSetInstance shipped(const char* stem, Binding b = {}) { return RuleSetInstance{parse_rules(shipped_rules(stem)), b}; }

EngineConfig pingpong(std::int64_t n, ScheduleMode mode = ScheduleMode::exhaustive)
{
    EngineConfig cfg;
    cfg.modules = {shipped("pingpong_client", Binding{{"n", std::int64_t{n}}}), shipped("pingpong_server")};
    cfg.mode = mode;
    return cfg;
}

std::vector<Event> consequents(const std::vector<RuleInstance>& xs)
{
    std::vector<Event> out;
    for (const auto& x : xs) out.push_back(x.consequent);
    return out;
}

bool has_or(const OrderExpr& x)
{
    using K = OrderExpr::Kind;
    switch (x.kind()) {
    case K::or_: return true;
    case K::seq:
    case K::and_: return has_or(x.lhs()) || has_or(x.rhs());
    default: return false;
    }
}

Binding merged(const Binding& params, const Binding& vars)
{
    Binding b = params;
    for (const auto& [k, v] : vars.values()) b.set(k, v);
    return b;
}

}  // namespace

TEST_SUITE("entailment") {

TEST_CASE("entails: events, sequences and witnesses")
{
    CHECK(entails(H({"ask[x_1]", "abort"}), P("ask[x_i]")));
    CHECK_FALSE(entails(H({"ask[x_1]"}), P("ask[x_1] -> x_1 := v_1")));
    CHECK(entails(H({"C: ping[x_1]", "S: x_1 := pong"}), P("C: ping[x_1] -> S: x_1 := pong")));
    CHECK_FALSE(entails(H({"S: x_1 := pong", "C: ping[x_1]"}), P("C: ping[x_1] -> S: x_1 := pong")));
    CHECK(entails(History{}, P("empty")));
    CHECK_FALSE(entails(History{}, P("ask[x_i]")));
    // Witness for i must be shared across the conjunction.
    CHECK(entails(H({"I: ask[x_1]", "I: ask[x_2]", "O: x_2 := v_2"}), P("I: ask[x_i] & O: x_i := v_i")));
    CHECK_FALSE(entails(H({"I: ask[x_1]", "O: x_2 := v_2"}), P("I: ask[x_i] & O: x_i := v_i")));
    // The free variable may name the next index.
    CHECK(entails(H({"I: ask[x_1]"}), P("!I: ask[x_i] & i = 2")));
    CHECK_FALSE(entails(H({"I: ask[x_1]"}), P("!I: ask[x_i] & i = 3")));
}

TEST_CASE("entails: bound variables and parameters")
{
    History h = H({"I: ask[x_1]", "O: x_1 := v_1"});
    CHECK(entails(h, P("I: ask[x_i] & i =< n"), Binding{{"n", std::int64_t{1}}}));
    CHECK_FALSE(entails(h, P("I: ask[x_i] & i =< n"), Binding{{"n", std::int64_t{0}}}));
    CHECK(entails(h, P("O: x_i := v_i"), Binding{{"i", std::int64_t{1}}}));
    CHECK_FALSE(entails(h, P("O: x_i := v_i"), Binding{{"i", std::int64_t{2}}}));
    CHECK(entails(h, P("w & !err", {"w", "err"}), Binding{{"w", true}, {"err", false}}));
    CHECK_FALSE(entails(h, P("w", {"w"}), Binding{{"w", false}}));
    CHECK_THROWS_AS(entails(h, P("w", {"w"})), UnboundVariable);
    // An unbound lowercase name is an index variable and gets a witness.
    CHECK(entails(h, P("n > 1")));
    CHECK_FALSE(entails(h, P("n > 2")));
}

TEST_CASE("entails: choice holds for exactly one alternative")
{
    History a = H({"A: ask[x_1]"});
    History ab = H({"A: ask[x_1]", "B: ask[x_1]"});
    History abc = H({"A: ask[x_1]", "B: ask[x_1]", "A: x_1 := v_1"});
    auto two = P("A: ask[x_1] | B: ask[x_1]");
    auto three = P("A: ask[x_1] | B: ask[x_1] | A: x_1 := v_1");
    CHECK(entails(a, two));
    CHECK_FALSE(entails(ab, two));
    CHECK(entails(a, three));
    CHECK_FALSE(entails(ab, three));
    CHECK_FALSE(entails(abc, three));
    CHECK_FALSE(entails(History{}, three));
    auto grouped = P("(A: ask[x_1] | B: ask[x_1]) | A: x_1 := v_1");
    CHECK_FALSE(entails(abc, grouped));
}

TEST_CASE("entails: quantifiers")
{
    History h = H({"I: ask[x_1]", "O: x_1 := v_1", "I: ask[x_2]", "O: x_2 := v_2"});
    CHECK(entails(h, P("forall i. ((I: ask[x_i] & i < 3) | (!I: ask[x_i] & i >= 3))")));
    CHECK_FALSE(entails(h, P("forall i. I: ask[x_i]")));
    // The quantifier binds tighter than the conjunction.
    CHECK(entails(h, P("exists i. O: x_i := v_i & i = 3")));
    CHECK(entails(h, P("exists i. (O: x_i := v_i & i = 2)")));
    CHECK_FALSE(entails(h, P("exists i. (O: x_i := v_i & i = 3)")));
    CHECK(entails(h, P("exists i, j. (I: ask[x_i] -> I: ask[x_j])")));
    CHECK_FALSE(entails(h, P("exists i. (I: ask[x_i] -> I: ask[x_i])")));
    CHECK_THROWS_AS(entails(h, P("exists i. I: ask[x_i]"), {}, EntailOptions{2}), BoundExceeded);
}

TEST_CASE("entails: the ping-pong invariant holds at every prefix of the run")
{
    auto h = run_to_quiescence(pingpong(3)).front();
    auto inv = P("forall i. (!C: ping[x_i] | C: ping[x_i] -> S: x_i := pong)");
    // Every completed exchange is ordered ping before pong.
    for (std::size_t k = 0; k <= h.size(); k += 2) {
        History prefix(std::vector<Event>(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(k)));
        CHECK(entails(prefix, inv));
    }
}

TEST_CASE("step: ping-pong enabled sets")
{
    Engine eng(pingpong(3));
    auto e0 = consequents(eng.enabled(History{}));
    REQUIRE(e0.size() == 1);
    CHECK(e0[0] == parse_event("C: ping[x_1]"));
    auto e1 = consequents(eng.enabled(H({"C: ping[x_1]"})));
    REQUIRE(e1.size() == 1);
    CHECK(e1[0] == parse_event("S: x_1 := pong"));
    auto e2 = consequents(eng.enabled(H({"C: ping[x_1]", "S: x_1 := pong"})));
    REQUIRE(e2.size() == 1);
    CHECK(e2[0] == parse_event("C: ping[x_2]"));

    auto next = eng.step(History{}, [](const auto&) { return std::size_t{0}; });
    REQUIRE(next);
    CHECK(*next == H({"C: ping[x_1]"}));
    auto done = H({"C: ping[x_1]", "S: x_1 := pong", "C: ping[x_2]", "S: x_2 := pong", "C: ping[x_3]",
                   "S: x_3 := pong"});
    CHECK_FALSE(eng.step(done, [](const auto&) { return std::size_t{0}; }));
}

TEST_CASE("run_to_quiescence examples")
{
    auto pp = run_to_quiescence(pingpong(2));
    REQUIRE(pp.size() == 1);
    CHECK(pp[0] == H({"C: ping[x_1]", "S: x_1 := pong", "C: ping[x_2]", "S: x_2 := pong"}));
    CHECK(run_to_quiescence(pingpong(0)) == std::vector<History>{History{}});

    Pipeline p;
    p.source = SourceParams{0, false};
    p.sink = SinkParams{1, false, true};
    auto hs = run_to_quiescence(compose(p));
    REQUIRE(hs.size() == 1);
    CHECK(hs[0] == H({"DI: ask[x_1]", "UO: x_1 := done"}));

    EngineConfig none;
    CHECK(run_to_quiescence(none) == std::vector<History>{History{}});
}

TEST_CASE("livelock is reported with the prefix")
{
    EngineConfig cfg;
    cfg.modules = {shipped("pingpong_client_unbounded"), shipped("pingpong_server")};
    cfg.max_steps = 50;
    for (auto mode : {ScheduleMode::deterministic, ScheduleMode::exhaustive}) {
        cfg.mode = mode;
        try {
            run_to_quiescence(cfg);
            FAIL("expected a livelock");
        } catch (const LivelockError& e) {
            CHECK(e.prefix().size() == 50);
        }
    }
}

TEST_CASE("deterministic mode is reproducible per seed")
{
    Pipeline p;
    p.source = SourceParams{3, false};
    p.transformers = {{TransformerParams{2, false}, false}};
    p.sink = SinkParams{3, true, false};
    auto all = run_to_quiescence(compose(p, ScheduleMode::exhaustive));
    REQUIRE(all.size() > 1);
    std::set<History> seen;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto a = run_to_quiescence(compose(p, ScheduleMode::deterministic, seed));
        auto b = run_to_quiescence(compose(p, ScheduleMode::deterministic, seed));
        REQUIRE(a.size() == 1);
        CHECK(a == b);
        CHECK(std::binary_search(all.begin(), all.end(), a[0]));
        seen.insert(a[0]);
    }
    CHECK(seen.size() > 1);
}

TEST_CASE("exhaustive histories are unique and replay their fired rules")
{
    for (bool wait : {false, true})
        for (std::int64_t r : {0, 1, 2}) {
            Pipeline p;
            p.source = SourceParams{2, true};
            p.transformers = {{TransformerParams{r, false}, false}};
            p.sink = SinkParams{2, false, wait};
            EngineConfig cfg = compose(p);
            auto runs = Engine(cfg).run();
            std::set<History> uniq;
            for (const auto& x : runs) {
                CHECK(uniq.insert(x.history).second);
                REQUIRE(x.fired.size() == x.history.size());
                std::vector<Event> prefix;
                for (std::size_t k = 0; k < x.fired.size(); ++k) {
                    const auto& f = x.fired[k];
                    const auto& m = cfg.modules[f.ruleset];
                    const auto& rule = m.rules.rules[f.rule];
                    History before(prefix);
                    Binding b = merged(m.params, f.binding);
                    CHECK(entails(before, rule.antecedent, b));
                    auto e = ground(rule.consequent, b);
                    REQUIRE(e);
                    CHECK(*e == x.history[k]);
                    CHECK_FALSE(before.contains(*e));
                    prefix.push_back(x.history[k]);
                }
            }
        }
}

TEST_CASE("monotonicity of choice-free positive expressions")
{
    gen::PartialOrders g(77, 6, true);
    std::mt19937_64 rng(5);
    std::vector<Event> pool;
    for (int k = 0; k < 6; ++k) pool.push_back(gen::concrete(k));
    int checked = 0;
    while (checked < 300) {
        auto x = g.next(9);
        if (has_or(x)) continue;
        std::shuffle(pool.begin(), pool.end(), rng);
        History h;
        bool held = false;
        for (const auto& e : pool) {
            bool now = entails(h, x);
            if (held) CHECK(now);
            held = held || now;
            h.append(e);
        }
        if (held) CHECK(entails(h, x));
        ++checked;
    }
}

TEST_CASE("a choice is not monotone")
{
    auto x = P("A: ask[x_1] | B: ask[x_1]");
    CHECK(entails(H({"A: ask[x_1]"}), x));
    CHECK_FALSE(entails(H({"A: ask[x_1]", "B: ask[x_1]"}), x));
}

TEST_CASE("ground substitutes and rejects indexes below one")
{
    auto e = parse_event("I: ask[x_{i-1}]");
    auto g = ground(e, Binding{{"i", std::int64_t{3}}});
    REQUIRE(g);
    CHECK(*g == parse_event("I: ask[x_2]"));
    CHECK_FALSE(ground(e, Binding{{"i", std::int64_t{1}}}));
}

}
