// Acceptance runner: one timed PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pullproto/conform.hpp"
#include "pullproto/entailment.hpp"
#include "pullproto/protocol.hpp"
#include "pullproto/reference.hpp"
#include "pullproto/rewrite.hpp"
#include "pullproto/rules.hpp"
#include "support/mutations.hpp"
#include "support/oracles.hpp"
#include "support/random_expr.hpp"

using namespace pullproto;

namespace {

/// Outcome of one criterion; `detail` is printed after the verdict.
struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why)
    {
        if (pass) detail = why;
        pass = false;
    }
};

const InterfaceSpec IO(Port("I"), Port("O"), 0);

History H(std::initializer_list<const char*> evs) { return mutations::trace(evs); }

Outcome pingpong()
{
    EngineConfig cfg;
    cfg.modules = {RuleSetInstance{parse_rules(shipped_rules("pingpong_client")), Binding{{"n", std::int64_t{3}}}},
                   RuleSetInstance{parse_rules(shipped_rules("pingpong_server")), {}}};
    const History want = H({"C: ping[x_1]", "S: x_1 := pong", "C: ping[x_2]", "S: x_2 := pong", "C: ping[x_3]",
                            "S: x_3 := pong"});
    Outcome o;
    for (auto mode : {ScheduleMode::deterministic, ScheduleMode::exhaustive}) {
        cfg.mode = mode;
        auto hs = run_to_quiescence(cfg);
        if (hs.size() != 1 || hs[0] != want) o.fail("unexpected history:\n" + (hs.empty() ? "" : render_trace(hs[0])));
        else if (render_trace(hs[0]) != render_trace(want)) o.fail("rendering differs");
    }
    o.detail = o.pass ? "6 events, alternating" : o.detail;
    return o;
}

Outcome normalization()
{
    Outcome o;
    auto P = [](const char* s) { return parse_order(s); };
    struct Case {
        RewriteRule rule;
        const char* in;
        const char* out;
    };
    const Case cases[] = {
        {RewriteRule::seq_distributes_over_right_and, "a -> (b & c)", "(a -> b) & (a -> c)"},
        {RewriteRule::seq_distributes_over_left_and, "(a & b) -> c", "(a -> c) & (b -> c)"},
        {RewriteRule::seq_distributes_over_right_or, "a -> (b | c)", "(a -> b) | (a -> c)"},
        {RewriteRule::seq_distributes_over_left_or, "(a | b) -> c", "(a -> c) | (b -> c)"},
        {RewriteRule::seq_right_empty, "a -> empty", "a"},
        {RewriteRule::seq_left_empty, "empty -> a", "a"},
        {RewriteRule::seq_inner_left_empty, "(a -> empty) -> b", "a -> b"},
        {RewriteRule::seq_inner_right_empty, "a -> (empty -> b)", "a -> b"},
        {RewriteRule::and_right_empty, "a & empty", "a"},
        {RewriteRule::and_left_empty, "empty & a", "a"},
        {RewriteRule::or_right_empty, "a | empty", "a"},
        {RewriteRule::or_left_empty, "empty | a", "a"},
    };
    static_assert(std::size(cases) == rewrite_rule_count);
    for (const auto& c : cases) {
        auto r = rewrite_at_root(c.rule, P(c.in));
        if (!r || *r != P(c.out)) o.fail(std::string("rule instance failed: ") + c.in);
    }
    gen::PartialOrders g(1000);
    std::size_t max_steps = 0;
    for (int k = 0; k < 1000; ++k) {
        auto x = g.next(12);
        NormalizeStats st;
        OrderExpr nx;
        try {
            nx = normalize(x, &st, 10000);
        } catch (const SizeError&) {
            o.fail("no fixed point within 10000 steps: " + render(x));
            continue;
        }
        max_steps = std::max(max_steps, st.steps);
        if (!is_normal(nx)) o.fail("result still rewritable: " + render(x));
        NormalizeStats again;
        if (normalize(nx, &again, 10000) != nx || again.steps != 0) o.fail("not idempotent: " + render(x));
    }
    if (o.pass)
        o.detail = std::to_string(rewrite_rule_count) + " rules, 1000 expressions, max steps " +
                   std::to_string(max_steps);
    return o;
}

Outcome entailment_oracle()
{
    Outcome o;
    std::vector<OrderExpr> leaves;
    for (int k = 0; k < 5; ++k) leaves.push_back(OrderExpr::event(gen::concrete(k)));
    std::size_t exprs = 0, models = 0;
    for (std::size_t n = 1; n <= leaves.size(); ++n) {
        oracle::trees(leaves, 0, n, [&](const OrderExpr& x) {
            auto hs = linearize(normalize(x));
            std::set<History> got(hs.begin(), hs.end());
            auto want = oracle::minimal_models(x);
            if (got != want) o.fail("mismatch for " + render(x));
            models += want.size();
            ++exprs;
        });
    }
    if (o.pass) o.detail = std::to_string(exprs) + " expressions, " + std::to_string(models) + " histories";
    return o;
}

Outcome closure()
{
    Outcome o;
    std::size_t traces = 0;
    auto judge = [&](const OrderExpr& x, const std::string& what) {
        for (const auto& h : linearize(normalize(x))) {
            ++traces;
            if (!check(h, IO, CheckOptions{true}).pass) o.fail(what + ": " + render_trace(h));
        }
    };
    for (std::int64_t n = 0; n <= 4; ++n) {
        judge(normal_sequence(n, IO), "normal(" + std::to_string(n) + ")");
        for (std::int64_t r = 0; r <= n; ++r)
            for (bool w : {false, true})
                judge(early_terminated_sequence(n, r, w, IO), "early(" + std::to_string(n) + "," + std::to_string(r) + ")");
    }
    if (o.pass) o.detail = std::to_string(traces) + " traces, 0 violations";
    return o;
}

Outcome mutation_detection()
{
    Outcome o;
    int detected = 0;
    for (const auto& m : mutations::curated()) {
        if (!check(m.base, IO, CheckOptions{true}).pass) o.fail("base trace fails for INV" + std::to_string(m.invariant));
        CheckOptions opts;
        opts.finite = m.finite;
        auto ids = check(m.mutated, IO, opts).invariant_ids();
        if (ids == std::vector<int>{m.invariant}) ++detected;
        else o.fail("INV" + std::to_string(m.invariant) + " mutant (" + m.description + ") not isolated");
    }
    if (detected != 6) o.fail(std::to_string(detected) + "/6 detected");
    if (o.pass) o.detail = "6/6 detected";
    return o;
}

Outcome conformance()
{
    Outcome o;
    SweepConfig cfg;
    cfg.max_n = 4;
    cfg.max_transformers = 1;
    cfg.check_shapes = true;
    auto rep = conform(cfg);
    for (const auto& c : rep.configs)
        if (!c.pass()) o.fail("failing configuration: " + c.config);
    std::ostringstream os;
    os << rep.configs.size() << " configurations, " << rep.total_histories << " histories, " << rep.failing_configs
       << " failing";
    o.detail = o.pass ? os.str() : o.detail + " (" + os.str() + ")";
    return o;
}

Outcome take_bug()
{
    Outcome o;
    SweepConfig ref;
    ref.max_n = 4;
    ref.max_transformers = 1;
    ref.check_shapes = false;
    SweepConfig faulty = ref;
    faulty.faulty_take = true;

    // Faulty replica: find a history whose upstream interface carries two
    // terminate requests and is flagged with invariant 1.
    auto grid = sweep_grid(faulty);
    auto rep = conform(faulty);
    std::size_t flagged_configs = 0;
    std::string witness;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& c = rep.configs[i];
        bool hit = false;
        for (const auto& f : c.failures) {
            if (f.interface != 0) continue;
            bool inv1 = false;
            for (const auto& v : f.violations) inv1 = inv1 || v.invariant == 1;
            if (!inv1) continue;
            auto runs = Engine(compose(grid[i])).run();
            auto up = grid[i].component().interfaces()[0];
            auto proj = project(runs[f.history].history, up);
            if (check(proj, up, CheckOptions{true}).stats.terminate_requests >= 2) {
                hit = true;
                if (witness.empty()) witness = c.config;
                break;
            }
        }
        if (hit) ++flagged_configs;
    }
    if (flagged_configs == 0) o.fail("faulty replica never produced a doubled terminate");

    // Guarded transformer over the same parameters.
    auto clean = conform(ref);
    for (const auto& c : clean.configs) {
        bool inv1 = std::find(c.invariants.begin(), c.invariants.end(), 1) != c.invariants.end();
        if (inv1 || c.max_upstream_terminates > 1) o.fail("reference transformer flagged: " + c.config);
    }
    if (o.pass)
        o.detail = std::to_string(flagged_configs) + "/" + std::to_string(grid.size()) +
                   " faulty configurations flagged, e.g. " + witness + "; reference clean";
    return o;
}

Outcome concurrent_variants(const std::string& fixtures)
{
    Outcome o;
    struct Case {
        const char* file;
        bool out_of_order;
    };
    for (const auto& c : {Case{"normal_in_order.trace", false}, Case{"normal_out_of_order.trace", true},
                          Case{"early_in_order.trace", false}, Case{"early_out_of_order.trace", true}}) {
        History h;
        try {
            h = read_trace_file(fixtures + "/" + c.file).history;
        } catch (const std::exception& e) {
            o.fail(std::string(c.file) + ": " + e.what());
            continue;
        }
        auto strict = check(h, IO, CheckOptions{true});
        auto ids = strict.invariant_ids();
        bool only45 = !ids.empty() && std::all_of(ids.begin(), ids.end(), [](int i) { return i == 4 || i == 5; });
        if (strict.pass || !only45) o.fail(std::string(c.file) + " not rejected on invariant 4/5");
        CheckOptions relaxed{true, c.out_of_order, true};
        if (!check(h, IO, relaxed).pass) o.fail(std::string(c.file) + " rejected under relaxation");
    }
    if (o.pass) o.detail = "4 listings: strict fail, relaxed pass";
    return o;
}

Outcome round_trip(const std::string& rules_dir)
{
    Outcome o;
    std::size_t files = 0;
    for (const auto& name : shipped_rule_names()) {
        try {
            auto rs = parse_rules(shipped_rules(name));
            if (parse_rules(render(rs)).rules != rs.rules) o.fail("rule file does not round-trip: " + name);
            ++files;
        } catch (const std::exception& e) {
            o.fail(name + ": " + e.what());
        }
    }
    // The on-disk copies must match what the library embeds.
    for (const auto& entry : std::filesystem::recursive_directory_iterator(rules_dir)) {
        if (entry.path().extension() != ".rules") continue;
        std::ifstream in(entry.path());
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            parse_rules(ss.str());
        } catch (const std::exception& e) {
            o.fail(entry.path().string() + ": " + e.what());
        }
    }
    gen::Antecedents g(9);
    const std::set<std::string> params{"w", "err"};
    for (int k = 0; k < 1000; ++k) {
        auto x = g.next(12);
        auto text = render(x);
        try {
            auto y = parse_order(text, params);
            if (y != x || render(y) != text) o.fail("round trip differs: " + text);
        } catch (const SyntaxError&) {
            o.fail("rendered text does not parse: " + text);
        }
    }
    if (o.pass) o.detail = std::to_string(files) + " rule files, 1000 expressions";
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    std::string source_dir = argc > 1 ? argv[1] : PULLPROTO_SOURCE_DIR;
    struct Criterion {
        int id;
        const char* name;
        double limit;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "ping-pong replication", 1.0, pingpong},
        {2, "normalization suite", 10.0, normalization},
        {3, "entailment oracle", 60.0, entailment_oracle},
        {4, "generator/checker closure", 10.0, closure},
        {5, "mutation detection", 1.0, mutation_detection},
        {6, "reference conformance", 300.0, conformance},
        {7, "take bug replication", 60.0, take_bug},
        {8, "concurrent variants", 1.0, [&] { return concurrent_variants(source_dir + "/tests/fixtures"); }},
        {9, "parser round trip", 5.0, [&] { return round_trip(source_dir + "/rules"); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.limit) {
            std::ostringstream why;
            why << "took " << secs << " s, limit " << c.limit << " s";
            o.fail(why.str());
        }
        if (!o.pass) ++failed;
        std::printf("%s %d %s (%.3f s / %.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
