#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pullproto/conform.hpp"
#include "pullproto/history.hpp"
#include "pullproto/reference.hpp"
#include "pullproto/rewrite.hpp"
#include "pullproto/rules.hpp"

namespace fs = std::filesystem;
using namespace pullproto;

namespace {

constexpr const char* kVersion = "pullcheck 1.0.0";

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 0;
    std::size_t max_steps = 10000;
    std::string out;
};

Port parse_port(const std::string& text)
{
    auto us = text.find('_');
    if (us == std::string::npos) return Port(text);
    std::string idx = text.substr(us + 1);
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError("bad port '" + text + "'");
    return Port(text.substr(0, us), StreamIndex::concrete(std::stoll(idx)));
}

std::pair<Port, Port> parse_iface(const std::string& text)
{
    auto comma = text.find(',');
    if (comma == std::string::npos) throw UsageError("--iface expects INPUT,OUTPUT");
    return {parse_port(text.substr(0, comma)), parse_port(text.substr(comma + 1))};
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << text;
}

/// Parses `k=v,k=v` into a map.
std::map<std::string, std::string> parse_kv(const std::string& text)
{
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("expected key=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

std::int64_t as_nat(const std::string& key, const std::string& v)
{
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError(key + " must be a natural number, got '" + v + "'");
    return std::stoll(v);
}

bool as_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw UsageError(key + " must be true or false, got '" + v + "'");
}

template <class F>
void apply_kv(const std::string& what, const std::string& text, const std::set<std::string>& allowed, F&& set)
{
    for (const auto& [k, v] : parse_kv(text)) {
        if (!allowed.count(k)) throw UsageError("unknown " + what + " parameter '" + k + "'");
        set(k, v);
    }
}

std::string one_line(const History& h)
{
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) s += (i ? " ; " : "") + render(h[i]);
    return s;
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
    std::string trace;
    std::string iface;
    int level = -1;
    bool finite = false;
    bool out_of_order = false;
    bool concurrent = false;
    std::string report;
};

int run_check(const CheckArgs& a)
{
    Trace t = read_trace_file(a.trace);
    auto [in, out] = parse_iface(a.iface);
    int level = a.level;
    if (level < 0) {
        level = 0;
        for (const auto& e : t.history)
            if (const StreamVar* v = e.stream_var()) {
                level = v->prime;
                break;
            }
    }
    InterfaceSpec iface(in, out, level);
    CheckOptions opts{a.finite, a.out_of_order, a.concurrent};
    CheckReport rep;
    try {
        rep = check(t.history, iface, opts);
    } catch (const MalformedTrace& e) {
        int line = e.position() < t.lines.size() ? t.lines[e.position()] : 0;
        std::cerr << a.trace << ":" << line << ": malformed trace: " << e.what() << "\n";
        return kUsage;
    }
    auto line_of = [&](std::size_t pos) {
        if (pos < t.lines.size()) return t.lines[pos];
        return t.lines.empty() ? 1 : t.lines.back() + 1;
    };
    for (const auto& v : rep.violations)
        std::cout << "INV" << v.invariant << " @line" << line_of(v.position) << ": " << v.message << "\n";
    if (!rep.pending_invariants.empty()) {
        std::cout << "pending:";
        for (int k : rep.pending_invariants) std::cout << " INV" << k;
        std::cout << "\n";
    }
    std::cout << (rep.pass ? "PASS" : "FAIL") << " asks=" << rep.stats.asks << " answers=" << rep.stats.answers
              << " termination=" << to_string(rep.stats.termination) << "\n";
    if (!a.report.empty()) {
        nlohmann::json j;
        j["trace"] = a.trace;
        j["interface"] = {{"input", render(iface.input)}, {"output", render(iface.output)}, {"level", iface.prime}};
        j["verdict"] = rep.pass ? "pass" : "fail";
        j["violations"] = nlohmann::json::array();
        for (const auto& v : rep.violations)
            j["violations"].push_back(
                {{"invariant", v.invariant}, {"position", v.position}, {"line", line_of(v.position)}, {"message", v.message}});
        j["pending_invariants"] = rep.pending_invariants;
        j["stats"] = {{"asks", rep.stats.asks},
                      {"terminate_requests", rep.stats.terminate_requests},
                      {"answers", rep.stats.answers},
                      {"values", rep.stats.values},
                      {"pending", rep.stats.pending},
                      {"termination", to_string(rep.stats.termination)}};
        write_file(a.report, j.dump(2) + "\n");
    }
    return rep.pass ? kPass : kViolation;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    bool normal = false;
    bool early = false;
    std::int64_t n = -1;
    std::int64_t r = -1;
    bool no_wait = false;
    std::string mode = "coroutine";
    std::string iface = "I,O";
    int level = 0;
    bool expand = false;
};

int run_generate(const GenerateArgs& a, const Globals& g)
{
    if (a.normal == a.early) throw UsageError("pass exactly one of --normal and --early");
    if (a.n < 0) throw UsageError("--n is required");
    SequenceMode mode;
    if (a.mode == "coroutine") mode = SequenceMode::coroutine;
    else if (a.mode == "in-order") mode = SequenceMode::concurrent_in_order;
    else if (a.mode == "out-of-order") mode = SequenceMode::concurrent_out_of_order;
    else throw UsageError("--mode must be coroutine, in-order or out-of-order");
    auto [in, out] = parse_iface(a.iface);
    InterfaceSpec iface(in, out, a.level);

    SequenceParams p;
    try {
        if (a.normal) {
            p = SequenceParams::normal(a.n, mode);
        } else {
            if (a.r < 0) throw UsageError("--r is required with --early");
            if (a.r > a.n) throw UsageError("--r must not exceed --n for an early termination");
            p = SequenceParams::early(a.n, a.r, !a.no_wait, mode);
        }
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    }
    OrderExpr x = generate_sequence(p, iface);
    std::cout << render(x) << "\n";
    if (!a.expand) return kPass;

    auto hs = linearize(normalize(x));
    fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "trace_%04zu.trace", i + 1);
        write_file(dir / name, render_trace(hs[i]));
        std::cout << (dir / name).string() << " " << hs[i].size() << " events\n";
    }
    return kPass;
}

// ---------------------------------------------------------------------------
// norm / entails

int run_norm(const std::string& expr, bool lin)
{
    OrderExpr x = normalize(parse_order(expr));
    std::cout << render(x) << "\n";
    if (lin)
        for (const auto& h : linearize(x)) std::cout << one_line(h) << "\n";
    return kPass;
}

int run_entails(const std::string& trace, const std::string& expr, const std::vector<std::string>& params)
{
    Trace t = read_trace_file(trace);
    Binding b;
    std::set<std::string> names;
    for (const auto& p : params) {
        for (const auto& [k, v] : parse_kv(p)) {
            names.insert(k);
            if (v == "true" || v == "false") b.set(k, v == "true");
            else b.set(k, as_nat(k, v));
        }
    }
    bool ok = entails(t.history, parse_order(expr, names), b);
    std::cout << (ok ? "true" : "false") << "\n";
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    std::string source = "n=2,err=false";
    std::vector<std::string> transformers;
    std::string sink = "r=2,err=false,w=true";
    bool faulty = false;
    bool verbatim = false;
    std::string schedule;
    std::vector<std::string> rules;
    std::vector<std::string> params;
    std::vector<std::string> ifaces;
};

int run_run(const RunArgs& a, const Globals& g)
{
    ScheduleMode mode = ScheduleMode::deterministic;
    std::uint64_t seed = g.seed;
    if (!a.schedule.empty()) {
        if (a.schedule == "all") {
            mode = ScheduleMode::exhaustive;
        } else if (a.schedule.rfind("seed=", 0) == 0) {
            seed = static_cast<std::uint64_t>(as_nat("seed", a.schedule.substr(5)));
        } else {
            throw UsageError("--schedule expects seed=N or all");
        }
    }

    EngineConfig cfg;
    std::vector<InterfaceSpec> ifaces;
    std::string label;
    if (!a.rules.empty()) {
        Binding b;
        for (const auto& p : a.params)
            for (const auto& [k, v] : parse_kv(p)) {
                if (v == "true" || v == "false") b.set(k, v == "true");
                else b.set(k, as_nat(k, v));
            }
        for (const auto& path : a.rules) {
            RuleSet rs = parse_rules(read_file(path));
            Binding mine;
            for (const auto& prm : rs.params) {
                const BindingValue* v = b.find(prm.name);
                if (!v) throw UsageError("module " + rs.name + " needs --param " + prm.name + "=...");
                mine.set(prm.name, *v);
            }
            label += (label.empty() ? "" : "+") + rs.name;
            cfg.modules.push_back(RuleSetInstance{std::move(rs), std::move(mine)});
        }
        for (const auto& f : a.ifaces) {
            auto at = f.find('@');
            auto [in, out] = parse_iface(f.substr(0, at));
            int level = at == std::string::npos ? 0 : static_cast<int>(as_nat("level", f.substr(at + 1)));
            ifaces.emplace_back(in, out, level);
        }
        cfg.mode = mode;
        cfg.seed = seed;
    } else {
        Pipeline p;
        p.variant = a.verbatim ? RuleVariant::verbatim : RuleVariant::reference;
        apply_kv("source", a.source, {"n", "err"}, [&](const std::string& k, const std::string& v) {
            if (k == "n") p.source.n = as_nat(k, v);
            else p.source.err = as_bool(k, v);
        });
        for (const auto& t : a.transformers) {
            Pipeline::TransformerStage st;
            st.faulty = a.faulty;
            apply_kv("transformer", t, {"r", "err"}, [&](const std::string& k, const std::string& v) {
                if (k == "r") st.params.r = as_nat(k, v);
                else st.params.err = as_bool(k, v);
            });
            p.transformers.push_back(st);
        }
        if (a.faulty && p.transformers.empty()) throw UsageError("--faulty-take needs a --transformer");
        apply_kv("sink", a.sink, {"r", "err", "w"}, [&](const std::string& k, const std::string& v) {
            if (k == "r") p.sink.r = as_nat(k, v);
            else if (k == "err") p.sink.err = as_bool(k, v);
            else p.sink.wait = as_bool(k, v);
        });
        cfg = compose(p, mode, seed);
        ifaces = p.component().interfaces();
        label = describe(p);
    }
    cfg.max_steps = g.max_steps;

    auto executions = Engine(cfg).run();
    fs::path dir = g.out.empty() ? fs::path("run_out") : fs::path(g.out);
    fs::create_directories(dir);
    std::ostringstream manifest;
    manifest << "# " << label << "\n";
    manifest << "# schedule " << (mode == ScheduleMode::exhaustive ? "all" : "seed=" + std::to_string(seed)) << "\n";
    bool violation = false;
    CheckOptions opts;
    opts.finite = true;
    for (std::size_t i = 0; i < executions.size(); ++i) {
        const History& h = executions[i].history;
        char name[32];
        std::snprintf(name, sizeof name, "history_%04zu.trace", i + 1);
        write_file(dir / name, render_trace(h));
        std::string verdict = ifaces.empty() ? "UNCHECKED" : "PASS";
        std::set<int> invs;
        for (const auto& f : ifaces) {
            try {
                auto rep = check(project(h, f), f, opts);
                for (const auto& v : rep.violations) invs.insert(v.invariant);
            } catch (const MalformedTrace&) {
                invs.insert(0);
            }
        }
        if (!invs.empty()) {
            violation = true;
            verdict = "FAIL";
            for (int k : invs) verdict += k ? " INV" + std::to_string(k) : " MALFORMED";
        }
        manifest << label << " -> " << name << " -> " << verdict << "\n";
        std::cout << name << ": " << verdict << "\n";
    }
    write_file(dir / "manifest.txt", manifest.str());
    std::cout << executions.size() << " histories written to " << dir.string() << "\n";
    return violation ? kViolation : kPass;
}

// ---------------------------------------------------------------------------
// conform

struct ConformArgs {
    std::int64_t max_n = 2;
    std::size_t max_transformers = 1;
    bool faulty = false;
    bool verbatim = false;
    bool no_shapes = false;
    bool out_of_order = false;
    bool concurrent = false;
    unsigned threads = 0;
    bool no_timing = false;
};

int run_conform(const ConformArgs& a, const Globals& g)
{
    SweepConfig cfg;
    cfg.max_n = a.max_n;
    cfg.max_transformers = a.max_transformers;
    cfg.faulty_take = a.faulty;
    cfg.variant = a.verbatim ? RuleVariant::verbatim : RuleVariant::reference;
    cfg.check_shapes = !a.no_shapes;
    cfg.check.allow_out_of_order = a.out_of_order;
    cfg.check.allow_concurrent_asks = a.concurrent;
    cfg.threads = a.threads;
    cfg.max_steps = g.max_steps;
    SweepReport rep;
    try {
        rep = conform(cfg);
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    }
    std::string text = rep.render(!a.no_timing);
    std::cout << text;
    if (!g.out.empty()) write_file(fs::path(g.out) / "conform_report.txt", text);
    return rep.pass() ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pull-stream protocol checker, generator and reference pipeline runner"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    Globals g;
    bool version = false;
    app.add_flag("--version", version, "Print the version and exit");
    app.add_option("--seed", g.seed, "Seed for deterministic schedules");
    app.add_option("--max-steps", g.max_steps, "Step cap per execution");
    app.add_option("--out", g.out, "Output directory");

    CheckArgs ca;
    auto* check_cmd = app.add_subcommand("check", "Check one interface trace against the protocol invariants");
    check_cmd->add_option("trace", ca.trace, "Trace file")->required();
    check_cmd->add_option("--iface", ca.iface, "Requesting and answering ports, e.g. I,O")->required();
    check_cmd->add_option("--level", ca.level, "Prime level of the interface variables (default: from the trace)");
    check_cmd->add_flag("--finite", ca.finite, "Trace is complete");
    check_cmd->add_flag("--allow-out-of-order", ca.out_of_order, "Accept answers in any order");
    check_cmd->add_flag("--allow-concurrent-asks", ca.concurrent, "Accept several pending asks");
    check_cmd->add_option("--report", ca.report, "Write a JSON report to this file");

    GenerateArgs ga;
    auto* gen_cmd = app.add_subcommand("generate", "Print a generator expression and optionally its traces");
    gen_cmd->add_flag("--normal", ga.normal, "Normal sequence");
    gen_cmd->add_flag("--early", ga.early, "Early-terminated sequence");
    gen_cmd->add_option("--n", ga.n, "Number of values");
    gen_cmd->add_option("--r", ga.r, "Number of asks before termination");
    gen_cmd->add_flag("--no-wait", ga.no_wait, "Terminate without waiting for the last answer");
    gen_cmd->add_option("--mode", ga.mode, "coroutine, in-order or out-of-order");
    gen_cmd->add_option("--iface", ga.iface, "Ports, default I,O");
    gen_cmd->add_option("--level", ga.level, "Prime level");
    gen_cmd->add_flag("--expand", ga.expand, "Write every linearization as a trace file under --out");

    std::string norm_expr;
    bool norm_lin = false;
    auto* norm_cmd = app.add_subcommand("norm", "Normalize a partial-order expression");
    norm_cmd->add_option("expr", norm_expr, "Expression")->required();
    norm_cmd->add_flag("--linearize", norm_lin, "Also print every history");

    std::string ent_trace, ent_expr;
    std::vector<std::string> ent_params;
    auto* ent_cmd = app.add_subcommand("entails", "Decide whether a trace satisfies an expression (exit 0 true, 1 false)");
    ent_cmd->add_option("trace", ent_trace, "Trace file")->required();
    ent_cmd->add_option("expr", ent_expr, "Expression")->required();
    ent_cmd->add_option("--param", ent_params, "Parameter values, e.g. n=2,err=false");

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Run a reference pipeline or rule files");
    run_cmd->add_option("--source", ra.source, "Source parameters n=..,err=..");
    run_cmd->add_option("--transformer", ra.transformers, "Transformer parameters r=..,err=.. (repeatable)");
    run_cmd->add_option("--sink", ra.sink, "Sink parameters r=..,err=..,w=..");
    run_cmd->add_flag("--faulty-take", ra.faulty, "Use the faulty transformer replica");
    run_cmd->add_flag("--verbatim", ra.verbatim, "Use the unguarded published rules");
    run_cmd->add_option("--schedule", ra.schedule, "seed=N or all");
    run_cmd->add_option("--rules", ra.rules, "Rule file (repeatable); replaces the reference pipeline");
    run_cmd->add_option("--param", ra.params, "Parameters for --rules modules, e.g. n=3");
    run_cmd->add_option("--iface", ra.ifaces, "Interface to check with --rules, e.g. C,S or TI,UO@0 (repeatable)");

    ConformArgs co;
    auto* conform_cmd = app.add_subcommand("conform", "Exhaustive conformance sweep of reference pipelines");
    conform_cmd->add_option("--max-n", co.max_n, "Largest n and r");
    conform_cmd->add_option("--max-transformers", co.max_transformers, "Largest number of transformers");
    conform_cmd->add_flag("--faulty-take", co.faulty, "Use the faulty transformer replica");
    conform_cmd->add_flag("--verbatim", co.verbatim, "Use the unguarded published rules");
    conform_cmd->add_flag("--no-shapes", co.no_shapes, "Skip generator shape matching");
    conform_cmd->add_flag("--allow-out-of-order", co.out_of_order, "Relax answer ordering");
    conform_cmd->add_flag("--allow-concurrent-asks", co.concurrent, "Relax concurrent asks");
    conform_cmd->add_option("--threads", co.threads, "Worker threads (0: all cores)");
    conform_cmd->add_flag("--no-timing", co.no_timing, "Omit the wall-time line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    try {
        if (version) {
            std::cout << kVersion << "\n";
            return kPass;
        }
        if (*check_cmd) return run_check(ca);
        if (*gen_cmd) return run_generate(ga, g);
        if (*norm_cmd) return run_norm(norm_expr, norm_lin);
        if (*ent_cmd) return run_entails(ent_trace, ent_expr, ent_params);
        if (*run_cmd) return run_run(ra, g);
        if (*conform_cmd) return run_conform(co, g);
        std::cout << app.help();
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "pullcheck: " << e.what() << "\n";
        return kUsage;
    } catch (const SyntaxError& e) {
        std::cerr << "pullcheck: syntax error: " << e.what() << "\n";
        return kUsage;
    } catch (const LivelockError& e) {
        std::cerr << "pullcheck: " << e.what() << "\n";
        return kViolation;
    } catch (const std::exception& e) {
        std::cerr << "pullcheck: " << e.what() << "\n";
        return kUsage;
    }
}
