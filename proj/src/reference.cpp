#include "pullproto/reference.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace pullproto {

namespace {

struct ShippedFile {
    const char* stem;
    const char* text;
};

const ShippedFile kShipped[] = {
#include "shipped_rules.inc"
};

const RuleSet& parsed(std::string_view stem)
{
    static std::mutex mu;
    static std::map<std::string, RuleSet, std::less<>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(stem);
    if (it != cache.end()) return it->second;
    RuleSet rs = parse_rules(shipped_rules(stem));
    return cache.emplace(std::string(stem), std::move(rs)).first->second;
}

std::string variant_stem(const char* base, RuleVariant v)
{
    return v == RuleVariant::verbatim ? std::string("verbatim/") + base : std::string(base);
}

void require_nat(std::int64_t v, const char* what)
{
    if (v < 0) throw ParameterError(std::string(what) + " must be >= 0");
}

}  // namespace

std::string_view shipped_rules(std::string_view stem)
{
    for (const auto& f : kShipped)
        if (stem == f.stem) return f.text;
    throw std::out_of_range("no shipped rule file '" + std::string(stem) + "'");
}

std::vector<std::string> shipped_rule_names()
{
    std::vector<std::string> out;
    for (const auto& f : kShipped) out.emplace_back(f.stem);
    return out;
}

RuleSetInstance source_rules(const SourceParams& p, RuleVariant v)
{
    require_nat(p.n, "source n");
    return RuleSetInstance{parsed(variant_stem("source", v)), Binding{{"n", p.n}, {"err", p.err}}};
}

RuleSetInstance sink_rules(const SinkParams& p, RuleVariant v)
{
    require_nat(p.r, "sink r");
    return RuleSetInstance{parsed(variant_stem("sink", v)), Binding{{"r", p.r}, {"err", p.err}, {"w", p.wait}}};
}

RuleSetInstance transformer_rules(const TransformerParams& p, RuleVariant v)
{
    require_nat(p.r, "transformer r");
    return RuleSetInstance{parsed(variant_stem("transformer", v)), Binding{{"r", p.r}, {"err", p.err}}};
}

RuleSetInstance faulty_take_rules(const TransformerParams& p)
{
    require_nat(p.r, "transformer r");
    return RuleSetInstance{parsed("faulty_take"), Binding{{"r", p.r}, {"err", p.err}}};
}

// ---------------------------------------------------------------------------
// Rewiring

namespace {

using PortMap = std::vector<std::pair<std::string, Port>>;

Event rewire_event(const Event& e, const PortMap& ports, int prime_shift)
{
    Event out = e;
    if (out.port) {
        for (const auto& [from, to] : ports) {
            if (out.port->name == from && !out.port->index) {
                out.port = to;
                break;
            }
        }
    }
    auto bump = [&](int& prime) {
        prime += prime_shift;
        if (prime < 0) throw ShapeError("prime level below zero after rewiring '" + render(e) + "'");
    };
    if (auto* r = std::get_if<Request>(&out.body)) {
        for (auto& a : r->args) {
            if (auto* v = std::get_if<StreamVar>(&a)) bump(v->prime);
            else if (auto* v = std::get_if<StreamValue>(&a)) bump(v->prime);
        }
    } else if (auto* an = std::get_if<Answer>(&out.body)) {
        bump(an->var.prime);
        if (auto* v = std::get_if<StreamValue>(&an->value)) bump(v->prime);
    }
    return out;
}

OrderExpr rewire_expr(const OrderExpr& x, const PortMap& ports, int prime_shift)
{
    using K = OrderExpr::Kind;
    switch (x.kind()) {
    case K::event: return OrderExpr::event(rewire_event(x.event(), ports, prime_shift));
    case K::seq: return OrderExpr::seq(rewire_expr(x.lhs(), ports, prime_shift), rewire_expr(x.rhs(), ports, prime_shift));
    case K::and_:
        return OrderExpr::conj(rewire_expr(x.lhs(), ports, prime_shift), rewire_expr(x.rhs(), ports, prime_shift));
    case K::or_: return OrderExpr::disj(rewire_expr(x.lhs(), ports, prime_shift), rewire_expr(x.rhs(), ports, prime_shift));
    case K::not_: return OrderExpr::negate(rewire_expr(x.operand(), ports, prime_shift));
    case K::quant: return OrderExpr::quant(x.quant_kind(), x.quant_vars(), rewire_expr(x.operand(), ports, prime_shift));
    default: return x;
    }
}

}  // namespace

RuleSetInstance rewire(const RuleSetInstance& module, const PortMap& ports, int prime_shift)
{
    RuleSetInstance out = module;
    for (auto& rule : out.rules.rules) {
        rule.antecedent = rewire_expr(rule.antecedent, ports, prime_shift);
        rule.consequent = rewire_event(rule.consequent, ports, prime_shift);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Components

Component Component::source(const SourceParams& p, RuleVariant v)
{
    Component c;
    c.stages_.push_back(Stage{StageRole::source, source_rules(p, v), "source"});
    return c;
}

Component Component::transformer(const TransformerParams& p, RuleVariant v)
{
    Component c;
    c.stages_.push_back(Stage{StageRole::transformer, transformer_rules(p, v), "transformer"});
    return c;
}

Component Component::faulty_take(const TransformerParams& p)
{
    Component c;
    c.stages_.push_back(Stage{StageRole::transformer, faulty_take_rules(p), "faulty_take"});
    return c;
}

Component Component::sink(const SinkParams& p, RuleVariant v)
{
    Component c;
    c.stages_.push_back(Stage{StageRole::sink, sink_rules(p, v), "sink"});
    return c;
}

std::optional<StageRole> Component::role() const
{
    bool has_source = !stages_.empty() && stages_.front().role == StageRole::source;
    bool has_sink = !stages_.empty() && stages_.back().role == StageRole::sink;
    if (has_source && has_sink) return std::nullopt;
    if (has_source) return StageRole::source;
    if (has_sink) return StageRole::sink;
    return StageRole::transformer;
}

bool Component::closed() const { return !role().has_value(); }

std::size_t Component::transformer_count() const
{
    return static_cast<std::size_t>(std::count_if(stages_.begin(), stages_.end(),
                                                  [](const Stage& s) { return s.role == StageRole::transformer; }));
}

Component connect(const Component& upstream, const Component& downstream)
{
    if (upstream.stages_.empty() || downstream.stages_.empty()) throw ShapeError("cannot connect an empty component");
    if (upstream.stages_.back().role == StageRole::sink)
        throw ShapeError("upstream component ends in a sink and has no output");
    if (downstream.stages_.front().role == StageRole::source)
        throw ShapeError("downstream component starts with a source and has no input");
    Component c = upstream;
    c.stages_.insert(c.stages_.end(), downstream.stages_.begin(), downstream.stages_.end());
    return c;
}

std::vector<InterfaceSpec> Component::interfaces() const
{
    if (!closed()) throw ShapeError("interfaces are defined for a pipeline with one source and one sink");
    const std::size_t k = transformer_count();
    std::vector<InterfaceSpec> out;
    if (k == 0) {
        out.emplace_back(Port("DI"), Port("UO"), 0);
        return out;
    }
    if (k == 1) {
        out.emplace_back(Port("TI"), Port("UO"), 0);
        out.emplace_back(Port("DI"), Port("TO"), 1);
        return out;
    }
    auto numbered = [](const char* name, std::size_t j) {
        return Port(name, StreamIndex::concrete(static_cast<std::int64_t>(j)));
    };
    out.emplace_back(numbered("TI", 1), Port("UO"), 0);
    for (std::size_t j = 1; j < k; ++j) out.emplace_back(numbered("TI", j + 1), numbered("TO", j), static_cast<int>(j));
    out.emplace_back(Port("DI"), numbered("TO", k), static_cast<int>(k));
    return out;
}

std::vector<RuleSetInstance> Component::wired() const
{
    auto ifaces = interfaces();
    const std::size_t k = ifaces.size() - 1;
    std::vector<RuleSetInstance> out;
    std::size_t t = 0;
    for (const auto& stage : stages_) {
        RuleSetInstance m;
        switch (stage.role) {
        case StageRole::source:
            m = rewire(stage.module, {{"TI", ifaces[0].input}, {"UO", ifaces[0].output}}, 0);
            break;
        case StageRole::transformer:
            ++t;
            m = rewire(stage.module,
                       {{"TI", ifaces[t - 1].input},
                        {"UO", ifaces[t - 1].output},
                        {"DI", ifaces[t].input},
                        {"TO", ifaces[t].output}},
                       static_cast<int>(t) - 1);
            if (k > 1) m.rules.name += "_" + std::to_string(t);
            break;
        case StageRole::sink:
            m = rewire(stage.module, {{"DI", ifaces[k].input}, {"TO", ifaces[k].output}}, static_cast<int>(k) - 1);
            break;
        }
        out.push_back(std::move(m));
    }
    return out;
}

Component Pipeline::component() const
{
    Component c = Component::source(source, variant);
    for (const auto& t : transformers)
        c = connect(c, t.faulty ? Component::faulty_take(t.params) : Component::transformer(t.params, variant));
    return connect(c, Component::sink(sink, variant));
}

EngineConfig compose(const Component& c, ScheduleMode mode, std::uint64_t seed)
{
    if (!c.closed()) throw ShapeError("a runnable pipeline needs exactly one source and one sink");
    EngineConfig cfg;
    cfg.modules = c.wired();
    cfg.mode = mode;
    cfg.seed = seed;
    return cfg;
}

EngineConfig compose(const Pipeline& p, ScheduleMode mode, std::uint64_t seed)
{
    return compose(p.component(), mode, seed);
}

// ---------------------------------------------------------------------------
// Expected shapes

std::vector<std::vector<Shape>> expected_shapes(const Pipeline& p)
{
    const std::size_t k = p.transformers.size();
    // Values available at each interface, and the demand placed on it.
    std::vector<std::int64_t> avail(k + 1), demand(k + 1);
    std::vector<bool> waits(k + 1);
    avail[0] = p.source.n;
    for (std::size_t t = 1; t <= k; ++t) avail[t] = std::min(avail[t - 1], p.transformers[t - 1].params.r);
    demand[k] = p.sink.r;
    waits[k] = p.sink.wait;
    for (std::size_t t = k; t >= 1; --t) {
        std::int64_t r = p.transformers[t - 1].params.r;
        demand[t - 1] = std::min(demand[t], r);
        waits[t - 1] = demand[t] <= r ? waits[t] : true;
    }

    std::vector<std::vector<Shape>> out;
    for (std::size_t j = 0; j <= k; ++j) {
        std::int64_t u = avail[j], d = demand[j];
        bool w = waits[j];
        std::vector<Shape> shapes;
        if (d <= u) {
            if (d == 0 || w) {
                shapes.push_back(Shape{false, d, true});
            } else {
                shapes.push_back(Shape{false, d, false});
                shapes.push_back(Shape{false, d, true});
            }
        } else if (d == u + 1 && !w) {
            shapes.push_back(Shape{true, u, true});
            shapes.push_back(Shape{false, d, false});
        } else {
            shapes.push_back(Shape{true, u, true});
        }
        out.push_back(std::move(shapes));
    }
    return out;
}

}  // namespace pullproto
