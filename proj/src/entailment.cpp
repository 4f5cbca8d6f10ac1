#include "pullproto/entailment.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "pullproto/rewrite.hpp"

namespace pullproto {

const BindingValue* Binding::find(const std::string& name) const
{
    auto it = values_.find(name);
    return it == values_.end() ? nullptr : &it->second;
}

std::int64_t Binding::nat(const std::string& name) const
{
    const BindingValue* v = find(name);
    if (!v) throw UnboundVariable("unbound variable '" + name + "'");
    if (auto* n = std::get_if<std::int64_t>(v)) return *n;
    throw EvalError("'" + name + "' is boolean where a number is expected");
}

bool Binding::boolean(const std::string& name) const
{
    const BindingValue* v = find(name);
    if (!v) throw UnboundVariable("unbound parameter '" + name + "'");
    if (auto* b = std::get_if<bool>(v)) return *b;
    throw EvalError("'" + name + "' is a number where a boolean is expected");
}

std::string render(const Binding& b)
{
    std::string out;
    for (const auto& [k, v] : b.values()) {
        if (!out.empty()) out += ",";
        out += k + "=";
        if (auto* n = std::get_if<std::int64_t>(&v)) out += std::to_string(*n);
        else out += std::get<bool>(v) ? "true" : "false";
    }
    return out;
}

namespace {

using K = OrderExpr::Kind;

/// Index variables bound by enumeration, on top of a parameter binding.
class Env {
public:
    explicit Env(const Binding& params) : params_(params) {}

    void push(const std::string& name, std::int64_t v) { locals_.emplace_back(&name, v); }
    void pop() { locals_.pop_back(); }

    std::int64_t nat(const std::string& name) const
    {
        for (auto it = locals_.rbegin(); it != locals_.rend(); ++it)
            if (*it->first == name) return it->second;
        return params_.nat(name);
    }

    bool boolean(const std::string& name) const { return params_.boolean(name); }

    bool binds(const std::string& name) const
    {
        for (const auto& l : locals_)
            if (*l.first == name) return true;
        return params_.has(name);
    }

private:
    const Binding& params_;
    std::vector<std::pair<const std::string*, std::int64_t>> locals_;
};

/// Resolves a pattern index; false when it falls below 1.
bool resolve(StreamIndex& idx, const Env& env)
{
    if (idx.var) {
        idx.offset += env.nat(*idx.var);
        idx.var.reset();
    }
    return idx.offset >= 1;
}

std::optional<Event> ground_in(const Event& pattern, const Env& env)
{
    Event e = pattern;
    if (e.port && e.port->index && !resolve(*e.port->index, env)) return std::nullopt;
    bool ok = true;
    std::visit(
        [&](auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, Request>) {
                for (auto& a : body.args) {
                    if (auto* v = std::get_if<StreamVar>(&a)) ok = ok && resolve(v->index, env);
                    else if (auto* v = std::get_if<StreamValue>(&a)) ok = ok && resolve(v->index, env);
                }
            } else if constexpr (std::is_same_v<T, Answer>) {
                ok = resolve(body.var.index, env);
                if (auto* v = std::get_if<StreamValue>(&body.value)) ok = ok && resolve(v->index, env);
            } else if constexpr (std::is_same_v<T, MethodCall>) {
                ok = resolve(body.index, env);
            }
        },
        e.body);
    if (!ok) return std::nullopt;
    return e;
}

bool compare(std::int64_t a, RelOp op, std::int64_t b)
{
    switch (op) {
    case RelOp::eq: return a == b;
    case RelOp::ne: return a != b;
    case RelOp::lt: return a < b;
    case RelOp::le: return a <= b;
    case RelOp::gt: return a > b;
    case RelOp::ge: return a >= b;
    }
    return false;
}

void flatten_seq(const OrderExpr& x, std::vector<const OrderExpr*>& out)
{
    if (x.is(K::seq)) {
        flatten_seq(x.lhs(), out);
        flatten_seq(x.rhs(), out);
    } else {
        out.push_back(&x);
    }
}

class Evaluator {
public:
    Evaluator(const History& h, Env& env, const EntailOptions& opts) : h_(h), env_(env)
    {
        domain_max_ = h.max_index() + 1;
        if (domain_max_ > opts.max_domain)
            throw BoundExceeded("quantifier domain 1.." + std::to_string(domain_max_) + " exceeds the cap of " +
                                std::to_string(opts.max_domain));
    }

    std::int64_t domain_max() const noexcept { return domain_max_; }

    bool eval(const OrderExpr& x)
    {
        switch (x.kind()) {
        case K::empty: return true;
        case K::event: return holds(x.event());
        case K::boolean: {
            const auto& v = x.bool_value();
            if (auto* b = std::get_if<bool>(&v)) return *b;
            return env_.boolean(std::get<std::string>(v));
        }
        case K::rel: {
            const Relation& r = x.relation();
            std::int64_t prev = value_of(r.operands[0]);
            for (std::size_t k = 0; k < r.ops.size(); ++k) {
                std::int64_t next = value_of(r.operands[k + 1]);
                if (!compare(prev, r.ops[k], next)) return false;
                prev = next;
            }
            return true;
        }
        case K::not_: return !eval(x.operand());
        case K::and_: return eval(x.lhs()) && eval(x.rhs());
        case K::or_: {
            // A choice holds when exactly one of its alternatives does.
            int holding = 0;
            if (!count_choices(x, holding)) return false;
            return holding == 1;
        }
        case K::seq: return eval_seq(x);
        case K::quant: {
            const auto& vars = x.quant_vars();
            bool exists = x.quant_kind() == QuantKind::exists;
            return quantify(vars, 0, exists, x.operand());
        }
        }
        return false;
    }

    /// Evaluates `x` with `vars` existentially bound over the domain.
    bool quantify(const std::vector<std::string>& vars, std::size_t k, bool exists, const OrderExpr& body)
    {
        if (k == vars.size()) return eval(body);
        for (std::int64_t v = 1; v <= domain_max_; ++v) {
            env_.push(vars[k], v);
            bool r = quantify(vars, k + 1, exists, body);
            env_.pop();
            if (exists && r) return true;
            if (!exists && !r) return false;
        }
        return !exists;
    }

private:
    /// Adds the number of true alternatives of the Or chain `x`; stops early
    /// and returns false once two hold.
    bool count_choices(const OrderExpr& x, int& holding)
    {
        if (x.kind() == K::or_) return count_choices(x.lhs(), holding) && count_choices(x.rhs(), holding);
        if (eval(x)) ++holding;
        return holding < 2;
    }

    std::int64_t value_of(const StreamIndex& idx) const
    {
        if (!idx.var) return idx.offset;
        return env_.nat(*idx.var) + idx.offset;
    }

    bool holds(const Event& pattern) const
    {
        auto e = ground_in(pattern, env_);
        return e && h_.position(*e).has_value();
    }

    bool eval_seq(const OrderExpr& x)
    {
        std::vector<const OrderExpr*> items;
        flatten_seq(x, items);
        bool simple = std::all_of(items.begin(), items.end(), [](const OrderExpr* e) { return e->is(K::event); });
        if (!simple) {
            for (const auto* it : items)
                if (it->is(K::rel) || it->is(K::boolean))
                    throw EvalError("relations and booleans cannot be sequenced: " + render(x));
            OrderExpr n = normalize(x);
            if (n.is(K::seq)) {
                std::vector<const OrderExpr*> flat;
                flatten_seq(n, flat);
                for (const auto* it : flat)
                    if (!it->is(K::event) && !it->is(K::seq)) throw EvalError("unsupported sequence: " + render(x));
                return eval_seq(n);
            }
            return eval(n);
        }
        std::optional<std::size_t> last;
        for (const auto* it : items) {
            auto e = ground_in(it->event(), env_);
            if (!e) return false;
            auto p = h_.position(*e);
            if (!p) return false;
            if (last && *p <= *last) return false;
            last = p;
        }
        return true;
    }

    const History& h_;
    Env& env_;
    std::int64_t domain_max_;
};

std::vector<std::string> unbound_free(const OrderExpr& a, const Env& env)
{
    std::vector<std::string> out;
    for (const auto& v : free_variables(a))
        if (!env.binds(v)) out.push_back(v);
    return out;
}

bool entails_env(const History& h, const OrderExpr& a, Env& env, const EntailOptions& opts)
{
    Evaluator ev(h, env, opts);
    auto vars = unbound_free(a, env);
    return ev.quantify(vars, 0, true, a);
}

}  // namespace

bool entails(const History& h, const OrderExpr& a, const Binding& b, EntailOptions opts)
{
    Env env(b);
    return entails_env(h, a, env, opts);
}

std::optional<Event> ground(const Event& pattern, const Binding& b)
{
    Env env(b);
    return ground_in(pattern, env);
}

// ---------------------------------------------------------------------------
// Engine

namespace {

struct CompiledRule {
    std::vector<std::string> consequent_vars;
};

struct HistoryHash {
    std::size_t operator()(const History& h) const noexcept
    {
        std::size_t seed = h.size();
        EventHash eh;
        for (const auto& e : h) seed ^= eh(e) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
        return seed;
    }
};

}  // namespace

struct Engine::Impl {
    std::vector<std::vector<CompiledRule>> rules;  // per module
    std::vector<std::size_t> order;                // modules sorted by name
};

Engine::Engine(EngineConfig cfg) : cfg_(std::move(cfg))
{
    if (cfg_.max_steps < 1) throw EngineError("step cap must be at least 1");
    auto impl = std::make_shared<Impl>();
    for (const auto& m : cfg_.modules) {
        for (const auto& p : m.rules.params) {
            const BindingValue* v = m.params.find(p.name);
            if (!v) throw EngineError("module '" + m.rules.name + "': parameter '" + p.name + "' is not bound");
            bool is_nat = std::holds_alternative<std::int64_t>(*v);
            if (is_nat != (p.kind == ParamKind::nat))
                throw EngineError("module '" + m.rules.name + "': parameter '" + p.name + "' has the wrong kind");
        }
        std::vector<CompiledRule> compiled;
        for (const auto& r : m.rules.rules) {
            CompiledRule c;
            for (const auto& v : free_variables(OrderExpr::event(r.consequent)))
                if (!m.params.has(v)) c.consequent_vars.push_back(v);
            compiled.push_back(std::move(c));
        }
        impl->rules.push_back(std::move(compiled));
    }
    impl->order.resize(cfg_.modules.size());
    for (std::size_t k = 0; k < impl->order.size(); ++k) impl->order[k] = k;
    std::stable_sort(impl->order.begin(), impl->order.end(), [&](std::size_t a, std::size_t b) {
        return cfg_.modules[a].rules.name < cfg_.modules[b].rules.name;
    });
    impl_ = std::move(impl);
}

std::vector<RuleInstance> Engine::enabled(const History& h) const
{
    std::vector<RuleInstance> out;
    const std::int64_t dmax = h.max_index() + 1;
    if (dmax > cfg_.entail.max_domain) throw BoundExceeded("history indexes exceed the quantifier domain cap");
    for (std::size_t m : impl_->order) {
        const RuleSetInstance& mod = cfg_.modules[m];
        Env env(mod.params);
        for (std::size_t r = 0; r < mod.rules.rules.size(); ++r) {
            const Rule& rule = mod.rules.rules[r];
            const auto& cvars = impl_->rules[m][r].consequent_vars;
            std::vector<std::int64_t> vals(cvars.size(), 1);
            while (true) {
                for (std::size_t k = 0; k < cvars.size(); ++k) env.push(cvars[k], vals[k]);
                auto e = ground_in(rule.consequent, env);
                if (e && !h.position(*e) && entails_env(h, rule.antecedent, env, cfg_.entail)) {
                    Binding b;
                    for (std::size_t k = 0; k < cvars.size(); ++k) b.set(cvars[k], vals[k]);
                    out.push_back(RuleInstance{m, r, std::move(b), std::move(*e)});
                }
                for (std::size_t k = 0; k < cvars.size(); ++k) env.pop();
                std::size_t k = 0;
                while (k < vals.size() && vals[k] == dmax) vals[k++] = 1;
                if (k == vals.size()) break;
                ++vals[k];
            }
        }
    }
    std::vector<std::size_t> rank(cfg_.modules.size());
    for (std::size_t k = 0; k < impl_->order.size(); ++k) rank[impl_->order[k]] = k;
    std::sort(out.begin(), out.end(), [&](const RuleInstance& a, const RuleInstance& b) {
        if (rank[a.ruleset] != rank[b.ruleset]) return rank[a.ruleset] < rank[b.ruleset];
        if (a.rule != b.rule) return a.rule < b.rule;
        return a.binding < b.binding;
    });
    return out;
}

std::optional<History> Engine::step(const History& h,
                                    const std::function<std::size_t(const std::vector<RuleInstance>&)>& choose) const
{
    auto en = enabled(h);
    if (en.empty()) return std::nullopt;
    std::size_t k = choose(en);
    if (k >= en.size()) throw EngineError("chooser picked a rule instance out of range");
    return h.appended(en[k].consequent);
}

std::vector<Execution> Engine::run(const StepObserver& observer) const
{
    std::vector<Execution> out;
    if (cfg_.mode == ScheduleMode::deterministic) {
        std::mt19937_64 rng(cfg_.seed);
        Execution ex;
        while (true) {
            auto en = enabled(ex.history);
            if (observer) observer(ex.history, en);
            if (en.empty()) break;
            if (ex.history.size() >= cfg_.max_steps)
                throw LivelockError("no quiescence after " + std::to_string(cfg_.max_steps) + " steps", ex.history);
            const auto& pick = en[rng() % en.size()];
            ex.history.append(pick.consequent);
            ex.fired.push_back(FiredRule{pick.ruleset, pick.rule, pick.binding});
        }
        out.push_back(std::move(ex));
        return out;
    }

    std::unordered_set<History, HistoryHash> visited;
    std::vector<Execution> stack;
    stack.push_back(Execution{});
    visited.insert(History{});
    while (!stack.empty()) {
        Execution ex = std::move(stack.back());
        stack.pop_back();
        auto en = enabled(ex.history);
        if (observer) observer(ex.history, en);
        if (en.empty()) {
            out.push_back(std::move(ex));
            if (out.size() > cfg_.max_histories)
                throw EngineError("more than " + std::to_string(cfg_.max_histories) + " quiescent histories");
            continue;
        }
        if (ex.history.size() >= cfg_.max_steps)
            throw LivelockError("no quiescence after " + std::to_string(cfg_.max_steps) + " steps", ex.history);
        for (auto it = en.rbegin(); it != en.rend(); ++it) {
            History next = ex.history.appended(it->consequent);
            if (!visited.insert(next).second) continue;
            Execution child{std::move(next), ex.fired};
            child.fired.push_back(FiredRule{it->ruleset, it->rule, it->binding});
            stack.push_back(std::move(child));
        }
    }
    std::sort(out.begin(), out.end(), [](const Execution& a, const Execution& b) { return a.history < b.history; });
    return out;
}

std::vector<History> run_to_quiescence(const EngineConfig& cfg)
{
    Engine engine(cfg);
    std::vector<History> out;
    for (auto& ex : engine.run()) out.push_back(std::move(ex.history));
    return out;
}

}  // namespace pullproto
