#include "pullproto/order.hpp"

#include <stdexcept>

namespace pullproto {

struct OrderExpr::Data {
    std::optional<Event> event;
    std::vector<OrderExpr> children;
    QuantKind quant = QuantKind::exists;
    std::vector<std::string> vars;
    std::optional<Relation> relation;
    std::variant<bool, std::string> boolean = false;
};

OrderExpr::OrderExpr() : kind_(Kind::empty) {}

OrderExpr OrderExpr::event(Event e)
{
    if (e.is_empty()) return OrderExpr();
    OrderExpr x;
    x.kind_ = Kind::event;
    auto d = std::make_shared<Data>();
    d->event = std::move(e);
    x.data_ = std::move(d);
    return x;
}

#define PULLPROTO_BINARY(fn, K)                      \
    OrderExpr OrderExpr::fn(OrderExpr a, OrderExpr b) \
    {                                                \
        OrderExpr x;                                 \
        x.kind_ = Kind::K;                           \
        auto d = std::make_shared<Data>();           \
        d->children = {std::move(a), std::move(b)};  \
        x.data_ = std::move(d);                      \
        return x;                                    \
    }

PULLPROTO_BINARY(seq, seq)
PULLPROTO_BINARY(conj, and_)
PULLPROTO_BINARY(disj, or_)

#undef PULLPROTO_BINARY

OrderExpr OrderExpr::negate(OrderExpr a)
{
    OrderExpr x;
    x.kind_ = Kind::not_;
    auto d = std::make_shared<Data>();
    d->children = {std::move(a)};
    x.data_ = std::move(d);
    return x;
}

OrderExpr OrderExpr::quant(QuantKind kind, std::vector<std::string> vars, OrderExpr body)
{
    if (vars.empty()) throw std::invalid_argument("quantifier without variables");
    OrderExpr x;
    x.kind_ = Kind::quant;
    auto d = std::make_shared<Data>();
    d->quant = kind;
    d->vars = std::move(vars);
    d->children = {std::move(body)};
    x.data_ = std::move(d);
    return x;
}

OrderExpr OrderExpr::rel(Relation r)
{
    if (r.operands.size() < 2 || r.ops.size() + 1 != r.operands.size())
        throw std::invalid_argument("relation needs at least two operands and one operator between each pair");
    OrderExpr x;
    x.kind_ = Kind::rel;
    auto d = std::make_shared<Data>();
    d->relation = std::move(r);
    x.data_ = std::move(d);
    return x;
}

OrderExpr OrderExpr::boolean(bool b)
{
    OrderExpr x;
    x.kind_ = Kind::boolean;
    auto d = std::make_shared<Data>();
    d->boolean = b;
    x.data_ = std::move(d);
    return x;
}

OrderExpr OrderExpr::param(std::string name)
{
    OrderExpr x;
    x.kind_ = Kind::boolean;
    auto d = std::make_shared<Data>();
    d->boolean = std::move(name);
    x.data_ = std::move(d);
    return x;
}

namespace {

OrderExpr chain(const std::vector<OrderExpr>& items, OrderExpr (*make)(OrderExpr, OrderExpr))
{
    if (items.empty()) return OrderExpr();
    OrderExpr acc = items.back();
    for (std::size_t k = items.size() - 1; k-- > 0;) acc = make(items[k], acc);
    return acc;
}

}  // namespace

OrderExpr OrderExpr::seq(const std::vector<OrderExpr>& items) { return chain(items, &OrderExpr::seq); }
OrderExpr OrderExpr::conj(const std::vector<OrderExpr>& items) { return chain(items, &OrderExpr::conj); }
OrderExpr OrderExpr::disj(const std::vector<OrderExpr>& items) { return chain(items, &OrderExpr::disj); }

const Event& OrderExpr::event() const
{
    if (kind_ != Kind::event) throw std::logic_error("not an event node");
    return *data_->event;
}

const OrderExpr& OrderExpr::lhs() const
{
    if (kind_ != Kind::seq && kind_ != Kind::and_ && kind_ != Kind::or_) throw std::logic_error("not a binary node");
    return data_->children[0];
}

const OrderExpr& OrderExpr::rhs() const
{
    if (kind_ != Kind::seq && kind_ != Kind::and_ && kind_ != Kind::or_) throw std::logic_error("not a binary node");
    return data_->children[1];
}

const OrderExpr& OrderExpr::operand() const
{
    if (kind_ != Kind::not_ && kind_ != Kind::quant) throw std::logic_error("not a unary node");
    return data_->children[0];
}

QuantKind OrderExpr::quant_kind() const
{
    if (kind_ != Kind::quant) throw std::logic_error("not a quantifier");
    return data_->quant;
}

const std::vector<std::string>& OrderExpr::quant_vars() const
{
    if (kind_ != Kind::quant) throw std::logic_error("not a quantifier");
    return data_->vars;
}

const Relation& OrderExpr::relation() const
{
    if (kind_ != Kind::rel) throw std::logic_error("not a relation");
    return *data_->relation;
}

const std::variant<bool, std::string>& OrderExpr::bool_value() const
{
    if (kind_ != Kind::boolean) throw std::logic_error("not a boolean");
    return data_->boolean;
}

std::size_t OrderExpr::size() const
{
    std::size_t n = 1;
    if (data_)
        for (const auto& c : data_->children) n += c.size();
    return n;
}

bool operator==(const OrderExpr& a, const OrderExpr& b)
{
    if (a.kind_ != b.kind_) return false;
    if (a.data_ == b.data_) return true;
    using K = OrderExpr::Kind;
    switch (a.kind_) {
    case K::empty: return true;
    case K::event: return *a.data_->event == *b.data_->event;
    case K::rel: return *a.data_->relation == *b.data_->relation;
    case K::boolean: return a.data_->boolean == b.data_->boolean;
    case K::quant:
        if (a.data_->quant != b.data_->quant || a.data_->vars != b.data_->vars) return false;
        break;
    default: break;
    }
    return a.data_->children == b.data_->children;
}

namespace {

void collect(const OrderExpr& x, std::vector<Event>& out)
{
    using K = OrderExpr::Kind;
    switch (x.kind()) {
    case K::event: out.push_back(x.event()); return;
    case K::seq:
    case K::and_:
    case K::or_:
        collect(x.lhs(), out);
        collect(x.rhs(), out);
        return;
    case K::not_:
    case K::quant: collect(x.operand(), out); return;
    default: return;
    }
}

void index_vars(const StreamIndex& idx, std::set<std::string>& out)
{
    if (idx.var) out.insert(*idx.var);
}

void event_vars(const Event& e, std::set<std::string>& out)
{
    if (e.port && e.port->index) index_vars(*e.port->index, out);
    if (auto* r = std::get_if<Request>(&e.body)) {
        for (const auto& a : r->args) {
            if (auto* v = std::get_if<StreamVar>(&a)) index_vars(v->index, out);
            if (auto* v = std::get_if<StreamValue>(&a)) index_vars(v->index, out);
        }
    } else if (auto* an = std::get_if<Answer>(&e.body)) {
        index_vars(an->var.index, out);
        if (auto* v = std::get_if<StreamValue>(&an->value)) index_vars(v->index, out);
    } else if (auto* m = std::get_if<MethodCall>(&e.body)) {
        index_vars(m->index, out);
    }
}

void free_vars(const OrderExpr& x, std::set<std::string>& out)
{
    using K = OrderExpr::Kind;
    switch (x.kind()) {
    case K::event: event_vars(x.event(), out); return;
    case K::rel:
        for (const auto& o : x.relation().operands) index_vars(o, out);
        return;
    case K::seq:
    case K::and_:
    case K::or_:
        free_vars(x.lhs(), out);
        free_vars(x.rhs(), out);
        return;
    case K::not_: free_vars(x.operand(), out); return;
    case K::quant: {
        std::set<std::string> inner;
        free_vars(x.operand(), inner);
        for (const auto& v : x.quant_vars()) inner.erase(v);
        out.insert(inner.begin(), inner.end());
        return;
    }
    default: return;
    }
}

}  // namespace

std::vector<Event> collect_events(const OrderExpr& x)
{
    std::vector<Event> out;
    collect(x, out);
    return out;
}

std::set<std::string> free_variables(const OrderExpr& x)
{
    std::set<std::string> out;
    free_vars(x, out);
    return out;
}

// ---------------------------------------------------------------------------
// Event categories

namespace {

Event with_port(const Port& port, Event e)
{
    if (!port.name.empty()) e.port = port;
    return e;
}

StreamValue value_for(const StreamVar& var) { return StreamValue{var.index, var.prime}; }

}  // namespace

OrderExpr terminate_of(const Port& port, const StreamVar& var)
{
    return OrderExpr::disj(OrderExpr::event(with_port(port, Event{std::nullopt, Request{"abort", {var}}})),
                           OrderExpr::event(with_port(port, Event{std::nullopt, Request{"error", {Failure{}, var}}})));
}

OrderExpr request_of(const Port& port, const StreamVar& var)
{
    return OrderExpr::disj(OrderExpr::event(with_port(port, Event{std::nullopt, Request{"ask", {var}}})),
                           terminate_of(port, var));
}

OrderExpr terminated_of(const Port& port, const StreamVar& var)
{
    return OrderExpr::disj(OrderExpr::event(with_port(port, Event{std::nullopt, Answer{var, Done{}}})),
                           OrderExpr::event(with_port(port, Event{std::nullopt, Answer{var, Failure{}}})));
}

OrderExpr answer_of(const Port& port, const StreamVar& var)
{
    return OrderExpr::disj(OrderExpr::event(with_port(port, Event{std::nullopt, Answer{var, value_for(var)}})),
                           terminated_of(port, var));
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

enum Level { lvl_or = 0, lvl_and = 1, lvl_unary = 2, lvl_seq = 3, lvl_atom = 4 };

std::string render_operand(const StreamIndex& idx)
{
    if (!idx.var) return std::to_string(idx.offset);
    if (idx.offset == 0) return *idx.var;
    return *idx.var + (idx.offset > 0 ? "+" : "-") + std::to_string(std::abs(idx.offset));
}

const char* render_op(RelOp op)
{
    switch (op) {
    case RelOp::eq: return "=";
    case RelOp::ne: return "!=";
    case RelOp::lt: return "<";
    case RelOp::le: return "=<";
    case RelOp::gt: return ">";
    case RelOp::ge: return ">=";
    }
    return "?";
}

/// Port and variable of an event that is the `k`-th form of a category, or
/// nullopt. Used to re-sugar category choices.
struct CategoryKey {
    std::optional<Port> port;
    StreamVar var;
    bool operator==(const CategoryKey&) const = default;
};

std::optional<CategoryKey> key_if(const OrderExpr& x, const Event& expected_shape)
{
    if (!x.is(OrderExpr::Kind::event)) return std::nullopt;
    const Event& e = x.event();
    const StreamVar* v = e.stream_var();
    if (!v) return std::nullopt;
    Event probe = expected_shape;
    probe.port = e.port;
    if (auto* r = std::get_if<Request>(&probe.body)) {
        for (auto& a : r->args)
            if (std::holds_alternative<StreamVar>(a)) a = *v;
    } else if (auto* an = std::get_if<Answer>(&probe.body)) {
        an->var = *v;
        if (std::holds_alternative<StreamValue>(an->value)) an->value = value_for(*v);
    }
    if (!(probe == e)) return std::nullopt;
    return CategoryKey{e.port, *v};
}

const StreamVar kProbeVar{};

std::optional<CategoryKey> match_terminate(const OrderExpr& x)
{
    if (!x.is(OrderExpr::Kind::or_)) return std::nullopt;
    auto a = key_if(x.lhs(), Event{std::nullopt, Request{"abort", {kProbeVar}}});
    auto b = key_if(x.rhs(), Event{std::nullopt, Request{"error", {Failure{}, kProbeVar}}});
    if (a && b && *a == *b) return a;
    return std::nullopt;
}

std::optional<CategoryKey> match_terminated(const OrderExpr& x)
{
    if (!x.is(OrderExpr::Kind::or_)) return std::nullopt;
    auto a = key_if(x.lhs(), Event{std::nullopt, Answer{kProbeVar, Done{}}});
    auto b = key_if(x.rhs(), Event{std::nullopt, Answer{kProbeVar, Failure{}}});
    if (a && b && *a == *b) return a;
    return std::nullopt;
}

std::optional<CategoryKey> match_request(const OrderExpr& x)
{
    if (!x.is(OrderExpr::Kind::or_)) return std::nullopt;
    auto a = key_if(x.lhs(), Event{std::nullopt, Request{"ask", {kProbeVar}}});
    auto b = match_terminate(x.rhs());
    if (a && b && *a == *b) return a;
    return std::nullopt;
}

std::optional<CategoryKey> match_answer(const OrderExpr& x)
{
    if (!x.is(OrderExpr::Kind::or_)) return std::nullopt;
    auto a = key_if(x.lhs(), Event{std::nullopt, Answer{kProbeVar, StreamValue{}}});
    auto b = match_terminated(x.rhs());
    if (a && b && *a == *b) return a;
    return std::nullopt;
}

std::string render_category(const char* name, const CategoryKey& k)
{
    std::string out;
    if (k.port) out = render(*k.port) + ": ";
    return out + name + "(" + render(k.var) + ")";
}

std::optional<std::string> sugar(const OrderExpr& x)
{
    if (auto k = match_request(x)) return render_category("request", *k);
    if (auto k = match_answer(x)) return render_category("answer", *k);
    if (auto k = match_terminate(x)) return render_category("terminate", *k);
    if (auto k = match_terminated(x)) return render_category("terminated", *k);
    return std::nullopt;
}

std::string render_at(const OrderExpr& x, int min_level, const RenderOptions& opts);

int level_of(const OrderExpr& x, const RenderOptions& opts)
{
    using K = OrderExpr::Kind;
    switch (x.kind()) {
    case K::or_: return opts.sugar && sugar(x) ? lvl_atom : lvl_or;
    case K::and_: return lvl_and;
    case K::not_:
    case K::quant: return lvl_unary;
    case K::seq: return lvl_seq;
    default: return lvl_atom;
    }
}

std::string render_node(const OrderExpr& x, const RenderOptions& opts)
{
    using K = OrderExpr::Kind;
    switch (x.kind()) {
    case K::empty: return "empty";
    case K::event: return render(x.event());
    case K::boolean: {
        const auto& v = x.bool_value();
        if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
        return std::get<std::string>(v);
    }
    case K::rel: {
        const Relation& r = x.relation();
        std::string out = render_operand(r.operands[0]);
        for (std::size_t k = 0; k < r.ops.size(); ++k)
            out += std::string(" ") + render_op(r.ops[k]) + " " + render_operand(r.operands[k + 1]);
        return out;
    }
    case K::not_: return "!" + render_at(x.operand(), lvl_unary, opts);
    case K::quant: {
        std::string out = x.quant_kind() == QuantKind::exists ? "exists " : "forall ";
        for (std::size_t k = 0; k < x.quant_vars().size(); ++k) {
            if (k) out += ", ";
            out += x.quant_vars()[k];
        }
        return out + ". " + render_at(x.operand(), lvl_unary, opts);
    }
    case K::seq: return render_at(x.lhs(), lvl_atom, opts) + " -> " + render_at(x.rhs(), lvl_seq, opts);
    case K::and_: return render_at(x.lhs(), lvl_unary, opts) + " & " + render_at(x.rhs(), lvl_and, opts);
    case K::or_: {
        if (opts.sugar)
            if (auto s = sugar(x)) return *s;
        return render_at(x.lhs(), lvl_and, opts) + " | " + render_at(x.rhs(), lvl_or, opts);
    }
    }
    return "?";
}

std::string render_at(const OrderExpr& x, int min_level, const RenderOptions& opts)
{
    std::string s = render_node(x, opts);
    if (level_of(x, opts) < min_level) return "(" + s + ")";
    return s;
}

}  // namespace

std::string render(const OrderExpr& x, RenderOptions opts) { return render_at(x, lvl_or, opts); }

}  // namespace pullproto
