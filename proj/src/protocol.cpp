#include "pullproto/protocol.hpp"

#include <algorithm>

#include "pullproto/rewrite.hpp"

namespace pullproto {

InterfaceSpec::InterfaceSpec(Port in, Port out, int prime_level)
    : input(std::move(in)), output(std::move(out)), prime(prime_level)
{
    if (input == output) throw std::invalid_argument("interface ports must differ");
}

StreamVar InterfaceSpec::var(std::int64_t i) const { return StreamVar{var_name, StreamIndex::concrete(i), prime}; }

StreamValue InterfaceSpec::value(std::int64_t i) const { return StreamValue{StreamIndex::concrete(i), prime}; }

bool operator==(const InterfaceSpec& a, const InterfaceSpec& b)
{
    return a.input == b.input && a.output == b.output && a.prime == b.prime && a.var_name == b.var_name;
}

// ---------------------------------------------------------------------------
// Categories

bool is_terminate(const Event& e)
{
    auto k = e.kind();
    return (k == EventKind::abort || k == EventKind::error) && e.stream_var();
}

bool is_request(const Event& e) { return (e.kind() == EventKind::ask && e.stream_var()) || is_terminate(e); }

bool is_terminated(const Event& e)
{
    auto k = e.kind();
    return k == EventKind::done || k == EventKind::failure;
}

bool is_answer(const Event& e) { return e.is_answer(); }

namespace {

bool same_var(const Event& e, const StreamVar& var)
{
    const StreamVar* v = e.stream_var();
    return v && *v == var;
}

}  // namespace

bool matches_terminate(const Event& e, const StreamVar& var) { return is_terminate(e) && same_var(e, var); }
bool matches_request(const Event& e, const StreamVar& var) { return is_request(e) && same_var(e, var); }
bool matches_terminated(const Event& e, const StreamVar& var) { return is_terminated(e) && same_var(e, var); }
bool matches_answer(const Event& e, const StreamVar& var) { return is_answer(e) && same_var(e, var); }

// ---------------------------------------------------------------------------
// Generators

SequenceParams SequenceParams::normal(std::int64_t n, SequenceMode mode)
{
    if (n < 0) throw ParameterError("n must be >= 0");
    return SequenceParams{n, n + 1, true, mode};
}

SequenceParams SequenceParams::early(std::int64_t n, std::int64_t r, bool wait, SequenceMode mode)
{
    if (n < 0) throw ParameterError("n must be >= 0");
    if (r < 0) throw ParameterError("r must be >= 0");
    if (r > n + 1) throw ParameterError("r > n+1 is not a valid stream (r=" + std::to_string(r) + ", n=" + std::to_string(n) + ")");
    if (r == n + 1) throw ParameterError("r = n+1 is the normal sequence, not an early termination");
    return SequenceParams{n, r, wait, mode};
}

namespace {

OrderExpr ask(const InterfaceSpec& f, std::int64_t i) { return OrderExpr::event(Event::ask(f.input, f.var(i))); }

OrderExpr value(const InterfaceSpec& f, std::int64_t i)
{
    return OrderExpr::event(Event::assign(f.output, f.var(i), f.value(i)));
}

OrderExpr terminated(const InterfaceSpec& f, std::int64_t i) { return terminated_of(f.output, f.var(i)); }

OrderExpr terminate(const InterfaceSpec& f, std::int64_t i) { return terminate_of(f.input, f.var(i)); }

void validate(const SequenceParams& p)
{
    if (p.n < 0 || p.r < 0) throw ParameterError("n and r must be >= 0");
    if (p.r > p.n + 1) throw ParameterError("r > n+1 is not a valid stream");
}

}  // namespace

OrderExpr normal_sequence(std::int64_t n, const InterfaceSpec& iface)
{
    if (n < 0) throw ParameterError("n must be >= 0");
    std::vector<OrderExpr> items;
    for (std::int64_t i = 1; i <= n; ++i) {
        items.push_back(ask(iface, i));
        items.push_back(value(iface, i));
    }
    items.push_back(ask(iface, n + 1));
    items.push_back(terminated(iface, n + 1));
    return OrderExpr::seq(items);
}

OrderExpr early_terminated_sequence(std::int64_t n, std::int64_t r, bool wait, const InterfaceSpec& iface)
{
    if (n < 0) throw ParameterError("n must be >= 0");
    if (r < 0 || r > n)
        throw ParameterError("early termination needs 0 <= r <= n (r=" + std::to_string(r) + ", n=" + std::to_string(n) + ")");
    std::vector<OrderExpr> items;
    std::optional<OrderExpr> saved;  // the T slot
    for (std::int64_t i = 1; i <= r + 1; ++i) {
        if (i <= r - 1 || (i == r && wait)) {
            items.push_back(ask(iface, i));
            items.push_back(value(iface, i));
        } else if (i == r) {
            items.push_back(ask(iface, i));
            saved = terminated(iface, i);
        } else {
            items.push_back(terminate(iface, i));
            if (saved) items.push_back(*saved);
            items.push_back(terminated(iface, i));
        }
    }
    return OrderExpr::seq(items);
}

namespace {

/// Every combination of concrete forms for a list of category choices.
void expand_choices(const std::vector<std::vector<Event>>& choices, std::size_t k, std::vector<Event>& picked,
                    std::vector<std::vector<Event>>& out)
{
    if (k == choices.size()) {
        out.push_back(picked);
        return;
    }
    for (const auto& e : choices[k]) {
        picked.push_back(e);
        expand_choices(choices, k + 1, picked, out);
        picked.pop_back();
    }
}

std::vector<Event> terminated_forms(const InterfaceSpec& f, std::int64_t i)
{
    return {Event::assign(f.output, f.var(i), Done{}), Event::assign(f.output, f.var(i), Failure{})};
}

std::vector<Event> terminate_forms(const InterfaceSpec& f, std::int64_t i)
{
    return {Event::abort(f.input, f.var(i)), Event::error(f.input, f.var(i))};
}

OrderExpr ev(const Event& e) { return OrderExpr::event(e); }

}  // namespace

OrderExpr concurrent_sequence(const SequenceParams& p, const InterfaceSpec& iface)
{
    validate(p);
    if (p.mode == SequenceMode::coroutine) throw ParameterError("concurrent_sequence needs a concurrent mode");
    bool in_order = p.mode == SequenceMode::concurrent_in_order;

    // requests[k] is created before requests[k+1]; answers[k] answers requests[k].
    std::vector<std::vector<Event>> request_choices;
    std::vector<std::vector<Event>> answer_choices;
    if (p.is_normal()) {
        for (std::int64_t i = 1; i <= p.n + 1; ++i) {
            request_choices.push_back({Event::ask(iface.input, iface.var(i))});
            if (i <= p.n) answer_choices.push_back({Event::assign(iface.output, iface.var(i), iface.value(i))});
            else answer_choices.push_back(terminated_forms(iface, i));
        }
    } else {
        for (std::int64_t i = 1; i <= p.r; ++i) {
            request_choices.push_back({Event::ask(iface.input, iface.var(i))});
            answer_choices.push_back(terminated_forms(iface, i));
        }
        request_choices.push_back(terminate_forms(iface, p.r + 1));
        answer_choices.push_back(terminated_forms(iface, p.r + 1));
    }

    std::vector<std::vector<Event>> choices = request_choices;
    choices.insert(choices.end(), answer_choices.begin(), answer_choices.end());
    std::vector<std::vector<Event>> combos;
    std::vector<Event> picked;
    expand_choices(choices, 0, picked, combos);

    const std::size_t m = request_choices.size();
    std::vector<OrderExpr> branches;
    for (const auto& combo : combos) {
        std::vector<OrderExpr> reqs, answers, parts;
        for (std::size_t k = 0; k < m; ++k) {
            reqs.push_back(ev(combo[k]));
            answers.push_back(ev(combo[m + k]));
        }
        parts.push_back(OrderExpr::seq(reqs));
        if (in_order && m > 1) parts.push_back(OrderExpr::seq(answers));
        if (p.is_normal()) {
            for (std::size_t k = 0; k < m; ++k) parts.push_back(OrderExpr::seq(reqs[k], answers[k]));
        } else {
            // Every answer of an early termination follows the terminate request.
            for (std::size_t k = 0; k < m; ++k) parts.push_back(OrderExpr::seq(reqs[m - 1], answers[k]));
        }
        branches.push_back(OrderExpr::conj(parts));
    }
    return OrderExpr::disj(branches);
}

OrderExpr generate_sequence(const SequenceParams& p, const InterfaceSpec& iface)
{
    validate(p);
    if (p.mode != SequenceMode::coroutine) return concurrent_sequence(p, iface);
    if (p.is_normal()) return normal_sequence(p.n, iface);
    return early_terminated_sequence(p.n, p.r, p.wait, iface);
}

// ---------------------------------------------------------------------------
// Shapes

std::string render(const Shape& s)
{
    if (s.normal) return "normal(n=" + std::to_string(s.n) + ")";
    return "early(r=" + std::to_string(s.n) + ",w=" + (s.wait ? "true" : "false") + ")";
}

std::vector<History> shape_histories(const Shape& s, const InterfaceSpec& iface)
{
    OrderExpr x = s.normal ? normal_sequence(s.n, iface) : early_terminated_sequence(s.n, s.n, s.wait, iface);
    return linearize(normalize(x));
}

std::vector<Shape> classify(const History& h, const InterfaceSpec& iface)
{
    std::vector<Shape> out;
    auto count = static_cast<std::int64_t>(h.size());
    auto member = [&](const Shape& s) {
        auto hs = shape_histories(s, iface);
        return std::binary_search(hs.begin(), hs.end(), h);
    };
    // A normal(n) trace has 2n+2 events, an early(r) one 2r+2.
    if (count >= 2 && count % 2 == 0) {
        std::int64_t k = (count - 2) / 2;
        if (member(Shape{true, k, true})) out.push_back(Shape{true, k, true});
        if (member(Shape{false, k, true})) out.push_back(Shape{false, k, true});
        if (k > 0 && member(Shape{false, k, false})) out.push_back(Shape{false, k, false});
    }
    return out;
}

}  // namespace pullproto
