#include "pullproto/events.hpp"

#include <functional>
#include <stdexcept>

namespace pullproto {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string primes(int n) { return std::string(static_cast<std::size_t>(n), '\''); }

std::string subscript(const StreamIndex& idx) { return "_" + render(idx); }

void hash_mix(std::size_t& seed, std::size_t v) { seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2); }

void hash_index(std::size_t& seed, const StreamIndex& idx)
{
    if (idx.var) hash_mix(seed, std::hash<std::string>{}(*idx.var));
    hash_mix(seed, std::hash<std::int64_t>{}(idx.offset));
}

void hash_var(std::size_t& seed, const StreamVar& v)
{
    hash_mix(seed, std::hash<std::string>{}(v.name));
    hash_index(seed, v.index);
    hash_mix(seed, static_cast<std::size_t>(v.prime));
}

void hash_value(std::size_t& seed, const AnswerValue& value)
{
    hash_mix(seed, value.index());
    std::visit(overloaded{
                   [&](const StreamValue& v) {
                       hash_index(seed, v.index);
                       hash_mix(seed, static_cast<std::size_t>(v.prime));
                   },
                   [&](const Done&) {},
                   [&](const Failure& f) { hash_mix(seed, f.tag ? *f.tag + 1 : 0); },
                   [&](const Token& t) { hash_mix(seed, std::hash<std::string>{}(t.name)); },
               },
               value);
}

bool index_concrete(const StreamIndex& i) { return i.is_concrete(); }

}  // namespace

SyntaxError::SyntaxError(const std::string& message, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message)
    , detail_(message)
    , line_(line)
    , column_(column)
{
}

std::int64_t StreamIndex::value() const
{
    if (var) throw std::logic_error("stream index '" + *var + "' is not concrete");
    return offset;
}

Port::Port(std::string n, std::optional<StreamIndex> idx) : name(std::move(n)), index(std::move(idx))
{
    if (name.empty()) throw std::invalid_argument("port name is empty");
    for (char c : name)
        if (c < 'A' || c > 'Z') throw std::invalid_argument("port name '" + name + "' is not all uppercase letters");
}

const StreamVar* Request::var() const
{
    for (auto it = args.rbegin(); it != args.rend(); ++it)
        if (auto* v = std::get_if<StreamVar>(&*it)) return v;
    return nullptr;
}

StreamVar* Request::var()
{
    return const_cast<StreamVar*>(static_cast<const Request*>(this)->var());
}

Event Event::ask(Port port, StreamVar var) { return Event{std::move(port), Request{"ask", {std::move(var)}}}; }

Event Event::abort(Port port, StreamVar var) { return Event{std::move(port), Request{"abort", {std::move(var)}}}; }

Event Event::error(Port port, StreamVar var, Failure tag)
{
    return Event{std::move(port), Request{"error", {tag, std::move(var)}}};
}

Event Event::assign(Port port, StreamVar var, AnswerValue value)
{
    return Event{std::move(port), Answer{std::move(var), std::move(value)}};
}

EventKind Event::kind() const
{
    return std::visit(overloaded{
                          [](const Request& r) {
                              if (r.name == "ask") return EventKind::ask;
                              if (r.name == "abort") return EventKind::abort;
                              if (r.name == "error") return EventKind::error;
                              return EventKind::other_request;
                          },
                          [](const Answer& a) {
                              return std::visit(overloaded{
                                                    [](const StreamValue&) { return EventKind::value; },
                                                    [](const Done&) { return EventKind::done; },
                                                    [](const Failure&) { return EventKind::failure; },
                                                    [](const Token&) { return EventKind::token; },
                                                },
                                                a.value);
                          },
                          [](const MethodCall&) { return EventKind::method_call; },
                          [](const EmptyEvent&) { return EventKind::empty; },
                      },
                      body);
}

const StreamVar* Event::stream_var() const
{
    if (auto* r = std::get_if<Request>(&body)) return r->var();
    if (auto* a = std::get_if<Answer>(&body)) return &a->var;
    return nullptr;
}

bool Event::is_concrete() const
{
    if (is_empty()) return false;
    if (port && port->index && !index_concrete(*port->index)) return false;
    return std::visit(overloaded{
                          [](const Request& r) {
                              for (const auto& a : r.args) {
                                  bool ok = std::visit(overloaded{
                                                           [](const StreamVar& v) { return index_concrete(v.index); },
                                                           [](const StreamValue& v) { return index_concrete(v.index); },
                                                           [](const Failure&) { return true; },
                                                       },
                                                       a);
                                  if (!ok) return false;
                              }
                              return true;
                          },
                          [](const Answer& a) {
                              if (!index_concrete(a.var.index)) return false;
                              if (auto* v = std::get_if<StreamValue>(&a.value)) return index_concrete(v->index);
                              return true;
                          },
                          [](const MethodCall& m) { return index_concrete(m.index); },
                          [](const EmptyEvent&) { return false; },
                      },
                      body);
}

std::string render(const StreamIndex& index)
{
    if (!index.var) {
        if (index.offset >= 0) return std::to_string(index.offset);
        return "{" + std::to_string(index.offset) + "}";
    }
    if (index.offset == 0) return *index.var;
    return "{" + *index.var + (index.offset > 0 ? "+" : "-") + std::to_string(std::abs(index.offset)) + "}";
}

std::string render(const Port& port)
{
    return port.index ? port.name + subscript(*port.index) : port.name;
}

std::string render(const StreamVar& var) { return var.name + primes(var.prime) + subscript(var.index); }

namespace {

std::string render_failure(const Failure& f) { return f.tag ? "err_" + std::to_string(*f.tag) : "err"; }

std::string render_argument(const Argument& a)
{
    return std::visit(overloaded{
                          [](const StreamVar& v) { return render(v); },
                          [](const StreamValue& v) { return "v" + primes(v.prime) + subscript(v.index); },
                          [](const Failure& f) { return render_failure(f); },
                      },
                      a);
}

}  // namespace

std::string render(const AnswerValue& value)
{
    return std::visit(overloaded{
                          [](const StreamValue& v) { return "v" + primes(v.prime) + subscript(v.index); },
                          [](const Done&) { return std::string("done"); },
                          [](const Failure& f) { return render_failure(f); },
                          [](const Token& t) { return t.name; },
                      },
                      value);
}

std::string render(const Event& event)
{
    std::string out;
    if (event.port) out = render(*event.port) + ": ";
    out += std::visit(overloaded{
                          [](const Request& r) {
                              if (r.args.empty()) return r.name;
                              std::string s = r.name + "[";
                              for (std::size_t i = 0; i < r.args.size(); ++i) {
                                  if (i) s += ", ";
                                  s += render_argument(r.args[i]);
                              }
                              return s + "]";
                          },
                          [](const Answer& a) { return render(a.var) + " := " + render(a.value); },
                          [](const MethodCall& m) {
                              std::string s = m.name + subscript(m.index);
                              if (m.args) s += "(" + *m.args + ")";
                              return s;
                          },
                          [](const EmptyEvent&) { return std::string("empty"); },
                      },
                      event.body);
    return out;
}

std::size_t EventHash::operator()(const Event& e) const noexcept
{
    std::size_t seed = e.body.index();
    if (e.port) {
        hash_mix(seed, std::hash<std::string>{}(e.port->name));
        if (e.port->index) hash_index(seed, *e.port->index);
    }
    std::visit(overloaded{
                   [&](const Request& r) {
                       hash_mix(seed, std::hash<std::string>{}(r.name));
                       for (const auto& a : r.args) {
                           hash_mix(seed, a.index());
                           std::visit(overloaded{
                                          [&](const StreamVar& v) { hash_var(seed, v); },
                                          [&](const StreamValue& v) {
                                              hash_index(seed, v.index);
                                              hash_mix(seed, static_cast<std::size_t>(v.prime));
                                          },
                                          [&](const Failure& f) { hash_mix(seed, f.tag ? *f.tag + 1 : 0); },
                                      },
                                      a);
                       }
                   },
                   [&](const Answer& a) {
                       hash_var(seed, a.var);
                       hash_value(seed, a.value);
                   },
                   [&](const MethodCall& m) {
                       hash_mix(seed, std::hash<std::string>{}(m.name));
                       hash_index(seed, m.index);
                       if (m.args) hash_mix(seed, std::hash<std::string>{}(*m.args));
                   },
                   [&](const EmptyEvent&) {},
               },
               e.body);
    return seed;
}

}  // namespace pullproto
