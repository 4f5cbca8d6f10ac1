#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pullproto/events.hpp"

namespace pullproto {

enum class RelOp { eq, ne, lt, le, gt, ge };

struct Relation {
    std::vector<StreamIndex> operands;
    std::vector<RelOp> ops;  // ops.size() == operands.size() - 1

    bool operator==(const Relation&) const = default;
};

enum class QuantKind { exists, forall };

class OrderExpr;

/// Node payloads. Binary nodes are strictly binary; n-ary source text is
/// right-associated by the parser.
namespace node {
struct EventNode {
    Event event;
};
struct Seq;
struct And;
struct Or;
struct Not;
struct Quant;
struct Rel {
    Relation relation;
};
/// Literal, or a reference to a boolean module parameter such as `w`.
struct Bool {
    std::variant<bool, std::string> value;
};
struct Empty {};
}  // namespace node

class OrderExpr {
public:
    enum class Kind { event, seq, and_, or_, not_, quant, rel, boolean, empty };

    OrderExpr();  // Empty

    static OrderExpr event(Event e);
    static OrderExpr seq(OrderExpr a, OrderExpr b);
    static OrderExpr conj(OrderExpr a, OrderExpr b);
    static OrderExpr disj(OrderExpr a, OrderExpr b);
    static OrderExpr negate(OrderExpr a);
    static OrderExpr quant(QuantKind kind, std::vector<std::string> vars, OrderExpr body);
    static OrderExpr rel(Relation r);
    static OrderExpr boolean(bool b);
    static OrderExpr param(std::string name);
    static OrderExpr empty() { return OrderExpr(); }

    /// Right-associated chain; an empty list yields Empty.
    static OrderExpr seq(const std::vector<OrderExpr>& items);
    static OrderExpr conj(const std::vector<OrderExpr>& items);
    static OrderExpr disj(const std::vector<OrderExpr>& items);

    Kind kind() const noexcept { return kind_; }
    bool is(Kind k) const noexcept { return kind_ == k; }

    const Event& event() const;
    const OrderExpr& lhs() const;
    const OrderExpr& rhs() const;
    const OrderExpr& operand() const;  // Not / Quant body
    QuantKind quant_kind() const;
    const std::vector<std::string>& quant_vars() const;
    const Relation& relation() const;
    const std::variant<bool, std::string>& bool_value() const;

    /// Number of AST nodes.
    std::size_t size() const;

    friend bool operator==(const OrderExpr& a, const OrderExpr& b);

private:
    struct Data;
    Kind kind_;
    std::shared_ptr<const Data> data_;
};

/// Events of the expression in left-to-right order (duplicates kept).
std::vector<Event> collect_events(const OrderExpr& x);

/// Lowercase variable names used in event indexes and relations, minus those
/// bound by an enclosing quantifier.
std::set<std::string> free_variables(const OrderExpr& x);

struct RenderOptions {
    /// Print `terminate(x)`, `terminated(x)`, `request(x)` and `answer(x)`
    /// for the choices they abbreviate.
    bool sugar = true;
};

std::string render(const OrderExpr& x, RenderOptions opts = {});

// Event-category patterns. Each is an Or over the concrete forms.
OrderExpr terminate_of(const Port& port, const StreamVar& var);
OrderExpr request_of(const Port& port, const StreamVar& var);
OrderExpr terminated_of(const Port& port, const StreamVar& var);
OrderExpr answer_of(const Port& port, const StreamVar& var);

}  // namespace pullproto
