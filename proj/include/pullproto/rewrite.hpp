#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pullproto/history.hpp"
#include "pullproto/order.hpp"

namespace pullproto {

class UnsupportedConstruct : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The normalization rules, one per rewrite. `seq` is Seq, `and`/`or` the
/// corresponding binary nodes.
enum class RewriteRule {
    seq_distributes_over_right_and,  // x -> (y & z)   ~>  (x -> y) & (x -> z)
    seq_distributes_over_left_and,   // (x & y) -> z   ~>  (x -> z) & (y -> z)
    seq_distributes_over_right_or,   // x -> (y | z)   ~>  (x -> y) | (x -> z)
    seq_distributes_over_left_or,    // (x | y) -> z   ~>  (x -> z) | (y -> z)
    seq_right_empty,                 // x -> empty     ~>  x
    seq_left_empty,                  // empty -> x     ~>  x
    seq_inner_left_empty,            // (x -> empty) -> y  ~>  x -> y
    seq_inner_right_empty,           // x -> (empty -> y)  ~>  x -> y
    and_right_empty,                 // a & empty      ~>  a
    and_left_empty,                  // empty & a      ~>  a
    or_right_empty,                  // a | empty      ~>  a
    or_left_empty,                   // empty | a      ~>  a
};

inline constexpr std::size_t rewrite_rule_count = 12;

/// Applies `rule` at the root of `x` if its left-hand side matches.
std::optional<OrderExpr> rewrite_at_root(RewriteRule rule, const OrderExpr& x);

struct NormalizeStats {
    std::size_t steps = 0;
};

/// Innermost-leftmost rewriting to a fixed point. Throws UnsupportedConstruct
/// on Not/Quant and SizeError when `max_steps` rewrites are exceeded.
OrderExpr normalize(const OrderExpr& x, NormalizeStats* stats = nullptr, std::size_t max_steps = 100000);

/// True when no rewrite rule applies anywhere in `x`.
bool is_normal(const OrderExpr& x);

struct LinearizeOptions {
    std::size_t max_histories = 1000000;
};

/// Every history compatible with a normalized, concrete expression: Or
/// branches separately, And as order-preserving merges (events shared by both
/// sides are identified), Seq in order. Only histories that entail `x` are
/// kept. Sorted, no duplicates.
std::vector<History> linearize(const OrderExpr& x, LinearizeOptions opts = {});

}  // namespace pullproto
