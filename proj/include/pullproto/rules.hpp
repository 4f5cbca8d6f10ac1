#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pullproto/order.hpp"

namespace pullproto {

enum class ParamKind { nat, boolean };

struct Parameter {
    std::string name;
    ParamKind kind;

    bool operator==(const Parameter&) const = default;
};

enum class RuleDirection { forward, reversed };

/// `antecedent => consequent`; reversed source text (`e <= a`) keeps its
/// direction only for rendering.
struct Rule {
    OrderExpr antecedent;
    Event consequent;
    RuleDirection written = RuleDirection::forward;
    int line = 0;

    bool operator==(const Rule& o) const
    {
        return antecedent == o.antecedent && consequent == o.consequent;
    }
};

struct RuleSet {
    std::string name;
    std::vector<Parameter> params;
    std::vector<Rule> rules;

    const Parameter* find_param(std::string_view name) const;
};

/// Parses a rule file (`module`, `param` headers, one rule per logical line,
/// `[` / `]` blocks for vertical choice).
RuleSet parse_rules(std::string_view text);

/// Parses a single rule against a parameter context.
Rule parse_rule(std::string_view text, const std::vector<Parameter>& params = {});

/// Parses a partial-order or antecedent expression. Bare lowercase names in
/// `params` are boolean parameter references; others are argument-less requests.
OrderExpr parse_order(std::string_view text, const std::set<std::string>& params = {});

std::string render(const Rule& rule);
std::string render(const RuleSet& rs);

}  // namespace pullproto
