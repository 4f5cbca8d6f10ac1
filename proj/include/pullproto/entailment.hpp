#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pullproto/history.hpp"
#include "pullproto/order.hpp"
#include "pullproto/rules.hpp"

namespace pullproto {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnboundVariable : public EvalError {
public:
    using EvalError::EvalError;
};

class BoundExceeded : public EvalError {
public:
    using EvalError::EvalError;
};

using BindingValue = std::variant<std::int64_t, bool>;

/// Valuation of index variables and module parameters.
class Binding {
public:
    Binding() = default;
    Binding(std::initializer_list<std::pair<const std::string, BindingValue>> init) : values_(init) {}

    void set(const std::string& name, BindingValue v) { values_[name] = v; }
    bool has(const std::string& name) const { return values_.count(name) != 0; }
    const BindingValue* find(const std::string& name) const;
    std::int64_t nat(const std::string& name) const;
    bool boolean(const std::string& name) const;

    const std::map<std::string, BindingValue>& values() const noexcept { return values_; }

    auto operator<=>(const Binding&) const = default;

private:
    std::map<std::string, BindingValue> values_;
};

std::string render(const Binding& b);

struct EntailOptions {
    /// Cap on the number of values a quantified variable may range over.
    std::int64_t max_domain = 10000;
};

/// H ⊨ a. Free variables not bound by `b` are existentially quantified over
/// 1 .. max_index(H)+1, as are explicit quantifiers.
bool entails(const History& h, const OrderExpr& a, const Binding& b = {}, EntailOptions opts = {});

/// Substitutes bound variables; returns nullopt if an index resolves below 1.
std::optional<Event> ground(const Event& pattern, const Binding& b);

// ---------------------------------------------------------------------------
// Rule engine

class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an execution has not quiesced within the step cap.
class LivelockError : public EngineError {
public:
    LivelockError(const std::string& msg, History prefix)
        : EngineError(msg), prefix_(std::move(prefix)) {}
    const History& prefix() const noexcept { return prefix_; }

private:
    History prefix_;
};

struct RuleSetInstance {
    RuleSet rules;
    Binding params;
};

/// One enabled (rule, binding) pair and the event it would append.
struct RuleInstance {
    std::size_t ruleset = 0;
    std::size_t rule = 0;
    Binding binding;
    Event consequent;
};

struct FiredRule {
    std::size_t ruleset = 0;
    std::size_t rule = 0;
    Binding binding;
};

struct Execution {
    History history;
    std::vector<FiredRule> fired;
};

enum class ScheduleMode { deterministic, exhaustive };

struct EngineConfig {
    std::vector<RuleSetInstance> modules;
    ScheduleMode mode = ScheduleMode::deterministic;
    std::uint64_t seed = 0;
    std::size_t max_steps = 10000;
    std::size_t max_histories = 100000;
    EntailOptions entail;
};

/// Called before each step with the current history and its enabled set.
using StepObserver = std::function<void(const History&, const std::vector<RuleInstance>&)>;

class Engine {
public:
    explicit Engine(EngineConfig cfg);

    const EngineConfig& config() const noexcept { return cfg_; }

    /// Enabled instances sorted by (rule-set name, rule position, binding).
    /// Instances whose consequent is already in `h` are not enabled.
    std::vector<RuleInstance> enabled(const History& h) const;

    /// Appends the consequent chosen by `choose` (an index into enabled(h)),
    /// or returns nullopt when nothing is enabled.
    std::optional<History> step(const History& h,
                                const std::function<std::size_t(const std::vector<RuleInstance>&)>& choose) const;

    /// Deterministic mode yields one execution, exhaustive mode all quiescent
    /// ones (deduplicated, sorted by history).
    std::vector<Execution> run(const StepObserver& observer = {}) const;

private:
    struct Impl;
    EngineConfig cfg_;
    std::shared_ptr<const Impl> impl_;
};

std::vector<History> run_to_quiescence(const EngineConfig& cfg);

}  // namespace pullproto
