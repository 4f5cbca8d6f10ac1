#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pullproto/history.hpp"
#include "pullproto/order.hpp"

namespace pullproto {

/// The two ports of one interface: `input` issues requests (downstream side),
/// `output` answers them (upstream side).
struct InterfaceSpec {
    Port input;
    Port output;
    int prime = 0;
    std::string var_name = "x";

    InterfaceSpec(Port in, Port out, int prime_level = 0);

    StreamVar var(std::int64_t i) const;
    StreamValue value(std::int64_t i) const;
};

bool operator==(const InterfaceSpec& a, const InterfaceSpec& b);

// Event categories. The matchers ignore the port.
bool is_terminate(const Event& e);
bool is_request(const Event& e);
bool is_terminated(const Event& e);
bool is_answer(const Event& e);

bool matches_terminate(const Event& e, const StreamVar& var);
bool matches_request(const Event& e, const StreamVar& var);
bool matches_terminated(const Event& e, const StreamVar& var);
bool matches_answer(const Event& e, const StreamVar& var);

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SequenceMode { coroutine, concurrent_in_order, concurrent_out_of_order };

struct SequenceParams {
    std::int64_t n = 0;
    std::int64_t r = 0;
    bool wait = true;
    SequenceMode mode = SequenceMode::coroutine;

    /// r = n+1.
    static SequenceParams normal(std::int64_t n, SequenceMode mode = SequenceMode::coroutine);
    /// 0 <= r <= n.
    static SequenceParams early(std::int64_t n, std::int64_t r, bool wait,
                                SequenceMode mode = SequenceMode::coroutine);

    bool is_normal() const noexcept { return r == n + 1; }
};

OrderExpr normal_sequence(std::int64_t n, const InterfaceSpec& iface);
OrderExpr early_terminated_sequence(std::int64_t n, std::int64_t r, bool wait, const InterfaceSpec& iface);

/// Concurrent in-order / out-of-order variants. The terminate/terminated
/// choices are expanded at the top so every branch is a set of concrete events.
OrderExpr concurrent_sequence(const SequenceParams& params, const InterfaceSpec& iface);

/// Dispatches on params.mode and params.is_normal().
OrderExpr generate_sequence(const SequenceParams& params, const InterfaceSpec& iface);

// ---------------------------------------------------------------------------
// Checker

struct CheckOptions {
    /// Completed trace: unanswered requests and a missing termination are
    /// violations rather than pending.
    bool finite = false;
    /// Answers may arrive in any order. Implies allow_concurrent_asks.
    bool allow_out_of_order = false;
    bool allow_concurrent_asks = false;
};

struct Violation {
    int invariant = 0;         // 1..6
    std::size_t position = 0;  // index into the trace
    std::string message;

    bool operator==(const Violation&) const = default;
};

enum class TerminationKind { none, done, failed, aborted, errored };

struct InterfaceStats {
    std::size_t asks = 0;
    std::size_t terminate_requests = 0;
    std::size_t answers = 0;
    std::size_t values = 0;
    std::size_t pending = 0;
    TerminationKind termination = TerminationKind::none;
};

struct CheckReport {
    bool pass = true;
    std::vector<Violation> violations;
    InterfaceStats stats;
    /// Invariants 2 and 6 not yet decidable (non-final traces).
    std::vector<int> pending_invariants;

    std::vector<int> invariant_ids() const;
};

class MalformedTrace : public std::runtime_error {
public:
    MalformedTrace(const std::string& msg, std::size_t position)
        : std::runtime_error(msg), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Incremental six-invariant monitor for one interface. Events on other ports
/// must be filtered out by the caller; method calls are ignored.
class ProtocolMonitor {
public:
    ProtocolMonitor(InterfaceSpec iface, CheckOptions opts = {});

    /// Returns the violations raised by this event.
    std::vector<Violation> observe(const Event& e);

    /// Final report. Evaluates invariants 2 and 6 when opts.finite.
    CheckReport finish() const;

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    void flag(int inv, std::string msg);

    InterfaceSpec iface_;
    CheckOptions opts_;
    std::size_t position_ = 0;
    std::vector<Violation> violations_;
    InterfaceStats stats_;

    std::int64_t next_index_ = 1;      // index the next request should create
    std::vector<std::int64_t> pending_;  // requested, unanswered; creation order
    std::vector<std::size_t> pending_pos_;
    std::vector<std::int64_t> answered_;
    std::optional<std::int64_t> terminate_index_;
    bool terminated_answer_ = false;
    std::optional<std::int64_t> overlapped_ask_;  // ask pending when the terminate was issued
};

/// Runs the monitor over the events of `trace` that belong to `iface`.
CheckReport check(const History& trace, const InterfaceSpec& iface, CheckOptions opts = {});

/// Events of `h` on the interface's two ports, in order.
History project(const History& h, const InterfaceSpec& iface);

std::string render(const Violation& v);
std::string to_string(TerminationKind k);

// ---------------------------------------------------------------------------
// Shape classification

struct Shape {
    bool normal = true;
    std::int64_t n = 0;  // normal: values; early: asks before the terminate (r)
    bool wait = true;    // early only

    bool operator==(const Shape&) const = default;
};

std::string render(const Shape& s);

/// Linearizations of the co-routining generator for `s` (an early shape uses
/// n = r, which does not change its events).
std::vector<History> shape_histories(const Shape& s, const InterfaceSpec& iface);

/// Which generator shapes contain `h` among their linearizations.
std::vector<Shape> classify(const History& h, const InterfaceSpec& iface);

}  // namespace pullproto
