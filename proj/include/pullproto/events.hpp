#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pullproto {

/// Raised by the parsers; carries a 1-based line and column.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& message, int line, int column);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    /// The message without the position prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    int line_;
    int column_;
};

/// Position of a stream variable or value: either a concrete natural, or a
/// variable plus a constant offset (`i`, `i-1`, `r+1`).
struct StreamIndex {
    std::optional<std::string> var;
    std::int64_t offset = 0;

    static StreamIndex concrete(std::int64_t value) { return StreamIndex{std::nullopt, value}; }
    static StreamIndex variable(std::string name, std::int64_t offset = 0)
    {
        return StreamIndex{std::move(name), offset};
    }

    bool is_concrete() const noexcept { return !var.has_value(); }
    std::int64_t value() const;

    auto operator<=>(const StreamIndex&) const = default;
};

struct Port {
    std::string name;
    std::optional<StreamIndex> index;

    Port() = default;
    /// Throws std::invalid_argument unless `n` is one or more uppercase letters.
    explicit Port(std::string n, std::optional<StreamIndex> idx = std::nullopt);

    auto operator<=>(const Port&) const = default;
};

/// x̄ᵢ, x̄ᵢ′ ... ; `prime` counts transformation stages.
struct StreamVar {
    std::string name = "x";
    StreamIndex index;
    int prime = 0;

    auto operator<=>(const StreamVar&) const = default;
};

/// vᵢ, vᵢ′
struct StreamValue {
    StreamIndex index;
    int prime = 0;

    auto operator<=>(const StreamValue&) const = default;
};

struct Done {
    auto operator<=>(const Done&) const = default;
};

/// `err` or `err_N`. Different tags are different values.
struct Failure {
    std::optional<std::uint64_t> tag;

    auto operator<=>(const Failure&) const = default;
};

/// A named constant answer such as `pong`.
struct Token {
    std::string name;

    auto operator<=>(const Token&) const = default;
};

using AnswerValue = std::variant<StreamValue, Done, Failure, Token>;
using Argument = std::variant<StreamVar, StreamValue, Failure>;

/// `ask[x_1]`, `abort[x_2]`, `error[err, x_3]`, `ping[x_1]`, bare `abort`.
struct Request {
    std::string name;
    std::vector<Argument> args;

    /// The last stream-variable argument, which receives the answer.
    const StreamVar* var() const;
    StreamVar* var();

    auto operator<=>(const Request&) const = default;
};

/// `x_i := value`
struct Answer {
    StreamVar var;
    AnswerValue value;

    auto operator<=>(const Answer&) const = default;
};

/// `name_N(args)`; arguments are kept as their rendered text.
struct MethodCall {
    std::string name;
    StreamIndex index;
    std::optional<std::string> args;

    auto operator<=>(const MethodCall&) const = default;
};

struct EmptyEvent {
    auto operator<=>(const EmptyEvent&) const = default;
};

enum class EventKind { ask, abort, error, other_request, value, done, failure, token, method_call, empty };

struct Event {
    std::optional<Port> port;
    std::variant<Request, Answer, MethodCall, EmptyEvent> body;

    static Event ask(Port port, StreamVar var);
    static Event abort(Port port, StreamVar var);
    static Event error(Port port, StreamVar var, Failure tag = {});
    static Event assign(Port port, StreamVar var, AnswerValue value);
    static Event empty() { return Event{std::nullopt, EmptyEvent{}}; }

    EventKind kind() const;
    bool is_request() const noexcept { return std::holds_alternative<Request>(body); }
    bool is_answer() const noexcept { return std::holds_alternative<Answer>(body); }
    bool is_empty() const noexcept { return std::holds_alternative<EmptyEvent>(body); }
    bool is_method_call() const noexcept { return std::holds_alternative<MethodCall>(body); }

    /// Variable a request creates or an answer binds, if any.
    const StreamVar* stream_var() const;

    /// True when no index anywhere in the event is a variable.
    bool is_concrete() const;

    auto operator<=>(const Event&) const = default;
};

std::string render(const StreamIndex& index);
std::string render(const Port& port);
std::string render(const StreamVar& var);
std::string render(const AnswerValue& value);
std::string render(const Event& event);

/// Parses one event in the ASCII surface syntax, e.g. `UO: x_1 := v_1`.
Event parse_event(std::string_view text);

struct EventHash {
    std::size_t operator()(const Event& e) const noexcept;
};

}  // namespace pullproto
