#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pullproto/events.hpp"

namespace pullproto {

/// Query on an event that is not in the history, or an invalid append.
class HistoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite sequence of concrete, syntactically unique events, oldest first.
class History {
public:
    History() = default;
    History(std::initializer_list<Event> events);
    explicit History(const std::vector<Event>& events);

    /// Throws HistoryError on Empty, non-concrete or duplicate events.
    void append(Event e);
    History appended(Event e) const;

    bool contains(const Event& e) const;
    std::optional<std::size_t> position(const Event& e) const;

    /// Number of events strictly after `e`; the most recent event has depth 0.
    std::size_t depth(const Event& e) const;
    bool before(const Event& e1, const Event& e2) const;

    /// Largest concrete stream or port index mentioned by any event (0 when empty).
    std::int64_t max_index() const noexcept { return max_index_; }

    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    const Event& operator[](std::size_t i) const { return events_[i]; }
    const Event& back() const { return events_.back(); }
    const std::vector<Event>& events() const noexcept { return events_; }
    auto begin() const { return events_.begin(); }
    auto end() const { return events_.end(); }

    friend bool operator==(const History& a, const History& b) { return a.events_ == b.events_; }
    friend auto operator<=>(const History& a, const History& b) { return a.events_ <=> b.events_; }

private:
    std::vector<Event> events_;
    std::unordered_map<Event, std::size_t, EventHash> positions_;
    std::int64_t max_index_ = 0;
};

std::int64_t max_concrete_index(const Event& e);

/// A parsed trace file: events plus the source line of each.
struct Trace {
    History history;
    std::vector<int> lines;
};

/// One event per line; `#` comments and blank lines are skipped.
Trace parse_trace(std::string_view text);
Trace read_trace_file(const std::string& path);

std::string render_trace(const History& h);

}  // namespace pullproto
