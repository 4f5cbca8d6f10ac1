#include "pullproto/history.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pullproto {

namespace {

std::int64_t index_value(const StreamIndex& idx) { return idx.is_concrete() ? idx.offset : 0; }

}  // namespace

std::int64_t max_concrete_index(const Event& e)
{
    std::int64_t m = 0;
    if (e.port && e.port->index) m = std::max(m, index_value(*e.port->index));
    if (auto* r = std::get_if<Request>(&e.body)) {
        for (const auto& a : r->args) {
            if (auto* v = std::get_if<StreamVar>(&a)) m = std::max(m, index_value(v->index));
            if (auto* v = std::get_if<StreamValue>(&a)) m = std::max(m, index_value(v->index));
        }
    } else if (auto* an = std::get_if<Answer>(&e.body)) {
        m = std::max(m, index_value(an->var.index));
        if (auto* v = std::get_if<StreamValue>(&an->value)) m = std::max(m, index_value(v->index));
    } else if (auto* mc = std::get_if<MethodCall>(&e.body)) {
        m = std::max(m, index_value(mc->index));
    }
    return m;
}

History::History(std::initializer_list<Event> events)
{
    for (const auto& e : events) append(e);
}

History::History(const std::vector<Event>& events)
{
    for (const auto& e : events) append(e);
}

void History::append(Event e)
{
    if (e.is_empty()) throw HistoryError("empty event cannot be part of a history");
    if (!e.is_concrete()) throw HistoryError("event '" + render(e) + "' is not concrete");
    if (positions_.count(e)) throw HistoryError("duplicate event '" + render(e) + "'");
    max_index_ = std::max(max_index_, max_concrete_index(e));
    positions_.emplace(e, events_.size());
    events_.push_back(std::move(e));
}

History History::appended(Event e) const
{
    History h = *this;
    h.append(std::move(e));
    return h;
}

bool History::contains(const Event& e) const
{
    if (e.is_empty() || !e.is_concrete()) throw HistoryError("membership query on a non-concrete event");
    return positions_.count(e) != 0;
}

std::optional<std::size_t> History::position(const Event& e) const
{
    auto it = positions_.find(e);
    if (it == positions_.end()) return std::nullopt;
    return it->second;
}

std::size_t History::depth(const Event& e) const
{
    auto p = position(e);
    if (!p) throw HistoryError("depth of '" + render(e) + "' is undefined: not in the history");
    return events_.size() - 1 - *p;
}

bool History::before(const Event& e1, const Event& e2) const
{
    return depth(e1) > depth(e2);
}

Trace parse_trace(std::string_view text)
{
    Trace t;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        bool blank = std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
        if (!blank) {
            Event e;
            try {
                e = parse_event(line);
            } catch (const SyntaxError& err) {
                throw SyntaxError(err.detail(), line_no, err.column());
            }
            try {
                t.history.append(std::move(e));
            } catch (const HistoryError& err) {
                throw SyntaxError(err.what(), line_no, 1);
            }
            t.lines.push_back(line_no);
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    return t;
}

Trace read_trace_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_trace(ss.str());
}

std::string render_trace(const History& h)
{
    std::string out;
    for (const auto& e : h) out += render(e) + "\n";
    return out;
}

}  // namespace pullproto
