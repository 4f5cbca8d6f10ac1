#include <algorithm>
#include <set>

#include "pullproto/protocol.hpp"

namespace pullproto {

std::vector<int> CheckReport::invariant_ids() const
{
    std::set<int> ids;
    for (const auto& v : violations) ids.insert(v.invariant);
    return {ids.begin(), ids.end()};
}

ProtocolMonitor::ProtocolMonitor(InterfaceSpec iface, CheckOptions opts) : iface_(std::move(iface)), opts_(opts)
{
    if (opts_.allow_out_of_order) opts_.allow_concurrent_asks = true;
}

void ProtocolMonitor::flag(int inv, std::string msg)
{
    violations_.push_back(Violation{inv, position_, std::move(msg)});
}

std::vector<Violation> ProtocolMonitor::observe(const Event& e)
{
    std::size_t before = violations_.size();
    if (e.is_method_call()) {
        ++position_;
        return {};
    }
    if (!e.port || (*e.port != iface_.input && *e.port != iface_.output))
        throw MalformedTrace("event '" + render(e) + "' is not on interface " + render(iface_.input) + "/" +
                                 render(iface_.output),
                             position_);
    const StreamVar* var = e.stream_var();
    bool request = is_request(e);
    if (!var || (!request && !e.is_answer()))
        throw MalformedTrace("'" + render(e) + "' is not a stream request or answer", position_);
    if (var->name != iface_.var_name || var->prime != iface_.prime || !var->index.is_concrete())
        throw MalformedTrace("'" + render(e) + "' does not use the interface's stream variables", position_);
    if (request && *e.port != iface_.input)
        throw MalformedTrace("request '" + render(e) + "' issued from the answering port", position_);
    if (!request && *e.port != iface_.output)
        throw MalformedTrace("answer '" + render(e) + "' issued from the requesting port", position_);

    const std::int64_t k = var->index.value();
    const std::string name = render(*var);

    if (request) {
        bool terminate = is_terminate(e);
        if (terminate_index_) flag(1, "request " + name + " after the terminate request");
        else if (terminated_answer_) flag(1, "request " + name + " after the stream terminated");

        bool known = k < next_index_;
        if (known) flag(3, "variable " + name + " requested twice");
        else if (k > next_index_) flag(4, "request " + name + " skips " + render(iface_.var(next_index_)));

        if (!opts_.allow_concurrent_asks) {
            if (!terminate && !pending_.empty())
                flag(5, "ask " + name + " while " + render(iface_.var(pending_.front())) + " is unanswered");
            if (terminate && pending_.size() > 1)
                flag(5, "terminate " + name + " while " + std::to_string(pending_.size()) + " asks are unanswered");
        }
        if (terminate) {
            ++stats_.terminate_requests;
            if (!terminate_index_) {
                terminate_index_ = k;
                stats_.termination =
                    e.kind() == EventKind::abort ? TerminationKind::aborted : TerminationKind::errored;
                if (pending_.size() == 1) overlapped_ask_ = pending_.front();
            }
        } else {
            ++stats_.asks;
        }
        if (!known) {
            pending_.push_back(k);
            pending_pos_.push_back(position_);
            next_index_ = std::max(next_index_, k + 1);
        }
    } else {
        ++stats_.answers;
        auto it = std::find(pending_.begin(), pending_.end(), k);
        bool term = is_terminated(e);
        if (it == pending_.end()) {
            if (std::find(answered_.begin(), answered_.end(), k) != answered_.end())
                flag(3, "second answer for " + name);
            else
                flag(3, "answer for " + name + ", which was never requested");
        } else {
            if (!opts_.allow_out_of_order && it != pending_.begin())
                flag(4, "answer for " + name + " before " + render(iface_.var(pending_.front())));
            if (!opts_.allow_concurrent_asks && overlapped_ask_ && *overlapped_ask_ == k && !term)
                flag(5, "pending answer " + name + " overlapped by the terminate request must be terminated");
            auto idx = static_cast<std::size_t>(it - pending_.begin());
            pending_.erase(it);
            pending_pos_.erase(pending_pos_.begin() + static_cast<std::ptrdiff_t>(idx));
            answered_.push_back(k);
        }
        if (term) {
            if (!terminated_answer_ && !terminate_index_)
                stats_.termination = e.kind() == EventKind::done ? TerminationKind::done : TerminationKind::failed;
            terminated_answer_ = true;
        } else {
            ++stats_.values;
        }
    }
    ++position_;
    return {violations_.begin() + static_cast<std::ptrdiff_t>(before), violations_.end()};
}

CheckReport ProtocolMonitor::finish() const
{
    CheckReport rep;
    rep.violations = violations_;
    rep.stats = stats_;
    rep.stats.pending = pending_.size();
    bool terminated = terminate_index_.has_value() || terminated_answer_;
    if (opts_.finite) {
        for (std::size_t k = 0; k < pending_.size(); ++k)
            rep.violations.push_back(
                Violation{2, pending_pos_[k], "no answer for " + render(iface_.var(pending_[k]))});
        if (!terminated) rep.violations.push_back(Violation{6, position_, "finite stream never terminated"});
    } else {
        if (!pending_.empty()) rep.pending_invariants.push_back(2);
        if (!terminated) rep.pending_invariants.push_back(6);
    }
    rep.pass = rep.violations.empty();
    return rep;
}

CheckReport check(const History& trace, const InterfaceSpec& iface, CheckOptions opts)
{
    ProtocolMonitor m(iface, opts);
    for (const auto& e : trace) m.observe(e);
    return m.finish();
}

History project(const History& h, const InterfaceSpec& iface)
{
    History out;
    for (const auto& e : h)
        if (e.port && (*e.port == iface.input || *e.port == iface.output)) out.append(e);
    return out;
}

std::string render(const Violation& v)
{
    return "INV" + std::to_string(v.invariant) + " @" + std::to_string(v.position) + ": " + v.message;
}

std::string to_string(TerminationKind k)
{
    switch (k) {
    case TerminationKind::none: return "none";
    case TerminationKind::done: return "done";
    case TerminationKind::failed: return "err";
    case TerminationKind::aborted: return "abort";
    case TerminationKind::errored: return "error";
    }
    return "?";
}

}  // namespace pullproto
