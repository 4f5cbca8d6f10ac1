// Independent oracles shared by the property tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "pullproto/entailment.hpp"
#include "pullproto/history.hpp"
#include "pullproto/order.hpp"

namespace oracle {

using namespace pullproto;

/// Every ordering of every subset of `events`.
inline std::vector<History> arrangements(std::vector<Event> events)
{
    std::vector<History> out;
    const std::size_t n = events.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<Event> pick;
        for (std::size_t k = 0; k < n; ++k)
            if (mask & (1u << k)) pick.push_back(events[k]);
        std::sort(pick.begin(), pick.end());
        do {
            out.emplace_back(pick);
        } while (std::next_permutation(pick.begin(), pick.end()));
    }
    return out;
}

/// Histories over the events of `x` that entail `x` and stop doing so when
/// any single event is dropped. For expressions whose events are pairwise
/// distinct this is the set of linearizations.
inline std::set<History> minimal_models(const OrderExpr& x)
{
    auto evs = collect_events(x);
    std::sort(evs.begin(), evs.end());
    evs.erase(std::unique(evs.begin(), evs.end()), evs.end());
    std::set<History> out;
    for (const auto& h : arrangements(evs)) {
        if (!entails(h, x)) continue;
        bool minimal = true;
        for (std::size_t k = 0; k < h.size() && minimal; ++k) {
            std::vector<Event> rest = h.events();
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
            if (entails(History(rest), x)) minimal = false;
        }
        if (minimal) out.insert(h);
    }
    return out;
}

/// Every binary Seq/And/Or tree over `leaves`, leaves kept in order.
inline void trees(const std::vector<OrderExpr>& leaves, std::size_t lo, std::size_t hi,
                  const std::function<void(const OrderExpr&)>& emit)
{
    if (hi - lo == 1) {
        emit(leaves[lo]);
        return;
    }
    for (std::size_t mid = lo + 1; mid < hi; ++mid) {
        trees(leaves, lo, mid, [&](const OrderExpr& a) {
            trees(leaves, mid, hi, [&](const OrderExpr& b) {
                emit(OrderExpr::seq(a, b));
                emit(OrderExpr::conj(a, b));
                emit(OrderExpr::disj(a, b));
            });
        });
    }
}

/// n choose k.
inline std::size_t choose(std::size_t n, std::size_t k)
{
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace oracle
