// Curated single-invariant mutations of conforming traces on interface I/O.
#pragma once

#include <string>
#include <vector>

#include "pullproto/history.hpp"
#include "pullproto/protocol.hpp"

namespace mutations {

using namespace pullproto;

struct Mutation {
    int invariant;
    std::string description;
    History base;
    History mutated;
    /// Check mode the mutant is judged in.
    bool finite;
};

inline History trace(std::initializer_list<const char*> evs)
{
    History h;
    for (const char* e : evs) h.append(parse_event(e));
    return h;
}

inline InterfaceSpec iface() { return InterfaceSpec(Port("I"), Port("O"), 0); }

inline std::vector<Mutation> curated()
{
    const History normal2 = trace({"I: ask[x_1]", "O: x_1 := v_1", "I: ask[x_2]", "O: x_2 := v_2", "I: ask[x_3]",
                                   "O: x_3 := done"});
    const History early_wait = trace({"I: ask[x_1]", "O: x_1 := v_1", "I: abort[x_2]", "O: x_2 := done"});
    const History early_nowait = trace({"I: ask[x_1]", "I: abort[x_2]", "O: x_1 := done", "O: x_2 := done"});
    const History normal1 = trace({"I: ask[x_1]", "O: x_1 := v_1", "I: ask[x_2]", "O: x_2 := done"});
    return {
        {1, "insert an ask after the done answer", normal2,
         trace({"I: ask[x_1]", "O: x_1 := v_1", "I: ask[x_2]", "O: x_2 := v_2", "I: ask[x_3]", "O: x_3 := done",
                "I: ask[x_4]"}),
         false},
        {2, "delete the answer to the abort", early_wait, trace({"I: ask[x_1]", "O: x_1 := v_1", "I: abort[x_2]"}),
         true},
        {3, "insert a second answer for the last variable", normal2,
         trace({"I: ask[x_1]", "O: x_1 := v_1", "I: ask[x_2]", "O: x_2 := v_2", "I: ask[x_3]", "O: x_3 := done",
                "O: x_3 := err"}),
         true},
        {4, "swap the two terminated answers", early_nowait,
         trace({"I: ask[x_1]", "I: abort[x_2]", "O: x_2 := done", "O: x_1 := done"}), true},
        {5, "swap the first answer with the second ask", normal2,
         trace({"I: ask[x_1]", "I: ask[x_2]", "O: x_1 := v_1", "O: x_2 := v_2", "I: ask[x_3]", "O: x_3 := done"}),
         true},
        // Dropping the termination alone leaves a pending request; the final
        // request and its answer go together.
        {6, "delete the final ask and its done answer", normal1, trace({"I: ask[x_1]", "O: x_1 := v_1"}), true},
    };
}

}  // namespace mutations
