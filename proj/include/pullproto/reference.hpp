#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pullproto/entailment.hpp"
#include "pullproto/protocol.hpp"
#include "pullproto/rules.hpp"

namespace pullproto {

struct SourceParams {
    std::int64_t n = 0;
    bool err = false;
};

struct SinkParams {
    std::int64_t r = 0;
    bool err = false;
    bool wait = true;
};

struct TransformerParams {
    std::int64_t r = 0;
    bool err = false;
};

/// Which text a module's rules come from.
enum class RuleVariant {
    reference,  // the shipped rules/*.rules, with ordering guards
    verbatim,   // the figure rules exactly as published, rules/verbatim/*.rules
};

/// Rule text shipped with the library, by file stem (e.g. "source",
/// "verbatim/sink", "pingpong_client"). Throws std::out_of_range.
std::string_view shipped_rules(std::string_view stem);
std::vector<std::string> shipped_rule_names();

RuleSetInstance source_rules(const SourceParams& p, RuleVariant v = RuleVariant::reference);
RuleSetInstance sink_rules(const SinkParams& p, RuleVariant v = RuleVariant::reference);
RuleSetInstance transformer_rules(const TransformerParams& p, RuleVariant v = RuleVariant::reference);
/// The transformer without the "already terminated upstream" guards.
RuleSetInstance faulty_take_rules(const TransformerParams& p);

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class StageRole { source, transformer, sink };

/// A module instance written against the canonical ports: a source answers
/// on UO to requests from TI (level 0); a sink requests on DI and is answered
/// from TO (level 1); a transformer uses all four.
struct Stage {
    StageRole role;
    RuleSetInstance module;
    std::string label;
};

/// An ordered chain of stages. Composing a source with transformers yields a
/// source, transformers with a sink a sink, and so on.
class Component {
public:
    static Component source(const SourceParams& p, RuleVariant v = RuleVariant::reference);
    static Component transformer(const TransformerParams& p, RuleVariant v = RuleVariant::reference);
    static Component faulty_take(const TransformerParams& p);
    static Component sink(const SinkParams& p, RuleVariant v = RuleVariant::reference);

    /// Role of the chain as a whole; nullopt for a closed pipeline.
    std::optional<StageRole> role() const;
    bool closed() const;

    const std::vector<Stage>& stages() const noexcept { return stages_; }
    std::size_t transformer_count() const;

    /// Interfaces in source-to-sink order with canonical names: UO–DI with no
    /// transformer, UO–TI and TO–DI with one, UO–TI_1, TO_1–TI_2, ..., TO_k–DI
    /// beyond that. Level of interface j is j.
    std::vector<InterfaceSpec> interfaces() const;

    /// Rule sets with ports renamed and prime levels shifted to match interfaces().
    std::vector<RuleSetInstance> wired() const;

    friend Component connect(const Component& upstream, const Component& downstream);

private:
    std::vector<Stage> stages_;
};

/// Throws ShapeError unless the downstream end of `upstream` is open and the
/// upstream end of `downstream` is open.
Component connect(const Component& upstream, const Component& downstream);

struct Pipeline {
    SourceParams source;
    struct TransformerStage {
        TransformerParams params;
        bool faulty = false;
    };
    std::vector<TransformerStage> transformers;
    SinkParams sink;
    RuleVariant variant = RuleVariant::reference;

    Component component() const;
};

/// Renames `module`'s ports via `ports` (canonical name -> port) and shifts
/// every prime level by `prime_shift`.
RuleSetInstance rewire(const RuleSetInstance& module, const std::vector<std::pair<std::string, Port>>& ports,
                       int prime_shift);

/// Runnable config for a closed component. Throws ShapeError otherwise.
EngineConfig compose(const Component& c, ScheduleMode mode = ScheduleMode::exhaustive, std::uint64_t seed = 0);
EngineConfig compose(const Pipeline& p, ScheduleMode mode = ScheduleMode::exhaustive, std::uint64_t seed = 0);

/// Generator shapes each interface of `p` may exhibit, derived from the
/// module parameters. One entry per interface, source side first.
std::vector<std::vector<Shape>> expected_shapes(const Pipeline& p);

}  // namespace pullproto
