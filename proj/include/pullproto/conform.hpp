#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pullproto/protocol.hpp"
#include "pullproto/reference.hpp"

namespace pullproto {

struct SweepConfig {
    /// Values and asks range over 0..max_n for every stage.
    std::int64_t max_n = 2;
    std::int64_t max_n_cap = 5;
    /// Pipelines with 0..max_transformers transformers between source and sink.
    std::size_t max_transformers = 1;
    bool faulty_take = false;
    RuleVariant variant = RuleVariant::reference;
    CheckOptions check;  // `finite` is forced on
    std::size_t max_steps = 10000;
    std::size_t max_histories = 100000;
    /// Also require each interface projection to match a derived generator shape.
    bool check_shapes = true;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;
    /// Explicit grid; when non-empty it replaces the generated one.
    std::vector<Pipeline> grid;
};

std::vector<Pipeline> sweep_grid(const SweepConfig& cfg);
std::string describe(const Pipeline& p);

struct InterfaceFailure {
    std::size_t history = 0;
    std::size_t interface = 0;
    std::vector<Violation> violations;
    bool shape_mismatch = false;
};

struct ConfigResult {
    std::string config;
    std::size_t histories = 0;
    std::size_t failing_histories = 0;
    std::vector<InterfaceFailure> failures;
    /// Distinct invariant ids seen in this configuration.
    std::vector<int> invariants;
    bool shape_mismatch = false;
    /// Upstream terminate requests observed in one history, maximum over histories.
    std::size_t max_upstream_terminates = 0;

    bool pass() const noexcept { return failing_histories == 0; }
};

struct SweepReport {
    std::vector<ConfigResult> configs;
    std::size_t total_histories = 0;
    std::size_t failing_histories = 0;
    std::size_t failing_configs = 0;
    double wall_seconds = 0.0;

    bool pass() const noexcept { return failing_configs == 0; }
    /// Line-oriented report; `with_timing` appends the wall time line.
    std::string render(bool with_timing = true) const;
};

/// Throws ParameterError when max_n exceeds max_n_cap.
SweepReport conform(const SweepConfig& cfg);

/// Runs one pipeline exhaustively and checks every interface of every history.
ConfigResult check_pipeline(const Pipeline& p, const SweepConfig& cfg);

}  // namespace pullproto
