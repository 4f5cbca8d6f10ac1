#include "pullproto/conform.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace pullproto {

namespace {

const char* b2s(bool b) { return b ? "true" : "false"; }

void grid_rec(const SweepConfig& cfg, std::size_t k, Pipeline& p, std::size_t t, std::vector<Pipeline>& out)
{
    if (t < k) {
        for (std::int64_t r = 0; r <= cfg.max_n; ++r) {
            for (bool err : {false, true}) {
                p.transformers[t].params = TransformerParams{r, err};
                p.transformers[t].faulty = cfg.faulty_take;
                grid_rec(cfg, k, p, t + 1, out);
            }
        }
        return;
    }
    for (std::int64_t r = 0; r <= cfg.max_n; ++r)
        for (bool err : {false, true})
            for (bool w : {false, true}) {
                p.sink = SinkParams{r, err, w};
                out.push_back(p);
            }
}

}  // namespace

std::vector<Pipeline> sweep_grid(const SweepConfig& cfg)
{
    if (cfg.max_n < 0) throw ParameterError("max_n must be >= 0");
    if (cfg.max_n > cfg.max_n_cap)
        throw ParameterError("max_n " + std::to_string(cfg.max_n) + " exceeds the cap " +
                             std::to_string(cfg.max_n_cap));
    if (!cfg.grid.empty()) return cfg.grid;
    std::vector<Pipeline> out;
    std::size_t first = cfg.faulty_take ? 1 : 0;
    for (std::size_t k = first; k <= cfg.max_transformers; ++k) {
        for (std::int64_t n = 0; n <= cfg.max_n; ++n) {
            for (bool err : {false, true}) {
                Pipeline p;
                p.variant = cfg.variant;
                p.source = SourceParams{n, err};
                p.transformers.resize(k);
                grid_rec(cfg, k, p, 0, out);
            }
        }
    }
    return out;
}

std::string describe(const Pipeline& p)
{
    std::ostringstream os;
    os << "source(n=" << p.source.n << ",err=" << b2s(p.source.err) << ")";
    for (const auto& t : p.transformers)
        os << " | " << (t.faulty ? "faulty_take" : "transformer") << "(r=" << t.params.r << ",err=" << b2s(t.params.err)
           << ")";
    os << " | sink(r=" << p.sink.r << ",err=" << b2s(p.sink.err) << ",w=" << b2s(p.sink.wait) << ")";
    if (p.variant == RuleVariant::verbatim) os << " [verbatim]";
    return os.str();
}

ConfigResult check_pipeline(const Pipeline& p, const SweepConfig& cfg)
{
    ConfigResult res;
    res.config = describe(p);
    EngineConfig ec = compose(p, ScheduleMode::exhaustive);
    ec.max_steps = cfg.max_steps;
    ec.max_histories = cfg.max_histories;
    const auto ifaces = p.component().interfaces();

    std::vector<std::set<History>> allowed;
    if (cfg.check_shapes) {
        auto shapes = expected_shapes(p);
        for (std::size_t j = 0; j < ifaces.size(); ++j) {
            std::set<History> s;
            for (const auto& shape : shapes[j]) {
                auto hs = shape_histories(shape, ifaces[j]);
                s.insert(hs.begin(), hs.end());
            }
            allowed.push_back(std::move(s));
        }
    }

    CheckOptions opts = cfg.check;
    opts.finite = true;
    const std::size_t upstream_ifaces = ifaces.size() > 1 ? ifaces.size() - 1 : 1;
    std::set<int> invariants;

    auto executions = Engine(std::move(ec)).run();
    res.histories = executions.size();
    for (std::size_t h = 0; h < executions.size(); ++h) {
        const History& hist = executions[h].history;
        bool failed = false;
        std::size_t upstream_terminates = 0;
        for (std::size_t j = 0; j < ifaces.size(); ++j) {
            History proj = project(hist, ifaces[j]);
            InterfaceFailure f{h, j, {}, false};
            try {
                CheckReport rep = check(proj, ifaces[j], opts);
                f.violations = rep.violations;
                if (j < upstream_ifaces)
                    upstream_terminates = std::max(upstream_terminates, rep.stats.terminate_requests);
            } catch (const MalformedTrace& e) {
                f.violations.push_back(Violation{0, e.position(), e.what()});
            }
            if (cfg.check_shapes && !allowed[j].count(proj)) f.shape_mismatch = true;
            if (!f.violations.empty() || f.shape_mismatch) {
                for (const auto& v : f.violations) invariants.insert(v.invariant);
                res.shape_mismatch = res.shape_mismatch || f.shape_mismatch;
                res.failures.push_back(std::move(f));
                failed = true;
            }
        }
        res.max_upstream_terminates = std::max(res.max_upstream_terminates, upstream_terminates);
        if (failed) ++res.failing_histories;
    }
    res.invariants.assign(invariants.begin(), invariants.end());
    return res;
}

SweepReport conform(const SweepConfig& cfg)
{
    auto start = std::chrono::steady_clock::now();
    auto grid = sweep_grid(cfg);
    SweepReport rep;
    rep.configs.resize(grid.size());

    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(grid.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto worker = [&](unsigned id) {
        try {
            for (std::size_t i = next++; i < grid.size(); i = next++) rep.configs[i] = check_pipeline(grid[i], cfg);
        } catch (...) {
            errors[id] = std::current_exception();
            next = grid.size();
        }
    };
    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& c : rep.configs) {
        rep.total_histories += c.histories;
        rep.failing_histories += c.failing_histories;
        if (!c.pass()) ++rep.failing_configs;
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::string SweepReport::render(bool with_timing) const
{
    std::ostringstream os;
    for (const auto& c : configs) {
        os << (c.pass() ? "PASS " : "FAIL ") << c.config << " histories=" << c.histories;
        if (!c.pass()) {
            os << " failing=" << c.failing_histories << " invariants=";
            for (std::size_t i = 0; i < c.invariants.size(); ++i) os << (i ? "," : "") << c.invariants[i];
            if (c.invariants.empty()) os << "-";
            if (c.shape_mismatch) os << " shape-mismatch";
        }
        os << '\n';
        if (!c.failures.empty()) {
            const auto& f = c.failures.front();
            os << "  history " << f.history << " interface " << f.interface;
            if (!f.violations.empty()) os << ": " << pullproto::render(f.violations.front());
            else os << ": projection matches no expected shape";
            os << '\n';
        }
    }
    os << "configs=" << configs.size() << " failing_configs=" << failing_configs << " histories=" << total_histories
       << " failing_histories=" << failing_histories << '\n';
    if (with_timing) os << "wall_seconds=" << wall_seconds << '\n';
    return os.str();
}

}  // namespace pullproto
