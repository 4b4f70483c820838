#pragma once
// Exhaustive ground truth: evaluate every T-subset of branches as the open
// set, keep the feasible ones, rank by ACP. Work is split into chunks keyed
// by the lowest open edge id and merged in chunk order, so the report is
// identical for any worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

#include "gridconf/grid_model.hpp"
#include "gridconf/reliability.hpp"
#include "gridconf/topology.hpp"

namespace gridconf {

struct RankedConfiguration {
    std::vector<int> open_edges;  // ascending branch ids
    double acp = 0.0;             // MWh/yr
};

struct EnumerationReport {
    std::uint64_t total_combinations = 0;
    std::uint64_t feasible_count = 0;
    RankedConfiguration best;
    std::vector<RankedConfiguration> top;  // ascending ACP, ties by open set
    double wall_time_seconds = 0.0;
    int workers = 1;
    int top_k = 0;
};

namespace detail {

/// Flat per-branch arrays for the enumeration hot loop (0-based buses).
struct FlatGrid {
    int n_buses = 0;
    int n_branches = 0;
    int root = 0;
    std::vector<int> from, to;        // per branch index
    std::vector<double> outage_hours; // lambda * repair time per branch index
    std::vector<double> demand_kw;    // per bus index

    FlatGrid(const Network& net, const ReliabilityModel& model) {
        n_buses = net.bus_count();
        n_branches = net.branch_count();
        root = net.root - 1;
        from.reserve(static_cast<size_t>(n_branches));
        to.reserve(static_cast<size_t>(n_branches));
        outage_hours.reserve(static_cast<size_t>(n_branches));
        for (const auto& br : net.branches) {
            from.push_back(br.from_bus - 1);
            to.push_back(br.to_bus - 1);
            outage_hours.push_back(model.lambda_of(br.id) * model.repair_hours_of(br.id));
        }
        demand_kw.resize(static_cast<size_t>(n_buses));
        for (const auto& bus : net.buses) demand_kw[static_cast<size_t>(bus.id - 1)] = bus.demand_kw;
    }
};

inline bool compare_ranked(const RankedConfiguration& a, const RankedConfiguration& b) {
    if (a.acp != b.acp) return a.acp < b.acp;
    return a.open_edges < b.open_edges;
}

/// Spanning check over the branches not listed in `open` (ascending indices),
/// via union-find with early exit on the first cycle.
class SpanChecker {
public:
    explicit SpanChecker(const FlatGrid& g) : grid_(g), identity_(static_cast<size_t>(g.n_buses)) {
        for (int i = 0; i < g.n_buses; ++i) identity_[static_cast<size_t>(i)] = i;
        parent_ = identity_;
    }

    bool spans(const int* open, int t) {
        parent_ = identity_;
        int merges = 0;
        int next_skip = 0;
        for (int e = 0; e < grid_.n_branches; ++e) {
            if (next_skip < t && open[next_skip] == e) {
                ++next_skip;
                continue;
            }
            int a = find(grid_.from[static_cast<size_t>(e)]);
            int b = find(grid_.to[static_cast<size_t>(e)]);
            if (a == b) return false;  // cycle: some other component stays split
            parent_[static_cast<size_t>(a)] = b;
            ++merges;
        }
        return merges == grid_.n_buses - 1;
    }

private:
    int find(int x) {
        while (parent_[static_cast<size_t>(x)] != x) {
            parent_[static_cast<size_t>(x)] =
                parent_[static_cast<size_t>(parent_[static_cast<size_t>(x)])];
            x = parent_[static_cast<size_t>(x)];
        }
        return x;
    }

    const FlatGrid& grid_;
    std::vector<int> identity_;
    std::vector<int> parent_;
};

/// ACP of a spanning configuration: BFS from the root accumulating
/// unavailability down the tree, then the demand-weighted sum.
class AcpEvaluator {
public:
    explicit AcpEvaluator(const FlatGrid& g)
        : grid_(g),
          head_(static_cast<size_t>(g.n_buses) + 1),
          cursor_(static_cast<size_t>(g.n_buses)),
          adj_edge_(2 * static_cast<size_t>(g.n_branches)),
          adj_bus_(2 * static_cast<size_t>(g.n_branches)),
          unavailability_(static_cast<size_t>(g.n_buses)),
          queue_(static_cast<size_t>(g.n_buses)),
          seen_(static_cast<size_t>(g.n_buses)) {}

    double acp(const int* open, int t) {
        // Counting sort of closed branch endpoints into a CSR adjacency.
        std::fill(head_.begin(), head_.end(), 0);
        int next_skip = 0;
        for (int e = 0; e < grid_.n_branches; ++e) {
            if (next_skip < t && open[next_skip] == e) {
                ++next_skip;
                continue;
            }
            ++head_[static_cast<size_t>(grid_.from[static_cast<size_t>(e)]) + 1];
            ++head_[static_cast<size_t>(grid_.to[static_cast<size_t>(e)]) + 1];
        }
        for (size_t i = 1; i < head_.size(); ++i) head_[i] += head_[i - 1];
        std::copy(head_.begin(), head_.end() - 1, cursor_.begin());
        auto& cursor = cursor_;
        next_skip = 0;
        for (int e = 0; e < grid_.n_branches; ++e) {
            if (next_skip < t && open[next_skip] == e) {
                ++next_skip;
                continue;
            }
            const int a = grid_.from[static_cast<size_t>(e)];
            const int b = grid_.to[static_cast<size_t>(e)];
            adj_edge_[static_cast<size_t>(cursor[static_cast<size_t>(a)])] = e;
            adj_bus_[static_cast<size_t>(cursor[static_cast<size_t>(a)]++)] = b;
            adj_edge_[static_cast<size_t>(cursor[static_cast<size_t>(b)])] = e;
            adj_bus_[static_cast<size_t>(cursor[static_cast<size_t>(b)]++)] = a;
        }

        std::fill(seen_.begin(), seen_.end(), 0);
        unavailability_[static_cast<size_t>(grid_.root)] = 0.0;
        seen_[static_cast<size_t>(grid_.root)] = 1;
        int qh = 0, qt = 0;
        queue_[static_cast<size_t>(qt++)] = grid_.root;
        double total = 0.0;
        while (qh < qt) {
            const int u = queue_[static_cast<size_t>(qh++)];
            for (int p = head_[static_cast<size_t>(u)]; p < head_[static_cast<size_t>(u) + 1];
                 ++p) {
                const int v = adj_bus_[static_cast<size_t>(p)];
                if (seen_[static_cast<size_t>(v)]) continue;
                seen_[static_cast<size_t>(v)] = 1;
                unavailability_[static_cast<size_t>(v)] =
                    unavailability_[static_cast<size_t>(u)] +
                    grid_.outage_hours[static_cast<size_t>(adj_edge_[static_cast<size_t>(p)])];
                total += grid_.demand_kw[static_cast<size_t>(v)] *
                         unavailability_[static_cast<size_t>(v)];
                queue_[static_cast<size_t>(qt++)] = v;
            }
        }
        return total / 1000.0;  // kW * h/yr -> MWh/yr
    }

private:
    const FlatGrid& grid_;
    std::vector<int> head_;
    std::vector<int> cursor_;
    std::vector<int> adj_edge_, adj_bus_;
    std::vector<double> unavailability_;
    std::vector<int> queue_;
    std::vector<std::uint8_t> seen_;
};

struct ChunkResult {
    std::uint64_t processed = 0;
    std::uint64_t feasible = 0;
    std::vector<RankedConfiguration> top;  // sorted, at most top_k entries
};

/// All T-subsets whose lowest element is `first`, in lexicographic order.
inline ChunkResult enumerate_chunk(const FlatGrid& grid, int first, int t, int top_k,
                                   SpanChecker& span, AcpEvaluator& acp_eval) {
    ChunkResult out;
    const int n = grid.n_branches;
    std::vector<int> open(static_cast<size_t>(t));
    for (int i = 0; i < t; ++i) open[static_cast<size_t>(i)] = first + i;
    if (open.back() >= n) return out;

    for (;;) {
        ++out.processed;
        if (span.spans(open.data(), t)) {
            ++out.feasible;
            RankedConfiguration rc;
            rc.acp = acp_eval.acp(open.data(), t);
            if (static_cast<int>(out.top.size()) < top_k ||
                (!out.top.empty() && rc.acp <= out.top.back().acp)) {
                rc.open_edges.resize(static_cast<size_t>(t));
                for (int i = 0; i < t; ++i) rc.open_edges[static_cast<size_t>(i)] = open[static_cast<size_t>(i)] + 1;
                auto pos = std::lower_bound(out.top.begin(), out.top.end(), rc, compare_ranked);
                out.top.insert(pos, std::move(rc));
                if (static_cast<int>(out.top.size()) > top_k) out.top.pop_back();
            }
        }
        // Next combination with the first element pinned.
        int i = t - 1;
        while (i > 0 && open[static_cast<size_t>(i)] == n - t + i) --i;
        if (i == 0) break;
        ++open[static_cast<size_t>(i)];
        for (int j = i + 1; j < t; ++j)
            open[static_cast<size_t>(j)] = open[static_cast<size_t>(j - 1)] + 1;
    }
    return out;
}

}  // namespace detail

/// Exhaustively ranks every T-subset of open edges. `top_k` feasible
/// configurations are retained (at least 1). The report is byte-identical
/// across worker counts; only wall_time_seconds varies.
inline EnumerationReport enumerate_optimal(const Network& net, const ReliabilityModel& model,
                                           int top_k = 10, int workers = 1) {
    if (top_k < 1) throw ValidationError("top_k must be >= 1");
    if (workers < 1) throw ValidationError("workers must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    const detail::FlatGrid grid(net, model);
    const int t = net.tie_count();
    const int n = grid.n_branches;
    const int n_chunks = n - t + 1;  // lowest open edge index ranges over [0, n-t]

    std::vector<detail::ChunkResult> results(static_cast<size_t>(n_chunks));
    std::atomic<int> next_chunk{0};
    auto run_worker = [&] {
        detail::SpanChecker span(grid);
        detail::AcpEvaluator acp_eval(grid);
        for (;;) {
            const int c = next_chunk.fetch_add(1);
            if (c >= n_chunks) break;
            results[static_cast<size_t>(c)] =
                detail::enumerate_chunk(grid, c, t, top_k, span, acp_eval);
        }
    };

    if (workers == 1) {
        run_worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_worker);
        for (auto& th : pool) th.join();
    }

    EnumerationReport report;
    report.workers = workers;
    report.top_k = top_k;
    for (const auto& cr : results) {
        report.total_combinations += cr.processed;
        report.feasible_count += cr.feasible;
        for (const auto& rc : cr.top) {
            auto pos = std::lower_bound(report.top.begin(), report.top.end(), rc,
                                        detail::compare_ranked);
            report.top.insert(pos, rc);
            if (static_cast<int>(report.top.size()) > top_k) report.top.pop_back();
        }
    }
    if (report.top.empty()) throw NotFoundError("no feasible configuration exists");
    report.best = report.top.front();
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Number of feasible (spanning) T-subsets, without computing any ACP.
inline std::uint64_t feasible_count(const Network& net) {
    ReliabilityModel empty_model;
    empty_model.lambda_per_branch.assign(static_cast<size_t>(net.branch_count()) + 1, 0.0);
    empty_model.repair_hours_per_branch.assign(static_cast<size_t>(net.branch_count()) + 1, 0.0);
    const detail::FlatGrid grid(net, empty_model);
    detail::SpanChecker span(grid);
    const int t = net.tie_count();
    const int n = grid.n_branches;
    std::uint64_t feasible = 0;
    std::vector<int> open(static_cast<size_t>(t));
    for (int i = 0; i < t; ++i) open[static_cast<size_t>(i)] = i;
    for (;;) {
        if (span.spans(open.data(), t)) ++feasible;
        int i = t - 1;
        while (i >= 0 && open[static_cast<size_t>(i)] == n - t + i) --i;
        if (i < 0) break;
        ++open[static_cast<size_t>(i)];
        for (int j = i + 1; j < t; ++j)
            open[static_cast<size_t>(j)] = open[static_cast<size_t>(j - 1)] + 1;
    }
    return feasible;
}

}  // namespace gridconf
