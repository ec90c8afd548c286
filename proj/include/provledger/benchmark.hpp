#pragma once

#include <vector>

#include "json.hpp"
#include "provledger/ledger.hpp"

namespace provledger::bench {

/// Offered load: `tx_count` CreateProvenance transactions spaced evenly over
/// `window_ms`, all paying `fee`.
struct LoadSpec {
    uint64_t tx_count = 150;
    uint64_t window_ms = 60'000;
    uint64_t fee = 1;
    /// How long past the window the clock keeps running to drain the mempool.
    uint64_t drain_limit_ms = 3'600'000;
};

struct BenchmarkReport {
    uint64_t submitted = 0;
    /// Confirmed in blocks stamped inside the window.
    uint64_t confirmed = 0;
    /// Confirmed before the run stopped, window or not.
    uint64_t confirmed_total = 0;
    uint64_t window_ms = 0;
    double tps = 0.0;
    /// Block timestamp minus submission time, per confirmed transaction in
    /// submission order.
    std::vector<uint64_t> latencies_ms;
    double mean_latency_ms = 0.0;
    double median_latency_ms = 0.0;
    double p95_latency_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Per-fee-class outcome of a contended run.
struct FeeClassReport {
    uint64_t fee = 0;
    BenchmarkReport report;
};

/// Single-account throughput run: one client owns a token and submits the
/// whole load against it. Deterministic for a given config.
BenchmarkReport run_benchmark(const SimConfig& config, const LoadSpec& load);

/// Contended run: `load.tx_count` transactions assigned round-robin to one
/// account per entry of `fees`, each account paying its own fee.
/// `load.fee` is ignored.
std::vector<FeeClassReport> run_fee_classes(const SimConfig& config, const LoadSpec& load,
                                            const std::vector<uint64_t>& fees);

/// Fills mean / median / p95 from latencies_ms.
void summarize(BenchmarkReport& report);

/// Policy used by the benchmark ledgers: open assignment, context {seq}.
UseCasePolicy benchmark_policy();

}  // namespace provledger::bench
