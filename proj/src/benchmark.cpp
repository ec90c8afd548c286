#include "provledger/benchmark.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace provledger::bench {

UseCasePolicy benchmark_policy() {
    UseCasePolicy policy;
    policy.schema = ContextSchema{"benchmark", {"seq"}, {}};
    policy.assignment = OpenAssignment{};
    return policy;
}

void summarize(BenchmarkReport& report) {
    auto& lat = report.latencies_ms;
    if (lat.empty()) {
        report.mean_latency_ms = report.median_latency_ms = report.p95_latency_ms = 0.0;
        return;
    }
    std::vector<uint64_t> sorted = lat;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    report.mean_latency_ms =
        static_cast<double>(std::accumulate(sorted.begin(), sorted.end(), uint64_t{0})) / static_cast<double>(n);
    report.median_latency_ms = n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                                          : (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2.0;
    // nearest-rank
    const size_t rank = (95 * n + 99) / 100;
    report.p95_latency_ms = static_cast<double>(sorted[std::max<size_t>(rank, 1) - 1]);
}

nlohmann::json BenchmarkReport::to_json() const {
    return {
        {"submitted", submitted},
        {"confirmed", confirmed},
        {"confirmedTotal", confirmed_total},
        {"windowMs", window_ms},
        {"tps", tps},
        {"latenciesMs", latencies_ms},
        {"meanLatencyMs", mean_latency_ms},
        {"medianLatencyMs", median_latency_ms},
        {"p95LatencyMs", p95_latency_ms},
    };
}

namespace {

struct Submission {
    uint64_t at = 0;
    size_t fee_class = 0;
    std::optional<uint64_t> confirmed_at;
};

std::vector<BenchmarkReport> simulate(const SimConfig& config, const LoadSpec& load, const std::vector<uint64_t>& fees) {
    config.validate();
    if (load.window_ms == 0) throw ProvError(ErrorCode::ConfigInvalid, "benchmark window must be positive");
    if (fees.empty()) throw ProvError(ErrorCode::ConfigInvalid, "at least one fee class is required");

    Ledger ledger(benchmark_policy(), config);

    std::vector<ClientId> senders;
    for (size_t k = 0; k < fees.size(); ++k) {
        senders.push_back(ClientId::from_alias("bench-client-" + std::to_string(k)));
        ledger.submit(senders.back(), RequestTokenOp{}, 1, 0);
    }
    while (ledger.mempool_size() > 0) ledger.produce_block();

    std::map<ClientId, TokenId> token_of;
    for (const auto& block : ledger.blocks()) {
        for (size_t i = 0; i < block.transactions.size(); ++i) {
            if (block.results[i].ok()) token_of[block.transactions[i].sender] = TokenId(*block.results[i].value);
        }
    }

    const uint64_t start = ledger.now();
    const uint64_t window_end = start + load.window_ms;
    const uint64_t deadline = window_end + load.drain_limit_ms;

    std::vector<Submission> schedule(load.tx_count);
    for (uint64_t i = 0; i < load.tx_count; ++i) {
        schedule[i].at = start + static_cast<uint64_t>((static_cast<unsigned __int128>(i) * load.window_ms) / load.tx_count);
        schedule[i].fee_class = i % fees.size();
    }

    std::map<Digest, size_t> by_hash;
    size_t next = 0;
    for (;;) {
        if (next < schedule.size() && schedule[next].at < ledger.next_block_time()) {
            const auto& s = schedule[next];
            const ClientId sender = senders[s.fee_class];
            CreateProvenanceOp op{token_of.at(sender), {}, Context{{"seq", std::to_string(next)}}};
            by_hash.emplace(ledger.submit(sender, std::move(op), fees[s.fee_class], s.at), next);
            ++next;
            continue;
        }
        if (next == schedule.size() && ledger.mempool_size() == 0) break;
        if (ledger.next_block_time() > deadline) break;
        const Block& block = ledger.produce_block();
        for (const auto& tx : block.transactions) schedule[by_hash.at(tx.hash)].confirmed_at = block.timestamp;
    }

    std::vector<BenchmarkReport> reports(fees.size());
    for (auto& r : reports) r.window_ms = load.window_ms;
    for (const auto& s : schedule) {
        auto& r = reports[s.fee_class];
        ++r.submitted;
        if (!s.confirmed_at) continue;
        ++r.confirmed_total;
        if (*s.confirmed_at <= window_end) ++r.confirmed;
        r.latencies_ms.push_back(*s.confirmed_at - s.at);
    }
    for (auto& r : reports) {
        r.tps = static_cast<double>(r.confirmed) / (static_cast<double>(load.window_ms) / 1000.0);
        summarize(r);
    }
    return reports;
}

}  // namespace

BenchmarkReport run_benchmark(const SimConfig& config, const LoadSpec& load) {
    return simulate(config, load, {load.fee}).front();
}

std::vector<FeeClassReport> run_fee_classes(const SimConfig& config, const LoadSpec& load,
                                            const std::vector<uint64_t>& fees) {
    auto reports = simulate(config, load, fees);
    std::vector<FeeClassReport> out;
    for (size_t k = 0; k < fees.size(); ++k) out.push_back({fees[k], std::move(reports[k])});
    return out;
}

}  // namespace provledger::bench
