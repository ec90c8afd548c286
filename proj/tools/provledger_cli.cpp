// provledger: command-line front end for the provenance ledger.
//
// Every command prints JSON on stdout. Failures print {"error", "message"}
// on stderr and exit non-zero (1 for operation errors, 2 for usage errors).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "provledger/benchmark.hpp"
#include "provledger/ledger.hpp"
#include "provledger/query.hpp"
#include "provledger/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace provledger;

namespace {

int report_error(ErrorCode code, const std::string& message) {
    std::cerr << json{{"error", to_string(code)}, {"message", message}}.dump() << std::endl;
    return 1;
}

json parse_json_arg(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ProvError(ErrorCode::MalformedPayload, std::string(what) + " is not valid JSON: " + e.what());
    }
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ProvError(ErrorCode::ConfigInvalid, path + ": " + e.what());
    }
}

std::vector<uint64_t> parse_csv_ids(const std::string& csv) {
    std::vector<uint64_t> out;
    std::stringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        size_t used = 0;
        uint64_t v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ProvError(ErrorCode::MalformedPayload, "bad id in --inputs: " + item);
        out.push_back(v);
    }
    return out;
}

/// Submits `payload` as `caller`, mines until it is included and persists.
/// Returns the process exit code.
int run_mutation(const fs::path& dir, const std::string& caller, json payload, uint64_t fee,
                 const char* value_key = nullptr) {
    Ledger ledger = Ledger::load(dir);
    const Payload op = payload_from_json(payload);
    const Digest hash = ledger.submit(ClientId::parse(caller), op, fee, ledger.now());

    std::optional<std::pair<uint64_t, TxResult>> receipt;
    while (!receipt && ledger.mempool_size() > 0) {
        const Block& block = ledger.produce_block();
        for (size_t i = 0; i < block.transactions.size(); ++i) {
            if (block.transactions[i].hash == hash) receipt.emplace(block.height, block.results[i]);
        }
    }
    ledger.persist(dir);
    if (!receipt) return report_error(ErrorCode::IoFailure, "transaction was not included");

    const auto& [height, result] = *receipt;
    json out{{"txHash", to_hex(hash)}, {"blockHeight", height}, {"result", to_string(result.code)}};
    if (value_key && result.value) out[value_key] = *result.value;
    std::cout << out.dump() << std::endl;
    if (!result.ok()) return report_error(result.code, "transaction " + to_hex(hash) + " failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Provenance ledger for IoT data points"};
    app.require_subcommand(1);

    const char* env_dir = std::getenv("PROVLEDGER_DIR");
    std::string dir = env_dir ? env_dir : "provledger-data";
    app.add_option("--dir", dir, "Ledger directory (default: $PROVLEDGER_DIR)");

    std::string as, to, context_text = "{}", inputs_csv, policy_path, config_path, member, op_client;
    uint64_t pay = 0, id = 0, token = 0, depth = 0, fee = 1;
    bool dot = false;

    auto* init = app.add_subcommand("init", "Create a genesis ledger");
    init->add_option("--policy", policy_path, "Policy definition file")->required();
    init->add_option("--config", config_path, "Simulation config file");
    init->add_option("--out", dir, "Ledger directory");

    auto* token_cmd = app.add_subcommand("token", "Token operations");
    token_cmd->require_subcommand(1);
    auto* token_request = token_cmd->add_subcommand("request", "Request a new token");
    token_request->add_option("--as", as)->required();
    token_request->add_option("--pay", pay);
    auto* token_transfer = token_cmd->add_subcommand("transfer", "Transfer a token");
    token_transfer->add_option("--as", as)->required();
    token_transfer->add_option("--id", token)->required();
    token_transfer->add_option("--to", to)->required();
    auto* token_approve = token_cmd->add_subcommand("approve", "Authorize another client on a token");
    token_approve->add_option("--as", as)->required();
    token_approve->add_option("--id", token)->required();
    token_approve->add_option("--operator", op_client)->required();

    auto* wl_cmd = app.add_subcommand("whitelist", "Whitelist administration");
    wl_cmd->require_subcommand(1);
    auto* wl_add = wl_cmd->add_subcommand("add", "Add a member");
    auto* wl_remove = wl_cmd->add_subcommand("remove", "Remove a member");
    for (auto* c : {wl_add, wl_remove}) {
        c->add_option("--as", as)->required();
        c->add_option("--member", member)->required();
    }

    auto* prov_cmd = app.add_subcommand("prov", "Provenance records");
    prov_cmd->require_subcommand(1);
    auto* prov_create = prov_cmd->add_subcommand("create", "Create a provenance record");
    prov_create->add_option("--as", as)->required();
    prov_create->add_option("--token", token)->required();
    prov_create->add_option("--inputs", inputs_csv);
    prov_create->add_option("--context", context_text);
    auto* prov_get = prov_cmd->add_subcommand("get", "Read a record");
    prov_get->add_option("--id", id)->required();
    auto* prov_invalidate = prov_cmd->add_subcommand("invalidate", "Invalidate a record");
    prov_invalidate->add_option("--as", as)->required();
    prov_invalidate->add_option("--id", id)->required();
    auto* prov_update = prov_cmd->add_subcommand("update", "Replace a record's context");
    prov_update->add_option("--as", as)->required();
    prov_update->add_option("--id", id)->required();
    prov_update->add_option("--context", context_text)->required();

    for (auto* c : {token_request, token_transfer, token_approve, wl_add, wl_remove, prov_create, prov_invalidate,
                    prov_update}) {
        c->add_option("--fee", fee, "Transaction fee");
    }

    auto* query_cmd = app.add_subcommand("query", "Lineage and derivation queries");
    query_cmd->require_subcommand(1);
    auto* q_lineage = query_cmd->add_subcommand("lineage", "Same-token lineage of a record");
    q_lineage->add_option("--id", id)->required();
    auto* q_graph = query_cmd->add_subcommand("graph", "Derivation graph of a record");
    q_graph->add_option("--id", id)->required();
    q_graph->add_option("--depth", depth);
    q_graph->add_flag("--dot", dot, "Emit Graphviz DOT instead of JSON");
    auto* q_traces = query_cmd->add_subcommand("traces", "Parallel traces of a token");
    q_traces->add_option("--token", token)->required();

    auto* scenario_cmd = app.add_subcommand("scenario", "Scenario scripts");
    scenario_cmd->require_subcommand(1);
    auto* scenario_run = scenario_cmd->add_subcommand("run", "Replay a scenario script");
    std::string scenario_path;
    std::optional<std::string> scenario_out;
    scenario_run->add_option("file", scenario_path)->required();
    scenario_run->add_option("--out", scenario_out, "Persist the resulting ledger here");

    auto* bench_cmd = app.add_subcommand("bench", "Throughput/latency benchmark");
    bench::LoadSpec load;
    SimConfig bench_config;
    bench_cmd->add_option("--tx", load.tx_count);
    bench_cmd->add_option("--window-ms", load.window_ms);
    bench_cmd->add_option("--fee", load.fee);
    bench_cmd->add_option("--drain-limit-ms", load.drain_limit_ms);
    bench_cmd->add_option("--capacity", bench_config.block_capacity);
    bench_cmd->add_option("--interval-ms", bench_config.block_interval_ms);
    bench_cmd->add_option("--seed", bench_config.rng_seed);
    bench_cmd->add_flag("--jitter", bench_config.jitter);

    auto* verify_cmd = app.add_subcommand("verify", "Check a ledger directory for tampering");
    std::string verify_dir;
    verify_cmd->add_option("dir", verify_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << std::endl;
        return 2;
    }

    try {
        if (*init) {
            if (fs::exists(fs::path(dir) / Ledger::kBlockLog)) {
                throw ProvError(ErrorCode::IoFailure, dir + " already holds a ledger");
            }
            const UseCasePolicy policy = policy_from_json(read_json_file(policy_path));
            const SimConfig config = config_path.empty() ? SimConfig{} : config_from_json(read_json_file(config_path));
            Ledger ledger(policy, config);
            ledger.persist(dir);
            std::cout << json{{"dir", dir}, {"genesisHash", to_hex(ledger.head().block_hash)},
                              {"stateDigest", to_hex(ledger.state_digest())}}
                             .dump()
                      << std::endl;
            return 0;
        }
        if (*token_request) {
            return run_mutation(dir, as, {{"type", "RequestToken"}, {"payment", pay}}, fee, "tokenId");
        }
        if (*token_transfer) {
            return run_mutation(dir, as, {{"type", "Transfer"}, {"from", ClientId::parse(as).hex()}, {"to", to}, {"tokenId", token}},
                                fee);
        }
        if (*token_approve) {
            return run_mutation(dir, as, {{"type", "Approve"}, {"operator", op_client}, {"tokenId", token}}, fee);
        }
        if (*wl_add || *wl_remove) {
            return run_mutation(dir, as, {{"type", *wl_add ? "WhitelistAdd" : "WhitelistRemove"}, {"member", member}}, fee);
        }
        if (*prov_create) {
            return run_mutation(dir, as,
                                {{"type", "CreateProvenance"},
                                 {"tokenId", token},
                                 {"inputs", parse_csv_ids(inputs_csv)},
                                 {"context", parse_json_arg(context_text, "--context")}},
                                fee, "provId");
        }
        if (*prov_update) {
            return run_mutation(
                dir, as, {{"type", "UpdateContext"}, {"id", id}, {"context", parse_json_arg(context_text, "--context")}},
                fee);
        }
        if (*prov_invalidate) return run_mutation(dir, as, {{"type", "Invalidate"}, {"id", id}}, fee);
        if (*prov_get) {
            const Ledger ledger = Ledger::load(dir);
            std::cout << to_json(ledger.state().records().get_record(ProvenanceId(id))).dump() << std::endl;
            return 0;
        }
        if (*q_lineage || *q_graph || *q_traces) {
            const Ledger ledger = Ledger::load(dir);
            const auto snapshot = ledger.snapshot();
            if (*q_lineage) {
                std::cout << query::lineage_to_json(query::lineage(snapshot->records(), ProvenanceId(id))).dump();
            } else if (*q_graph) {
                const auto graph = query::derivation_graph(snapshot->records(), ProvenanceId(id), depth);
                std::cout << (dot ? query::graph_to_dot(graph) : query::graph_to_json(graph).dump());
            } else {
                std::cout << query::traces_to_json(query::traces(snapshot->generic(), TokenId(token))).dump();
            }
            std::cout << std::endl;
            return 0;
        }
        if (*scenario_run) {
            ScenarioRunner runner(read_json_file(scenario_path));
            runner.run();
            if (scenario_out) runner.ledger().persist(*scenario_out);
            std::cout << json{{"ok", true},
                              {"steps", runner.steps_run()},
                              {"bindings", runner.bindings()},
                              {"height", runner.ledger().height()},
                              {"stateDigest", to_hex(runner.ledger().state_digest())}}
                             .dump()
                      << std::endl;
            return 0;
        }
        if (*bench_cmd) {
            std::cout << bench::run_benchmark(bench_config, load).to_json().dump() << std::endl;
            return 0;
        }
        if (*verify_cmd) {
            const VerifyResult result = verify_chain(fs::path(verify_dir));
            std::cout << result.to_json().dump() << std::endl;
            return result.ok ? 0 : report_error(ErrorCode::CorruptLog, result.reason);
        }
    } catch (const ProvError& e) {
        return report_error(e.code(), e.what());
    } catch (const std::exception& e) {
        return report_error(ErrorCode::IoFailure, e.what());
    }
    return 2;
}
