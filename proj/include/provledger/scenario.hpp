#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "provledger/ledger.hpp"

namespace provledger {

/// Replays a scripted sequence of client operations against a fresh ledger.
///
/// Script format:
///   {
///     "policy": {...policy file...},
///     "config": {...sim config...},
///     "steps": [
///       {"as": "alice", "op": {"type": "RequestToken"}, "expect": "Ok", "bind": "t1"},
///       {"as": "alice", "op": {"type": "CreateProvenance", "tokenId": "$t1", ...}, "expect": "Ok", "bind": "p1"},
///       {"query": {"type": "lineage", "id": "$p1"}, "expect": {"lineage": ["$p1"]}}
///     ]
///   }
///
/// Strings of the form "$name" are replaced by the value bound earlier with
/// "bind". Every operation step is mined into its own block. Query types are
/// lineage {id}, graph {id, depth}, traces {tokenId}, record {id} and
/// associated {tokenId}; their expectation is either the query JSON or an
/// error code string.
class ScenarioRunner {
public:
    explicit ScenarioRunner(const nlohmann::json& script);

    /// Runs every step; throws ScenarioMismatch naming the first failing step.
    void run();

    const Ledger& ledger() const { return ledger_; }
    const std::map<std::string, uint64_t>& bindings() const { return bindings_; }
    size_t steps_run() const { return steps_run_; }

private:
    nlohmann::json substitute(const nlohmann::json& j) const;
    void run_operation(size_t index, const nlohmann::json& step);
    void run_query(size_t index, const nlohmann::json& step);

    nlohmann::json steps_;
    Ledger ledger_;
    std::map<std::string, uint64_t> bindings_;
    size_t steps_run_ = 0;
};

/// Query result in the compact form used by scenario expectations.
nlohmann::json scenario_query(const PolicyLayer& state, const nlohmann::json& query);

}  // namespace provledger
