#include "provledger/scenario.hpp"

#include "provledger/query.hpp"

namespace provledger {

namespace {

using nlohmann::json;

UseCasePolicy script_policy(const json& script) {
    if (!script.is_object() || !script.contains("policy")) {
        throw ProvError(ErrorCode::ConfigInvalid, "scenario needs a policy");
    }
    return policy_from_json(script.at("policy"));
}

SimConfig script_config(const json& script) {
    return config_from_json(script.value("config", json::object()));
}

[[noreturn]] void mismatch(size_t index, const std::string& what) {
    throw ProvError(ErrorCode::ScenarioMismatch, "step " + std::to_string(index) + ": " + what);
}

uint64_t id_arg(const json& q, const char* key) {
    if (!q.contains(key) || !q.at(key).is_number_integer() || q.at(key).get<int64_t>() < 0) {
        throw ProvError(ErrorCode::MalformedPayload, std::string("query needs unsigned '") + key + "'");
    }
    return q.at(key).get<uint64_t>();
}

}  // namespace

json scenario_query(const PolicyLayer& state, const json& query) {
    const std::string type = query.value("type", "");
    if (type == "lineage") {
        return query::lineage_to_json(query::lineage(state.records(), ProvenanceId(id_arg(query, "id"))));
    }
    if (type == "graph") {
        const auto graph = query::derivation_graph(state.records(), ProvenanceId(id_arg(query, "id")),
                                                   query.value("depth", uint64_t{0}));
        json nodes = json::array();
        for (const auto& n : graph.nodes) nodes.push_back(n.id.value);
        json edges = json::array();
        for (const auto& [from, to] : graph.edges) edges.push_back({from.value, to.value});
        return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
    }
    if (type == "traces") {
        return query::traces_to_json(query::traces(state.generic(), TokenId(id_arg(query, "tokenId"))));
    }
    if (type == "record") return to_json(state.records().get_record(ProvenanceId(id_arg(query, "id"))));
    if (type == "associated") {
        json ids = json::array();
        for (auto id : state.generic().get_associated_provenance(TokenId(id_arg(query, "tokenId")))) {
            ids.push_back(id.value);
        }
        return {{"associated", std::move(ids)}};
    }
    throw ProvError(ErrorCode::MalformedPayload, "unknown query type '" + type + "'");
}

ScenarioRunner::ScenarioRunner(const json& script)
    : steps_(script.value("steps", json::array())), ledger_(script_policy(script), script_config(script)) {
    if (!steps_.is_array()) throw ProvError(ErrorCode::MalformedPayload, "steps must be an array");
}

json ScenarioRunner::substitute(const json& j) const {
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s.size() > 1 && s.front() == '$') {
            auto it = bindings_.find(s.substr(1));
            if (it == bindings_.end()) throw ProvError(ErrorCode::MalformedPayload, "unbound name " + s);
            return it->second;
        }
        return j;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& v : j) out.push_back(substitute(v));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (const auto& [k, v] : j.items()) out[k] = substitute(v);
        return out;
    }
    return j;
}

void ScenarioRunner::run() {
    for (size_t i = 0; i < steps_.size(); ++i) {
        const auto& step = steps_[i];
        if (step.contains("query")) {
            run_query(i, step);
        } else {
            run_operation(i, step);
        }
        ++steps_run_;
    }
}

void ScenarioRunner::run_operation(size_t index, const json& step) {
    const ClientId caller = ClientId::parse(step.at("as").get<std::string>());
    const Payload payload = payload_from_json(substitute(step.at("op")));
    const uint64_t fee = step.value("fee", uint64_t{1});
    const ErrorCode expected = error_code_from_string(step.value("expect", "Ok"));

    const Digest hash = ledger_.submit(caller, payload, fee, ledger_.now());
    while (ledger_.mempool_size() > 0) {
        const Block& block = ledger_.produce_block();
        for (size_t t = 0; t < block.transactions.size(); ++t) {
            if (block.transactions[t].hash != hash) continue;
            const TxResult& result = block.results[t];
            if (result.code != expected) {
                mismatch(index, "expected " + std::string(to_string(expected)) + ", got " +
                                    std::string(to_string(result.code)));
            }
            if (step.contains("bind")) {
                if (!result.value) mismatch(index, "operation returned no value to bind");
                bindings_[step.at("bind").get<std::string>()] = *result.value;
            }
            return;
        }
    }
    mismatch(index, "transaction was never included");
}

void ScenarioRunner::run_query(size_t index, const json& step) {
    const json query = substitute(step.at("query"));
    const json expected = substitute(step.value("expect", json{}));
    json actual;
    try {
        actual = scenario_query(ledger_.state(), query);
    } catch (const ProvError& e) {
        if (e.code() == ErrorCode::MalformedPayload) throw;
        actual = std::string(to_string(e.code()));
    }
    if (actual != expected) mismatch(index, "expected " + expected.dump() + ", got " + actual.dump());
}

}  // namespace provledger
