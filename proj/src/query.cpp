#include "provledger/query.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace provledger::query {

std::vector<ProvenanceId> same_token_inputs(const RecordStore& store, const ProvenanceRecord& record) {
    std::vector<ProvenanceId> out;
    for (auto input : record.input_provenance_ids) {
        const auto* in = store.find(input);
        if (in != nullptr && in->token_id == record.token_id) out.push_back(input);
    }
    return out;
}

std::vector<ProvenanceId> lineage(const RecordStore& store, ProvenanceId id) {
    std::vector<ProvenanceId> chain;
    ProvenanceRecord current = store.get_record(id);
    for (;;) {
        chain.push_back(current.id);
        auto preds = same_token_inputs(store, current);
        if (preds.empty()) break;
        if (preds.size() > 1) {
            throw ProvError(ErrorCode::AmbiguousLineage,
                            "record " + std::to_string(current.id.value) + " has " + std::to_string(preds.size()) +
                                " same-token inputs");
        }
        current = store.get_record(preds.front());
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

ProvenanceGraph derivation_graph(const RecordStore& store, ProvenanceId id, uint64_t max_depth) {
    std::map<ProvenanceId, uint64_t> depth;
    std::vector<std::pair<ProvenanceId, ProvenanceId>> edges;
    std::deque<ProvenanceId> frontier;

    store.get_record(id);  // RecordNotFound for unknown roots
    depth.emplace(id, 0);
    frontier.push_back(id);
    while (!frontier.empty()) {
        const ProvenanceId node = frontier.front();
        frontier.pop_front();
        const uint64_t d = depth.at(node);
        if (d >= max_depth) continue;
        for (auto input : store.find(node)->input_provenance_ids) {
            edges.emplace_back(node, input);
            if (depth.emplace(input, d + 1).second) frontier.push_back(input);
        }
    }

    ProvenanceGraph graph;
    for (const auto& [node, _] : depth) graph.nodes.push_back(*store.find(node));
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    graph.edges = std::move(edges);
    return graph;
}

std::vector<Trace> traces(const GenericProvenance& provenance, TokenId token_id) {
    const auto& store = provenance.records();
    std::vector<Trace> out;
    std::map<ProvenanceId, size_t> open_tips;  // tip record -> trace index

    for (auto id : provenance.get_associated_provenance(token_id)) {
        const auto preds = same_token_inputs(store, *store.find(id));
        auto tip = preds.size() == 1 ? open_tips.find(preds.front()) : open_tips.end();
        if (tip != open_tips.end()) {
            const size_t trace = tip->second;
            open_tips.erase(tip);
            out[trace].lineage.push_back(id);
            out[trace].head = id;
            open_tips.emplace(id, trace);
        } else {
            out.push_back(Trace{id, {id}});
            open_tips.emplace(id, out.size() - 1);
        }
    }
    return out;
}

nlohmann::json lineage_to_json(const std::vector<ProvenanceId>& chain) {
    nlohmann::json ids = nlohmann::json::array();
    for (auto id : chain) ids.push_back(id.value);
    return {{"lineage", std::move(ids)}};
}

nlohmann::json graph_to_json(const ProvenanceGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : graph.nodes) nodes.push_back(to_json(node));
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [from, to] : graph.edges) edges.push_back({from.value, to.value});
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

std::string graph_to_dot(const ProvenanceGraph& graph) {
    std::ostringstream dot;
    dot << "digraph provenance {\n";
    for (const auto& node : graph.nodes) {
        dot << "  p" << node.id.value << " [label=\"" << node.id.value << " (token " << node.token_id.value << ")\"";
        if (node.status == RecordStatus::Invalidated) dot << ", style=dashed";
        dot << "];\n";
    }
    for (const auto& [from, to] : graph.edges) dot << "  p" << from.value << " -> p" << to.value << ";\n";
    dot << "}\n";
    return dot.str();
}

nlohmann::json traces_to_json(const std::vector<Trace>& traces) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : traces) {
        nlohmann::json ids = nlohmann::json::array();
        for (auto id : t.lineage) ids.push_back(id.value);
        out.push_back({{"head", t.head.value}, {"lineage", std::move(ids)}});
    }
    return {{"traces", std::move(out)}};
}

}  // namespace provledger::query
