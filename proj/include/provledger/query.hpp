#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "provledger/provenance.hpp"

namespace provledger::query {

/// Derivation DAG. An edge (from, to) means `to` is an input of `from`.
/// Nodes and edges are sorted by id.
struct ProvenanceGraph {
    std::vector<ProvenanceRecord> nodes;
    std::vector<std::pair<ProvenanceId, ProvenanceId>> edges;

    bool operator==(const ProvenanceGraph&) const = default;
};

/// A maximal chain of same-token records, oldest first. `head` is the newest.
struct Trace {
    ProvenanceId head;
    std::vector<ProvenanceId> lineage;

    bool operator==(const Trace&) const = default;
};

/// Same-token inputs of `record`, in input order.
std::vector<ProvenanceId> same_token_inputs(const RecordStore& store, const ProvenanceRecord& record);

/// Walks back through the unique same-token input of each record and
/// returns the chain oldest-first. Throws AmbiguousLineage when a record on
/// the way has more than one same-token input.
std::vector<ProvenanceId> lineage(const RecordStore& store, ProvenanceId id);

/// Breadth-first expansion through input edges. Nodes at depth `max_depth`
/// are included but not expanded; max_depth 0 yields the root alone.
ProvenanceGraph derivation_graph(const RecordStore& store, ProvenanceId id, uint64_t max_depth);

/// Partitions the records associated with `token_id` into traces. A record
/// continues the trace of its same-token input when that input is unique and
/// not already continued by an earlier record; otherwise it opens a new
/// trace. Traces are ordered by their oldest record.
std::vector<Trace> traces(const GenericProvenance& provenance, TokenId token_id);

nlohmann::json lineage_to_json(const std::vector<ProvenanceId>& chain);
nlohmann::json graph_to_json(const ProvenanceGraph& graph);
std::string graph_to_dot(const ProvenanceGraph& graph);
nlohmann::json traces_to_json(const std::vector<Trace>& traces);

}  // namespace provledger::query
