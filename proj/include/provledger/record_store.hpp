#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "json.hpp"
#include "provledger/types.hpp"

namespace provledger {

class GenericProvenance;
struct AccessForTesting;

enum class RecordStatus : uint8_t { Valid, Invalidated };

std::string_view to_string(RecordStatus status);

/// One creation or modification event of a data point: the data point's
/// token, the records it was derived from, and its context.
struct ProvenanceRecord {
    ProvenanceId id;
    TokenId token_id;
    std::vector<ProvenanceId> input_provenance_ids;
    Context context;
    uint64_t index = 0;
    RecordStatus status = RecordStatus::Valid;

    bool operator==(const ProvenanceRecord&) const = default;
};

nlohmann::json to_json(const ProvenanceRecord& record);
ProvenanceRecord record_from_json(const nlohmann::json& j);

/// Storage layer. Reads are public; mutations require a WriteKey, which only
/// the generic provenance layer can mint.
class RecordStore {
public:
    class WriteKey {
        WriteKey() = default;
        friend class GenericProvenance;
        friend struct AccessForTesting;
    };

    /// Stores a new Valid record and returns its position in the global index.
    uint64_t create_record(const WriteKey&, ProvenanceId id, TokenId token_id,
                           std::vector<ProvenanceId> inputs, Context context);

    /// Replaces the whole context. Inputs are immutable.
    void update_context(const WriteKey&, ProvenanceId id, Context new_context);

    void invalidate_record(const WriteKey&, ProvenanceId id);

    ProvenanceRecord get_record(ProvenanceId id) const;
    /// Non-throwing lookup; nullptr when absent.
    const ProvenanceRecord* find(ProvenanceId id) const;
    bool contains(ProvenanceId id) const { return records_.contains(id); }

    uint64_t record_count() const { return index_.size(); }
    std::vector<ProvenanceId> list_record_ids(uint64_t offset, uint64_t limit) const;
    const std::vector<ProvenanceId>& index() const { return index_; }

    /// Records in index order.
    nlohmann::json to_json() const;

private:
    ProvenanceRecord& mutable_valid(ProvenanceId id);

    std::map<ProvenanceId, ProvenanceRecord> records_;
    std::vector<ProvenanceId> index_;
};

}  // namespace provledger
