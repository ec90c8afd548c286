#include "provledger/record_store.hpp"

#include <algorithm>

namespace provledger {

std::string_view to_string(RecordStatus status) {
    return status == RecordStatus::Valid ? "Valid" : "Invalidated";
}

nlohmann::json to_json(const ProvenanceRecord& record) {
    nlohmann::json inputs = nlohmann::json::array();
    for (auto id : record.input_provenance_ids) inputs.push_back(id.value);
    nlohmann::json context = nlohmann::json::object();
    for (const auto& [k, v] : record.context.entries()) context[k] = v;
    return {
        {"id", record.id.value},
        {"tokenId", record.token_id.value},
        {"inputProvenanceIds", std::move(inputs)},
        {"context", std::move(context)},
        {"index", record.index},
        {"status", to_string(record.status)},
    };
}

ProvenanceRecord record_from_json(const nlohmann::json& j) {
    ProvenanceRecord r;
    r.id = ProvenanceId(j.at("id").get<uint64_t>());
    r.token_id = TokenId(j.at("tokenId").get<uint64_t>());
    for (const auto& v : j.at("inputProvenanceIds")) r.input_provenance_ids.emplace_back(v.get<uint64_t>());
    for (const auto& [k, v] : j.at("context").items()) r.context.set(k, v.get<std::string>());
    r.index = j.at("index").get<uint64_t>();
    r.status = j.at("status").get<std::string>() == "Valid" ? RecordStatus::Valid : RecordStatus::Invalidated;
    return r;
}

uint64_t RecordStore::create_record(const WriteKey&, ProvenanceId id, TokenId token_id,
                                    std::vector<ProvenanceId> inputs, Context context) {
    if (id.is_nil()) throw ProvError(ErrorCode::InvalidInput, "provenance id 0 is reserved");
    if (records_.contains(id)) {
        throw ProvError(ErrorCode::DuplicateProvenanceId,
                        "provenance id " + std::to_string(id.value) + " already stored");
    }
    const uint64_t position = index_.size();
    records_.emplace(id, ProvenanceRecord{id, token_id, std::move(inputs), std::move(context), position,
                                          RecordStatus::Valid});
    index_.push_back(id);
    return position;
}

ProvenanceRecord& RecordStore::mutable_valid(ProvenanceId id) {
    auto it = records_.find(id);
    if (it == records_.end()) {
        throw ProvError(ErrorCode::RecordNotFound, "no record " + std::to_string(id.value));
    }
    if (it->second.status != RecordStatus::Valid) {
        throw ProvError(ErrorCode::RecordInvalidated, "record " + std::to_string(id.value) + " is invalidated");
    }
    return it->second;
}

void RecordStore::update_context(const WriteKey&, ProvenanceId id, Context new_context) {
    mutable_valid(id).context = std::move(new_context);
}

void RecordStore::invalidate_record(const WriteKey&, ProvenanceId id) {
    mutable_valid(id).status = RecordStatus::Invalidated;
}

ProvenanceRecord RecordStore::get_record(ProvenanceId id) const {
    if (const auto* r = find(id)) return *r;
    throw ProvError(ErrorCode::RecordNotFound, "no record " + std::to_string(id.value));
}

const ProvenanceRecord* RecordStore::find(ProvenanceId id) const {
    auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
}

std::vector<ProvenanceId> RecordStore::list_record_ids(uint64_t offset, uint64_t limit) const {
    if (offset >= index_.size()) return {};
    const uint64_t end = offset + std::min<uint64_t>(limit, index_.size() - offset);
    return {index_.begin() + static_cast<ptrdiff_t>(offset), index_.begin() + static_cast<ptrdiff_t>(end)};
}

nlohmann::json RecordStore::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (auto id : index_) out.push_back(provledger::to_json(records_.at(id)));
    return out;
}

}  // namespace provledger
