#include "provledger/provenance.hpp"

#include <set>

namespace provledger {

void GenericProvenance::check_create(ClientId caller, TokenId token_id,
                                     const std::vector<ProvenanceId>& inputs) const {
    if (!tokens_.exists(token_id)) {
        throw ProvError(ErrorCode::TokenNotFound, "token " + std::to_string(token_id.value) + " does not exist");
    }
    if (!tokens_.is_authorized(caller, token_id)) {
        throw ProvError(ErrorCode::NotAuthorized,
                        "caller is neither owner nor approved for token " + std::to_string(token_id.value));
    }
    std::set<ProvenanceId> seen;
    for (auto input : inputs) {
        if (!seen.insert(input).second) {
            throw ProvError(ErrorCode::InvalidInput, "duplicate input " + std::to_string(input.value));
        }
        const auto* record = store_.find(input);
        if (record == nullptr) {
            throw ProvError(ErrorCode::InvalidInput, "input " + std::to_string(input.value) + " does not exist");
        }
        if (record->status != RecordStatus::Valid) {
            throw ProvError(ErrorCode::InvalidInput, "input " + std::to_string(input.value) + " is invalidated");
        }
    }
}

ProvenanceId GenericProvenance::create_provenance(ClientId caller, TokenId token_id,
                                                  std::vector<ProvenanceId> inputs, Context context) {
    check_create(caller, token_id, inputs);
    const ProvenanceId id(next_prov_id_);
    store_.create_record(RecordStore::WriteKey{}, id, token_id, std::move(inputs), std::move(context));
    ++next_prov_id_;
    associated_[token_id].push_back(id);
    return id;
}

const ProvenanceRecord& GenericProvenance::check_mutation(ClientId caller, ProvenanceId id) const {
    const auto* record = store_.find(id);
    if (record == nullptr) throw ProvError(ErrorCode::RecordNotFound, "no record " + std::to_string(id.value));
    if (!tokens_.is_authorized(caller, record->token_id)) {
        throw ProvError(ErrorCode::NotAuthorized, "caller may not modify record " + std::to_string(id.value));
    }
    if (record->status != RecordStatus::Valid) {
        throw ProvError(ErrorCode::RecordInvalidated, "record " + std::to_string(id.value) + " is invalidated");
    }
    return *record;
}

void GenericProvenance::update_provenance(ClientId caller, ProvenanceId id, Context new_context) {
    check_mutation(caller, id);
    store_.update_context(RecordStore::WriteKey{}, id, std::move(new_context));
}

void GenericProvenance::invalidate_provenance(ClientId caller, ProvenanceId id) {
    check_mutation(caller, id);
    store_.invalidate_record(RecordStore::WriteKey{}, id);
}

const std::vector<ProvenanceId>& GenericProvenance::get_associated_provenance(TokenId token_id) const {
    static const std::vector<ProvenanceId> kEmpty;
    if (!tokens_.exists(token_id)) {
        throw ProvError(ErrorCode::TokenNotFound, "token " + std::to_string(token_id.value) + " does not exist");
    }
    auto it = associated_.find(token_id);
    return it == associated_.end() ? kEmpty : it->second;
}

nlohmann::json GenericProvenance::associations_to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, token] : tokens_.tokens()) {
        nlohmann::json ids = nlohmann::json::array();
        if (auto it = associated_.find(id); it != associated_.end()) {
            for (auto p : it->second) ids.push_back(p.value);
        }
        out.push_back({{"tokenId", id.value}, {"provenanceIds", std::move(ids)}});
    }
    return out;
}

}  // namespace provledger
