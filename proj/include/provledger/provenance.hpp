#pragma once

#include <map>
#include <vector>

#include "json.hpp"
#include "provledger/record_store.hpp"
#include "provledger/token_registry.hpp"

namespace provledger {

/// Generic provenance layer. Ties records to data points (tokens), enforces
/// token ownership and input validity on creation, and keeps the per-token
/// list of associated records (parallel traces).
///
/// Inputs may reference records of any token; authorization is checked on
/// the target token only. Invalidation never removes anything from the
/// association lists.
class GenericProvenance {
public:
    /// Throws the first failing precondition of create_provenance, in order:
    /// TokenNotFound, NotAuthorized, InvalidInput.
    void check_create(ClientId caller, TokenId token_id, const std::vector<ProvenanceId>& inputs) const;

    ProvenanceId create_provenance(ClientId caller, TokenId token_id, std::vector<ProvenanceId> inputs,
                                   Context context);

    /// Throws RecordNotFound, NotAuthorized or RecordInvalidated (in that
    /// order) unless `caller` may mutate record `id`.
    const ProvenanceRecord& check_mutation(ClientId caller, ProvenanceId id) const;

    void update_provenance(ClientId caller, ProvenanceId id, Context new_context);
    void invalidate_provenance(ClientId caller, ProvenanceId id);

    const std::vector<ProvenanceId>& get_associated_provenance(TokenId token_id) const;

    const RecordStore& records() const { return store_; }
    const TokenRegistry& tokens() const { return tokens_; }
    TokenRegistry& tokens() { return tokens_; }

    /// Id the next successful create will receive.
    ProvenanceId peek_next_id() const { return ProvenanceId(next_prov_id_); }

    /// [{tokenId, provenanceIds[]}] ordered by token id; tokens without
    /// records are listed with an empty array.
    nlohmann::json associations_to_json() const;

private:
    RecordStore store_;
    TokenRegistry tokens_;
    std::map<TokenId, std::vector<ProvenanceId>> associated_;
    uint64_t next_prov_id_ = 1;
};

}  // namespace provledger
