#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>

#include "json.hpp"
#include "provledger/crypto.hpp"
#include "provledger/provenance.hpp"

namespace provledger {

/// Which context keys a use case requires and which it tolerates.
struct ContextSchema {
    std::string name;
    std::set<std::string> required_keys;
    std::set<std::string> optional_keys;

    bool accepts(const Context& context) const;
    /// Throws SchemaViolation naming the first offending key.
    void check(const Context& context) const;

    bool operator==(const ContextSchema&) const = default;
};

/// Generic-layer verbs the use case chooses to expose.
struct ExposureFlags {
    bool allow_update = false;
    bool allow_invalidate = false;

    bool operator==(const ExposureFlags&) const = default;
};

struct OpenAssignment {
    bool operator==(const OpenAssignment&) const = default;
};

struct FeeAssignment {
    uint64_t price = 1;
    bool operator==(const FeeAssignment&) const = default;
};

struct WhitelistAssignment {
    ClientId admin;
    std::set<ClientId> members;
    bool operator==(const WhitelistAssignment&) const = default;
};

using AssignmentStrategy = std::variant<OpenAssignment, FeeAssignment, WhitelistAssignment>;

/// Genesis-time definition of a use case. Exactly one per ledger.
struct UseCasePolicy {
    ContextSchema schema;
    ExposureFlags exposure;
    AssignmentStrategy assignment = OpenAssignment{};
    /// Seed balances for the purchase strategy.
    std::map<ClientId, uint64_t> balances;

    /// Throws ConfigInvalid when the invariants do not hold.
    void validate() const;

    bool operator==(const UseCasePolicy&) const = default;
};

nlohmann::json to_json(const UseCasePolicy& policy);
/// Parses the policy file format; client fields accept a 0x address or an alias.
UseCasePolicy policy_from_json(const nlohmann::json& j);

/// Specific provenance layer: the state machine the ledger executes. It owns
/// the generic layer and applies the use case's schema, exposure flags and
/// token assignment on top of it.
///
/// Rejections follow a fixed check order:
///   exposure -> token/record existence -> authorization -> input validity -> schema
class PolicyLayer {
public:
    explicit PolicyLayer(UseCasePolicy policy);

    TokenId request_token(ClientId caller, uint64_t payment);

    void whitelist_add(ClientId caller, ClientId member);
    void whitelist_remove(ClientId caller, ClientId member);

    ProvenanceId create_provenance_checked(ClientId caller, TokenId token_id, std::vector<ProvenanceId> inputs,
                                           Context context);

    void gate_update(ClientId caller, ProvenanceId id, Context new_context);
    void gate_invalidate(ClientId caller, ProvenanceId id);

    void transfer(ClientId caller, ClientId from, ClientId to, TokenId id);
    void approve(ClientId caller, ClientId op, TokenId id);

    const UseCasePolicy& policy() const { return policy_; }
    const GenericProvenance& generic() const { return generic_; }
    const RecordStore& records() const { return generic_.records(); }
    const TokenRegistry& tokens() const { return generic_.tokens(); }

    bool is_whitelisted(ClientId client) const;
    uint64_t balance_of(ClientId client) const;
    uint64_t treasury() const { return treasury_; }
    /// Sum of all balances plus the treasury.
    uint64_t total_funds() const;

    /// Complete state as canonical JSON.
    nlohmann::json to_json() const;
    Digest state_digest() const;

private:
    UseCasePolicy policy_;
    GenericProvenance generic_;
    std::set<ClientId> whitelist_;
    std::map<ClientId, uint64_t> balances_;
    uint64_t treasury_ = 0;
    uint64_t next_token_id_ = 1;
};

}  // namespace provledger
