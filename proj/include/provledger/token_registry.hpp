#pragma once

#include <map>
#include <set>

#include "json.hpp"
#include "provledger/types.hpp"

namespace provledger {

class PolicyLayer;
struct AccessForTesting;

/// Entry ticket for one data point.
struct Token {
    TokenId id;
    ClientId owner;
    std::set<ClientId> approved;

    bool operator==(const Token&) const = default;
};

/// Non-fungible ownership registry: one token per data point. Minting is
/// reserved for the policy layer, which decides who gets tokens.
class TokenRegistry {
public:
    class MintKey {
        MintKey() = default;
        friend class PolicyLayer;
        friend struct AccessForTesting;
    };

    void mint(const MintKey&, ClientId to, TokenId id);

    bool exists(TokenId id) const { return tokens_.contains(id); }
    ClientId owner_of(TokenId id) const;
    const Token& get(TokenId id) const;

    /// Moves ownership and clears the approval set. Self-transfer is allowed.
    void transfer(ClientId caller, ClientId from, ClientId to, TokenId id);

    /// Owner-only; adds `op` to the token's approval set.
    void approve(ClientId caller, ClientId op, TokenId id);

    /// True iff `caller` owns the token or is in its approval set. False for
    /// unminted tokens.
    bool is_authorized(ClientId caller, TokenId id) const;

    size_t size() const { return tokens_.size(); }
    const std::map<TokenId, Token>& tokens() const { return tokens_; }

    /// [{id, owner, approved[]}] ordered by id.
    nlohmann::json to_json() const;

private:
    Token& lookup(TokenId id);

    std::map<TokenId, Token> tokens_;
};

}  // namespace provledger
