#include "provledger/token_registry.hpp"

namespace provledger {

namespace {

std::string token_name(TokenId id) {
    return "token " + std::to_string(id.value);
}

}  // namespace

void TokenRegistry::mint(const MintKey&, ClientId to, TokenId id) {
    if (id.is_nil()) throw ProvError(ErrorCode::MalformedPayload, "token id 0 is reserved");
    if (tokens_.contains(id)) throw ProvError(ErrorCode::DuplicateToken, token_name(id) + " already minted");
    if (to.is_zero()) throw ProvError(ErrorCode::ZeroAddress, "cannot mint to the zero address");
    tokens_.emplace(id, Token{id, to, {}});
}

Token& TokenRegistry::lookup(TokenId id) {
    auto it = tokens_.find(id);
    if (it == tokens_.end()) throw ProvError(ErrorCode::TokenNotFound, token_name(id) + " does not exist");
    return it->second;
}

const Token& TokenRegistry::get(TokenId id) const {
    auto it = tokens_.find(id);
    if (it == tokens_.end()) throw ProvError(ErrorCode::TokenNotFound, token_name(id) + " does not exist");
    return it->second;
}

ClientId TokenRegistry::owner_of(TokenId id) const {
    return get(id).owner;
}

void TokenRegistry::transfer(ClientId caller, ClientId from, ClientId to, TokenId id) {
    Token& token = lookup(id);
    if (token.owner != from) throw ProvError(ErrorCode::NotAuthorized, "from is not the owner of " + token_name(id));
    if (caller != token.owner && !token.approved.contains(caller)) {
        throw ProvError(ErrorCode::NotAuthorized, "caller may not transfer " + token_name(id));
    }
    if (to.is_zero()) throw ProvError(ErrorCode::ZeroAddress, "cannot transfer to the zero address");
    token.owner = to;
    token.approved.clear();
}

void TokenRegistry::approve(ClientId caller, ClientId op, TokenId id) {
    Token& token = lookup(id);
    if (caller != token.owner) throw ProvError(ErrorCode::NotAuthorized, "only the owner may approve");
    if (op.is_zero()) throw ProvError(ErrorCode::ZeroAddress, "cannot approve the zero address");
    token.approved.insert(op);
}

bool TokenRegistry::is_authorized(ClientId caller, TokenId id) const {
    auto it = tokens_.find(id);
    if (it == tokens_.end()) return false;
    return it->second.owner == caller || it->second.approved.contains(caller);
}

nlohmann::json TokenRegistry::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, token] : tokens_) {
        nlohmann::json approved = nlohmann::json::array();
        for (const auto& c : token.approved) approved.push_back(c.hex());
        out.push_back({{"id", id.value}, {"owner", token.owner.hex()}, {"approved", std::move(approved)}});
    }
    return out;
}

}  // namespace provledger
