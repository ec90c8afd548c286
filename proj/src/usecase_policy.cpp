#include "provledger/usecase_policy.hpp"

#include <algorithm>
#include <numeric>

namespace provledger {

bool ContextSchema::accepts(const Context& context) const {
    try {
        check(context);
        return true;
    } catch (const ProvError&) {
        return false;
    }
}

void ContextSchema::check(const Context& context) const {
    for (const auto& key : required_keys) {
        if (!context.contains(key)) {
            throw ProvError(ErrorCode::SchemaViolation, "context misses required key '" + key + "'");
        }
    }
    for (const auto& [key, value] : context.entries()) {
        if (!required_keys.contains(key) && !optional_keys.contains(key)) {
            throw ProvError(ErrorCode::SchemaViolation, "context key '" + key + "' is not part of schema " + name);
        }
    }
}

void UseCasePolicy::validate() const {
    for (const auto& key : schema.required_keys) {
        if (key.empty()) throw ProvError(ErrorCode::ConfigInvalid, "schema keys must be non-empty");
        if (schema.optional_keys.contains(key)) {
            throw ProvError(ErrorCode::ConfigInvalid, "key '" + key + "' is both required and optional");
        }
    }
    if (schema.optional_keys.contains("")) throw ProvError(ErrorCode::ConfigInvalid, "schema keys must be non-empty");
    if (const auto* fee = std::get_if<FeeAssignment>(&assignment); fee && fee->price < 1) {
        throw ProvError(ErrorCode::ConfigInvalid, "token price must be at least 1");
    }
    if (const auto* wl = std::get_if<WhitelistAssignment>(&assignment); wl && wl->admin.is_zero()) {
        throw ProvError(ErrorCode::ConfigInvalid, "whitelist admin cannot be the zero address");
    }
}

namespace {

nlohmann::json string_set(const std::set<std::string>& s) {
    return nlohmann::json(std::vector<std::string>(s.begin(), s.end()));
}

nlohmann::json client_set(const std::set<ClientId>& s) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : s) out.push_back(c.hex());
    return out;
}

nlohmann::json balances_json(const std::map<ClientId, uint64_t>& balances) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [c, amount] : balances) out[c.hex()] = amount;
    return out;
}

}  // namespace

nlohmann::json to_json(const UseCasePolicy& policy) {
    nlohmann::json assignment;
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, OpenAssignment>) {
                assignment = {{"type", "Open"}};
            } else if constexpr (std::is_same_v<T, FeeAssignment>) {
                assignment = {{"type", "Fee"}, {"price", a.price}};
            } else {
                assignment = {{"type", "Whitelist"}, {"admin", a.admin.hex()}, {"members", client_set(a.members)}};
            }
        },
        policy.assignment);
    return {
        {"schema",
         {{"name", policy.schema.name},
          {"required", string_set(policy.schema.required_keys)},
          {"optional", string_set(policy.schema.optional_keys)}}},
        {"exposure",
         {{"allowUpdate", policy.exposure.allow_update}, {"allowInvalidate", policy.exposure.allow_invalidate}}},
        {"assignment", std::move(assignment)},
        {"balances", balances_json(policy.balances)},
    };
}

UseCasePolicy policy_from_json(const nlohmann::json& j) {
    try {
        UseCasePolicy p;
        const auto& schema = j.at("schema");
        p.schema.name = schema.value("name", std::string{});
        for (const auto& k : schema.value("required", nlohmann::json::array())) {
            p.schema.required_keys.insert(k.get<std::string>());
        }
        for (const auto& k : schema.value("optional", nlohmann::json::array())) {
            p.schema.optional_keys.insert(k.get<std::string>());
        }
        if (j.contains("exposure")) {
            const auto& e = j.at("exposure");
            p.exposure.allow_update = e.value("allowUpdate", false);
            p.exposure.allow_invalidate = e.value("allowInvalidate", false);
        }
        const auto& a = j.value("assignment", nlohmann::json{{"type", "Open"}});
        const auto type = a.at("type").get<std::string>();
        if (type == "Open") {
            p.assignment = OpenAssignment{};
        } else if (type == "Fee") {
            p.assignment = FeeAssignment{a.at("price").get<uint64_t>()};
        } else if (type == "Whitelist") {
            WhitelistAssignment wl{ClientId::parse(a.at("admin").get<std::string>()), {}};
            for (const auto& m : a.value("members", nlohmann::json::array())) {
                wl.members.insert(ClientId::parse(m.get<std::string>()));
            }
            p.assignment = std::move(wl);
        } else {
            throw ProvError(ErrorCode::ConfigInvalid, "unknown assignment type " + type);
        }
        for (const auto& [client, amount] : j.value("balances", nlohmann::json::object()).items()) {
            p.balances[ClientId::parse(client)] = amount.get<uint64_t>();
        }
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ProvError(ErrorCode::ConfigInvalid, std::string("policy: ") + e.what());
    } catch (const ProvError& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        throw ProvError(ErrorCode::ConfigInvalid, std::string("policy: ") + e.what());
    }
}

//----------------------------------------------------------------------------

PolicyLayer::PolicyLayer(UseCasePolicy policy) : policy_(std::move(policy)), balances_(policy_.balances) {
    policy_.validate();
    if (const auto* wl = std::get_if<WhitelistAssignment>(&policy_.assignment)) whitelist_ = wl->members;
}

TokenId PolicyLayer::request_token(ClientId caller, uint64_t payment) {
    if (const auto* fee = std::get_if<FeeAssignment>(&policy_.assignment)) {
        if (payment < fee->price) {
            throw ProvError(ErrorCode::InsufficientFee,
                            "payment " + std::to_string(payment) + " below price " + std::to_string(fee->price));
        }
        if (balance_of(caller) < fee->price) {
            throw ProvError(ErrorCode::InsufficientFee, "balance does not cover the token price");
        }
    } else if (std::holds_alternative<WhitelistAssignment>(policy_.assignment)) {
        if (!whitelist_.contains(caller)) throw ProvError(ErrorCode::NotWhitelisted, caller.hex() + " is not whitelisted");
    }
    const TokenId id(next_token_id_);
    generic_.tokens().mint(TokenRegistry::MintKey{}, caller, id);
    ++next_token_id_;
    if (const auto* fee = std::get_if<FeeAssignment>(&policy_.assignment)) {
        balances_[caller] -= fee->price;
        treasury_ += fee->price;
    }
    return id;
}

void PolicyLayer::whitelist_add(ClientId caller, ClientId member) {
    const auto* wl = std::get_if<WhitelistAssignment>(&policy_.assignment);
    if (wl == nullptr) throw ProvError(ErrorCode::PolicyForbidden, "policy has no whitelist");
    if (caller != wl->admin) throw ProvError(ErrorCode::NotAuthorized, "only the whitelist admin may add members");
    if (member.is_zero()) throw ProvError(ErrorCode::ZeroAddress, "cannot whitelist the zero address");
    whitelist_.insert(member);
}

void PolicyLayer::whitelist_remove(ClientId caller, ClientId member) {
    const auto* wl = std::get_if<WhitelistAssignment>(&policy_.assignment);
    if (wl == nullptr) throw ProvError(ErrorCode::PolicyForbidden, "policy has no whitelist");
    if (caller != wl->admin) throw ProvError(ErrorCode::NotAuthorized, "only the whitelist admin may remove members");
    whitelist_.erase(member);
}

ProvenanceId PolicyLayer::create_provenance_checked(ClientId caller, TokenId token_id,
                                                    std::vector<ProvenanceId> inputs, Context context) {
    generic_.check_create(caller, token_id, inputs);
    policy_.schema.check(context);
    return generic_.create_provenance(caller, token_id, std::move(inputs), std::move(context));
}

void PolicyLayer::gate_update(ClientId caller, ProvenanceId id, Context new_context) {
    if (!policy_.exposure.allow_update) throw ProvError(ErrorCode::PolicyForbidden, "update is not exposed");
    generic_.check_mutation(caller, id);
    policy_.schema.check(new_context);
    generic_.update_provenance(caller, id, std::move(new_context));
}

void PolicyLayer::gate_invalidate(ClientId caller, ProvenanceId id) {
    if (!policy_.exposure.allow_invalidate) throw ProvError(ErrorCode::PolicyForbidden, "invalidate is not exposed");
    generic_.invalidate_provenance(caller, id);
}

void PolicyLayer::transfer(ClientId caller, ClientId from, ClientId to, TokenId id) {
    generic_.tokens().transfer(caller, from, to, id);
}

void PolicyLayer::approve(ClientId caller, ClientId op, TokenId id) {
    generic_.tokens().approve(caller, op, id);
}

bool PolicyLayer::is_whitelisted(ClientId client) const {
    return whitelist_.contains(client);
}

uint64_t PolicyLayer::balance_of(ClientId client) const {
    auto it = balances_.find(client);
    return it == balances_.end() ? 0 : it->second;
}

uint64_t PolicyLayer::total_funds() const {
    return std::accumulate(balances_.begin(), balances_.end(), treasury_,
                           [](uint64_t acc, const auto& kv) { return acc + kv.second; });
}

nlohmann::json PolicyLayer::to_json() const {
    return {
        {"policy", provledger::to_json(policy_)},
        {"records", generic_.records().to_json()},
        {"tokens", generic_.tokens().to_json()},
        {"associations", generic_.associations_to_json()},
        {"whitelist", client_set(whitelist_)},
        {"balances", balances_json(balances_)},
        {"treasury", treasury_},
        {"nextTokenId", next_token_id_},
        {"nextProvenanceId", generic_.peek_next_id().value},
    };
}

Digest PolicyLayer::state_digest() const {
    return sha256(to_json().dump());
}

}  // namespace provledger
