#include "provledger/types.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "json.hpp"

#include "provledger/crypto.hpp"

namespace provledger {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 21> kErrorNames{{
    {ErrorCode::Ok, "Ok"},
    {ErrorCode::DuplicateProvenanceId, "DuplicateProvenanceId"},
    {ErrorCode::RecordNotFound, "RecordNotFound"},
    {ErrorCode::RecordInvalidated, "RecordInvalidated"},
    {ErrorCode::DuplicateToken, "DuplicateToken"},
    {ErrorCode::ZeroAddress, "ZeroAddress"},
    {ErrorCode::TokenNotFound, "TokenNotFound"},
    {ErrorCode::NotAuthorized, "NotAuthorized"},
    {ErrorCode::InvalidInput, "InvalidInput"},
    {ErrorCode::PolicyForbidden, "PolicyForbidden"},
    {ErrorCode::InsufficientFee, "InsufficientFee"},
    {ErrorCode::NotWhitelisted, "NotWhitelisted"},
    {ErrorCode::SchemaViolation, "SchemaViolation"},
    {ErrorCode::AmbiguousLineage, "AmbiguousLineage"},
    {ErrorCode::BadNonce, "BadNonce"},
    {ErrorCode::MalformedPayload, "MalformedPayload"},
    {ErrorCode::DuplicateTransaction, "DuplicateTransaction"},
    {ErrorCode::ConfigInvalid, "ConfigInvalid"},
    {ErrorCode::IoFailure, "IoFailure"},
    {ErrorCode::CorruptLog, "CorruptLog"},
    {ErrorCode::ScenarioMismatch, "ScenarioMismatch"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
    for (const auto& [c, name] : kErrorNames) {
        if (c == code) return name;
    }
    return "Unknown";
}

ErrorCode error_code_from_string(std::string_view name) {
    for (const auto& [c, n] : kErrorNames) {
        if (n == name) return c;
    }
    throw ProvError(ErrorCode::MalformedPayload, "unknown error code: " + std::string(name));
}

ProvError::ProvError(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

ProvError::ProvError(ErrorCode code) : ProvError(code, std::string(to_string(code))) {}

//----------------------------------------------------------------------------

ClientId ClientId::from_alias(std::string_view alias) {
    return ClientId(sha256(alias));
}

ClientId ClientId::from_hex(std::string_view hex) {
    if (!hex.starts_with("0x")) {
        throw ProvError(ErrorCode::MalformedPayload, "client address must start with 0x");
    }
    return ClientId(digest_from_hex(hex.substr(2)));
}

ClientId ClientId::parse(std::string_view text) {
    if (text.size() == 66 && text.starts_with("0x")) return from_hex(text);
    if (text.empty()) throw ProvError(ErrorCode::MalformedPayload, "empty client alias");
    return from_alias(text);
}

bool ClientId::is_zero() const {
    return std::all_of(bytes_.begin(), bytes_.end(), [](uint8_t b) { return b == 0; });
}

std::string ClientId::hex() const {
    return "0x" + to_hex(bytes_);
}

//----------------------------------------------------------------------------

Context::Context(std::initializer_list<Map::value_type> entries) {
    for (const auto& [k, v] : entries) set(k, v);
}

Context::Context(Map entries) {
    for (auto& [k, v] : entries) set(k, std::move(v));
}

void Context::set(std::string key, std::string value) {
    if (key.empty()) throw ProvError(ErrorCode::MalformedPayload, "context keys must be non-empty");
    entries_.insert_or_assign(std::move(key), std::move(value));
}

std::string Context::canonical() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : entries_) j[k] = v;
    return j.dump();
}

}  // namespace provledger
