#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace provledger {

//----------------------------------------------------------------------------
// Error codes
//----------------------------------------------------------------------------

enum class ErrorCode : uint8_t {
    Ok = 0,
    DuplicateProvenanceId,
    RecordNotFound,
    RecordInvalidated,
    DuplicateToken,
    ZeroAddress,
    TokenNotFound,
    NotAuthorized,
    InvalidInput,
    PolicyForbidden,
    InsufficientFee,
    NotWhitelisted,
    SchemaViolation,
    AmbiguousLineage,
    BadNonce,
    MalformedPayload,
    DuplicateTransaction,
    ConfigInvalid,
    IoFailure,
    CorruptLog,
    ScenarioMismatch,
};

/// Stable machine-readable name, e.g. "NotAuthorized".
std::string_view to_string(ErrorCode code);

/// Inverse of to_string; throws ProvError(MalformedPayload) on unknown names.
ErrorCode error_code_from_string(std::string_view name);

/// Every failure raised by the library carries one of the codes above.
class ProvError : public std::runtime_error {
public:
    ProvError(ErrorCode code, const std::string& message);
    explicit ProvError(ErrorCode code);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

//----------------------------------------------------------------------------
// Identifiers
//----------------------------------------------------------------------------

/// 64-bit identifier; zero is the nil sentinel.
template <typename Tag>
struct StrongId {
    uint64_t value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(uint64_t v) : value(v) {}

    constexpr bool is_nil() const { return value == 0; }
    constexpr auto operator<=>(const StrongId&) const = default;

    friend std::ostream& operator<<(std::ostream& os, const StrongId& id) { return os << id.value; }
};

struct ProvenanceIdTag {};
struct TokenIdTag {};

using ProvenanceId = StrongId<ProvenanceIdTag>;
using TokenId = StrongId<TokenIdTag>;

using Bytes32 = std::array<uint8_t, 32>;

/// 32-byte client address, rendered as "0x" + 64 lowercase hex digits.
class ClientId {
public:
    constexpr ClientId() = default;
    explicit ClientId(const Bytes32& bytes) : bytes_(bytes) {}

    /// Deterministic address for a human alias: SHA-256 of the alias bytes.
    static ClientId from_alias(std::string_view alias);
    /// Strict parse of the "0x" + 64 lowercase hex form.
    static ClientId from_hex(std::string_view hex);
    /// Hex form when the text looks like an address, alias otherwise.
    static ClientId parse(std::string_view text);
    static ClientId zero() { return ClientId{}; }

    bool is_zero() const;
    const Bytes32& bytes() const { return bytes_; }
    std::string hex() const;

    auto operator<=>(const ClientId&) const = default;

private:
    Bytes32 bytes_{};
};

//----------------------------------------------------------------------------
// Context
//----------------------------------------------------------------------------

/// Ordered key/value payload of a provenance record. Keys are non-empty.
class Context {
public:
    using Map = std::map<std::string, std::string>;

    Context() = default;
    Context(std::initializer_list<Map::value_type> entries);
    explicit Context(Map entries);

    const Map& entries() const { return entries_; }
    bool contains(const std::string& key) const { return entries_.contains(key); }
    const std::string& at(const std::string& key) const { return entries_.at(key); }
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    void set(std::string key, std::string value);

    /// Sorted-key JSON without whitespace.
    std::string canonical() const;

    bool operator==(const Context&) const = default;

private:
    Map entries_;
};

}  // namespace provledger

template <typename Tag>
struct std::hash<provledger::StrongId<Tag>> {
    size_t operator()(const provledger::StrongId<Tag>& id) const noexcept {
        return std::hash<uint64_t>{}(id.value);
    }
};
