#pragma once

#include <span>
#include <string>
#include <string_view>

#include "provledger/types.hpp"

namespace provledger {

using Digest = Bytes32;

Digest sha256(std::string_view data);
Digest sha256(std::span<const uint8_t> data);

/// Lowercase hex, no prefix.
std::string to_hex(std::span<const uint8_t> bytes);
/// Strict lowercase-hex decode of exactly 32 bytes. Throws
/// ProvError(MalformedPayload) on anything else.
Digest digest_from_hex(std::string_view hex);

inline constexpr Digest kZeroDigest{};

}  // namespace provledger
