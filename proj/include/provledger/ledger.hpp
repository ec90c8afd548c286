#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "provledger/crypto.hpp"
#include "provledger/usecase_policy.hpp"

namespace provledger {

//----------------------------------------------------------------------------
// Transactions
//----------------------------------------------------------------------------

struct RequestTokenOp {
    uint64_t payment = 0;
    bool operator==(const RequestTokenOp&) const = default;
};
struct TransferOp {
    ClientId from;
    ClientId to;
    TokenId token;
    bool operator==(const TransferOp&) const = default;
};
struct ApproveOp {
    ClientId op;
    TokenId token;
    bool operator==(const ApproveOp&) const = default;
};
struct CreateProvenanceOp {
    TokenId token;
    std::vector<ProvenanceId> inputs;
    Context context;
    bool operator==(const CreateProvenanceOp&) const = default;
};
struct UpdateContextOp {
    ProvenanceId id;
    Context context;
    bool operator==(const UpdateContextOp&) const = default;
};
struct InvalidateOp {
    ProvenanceId id;
    bool operator==(const InvalidateOp&) const = default;
};
struct WhitelistAddOp {
    ClientId member;
    bool operator==(const WhitelistAddOp&) const = default;
};
struct WhitelistRemoveOp {
    ClientId member;
    bool operator==(const WhitelistRemoveOp&) const = default;
};

using Payload = std::variant<RequestTokenOp, TransferOp, ApproveOp, CreateProvenanceOp, UpdateContextOp,
                             InvalidateOp, WhitelistAddOp, WhitelistRemoveOp>;

nlohmann::json payload_to_json(const Payload& payload);
/// Accepts aliases for client fields. Throws MalformedPayload.
Payload payload_from_json(const nlohmann::json& j);

struct Transaction {
    ClientId sender;
    uint64_t nonce = 0;
    Payload payload;
    uint64_t fee = 0;
    uint64_t submitted_at = 0;  // simulated ms
    Digest hash{};

    /// Builds a transaction with its hash filled in.
    static Transaction make(ClientId sender, uint64_t nonce, Payload payload, uint64_t fee, uint64_t submitted_at);

    /// SHA-256 over the canonical encoding of every field but the hash.
    Digest compute_hash() const;
    nlohmann::json body_json() const;
    nlohmann::json to_json() const;

    bool operator==(const Transaction&) const = default;
};

Transaction transaction_from_json(const nlohmann::json& j);

/// Outcome of executing one transaction. `value` carries the new token or
/// provenance id for the creating operations.
struct TxResult {
    ErrorCode code = ErrorCode::Ok;
    std::optional<uint64_t> value;

    bool ok() const { return code == ErrorCode::Ok; }
    nlohmann::json to_json() const;
    bool operator==(const TxResult&) const = default;
};

TxResult tx_result_from_json(const nlohmann::json& j);

/// Applies one transaction to the state machine. Failed operations leave the
/// state untouched.
TxResult execute(PolicyLayer& state, const Transaction& tx);

//----------------------------------------------------------------------------
// Blocks
//----------------------------------------------------------------------------

struct Block {
    uint64_t height = 0;
    Digest parent_hash{};
    uint64_t timestamp = 0;
    std::vector<Transaction> transactions;
    std::vector<TxResult> results;
    Digest block_hash{};

    /// SHA-256 over (height, parent hash, timestamp, tx hashes, results).
    Digest compute_hash() const;
    nlohmann::json to_json() const;

    bool operator==(const Block&) const = default;
};

Block block_from_json(const nlohmann::json& j);

struct SimConfig {
    uint64_t block_interval_ms = 15'000;
    uint64_t block_capacity = 10;
    uint64_t rng_seed = 0;
    /// Jitters every block interval uniformly within +-20%.
    bool jitter = false;

    /// Throws ConfigInvalid.
    void validate() const;
    /// Interval preceding the block at `height` (height >= 1).
    uint64_t interval_before(uint64_t height) const;

    bool operator==(const SimConfig&) const = default;
};

nlohmann::json to_json(const SimConfig& config);
SimConfig config_from_json(const nlohmann::json& j);

struct VerifyResult {
    bool ok = false;
    std::optional<uint64_t> first_corrupt_height;
    std::string reason;

    nlohmann::json to_json() const;
};

//----------------------------------------------------------------------------
// Ledger
//----------------------------------------------------------------------------

/// Single-producer simulated chain over a PolicyLayer state machine.
///
/// Block production picks pending transactions by (fee desc, submitted_at
/// asc, hash asc) among each sender's next executable nonce, so per-sender
/// nonces never skip. Failed transactions are included with their error.
///
/// Mutation (submit / produce_block) may come from any thread but is
/// serialized internally; readers use snapshot(), which is replaced after
/// every block.
class Ledger {
public:
    static constexpr std::string_view kPolicyFile = "policy.json";
    static constexpr std::string_view kConfigFile = "config.json";
    static constexpr std::string_view kBlockLog = "blocks.jsonl";

    Ledger(UseCasePolicy policy, SimConfig config);

    Ledger(Ledger&&) noexcept;
    Ledger& operator=(Ledger&&) noexcept;
    ~Ledger();

    /// Recomputes the hash and admits the transaction to the mempool.
    /// Throws DuplicateTransaction, BadNonce or MalformedPayload.
    Digest submit(Transaction tx);
    /// Convenience wrapper assigning the sender's next nonce.
    Digest submit(ClientId sender, Payload payload, uint64_t fee, uint64_t submitted_at);

    /// Produces the next block at next_block_time().
    const Block& produce_block();

    uint64_t now() const { return blocks_.back().timestamp; }
    uint64_t next_block_time() const;
    uint64_t height() const { return blocks_.back().height; }

    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& head() const { return blocks_.back(); }

    /// Live state; only valid on the producing thread.
    const PolicyLayer& state() const { return state_; }
    /// Immutable copy taken at the last block boundary.
    std::shared_ptr<const PolicyLayer> snapshot() const;
    Digest state_digest() const { return state_.state_digest(); }

    size_t mempool_size() const;
    uint64_t next_nonce(ClientId sender) const;

    const UseCasePolicy& policy() const { return state_.policy(); }
    const SimConfig& config() const { return config_; }

    /// Appends blocks not yet in `dir`/blocks.jsonl plus a state digest line.
    /// Writes policy.json and config.json on first use. Throws IoFailure.
    void persist(const std::filesystem::path& dir) const;

    /// Replays the block log. Throws IoFailure or CorruptLog.
    static Ledger load(const std::filesystem::path& dir);

    /// Validates and applies a block produced elsewhere. Throws CorruptLog.
    void replay_block(const Block& block);

private:
    struct PendingKey {
        uint64_t fee;
        uint64_t submitted_at;
        Digest hash;
        bool operator<(const PendingKey& o) const;
    };

    void publish_snapshot();

    SimConfig config_;
    PolicyLayer state_;
    std::vector<Block> blocks_;

    std::unique_ptr<std::mutex> mutex_;
    std::set<Digest> known_hashes_;
    std::map<ClientId, std::map<uint64_t, Transaction>> pending_;  // sender -> nonce -> tx
    std::map<ClientId, uint64_t> executed_nonce_;
    size_t pending_count_ = 0;
    std::shared_ptr<const PolicyLayer> snapshot_;
};

/// Checks hash links, block hashes, transaction hashes, timestamps, replayed
/// results and state digest checkpoints of a serialized block log.
VerifyResult verify_chain(const UseCasePolicy& policy, const SimConfig& config, std::string_view log);
/// Reads policy, config and block log from a ledger directory.
VerifyResult verify_chain(const std::filesystem::path& dir);

/// Full replay of a serialized block log. Throws CorruptLog.
Ledger replay_log(const UseCasePolicy& policy, const SimConfig& config, std::string_view log);

std::string read_file(const std::filesystem::path& path);

}  // namespace provledger
