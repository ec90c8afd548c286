#include "provledger/ledger.hpp"

#include <fstream>
#include <sstream>

namespace provledger {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) {
    throw ProvError(ErrorCode::MalformedPayload, what);
}

uint64_t get_u64(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_unsigned()) malformed(std::string("expected unsigned integer '") + key + "'");
    return it->get<uint64_t>();
}

const std::string& get_str(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) malformed(std::string("expected string '") + key + "'");
    return it->get_ref<const std::string&>();
}

ClientId get_client(const json& j, const char* key) {
    return ClientId::parse(get_str(j, key));
}

Digest get_digest(const json& j, const char* key) {
    return digest_from_hex(get_str(j, key));
}

Context context_from_json(const json& j) {
    if (!j.is_object()) malformed("context must be an object of strings");
    Context ctx;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) malformed("context value for '" + k + "' must be a string");
        ctx.set(k, v.get<std::string>());
    }
    return ctx;
}

json context_to_json(const Context& ctx) {
    json out = json::object();
    for (const auto& [k, v] : ctx.entries()) out[k] = v;
    return out;
}

template <typename... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

//----------------------------------------------------------------------------
// Payloads and transactions
//----------------------------------------------------------------------------

json payload_to_json(const Payload& payload) {
    return std::visit(
        Overloaded{
            [](const RequestTokenOp& p) { return json{{"type", "RequestToken"}, {"payment", p.payment}}; },
            [](const TransferOp& p) {
                return json{{"type", "Transfer"}, {"from", p.from.hex()}, {"to", p.to.hex()}, {"tokenId", p.token.value}};
            },
            [](const ApproveOp& p) {
                return json{{"type", "Approve"}, {"operator", p.op.hex()}, {"tokenId", p.token.value}};
            },
            [](const CreateProvenanceOp& p) {
                json inputs = json::array();
                for (auto id : p.inputs) inputs.push_back(id.value);
                return json{{"type", "CreateProvenance"},
                            {"tokenId", p.token.value},
                            {"inputs", std::move(inputs)},
                            {"context", context_to_json(p.context)}};
            },
            [](const UpdateContextOp& p) {
                return json{{"type", "UpdateContext"}, {"id", p.id.value}, {"context", context_to_json(p.context)}};
            },
            [](const InvalidateOp& p) { return json{{"type", "Invalidate"}, {"id", p.id.value}}; },
            [](const WhitelistAddOp& p) { return json{{"type", "WhitelistAdd"}, {"member", p.member.hex()}}; },
            [](const WhitelistRemoveOp& p) { return json{{"type", "WhitelistRemove"}, {"member", p.member.hex()}}; },
        },
        payload);
}

Payload payload_from_json(const json& j) {
    if (!j.is_object()) malformed("payload must be an object");
    const auto& type = get_str(j, "type");
    if (type == "RequestToken") return RequestTokenOp{j.contains("payment") ? get_u64(j, "payment") : 0};
    if (type == "Transfer") {
        return TransferOp{get_client(j, "from"), get_client(j, "to"), TokenId(get_u64(j, "tokenId"))};
    }
    if (type == "Approve") return ApproveOp{get_client(j, "operator"), TokenId(get_u64(j, "tokenId"))};
    if (type == "CreateProvenance") {
        CreateProvenanceOp op;
        op.token = TokenId(get_u64(j, "tokenId"));
        if (j.contains("inputs")) {
            const auto& inputs = j.at("inputs");
            if (!inputs.is_array()) malformed("inputs must be an array");
            for (const auto& v : inputs) {
                if (!v.is_number_unsigned()) malformed("inputs must be unsigned integers");
                op.inputs.emplace_back(v.get<uint64_t>());
            }
        }
        op.context = context_from_json(j.contains("context") ? j.at("context") : json::object());
        return op;
    }
    if (type == "UpdateContext") {
        if (!j.contains("context")) malformed("UpdateContext needs a context");
        return UpdateContextOp{ProvenanceId(get_u64(j, "id")), context_from_json(j.at("context"))};
    }
    if (type == "Invalidate") return InvalidateOp{ProvenanceId(get_u64(j, "id"))};
    if (type == "WhitelistAdd") return WhitelistAddOp{get_client(j, "member")};
    if (type == "WhitelistRemove") return WhitelistRemoveOp{get_client(j, "member")};
    malformed("unknown payload type '" + type + "'");
}

Transaction Transaction::make(ClientId sender, uint64_t nonce, Payload payload, uint64_t fee, uint64_t submitted_at) {
    Transaction tx{sender, nonce, std::move(payload), fee, submitted_at, {}};
    tx.hash = tx.compute_hash();
    return tx;
}

json Transaction::body_json() const {
    return {
        {"sender", sender.hex()},
        {"nonce", nonce},
        {"payload", payload_to_json(payload)},
        {"fee", fee},
        {"submittedAt", submitted_at},
    };
}

Digest Transaction::compute_hash() const {
    return sha256(body_json().dump());
}

json Transaction::to_json() const {
    json j = body_json();
    j["hash"] = to_hex(hash);
    return j;
}

Transaction transaction_from_json(const json& j) {
    if (!j.is_object()) malformed("transaction must be an object");
    Transaction tx;
    tx.sender = get_client(j, "sender");
    tx.nonce = get_u64(j, "nonce");
    if (!j.contains("payload")) malformed("transaction needs a payload");
    tx.payload = payload_from_json(j.at("payload"));
    tx.fee = get_u64(j, "fee");
    tx.submitted_at = get_u64(j, "submittedAt");
    tx.hash = get_digest(j, "hash");
    return tx;
}

json TxResult::to_json() const {
    json j{{"status", to_string(code)}};
    if (value) j["value"] = *value;
    return j;
}

TxResult tx_result_from_json(const json& j) {
    if (!j.is_object()) malformed("result must be an object");
    TxResult r;
    r.code = error_code_from_string(get_str(j, "status"));
    if (j.contains("value")) r.value = get_u64(j, "value");
    return r;
}

TxResult execute(PolicyLayer& state, const Transaction& tx) {
    const ClientId caller = tx.sender;
    try {
        return std::visit(
            Overloaded{
                [&](const RequestTokenOp& p) {
                    return TxResult{ErrorCode::Ok, state.request_token(caller, p.payment).value};
                },
                [&](const TransferOp& p) {
                    state.transfer(caller, p.from, p.to, p.token);
                    return TxResult{};
                },
                [&](const ApproveOp& p) {
                    state.approve(caller, p.op, p.token);
                    return TxResult{};
                },
                [&](const CreateProvenanceOp& p) {
                    return TxResult{ErrorCode::Ok,
                                    state.create_provenance_checked(caller, p.token, p.inputs, p.context).value};
                },
                [&](const UpdateContextOp& p) {
                    state.gate_update(caller, p.id, p.context);
                    return TxResult{};
                },
                [&](const InvalidateOp& p) {
                    state.gate_invalidate(caller, p.id);
                    return TxResult{};
                },
                [&](const WhitelistAddOp& p) {
                    state.whitelist_add(caller, p.member);
                    return TxResult{};
                },
                [&](const WhitelistRemoveOp& p) {
                    state.whitelist_remove(caller, p.member);
                    return TxResult{};
                },
            },
            tx.payload);
    } catch (const ProvError& e) {
        return TxResult{e.code(), std::nullopt};
    }
}

//----------------------------------------------------------------------------
// Blocks and config
//----------------------------------------------------------------------------

Digest Block::compute_hash() const {
    json txs = json::array();
    for (const auto& tx : transactions) txs.push_back(to_hex(tx.hash));
    json res = json::array();
    for (const auto& r : results) res.push_back(r.to_json());
    const json header{
        {"height", height},
        {"parentHash", to_hex(parent_hash)},
        {"timestamp", timestamp},
        {"transactions", std::move(txs)},
        {"results", std::move(res)},
    };
    return sha256(header.dump());
}

json Block::to_json() const {
    json txs = json::array();
    for (const auto& tx : transactions) txs.push_back(tx.to_json());
    json res = json::array();
    for (const auto& r : results) res.push_back(r.to_json());
    return {
        {"height", height},
        {"parentHash", to_hex(parent_hash)},
        {"timestamp", timestamp},
        {"transactions", std::move(txs)},
        {"results", std::move(res)},
        {"blockHash", to_hex(block_hash)},
    };
}

Block block_from_json(const json& j) {
    if (!j.is_object()) malformed("block must be an object");
    Block b;
    b.height = get_u64(j, "height");
    b.parent_hash = get_digest(j, "parentHash");
    b.timestamp = get_u64(j, "timestamp");
    const auto txs = j.find("transactions");
    const auto res = j.find("results");
    if (txs == j.end() || !txs->is_array() || res == j.end() || !res->is_array()) {
        malformed("block needs transactions and results arrays");
    }
    for (const auto& tx : *txs) b.transactions.push_back(transaction_from_json(tx));
    for (const auto& r : *res) b.results.push_back(tx_result_from_json(r));
    b.block_hash = get_digest(j, "blockHash");
    return b;
}

void SimConfig::validate() const {
    if (block_interval_ms < 1) throw ProvError(ErrorCode::ConfigInvalid, "block interval must be at least 1 ms");
    if (block_capacity < 1) throw ProvError(ErrorCode::ConfigInvalid, "block capacity must be at least 1");
}

uint64_t SimConfig::interval_before(uint64_t height) const {
    if (!jitter) return block_interval_ms;
    const uint64_t low = block_interval_ms - block_interval_ms / 5;
    const uint64_t span = 2 * (block_interval_ms / 5);
    const uint64_t r = splitmix64(rng_seed ^ splitmix64(height));
    return std::max<uint64_t>(1, low + r % (span + 1));
}

json to_json(const SimConfig& config) {
    return {
        {"blockIntervalMs", config.block_interval_ms},
        {"blockCapacity", config.block_capacity},
        {"rngSeed", config.rng_seed},
        {"jitter", config.jitter},
    };
}

SimConfig config_from_json(const json& j) {
    try {
        SimConfig c;
        c.block_interval_ms = j.value("blockIntervalMs", c.block_interval_ms);
        c.block_capacity = j.value("blockCapacity", c.block_capacity);
        c.rng_seed = j.value("rngSeed", c.rng_seed);
        c.jitter = j.value("jitter", c.jitter);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ProvError(ErrorCode::ConfigInvalid, std::string("config: ") + e.what());
    }
}

json VerifyResult::to_json() const {
    json j{{"ok", ok}};
    if (first_corrupt_height) j["firstCorruptHeight"] = *first_corrupt_height;
    if (!ok) j["reason"] = reason;
    return j;
}

//----------------------------------------------------------------------------
// Ledger
//----------------------------------------------------------------------------

bool Ledger::PendingKey::operator<(const PendingKey& o) const {
    if (fee != o.fee) return fee > o.fee;
    if (submitted_at != o.submitted_at) return submitted_at < o.submitted_at;
    return hash < o.hash;
}

Ledger::Ledger(UseCasePolicy policy, SimConfig config)
    : config_(config), state_(std::move(policy)), mutex_(std::make_unique<std::mutex>()) {
    config_.validate();
    Block genesis;
    genesis.block_hash = genesis.compute_hash();
    blocks_.push_back(std::move(genesis));
    publish_snapshot();
}

Ledger::Ledger(Ledger&&) noexcept = default;
Ledger& Ledger::operator=(Ledger&&) noexcept = default;
Ledger::~Ledger() = default;

uint64_t Ledger::next_block_time() const {
    return now() + config_.interval_before(height() + 1);
}

uint64_t Ledger::next_nonce(ClientId sender) const {
    std::lock_guard lock(*mutex_);
    auto exec = executed_nonce_.find(sender);
    auto pend = pending_.find(sender);
    return (exec == executed_nonce_.end() ? 0 : exec->second) + (pend == pending_.end() ? 0 : pend->second.size());
}

size_t Ledger::mempool_size() const {
    std::lock_guard lock(*mutex_);
    return pending_count_;
}

Digest Ledger::submit(Transaction tx) {
    if (tx.sender.is_zero()) malformed("sender cannot be the zero address");
    tx.hash = tx.compute_hash();

    std::lock_guard lock(*mutex_);
    if (known_hashes_.contains(tx.hash)) {
        throw ProvError(ErrorCode::DuplicateTransaction, "transaction " + to_hex(tx.hash) + " already known");
    }
    auto exec = executed_nonce_.find(tx.sender);
    auto& queue = pending_[tx.sender];
    const uint64_t expected = (exec == executed_nonce_.end() ? 0 : exec->second) + queue.size();
    if (tx.nonce != expected) {
        if (queue.empty()) pending_.erase(tx.sender);
        throw ProvError(ErrorCode::BadNonce,
                        "expected nonce " + std::to_string(expected) + ", got " + std::to_string(tx.nonce));
    }
    known_hashes_.insert(tx.hash);
    const Digest hash = tx.hash;
    queue.emplace(tx.nonce, std::move(tx));
    ++pending_count_;
    return hash;
}

Digest Ledger::submit(ClientId sender, Payload payload, uint64_t fee, uint64_t submitted_at) {
    return submit(Transaction::make(sender, next_nonce(sender), std::move(payload), fee, submitted_at));
}

const Block& Ledger::produce_block() {
    std::lock_guard lock(*mutex_);
    Block block;
    block.height = height() + 1;
    block.parent_hash = head().block_hash;
    block.timestamp = next_block_time();

    // Each sender contributes at most its next executable nonce at a time.
    std::map<PendingKey, ClientId> ready;
    auto push_head = [&](ClientId sender) {
        auto it = pending_.find(sender);
        if (it == pending_.end() || it->second.empty()) return;
        const auto& tx = it->second.begin()->second;
        if (tx.nonce != executed_nonce_[sender]) return;
        ready.emplace(PendingKey{tx.fee, tx.submitted_at, tx.hash}, sender);
    };
    for (const auto& [sender, _] : pending_) push_head(sender);

    while (block.transactions.size() < config_.block_capacity) {
        auto pick = std::find_if(ready.begin(), ready.end(),
                                 [&](const auto& kv) { return kv.first.submitted_at <= block.timestamp; });
        if (pick == ready.end()) break;
        const ClientId sender = pick->second;
        ready.erase(pick);

        auto& queue = pending_.at(sender);
        Transaction tx = std::move(queue.begin()->second);
        queue.erase(queue.begin());
        --pending_count_;
        if (queue.empty()) pending_.erase(sender);

        block.results.push_back(execute(state_, tx));
        ++executed_nonce_[sender];
        block.transactions.push_back(std::move(tx));
        push_head(sender);
    }

    block.block_hash = block.compute_hash();
    blocks_.push_back(std::move(block));
    publish_snapshot();
    return blocks_.back();
}

void Ledger::replay_block(const Block& block) {
    auto corrupt = [&](const std::string& why) {
        throw ProvError(ErrorCode::CorruptLog, "block " + std::to_string(block.height) + ": " + why);
    };
    std::lock_guard lock(*mutex_);
    if (block.height != height() + 1) corrupt("unexpected height");
    if (block.parent_hash != head().block_hash) corrupt("parent hash does not link to the previous block");
    if (block.timestamp != next_block_time()) corrupt("timestamp does not follow the block schedule");
    if (block.transactions.size() > config_.block_capacity) corrupt("block exceeds capacity");
    if (block.results.size() != block.transactions.size()) corrupt("result count mismatch");
    if (block.compute_hash() != block.block_hash) corrupt("block hash mismatch");

    PolicyLayer next = state_;
    auto nonces = executed_nonce_;
    std::set<Digest> seen;
    for (size_t i = 0; i < block.transactions.size(); ++i) {
        const auto& tx = block.transactions[i];
        if (tx.compute_hash() != tx.hash) corrupt("transaction hash mismatch");
        if (tx.sender.is_zero()) corrupt("zero sender");
        if (known_hashes_.contains(tx.hash) || !seen.insert(tx.hash).second) corrupt("replayed transaction");
        if (tx.nonce != nonces[tx.sender]) corrupt("nonce gap");
        if (tx.submitted_at > block.timestamp) corrupt("transaction from the future");
        ++nonces[tx.sender];
        if (execute(next, tx) != block.results[i]) corrupt("replayed result differs");
    }

    state_ = std::move(next);
    executed_nonce_ = std::move(nonces);
    known_hashes_.insert(seen.begin(), seen.end());
    blocks_.push_back(block);
    publish_snapshot();
}

void Ledger::publish_snapshot() {
    snapshot_ = std::make_shared<const PolicyLayer>(state_);
}

std::shared_ptr<const PolicyLayer> Ledger::snapshot() const {
    std::lock_guard lock(*mutex_);
    return snapshot_;
}

//----------------------------------------------------------------------------
// Persistence
//----------------------------------------------------------------------------

namespace {

constexpr std::string_view kDigestKey = "stateDigest";
constexpr std::string_view kDigestPrefix = "{\"stateDigest\":\"";
constexpr size_t kDigestLineSize = kDigestPrefix.size() + 64 + 2;

std::string digest_line(const Digest& d) {
    return json{{kDigestKey, to_hex(d)}}.dump();
}

void write_or_check(const std::filesystem::path& path, const std::string& content) {
    if (std::filesystem::exists(path)) {
        if (read_file(path) != content) {
            throw ProvError(ErrorCode::IoFailure, path.string() + " belongs to a different ledger");
        }
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw ProvError(ErrorCode::IoFailure, "cannot write " + path.string());
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t start = 0;
    while (start < text.size()) {
        const size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

/// Walks `log` against `ledger`, which must hold only the genesis block.
VerifyResult walk_log(Ledger& ledger, std::string_view log) {
    auto fail = [](uint64_t height, std::string reason) {
        return VerifyResult{false, height, std::move(reason)};
    };
    if (log.empty()) return fail(0, "empty log");
    const bool terminated = log.back() == '\n';
    const auto lines = split_lines(log);

    bool seen_genesis = false;
    bool ends_with_digest = false;
    for (size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = lines[i];
        const bool digest_shaped = line.starts_with(kDigestPrefix) || line.size() == kDigestLineSize;
        const uint64_t at = !seen_genesis ? 0 : digest_shaped ? ledger.height() : ledger.height() + 1;

        if (!terminated && i + 1 == lines.size()) return fail(at, "unterminated final line");
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            return fail(at, std::string("unparsable line: ") + e.what());
        }
        if (j.dump() != line) return fail(at, "line is not in canonical form");

        if (j.is_object() && j.size() == 1 && j.contains(kDigestKey)) {
            if (!seen_genesis) return fail(0, "state digest before genesis");
            try {
                if (digest_from_hex(get_str(j, "stateDigest")) != ledger.state_digest()) {
                    return fail(ledger.height(), "state digest mismatch after replay");
                }
            } catch (const ProvError& e) {
                return fail(ledger.height(), e.what());
            }
            ends_with_digest = true;
            continue;
        }

        ends_with_digest = false;
        try {
            const Block block = block_from_json(j);
            // lenient fields (defaults, unknown keys) would escape the hashes
            if (block.to_json() != j) return fail(at, "block line does not round-trip");
            if (!seen_genesis) {
                if (!(block == ledger.head())) return fail(0, "genesis block does not match policy and config");
                seen_genesis = true;
            } else {
                ledger.replay_block(block);
            }
        } catch (const ProvError& e) {
            return fail(at, e.what());
        }
    }
    if (!seen_genesis) return fail(0, "no genesis block");
    if (!ends_with_digest) return fail(ledger.height(), "log does not end with a state digest");
    return VerifyResult{true, std::nullopt, {}};
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProvError(ErrorCode::IoFailure, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void Ledger::persist(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ProvError(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    write_or_check(dir / kPolicyFile, to_json(policy()).dump() + "\n");
    write_or_check(dir / kConfigFile, provledger::to_json(config_).dump() + "\n");

    const auto log_path = dir / kBlockLog;
    size_t persisted = 0;
    bool ends_with_digest = false;
    if (std::filesystem::exists(log_path)) {
        const std::string existing = read_file(log_path);
        std::optional<Digest> last_hash;
        for (auto line : split_lines(existing)) {
            ends_with_digest = line.starts_with(kDigestPrefix);
            if (ends_with_digest) continue;
            try {
                last_hash = digest_from_hex(get_str(json::parse(line), "blockHash"));
            } catch (const std::exception& e) {
                throw ProvError(ErrorCode::IoFailure, "existing block log is unreadable: " + std::string(e.what()));
            }
            ++persisted;
        }
        if (persisted > blocks_.size() || (last_hash && blocks_[persisted - 1].block_hash != *last_hash)) {
            throw ProvError(ErrorCode::IoFailure, "existing block log diverges from this ledger");
        }
    }
    if (persisted == blocks_.size() && ends_with_digest) return;

    std::ofstream out(log_path, std::ios::binary | std::ios::app);
    for (size_t h = persisted; h < blocks_.size(); ++h) out << blocks_[h].to_json().dump() << '\n';
    out << digest_line(state_digest()) << '\n';
    out.flush();
    if (!out) throw ProvError(ErrorCode::IoFailure, "cannot append to " + log_path.string());
}

Ledger replay_log(const UseCasePolicy& policy, const SimConfig& config, std::string_view log) {
    Ledger ledger(policy, config);
    const VerifyResult result = walk_log(ledger, log);
    if (!result.ok) {
        throw ProvError(ErrorCode::CorruptLog,
                        "corrupt at height " + std::to_string(result.first_corrupt_height.value_or(0)) + ": " +
                            result.reason);
    }
    return ledger;
}

namespace {

std::pair<UseCasePolicy, SimConfig> read_genesis(const std::filesystem::path& dir) {
    auto parse = [](const std::filesystem::path& p) {
        try {
            return json::parse(read_file(p));
        } catch (const json::exception& e) {
            throw ProvError(ErrorCode::CorruptLog, p.string() + ": " + e.what());
        }
    };
    return {policy_from_json(parse(dir / Ledger::kPolicyFile)), config_from_json(parse(dir / Ledger::kConfigFile))};
}

}  // namespace

Ledger Ledger::load(const std::filesystem::path& dir) {
    auto [policy, config] = read_genesis(dir);
    return replay_log(policy, config, read_file(dir / kBlockLog));
}

VerifyResult verify_chain(const UseCasePolicy& policy, const SimConfig& config, std::string_view log) {
    Ledger ledger(policy, config);
    return walk_log(ledger, log);
}

VerifyResult verify_chain(const std::filesystem::path& dir) {
    auto [policy, config] = read_genesis(dir);
    return verify_chain(policy, config, read_file(dir / Ledger::kBlockLog));
}

}  // namespace provledger
