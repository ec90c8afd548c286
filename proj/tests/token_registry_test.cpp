#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace provledger {
namespace {

using testing_support::client;

const TokenRegistry::MintKey kMint = AccessForTesting::mint_key();

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ProvError& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

const ClientId A = client("A");
const ClientId B = client("B");
const ClientId C = client("C");

TEST(ClientIdTest, HexRoundTripAndAliases) {
    EXPECT_EQ(A.hex().size(), 66u);
    EXPECT_EQ(ClientId::from_hex(A.hex()), A);
    EXPECT_EQ(ClientId::parse(A.hex()), A);
    EXPECT_EQ(ClientId::parse("A"), A);
    EXPECT_NE(A, B);
    EXPECT_TRUE(ClientId::zero().is_zero());
    EXPECT_EQ(ClientId::zero().hex(), "0x" + std::string(64, '0'));
    std::string upper = A.hex();
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(ch));
    upper[1] = 'x';
    EXPECT_THROW(ClientId::from_hex(upper), ProvError);
}

TEST(TokenRegistry, MintAndOwnership) {
    TokenRegistry reg;
    EXPECT_FALSE(reg.exists(TokenId(1)));
    reg.mint(kMint, A, TokenId(1));
    EXPECT_TRUE(reg.exists(TokenId(1)));
    EXPECT_EQ(reg.owner_of(TokenId(1)), A);
    EXPECT_EQ(code_of([&] { reg.mint(kMint, A, TokenId(1)); }), ErrorCode::DuplicateToken);
    EXPECT_EQ(code_of([&] { reg.mint(kMint, ClientId::zero(), TokenId(2)); }), ErrorCode::ZeroAddress);
    EXPECT_EQ(code_of([&] { reg.owner_of(TokenId(9)); }), ErrorCode::TokenNotFound);
}

TEST(TokenRegistry, Transfer) {
    TokenRegistry reg;
    reg.mint(kMint, A, TokenId(1));
    EXPECT_EQ(code_of([&] { reg.transfer(C, A, B, TokenId(1)); }), ErrorCode::NotAuthorized);
    reg.transfer(A, A, B, TokenId(1));
    EXPECT_EQ(reg.owner_of(TokenId(1)), B);
    EXPECT_EQ(code_of([&] { reg.transfer(B, B, ClientId::zero(), TokenId(1)); }), ErrorCode::ZeroAddress);
    EXPECT_EQ(code_of([&] { reg.transfer(B, B, A, TokenId(5)); }), ErrorCode::TokenNotFound);
    EXPECT_EQ(code_of([&] { reg.transfer(A, A, C, TokenId(1)); }), ErrorCode::NotAuthorized);
}

TEST(TokenRegistry, SelfTransferClearsApprovals) {
    TokenRegistry reg;
    reg.mint(kMint, A, TokenId(1));
    reg.approve(A, B, TokenId(1));
    reg.transfer(A, A, A, TokenId(1));
    EXPECT_EQ(reg.owner_of(TokenId(1)), A);
    EXPECT_FALSE(reg.is_authorized(B, TokenId(1)));
}

TEST(TokenRegistry, ApproveAndAuthorize) {
    TokenRegistry reg;
    reg.mint(kMint, A, TokenId(1));
    reg.approve(A, B, TokenId(1));
    EXPECT_TRUE(reg.is_authorized(A, TokenId(1)));
    EXPECT_TRUE(reg.is_authorized(B, TokenId(1)));
    EXPECT_FALSE(reg.is_authorized(C, TokenId(1)));
    EXPECT_FALSE(reg.is_authorized(A, TokenId(2)));
    EXPECT_EQ(code_of([&] { reg.approve(B, C, TokenId(1)); }), ErrorCode::NotAuthorized);
    EXPECT_EQ(code_of([&] { reg.approve(A, C, TokenId(2)); }), ErrorCode::TokenNotFound);

    // approved operator may move the token on the owner's behalf
    reg.transfer(B, A, C, TokenId(1));
    EXPECT_EQ(reg.owner_of(TokenId(1)), C);
}

TEST(TokenRegistry, JsonExport) {
    TokenRegistry reg;
    reg.mint(kMint, A, TokenId(3));
    reg.approve(A, B, TokenId(3));
    const auto j = reg.to_json();
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["id"], 3);
    EXPECT_EQ(j[0]["owner"], A.hex());
    EXPECT_EQ(j[0]["approved"], nlohmann::json::array({B.hex()}));
}

// Random mint / transfer / approve sequences against a plain model of owner
// and approvals: single owner at all times, approvals die with transfers.
TEST(TokenRegistryProperty, SingleOwnerAndApprovalHygiene) {
    std::mt19937_64 rng(99);
    const std::vector<ClientId> clients{A, B, C, client("D"), client("E")};
    for (int run = 0; run < 50; ++run) {
        TokenRegistry reg;
        std::map<TokenId, std::pair<ClientId, std::set<ClientId>>> model;
        for (int step = 0; step < 300; ++step) {
            const TokenId id(1 + rng() % 6);
            const ClientId x = clients[rng() % clients.size()];
            const ClientId y = clients[rng() % clients.size()];
            switch (rng() % 3) {
                case 0:
                    if (code_of([&] { reg.mint(kMint, x, id); }) == ErrorCode::Ok) model[id] = {x, {}};
                    break;
                case 1: {
                    const auto before = model.count(id) ? model[id].second : std::set<ClientId>{};
                    const ClientId from = model.count(id) ? model[id].first : x;
                    if (code_of([&] { reg.transfer(x, from, y, id); }) == ErrorCode::Ok) {
                        model[id] = {y, {}};
                        for (const auto& was : before) {
                            if (was != y) ASSERT_FALSE(reg.is_authorized(was, id));
                        }
                    }
                    break;
                }
                default:
                    if (code_of([&] { reg.approve(x, y, id); }) == ErrorCode::Ok) model[id].second.insert(y);
                    break;
            }
            ASSERT_EQ(reg.size(), model.size());
            for (const auto& [tid, entry] : model) {
                ASSERT_EQ(reg.owner_of(tid), entry.first);
                ASSERT_FALSE(reg.owner_of(tid).is_zero());
                for (const auto& c : clients) {
                    ASSERT_EQ(reg.is_authorized(c, tid), c == entry.first || entry.second.contains(c));
                }
            }
        }
    }
}

}  // namespace
}  // namespace provledger
