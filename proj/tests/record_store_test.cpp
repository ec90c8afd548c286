#include <gtest/gtest.h>

#include <map>
#include <random>

#include "test_support.hpp"

namespace provledger {
namespace {

using testing_support::fixture;

const RecordStore::WriteKey kKey = AccessForTesting::write_key();

Context vaccine_origin() {
    return Context{{"agent", "operator1@SaferVaccinesInc"}, {"time", "5am"}};
}

TEST(RecordStore, CreateReturnsSequentialIndex) {
    RecordStore store;
    EXPECT_EQ(store.create_record(kKey, ProvenanceId(1), TokenId(1), {}, vaccine_origin()), 0u);
    EXPECT_EQ(store.create_record(kKey, ProvenanceId(2), TokenId(1), {ProvenanceId(1)},
                                  Context{{"agent", "rfid1@SaferVaccinesInc"}, {"time", "5am"}}),
              1u);
}

TEST(RecordStore, DuplicateIdRejected) {
    RecordStore store;
    store.create_record(kKey, ProvenanceId(1), TokenId(1), {}, {});
    try {
        store.create_record(kKey, ProvenanceId(1), TokenId(1), {}, {});
        FAIL() << "expected DuplicateProvenanceId";
    } catch (const ProvError& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateProvenanceId);
    }
    EXPECT_EQ(store.record_count(), 1u);
}

TEST(RecordStore, ReadAfterWrite) {
    RecordStore store;
    store.create_record(kKey, ProvenanceId(1), TokenId(1), {}, vaccine_origin());
    const auto r = store.get_record(ProvenanceId(1));
    EXPECT_EQ(r.id, ProvenanceId(1));
    EXPECT_EQ(r.token_id, TokenId(1));
    EXPECT_TRUE(r.input_provenance_ids.empty());
    EXPECT_EQ(r.context, vaccine_origin());
    EXPECT_EQ(r.index, 0u);
    EXPECT_EQ(r.status, RecordStatus::Valid);
    EXPECT_EQ(store.get_record(ProvenanceId(1)), r);
}

TEST(RecordStore, MissingRecord) {
    RecordStore store;
    try {
        store.get_record(ProvenanceId(999));
        FAIL();
    } catch (const ProvError& e) {
        EXPECT_EQ(e.code(), ErrorCode::RecordNotFound);
    }
    EXPECT_EQ(store.find(ProvenanceId(999)), nullptr);
}

TEST(RecordStore, UpdateReplacesWholeContext) {
    RecordStore store;
    store.create_record(kKey, ProvenanceId(1), TokenId(1), {}, vaccine_origin());
    store.update_context(kKey, ProvenanceId(1), Context{{"agent", "x"}});
    EXPECT_EQ(store.get_record(ProvenanceId(1)).context, (Context{{"agent", "x"}}));

    try {
        store.update_context(kKey, ProvenanceId(7), Context{{"agent", "x"}});
        FAIL();
    } catch (const ProvError& e) {
        EXPECT_EQ(e.code(), ErrorCode::RecordNotFound);
    }
}

TEST(RecordStore, InvalidationKeepsRecordReadable) {
    RecordStore store;
    store.create_record(kKey, ProvenanceId(1), TokenId(1), {}, vaccine_origin());
    store.invalidate_record(kKey, ProvenanceId(1));
    EXPECT_EQ(store.get_record(ProvenanceId(1)).status, RecordStatus::Invalidated);
    EXPECT_EQ(store.record_count(), 1u);
    try {
        store.invalidate_record(kKey, ProvenanceId(1));
        FAIL();
    } catch (const ProvError& e) {
        EXPECT_EQ(e.code(), ErrorCode::RecordInvalidated);
    }
}

// Every (status, mutation) pair: only Valid records accept either mutation.
TEST(RecordStore, StatusOperationMatrix) {
    for (const bool start_valid : {true, false}) {
        for (const bool use_update : {true, false}) {
            RecordStore store;
            store.create_record(kKey, ProvenanceId(1), TokenId(1), {}, {});
            if (!start_valid) store.invalidate_record(kKey, ProvenanceId(1));
            std::optional<ErrorCode> err;
            try {
                if (use_update) {
                    store.update_context(kKey, ProvenanceId(1), Context{{"raw", "x"}});
                } else {
                    store.invalidate_record(kKey, ProvenanceId(1));
                }
            } catch (const ProvError& e) {
                err = e.code();
            }
            if (start_valid) {
                EXPECT_FALSE(err.has_value());
            } else {
                ASSERT_TRUE(err.has_value());
                EXPECT_EQ(*err, ErrorCode::RecordInvalidated);
            }
        }
    }
}

TEST(RecordStore, ListingSlices) {
    RecordStore store;
    EXPECT_EQ(store.record_count(), 0u);
    for (uint64_t i = 1; i <= 3; ++i) store.create_record(kKey, ProvenanceId(i), TokenId(1), {}, {});
    EXPECT_EQ(store.record_count(), 3u);
    EXPECT_EQ(store.list_record_ids(0, 10), (std::vector<ProvenanceId>{ProvenanceId(1), ProvenanceId(2), ProvenanceId(3)}));
    EXPECT_EQ(store.list_record_ids(2, 1), (std::vector<ProvenanceId>{ProvenanceId(3)}));
    EXPECT_TRUE(store.list_record_ids(3, 5).empty());
    EXPECT_TRUE(store.list_record_ids(1, 0).empty());
}

TEST(RecordStore, JsonExportFieldNames) {
    RecordStore store;
    store.create_record(kKey, ProvenanceId(4), TokenId(2), {}, Context{{"raw", "hello"}});
    const auto j = store.to_json();
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0].dump(),
              R"({"context":{"raw":"hello"},"id":4,"index":0,"inputProvenanceIds":[],"status":"Valid","tokenId":2})");
    EXPECT_EQ(record_from_json(j[0]), store.get_record(ProvenanceId(4)));
}

TEST(Context, CanonicalEncodingIsSorted) {
    Context a{{"time", "5am"}, {"agent", "a"}};
    Context b{{"agent", "a"}, {"time", "5am"}};
    EXPECT_EQ(a.canonical(), b.canonical());
    EXPECT_EQ(a.canonical(), R"({"agent":"a","time":"5am"})");
    EXPECT_THROW(Context({{"", "x"}}), ProvError);
}

// Random create/update/invalidate sequences: index stability, monotone count,
// and Valid -> Invalidated as the only observable transition.
TEST(RecordStoreProperty, RandomSequencesKeepInvariants) {
    std::mt19937_64 rng(1234);
    for (int run = 0; run < 50; ++run) {
        RecordStore store;
        std::map<ProvenanceId, RecordStatus> last_status;
        uint64_t next = 1;
        uint64_t last_count = 0;
        for (int step = 0; step < 200; ++step) {
            const int op = static_cast<int>(rng() % 3);
            const ProvenanceId target(1 + rng() % (next + 1));
            try {
                if (op == 0) {
                    store.create_record(kKey, ProvenanceId(next), TokenId(1 + rng() % 4), {}, {});
                    ++next;
                } else if (op == 1) {
                    store.update_context(kKey, target, Context{{"raw", std::to_string(step)}});
                } else {
                    store.invalidate_record(kKey, target);
                }
            } catch (const ProvError&) {
            }
            ASSERT_GE(store.record_count(), last_count);
            last_count = store.record_count();
            const auto ids = store.list_record_ids(0, store.record_count());
            for (size_t pos = 0; pos < ids.size(); ++pos) {
                const auto r = store.get_record(ids[pos]);
                ASSERT_EQ(r.index, pos);
                auto it = last_status.find(r.id);
                if (it != last_status.end() && it->second == RecordStatus::Invalidated) {
                    ASSERT_EQ(r.status, RecordStatus::Invalidated);
                }
                last_status[r.id] = r.status;
            }
        }
    }
}

}  // namespace
}  // namespace provledger
