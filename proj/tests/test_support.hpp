#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "provledger/ledger.hpp"
#include "provledger/record_store.hpp"
#include "provledger/token_registry.hpp"
#include "provledger/usecase_policy.hpp"

namespace provledger {

/// Grants tests the capabilities normally reserved to the upper layers.
struct AccessForTesting {
    static RecordStore::WriteKey write_key() { return {}; }
    static TokenRegistry::MintKey mint_key() { return {}; }
};

namespace testing_support {

inline ClientId client(const std::string& alias) {
    return ClientId::from_alias(alias);
}

/// Open assignment, every verb exposed, free-form context keys used in tests.
inline UseCasePolicy open_policy() {
    UseCasePolicy p;
    p.schema = ContextSchema{"test", {}, {"agent", "time", "value", "location", "temperature", "raw", "seq"}};
    p.exposure = ExposureFlags{true, true};
    p.assignment = OpenAssignment{};
    return p;
}

inline std::string fixture(const std::string& name) {
    return std::string(PROVLEDGER_FIXTURES) + "/" + name;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("provledger-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
}  // namespace provledger
