#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "provledger/scenario.hpp"
#include "test_support.hpp"

namespace provledger {
namespace {

using nlohmann::json;
using testing_support::fixture;
using testing_support::TempDir;

json load_fixture(const std::string& name) {
    return json::parse(read_file(fixture(name)));
}

TEST(Scenario, VaccineColdChainFixture) {
    ScenarioRunner runner(load_fixture("vaccine_cold_chain.json"));
    runner.run();
    EXPECT_EQ(runner.steps_run(), 38u);
    const auto& b = runner.bindings();
    EXPECT_EQ(b.at("p1"), 1u);
    EXPECT_EQ(b.at("p2"), 2u);
    EXPECT_EQ(b.at("p3"), 3u);

    const auto& state = runner.ledger().state();
    EXPECT_EQ(scenario_query(state, {{"type", "lineage"}, {"id", b.at("p3")}}), (json{{"lineage", {1, 2, 3}}}));
    const auto graph = scenario_query(state, {{"type", "graph"}, {"id", b.at("pdp4c")}, {"depth", 2}});
    EXPECT_EQ(graph["nodes"].size(), 5u);
    EXPECT_EQ(graph["edges"].size(), 4u);
    EXPECT_EQ(scenario_query(state, {{"type", "traces"}, {"tokenId", b.at("air1")}})["traces"].size(), 2u);
    EXPECT_EQ(state.records().get_record(ProvenanceId(b.at("pdp5"))).status, RecordStatus::Invalidated);
    EXPECT_EQ(state.records().get_record(ProvenanceId(b.at("pdp4"))).context.at("value"), "41F");
}

TEST(Scenario, SameSeedSameLog) {
    const auto script = load_fixture("vaccine_cold_chain.json");
    TempDir a, b;
    for (const auto* dir : {&a, &b}) {
        ScenarioRunner runner(script);
        runner.run();
        runner.ledger().persist(dir->path());
    }
    EXPECT_EQ(read_file(a.path() / Ledger::kBlockLog), read_file(b.path() / Ledger::kBlockLog));
    EXPECT_TRUE(verify_chain(a.path()).ok);
}

TEST(Scenario, MismatchNamesTheStep) {
    auto script = load_fixture("vaccine_cold_chain.json");
    script["steps"][8]["expect"] = "Ok";
    ScenarioRunner runner(script);
    try {
        runner.run();
        FAIL();
    } catch (const ProvError& e) {
        EXPECT_EQ(e.code(), ErrorCode::ScenarioMismatch);
        EXPECT_NE(std::string(e.what()).find("step 8"), std::string::npos) << e.what();
    }
    EXPECT_EQ(runner.steps_run(), 8u);
}

TEST(Scenario, QueryMismatchAndErrors) {
    auto script = load_fixture("vaccine_cold_chain.json");
    script["steps"][11]["expect"] = {{"lineage", {"$p1", "$p3"}}};
    EXPECT_THROW(ScenarioRunner(script).run(), ProvError);

    json tiny{{"policy", to_json(testing_support::open_policy())},
              {"steps",
               {{{"as", "a"}, {"op", {{"type", "RequestToken"}}}, {"bind", "t"}},
                {{"query", {{"type", "lineage"}, {"id", 9}}}, {"expect", "RecordNotFound"}},
                {{"query", {{"type", "traces"}, {"tokenId", "$t"}}}, {"expect", {{"traces", json::array()}}}}}}};
    ScenarioRunner runner(tiny);
    runner.run();
    EXPECT_EQ(runner.steps_run(), 3u);

    tiny["steps"][1]["query"]["id"] = "$missing";
    EXPECT_THROW(ScenarioRunner(tiny).run(), ProvError);
}

// Command-line front end, run as a subprocess.
struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    CliResult cli(const std::string& args) {
        const auto out = tmp.path() / "stdout";
        const auto err = tmp.path() / "stderr";
        const std::string cmd = std::string("'") + PROVLEDGER_CLI + "' --dir '" + data().string() + "' " + args +
                                " >'" + out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        CliResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = read_file(out);
        r.err = read_file(err);
        return r;
    }
    std::filesystem::path data() const { return tmp.path() / "ledger"; }

    void init_open() {
        const auto policy = tmp.path() / "policy.json";
        std::ofstream(policy) << to_json(testing_support::open_policy()).dump();
        ASSERT_EQ(cli("init --policy '" + policy.string() + "'").code, 0);
    }

    TempDir tmp;
};

TEST_F(CliTest, InitCreateQueryVerify) {
    init_open();
    const auto tok = cli("token request --as alice");
    ASSERT_EQ(tok.code, 0) << tok.err;
    const auto tj = json::parse(tok.out);
    EXPECT_EQ(tj["result"], "Ok");
    EXPECT_EQ(tj["tokenId"], 1);
    EXPECT_EQ(tj["blockHeight"], 1);

    const auto p1 = cli(R"(prov create --as alice --token 1 --context '{"agent":"op1","time":"5am"}')");
    ASSERT_EQ(p1.code, 0) << p1.err;
    EXPECT_EQ(json::parse(p1.out)["provId"], 1);
    const auto p2 = cli(R"(prov create --as alice --token 1 --inputs 1 --context '{"agent":"rfid1","time":"5am"}')");
    ASSERT_EQ(p2.code, 0) << p2.err;

    const auto lineage = cli("query lineage --id 2");
    ASSERT_EQ(lineage.code, 0);
    EXPECT_EQ(json::parse(lineage.out), (json{{"lineage", {1, 2}}}));

    const auto graph = cli("query graph --id 2 --depth 1");
    EXPECT_EQ(json::parse(graph.out)["edges"], (json{{2, 1}}));
    EXPECT_NE(cli("query graph --id 2 --depth 1 --dot").out.find("digraph"), std::string::npos);
    EXPECT_EQ(json::parse(cli("query traces --token 1").out)["traces"].size(), 1u);
    EXPECT_EQ(json::parse(cli("prov get --id 1").out)["context"]["agent"], "op1");

    const auto verify = cli("verify '" + data().string() + "'");
    EXPECT_EQ(verify.code, 0) << verify.err;
    EXPECT_EQ(json::parse(verify.out)["ok"], true);
}

TEST_F(CliTest, OperationErrorsGoToStderr) {
    init_open();
    ASSERT_EQ(cli("token request --as alice").code, 0);
    const auto denied = cli(R"(prov create --as mallory --token 1 --context '{}')");
    EXPECT_EQ(denied.code, 1);
    EXPECT_EQ(json::parse(denied.err)["error"], "NotAuthorized");
    // the failed transaction is still on the chain
    EXPECT_EQ(json::parse(denied.out)["result"], "NotAuthorized");

    const auto missing = cli("query lineage --id 42");
    EXPECT_EQ(missing.code, 1);
    EXPECT_EQ(json::parse(missing.err)["error"], "RecordNotFound");

    const auto bad_json = cli("prov create --as alice --token 1 --context 'not json'");
    EXPECT_EQ(bad_json.code, 1);
    EXPECT_EQ(json::parse(bad_json.err)["error"], "MalformedPayload");
}

TEST_F(CliTest, UsageErrors) {
    const auto none = cli("");
    EXPECT_EQ(none.code, 2);
    EXPECT_EQ(json::parse(none.err)["error"], "UsageError");
    EXPECT_EQ(cli("prov create --token 1").code, 2);
    EXPECT_EQ(cli("bogus").code, 2);
}

TEST_F(CliTest, VerifyDetectsTampering) {
    init_open();
    ASSERT_EQ(cli("token request --as alice").code, 0);
    const auto log_path = data() / Ledger::kBlockLog;
    std::string log = read_file(log_path);
    const auto pos = log.find("\"fee\":1");
    ASSERT_NE(pos, std::string::npos);
    log[pos + 6] = '2';
    std::ofstream(log_path, std::ios::trunc) << log;
    const auto r = cli("verify '" + data().string() + "'");
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.out)["ok"], false);
    EXPECT_EQ(json::parse(r.out)["firstCorruptHeight"], 1);
}

TEST_F(CliTest, ScenarioAndBench) {
    const auto run = cli("scenario run '" + fixture("vaccine_cold_chain.json") + "' --out '" +
                         (tmp.path() / "scn").string() + "'");
    ASSERT_EQ(run.code, 0) << run.err;
    EXPECT_EQ(json::parse(run.out)["steps"], 38);
    EXPECT_TRUE(verify_chain(tmp.path() / "scn").ok);

    const auto bench = cli("bench --tx 150 --window-ms 60000 --capacity 10 --interval-ms 15000");
    ASSERT_EQ(bench.code, 0) << bench.err;
    const auto bj = json::parse(bench.out);
    EXPECT_EQ(bj["confirmed"], 40);
    EXPECT_NEAR(bj["tps"].get<double>(), 0.6667, 1e-4);
}

}  // namespace
}  // namespace provledger
