#include "ctl/scenario.hpp"
#include "ctl/service.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

using namespace ctl;
using nlohmann::json;

namespace {

const std::vector<std::string> kGolden{"finetune-loophole.json", "incognito-teacher.json", "expansion.json",
                                       "inference-worked.json", "sb1047.json"};

std::string read_file(const std::string& name) {
    std::ifstream in(std::string(CTL_SCENARIO_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ApiResponse post(const std::string& path, const std::string& body, std::map<std::string, std::string> query = {}) {
    return dispatch("POST", path, query, body);
}

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(CTL_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string scenario_path(const std::string& name) { return std::string(CTL_SCENARIO_DIR) + "/" + name; }

} // namespace

TEST(Dispatch, EvaluateWorkedExample) {
    const auto r = post("/api/evaluate", read_file("inference-worked.json"));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["verdicts"]["eu-inference-patch"]["status"], "Covered");
    EXPECT_EQ(r.body["verdicts"]["eu-aiact-literal"]["status"], "NotCovered");
}

TEST(Dispatch, EvaluateErrors) {
    const auto bad = post("/api/evaluate", "{not json");
    EXPECT_EQ(bad.status, 400);
    EXPECT_EQ(bad.body["error"]["code"], "SyntaxError");
    EXPECT_TRUE(bad.body["error"].contains("message"));

    auto sc = json::parse(read_file("inference-worked.json"));
    sc["rulesets"] = {"eo14110-literal", "no-such-rules"};
    const auto unknown = post("/api/evaluate", sc.dump());
    EXPECT_EQ(unknown.status, 400);
    EXPECT_EQ(unknown.body["error"]["code"], "SchemaError");
    EXPECT_EQ(unknown.body["error"]["field"], "rulesets");

    const auto big = post("/api/evaluate", std::string(kMaxRequestBytes + 1, ' '));
    EXPECT_EQ(big.status, 413);
    EXPECT_TRUE(big.body.contains("error"));
}

TEST(Dispatch, EvaluateRulesetQuery) {
    const auto r = post("/api/evaluate", read_file("inference-worked.json"), {{"rulesets", "eo14110-literal"}});
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["verdicts"].size(), 1u);
}

TEST(Dispatch, SweepRows) {
    const auto r = post("/api/sweep", read_file("inference-worked.json"));
    ASSERT_EQ(r.status, 200);
    bool seen_covered = false;
    for (const auto& row : r.body["rows"]) {
        ASSERT_TRUE(row.contains("effective"));
        if (row["ruleset"] != "eu-inference-patch") continue;
        const bool covered = row["status"] == "Covered";
        EXPECT_FALSE(seen_covered && !covered) << row.dump();
        if (covered && !seen_covered) EXPECT_GT(row["effective"]["log10"].get<double>(), 25.0);
        seen_covered = seen_covered || covered;
    }
    EXPECT_TRUE(seen_covered);

    const auto none = post("/api/sweep", R"({"models": [{"id": "m"}],
      "events": [{"kind": "Pretrain", "parents": [], "child": "m", "flop": "1e24"}], "subject": "m"})");
    EXPECT_EQ(none.status, 400);
}

TEST(Dispatch, Crossing) {
    const auto r = post("/api/crossing", read_file("finetune-loophole.json"), {{"ruleset", "eo14110-ft15"}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body["ruleset"], "eo14110-ft15");
    EXPECT_NEAR(r.body["crossing"]["log10"].get<double>(), std::log10(0.15 * 9.9e25), 1e-3);

    const auto flat = post("/api/crossing", read_file("finetune-loophole.json"), {{"ruleset", "eu-aiact-literal"}});
    EXPECT_EQ(flat.status, 422);
    EXPECT_EQ(flat.body["error"]["code"], "NoCrossing");

    const auto missing = post("/api/crossing", read_file("finetune-loophole.json"));
    EXPECT_EQ(missing.status, 400);
    const auto unknown = post("/api/crossing", read_file("finetune-loophole.json"), {{"ruleset", "zzz"}});
    EXPECT_EQ(unknown.status, 400);
}

TEST(Dispatch, RulesetsAndDefaults) {
    const auto r = dispatch("GET", "/api/rulesets", {}, "");
    ASSERT_EQ(r.status, 200);
    bool found = false;
    for (const auto& rs : r.body["rulesets"]) {
        if (rs["id"] == "eu-aiact-literal") {
            found = true;
            EXPECT_EQ(rs["threshold"], "1e25");
            EXPECT_FALSE(rs["citations"].empty());
        }
    }
    EXPECT_TRUE(found);

    const auto d = dispatch("GET", "/api/defaults", {}, "");
    ASSERT_EQ(d.status, 200);
    EXPECT_EQ(d.body["general_anchors"], json::parse("[[0.0, 0.0], [2.5, 2.0]]"));
    EXPECT_EQ(d.body["inference_optimal_coefficient"], 0.1);
}

TEST(Dispatch, RoutingErrors) {
    EXPECT_EQ(dispatch("GET", "/api/nothing", {}, "").status, 404);
    EXPECT_EQ(dispatch("GET", "/api/evaluate", {}, "").status, 405);
    EXPECT_EQ(dispatch("POST", "/api/rulesets", {}, "").status, 405);
}

TEST(Dispatch, StatelessUnderReordering) {
    std::vector<std::pair<std::string, std::string>> reqs;
    for (const auto& f : kGolden) reqs.emplace_back("/api/evaluate", read_file(f));
    reqs.emplace_back("/api/sweep", read_file("expansion.json"));
    std::vector<json> first;
    for (const auto& [p, b] : reqs) first.push_back(post(p, b).body);
    for (std::size_t i = reqs.size(); i-- > 0;) EXPECT_EQ(post(reqs[i].first, reqs[i].second).body, first[i]);
}

TEST(HttpServer, ServesOverLoopback) {
    HttpServer server;
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::thread t([&] { server.serve(); });
    httplib::Client client("127.0.0.1", port);
    auto r = client.Post("/api/evaluate", read_file("incognito-teacher.json"), "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body), post("/api/evaluate", read_file("incognito-teacher.json")).body);

    auto g = client.Get("/api/defaults");
    ASSERT_TRUE(g);
    EXPECT_EQ(g->status, 200);

    auto bad = client.Post("/api/evaluate", "{", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(json::parse(bad->body)["error"]["code"], "SyntaxError");

    auto big = client.Post("/api/evaluate", std::string(kMaxRequestBytes + 10, ' '), "application/json");
    ASSERT_TRUE(big);
    EXPECT_EQ(big->status, 413);
    server.stop();
    t.join();
}

TEST(CliApiParity, GoldenScenarios) {
    for (const auto& f : kGolden) {
        const CliResult cli = run_cli("evaluate " + scenario_path(f) + " --format json");
        ASSERT_EQ(cli.exit_code, 0) << f;
        EXPECT_EQ(json::parse(cli.out), post("/api/evaluate", read_file(f)).body) << f;
    }
}

TEST(Cli, ExitCodesAndCommands) {
    EXPECT_EQ(run_cli("").exit_code, 1);
    EXPECT_EQ(run_cli("evaluate").exit_code, 1);
    EXPECT_EQ(run_cli("evaluate /nonexistent.json").exit_code, 2);
    const CliResult text = run_cli("evaluate " + scenario_path("incognito-teacher.json"));
    EXPECT_EQ(text.exit_code, 0);
    EXPECT_EQ(text.out.rfind("RULESET", 0), 0u);
    EXPECT_EQ(run_cli("evaluate " + scenario_path("incognito-teacher.json")).out, text.out);

    const CliResult sweep = run_cli("sweep " + scenario_path("finetune-loophole.json") + " --format json");
    EXPECT_EQ(sweep.exit_code, 0);
    EXPECT_EQ(json::parse(sweep.out), post("/api/sweep", read_file("finetune-loophole.json")).body);

    const CliResult crossing =
        run_cli("crossing " + scenario_path("finetune-loophole.json") + " --ruleset eo14110-ft15 --tol-ooms 1e-4");
    EXPECT_EQ(crossing.exit_code, 0);
    EXPECT_NE(crossing.out.find("1.49e+25"), std::string::npos) << crossing.out;

    const CliResult rulesets = run_cli("rulesets");
    EXPECT_EQ(rulesets.exit_code, 0);
    EXPECT_NE(rulesets.out.find("eu-aiact-literal"), std::string::npos);
    EXPECT_NE(rulesets.out.find("cite:"), std::string::npos);
}
