#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef QDB_CLI_PATH
#define QDB_CLI_PATH "qdb"
#endif

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(QDB_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    int status = pclose(pipe);
    r.code = WEXITSTATUS(status);
    return r;
}

const char* kGadcNoise = R"('{"kind":"gadc","param":"noise","gamma":0.5,"N":0.2}')";
const char* kGadcLoss = R"('{"kind":"gadc","param":"loss","gamma":0.5,"N":0.2}')";
const char* kIdentityKraus =
    R"('{"kind":"kraus","dim_in":2,"dim_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}')";

}  // namespace

TEST_CASE("fisher rld-channel closed form through the CLI") {
    RunResult r = run(std::string("fisher --quantity rld-channel --channel ") + kGadcNoise +
                      " --theta 0.2");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["quantity"] == "rld-channel");
    CHECK(std::abs(j["value"].get<double>() - 6.25) < 1e-6);
    CHECK(j.contains("finiteness_residual"));
    CHECK(j.contains("runtime_ms"));
}

TEST_CASE("fisher with two methods reports a consistency flag") {
    RunResult r = run(std::string("fisher --quantity rld-channel --channel ") + kGadcLoss +
                      " --method closed,sdp");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.contains("methods"));
    double closed = j["methods"]["closed"]["value"].get<double>();
    double sdp = j["methods"]["sdp"]["value"].get<double>();
    CHECK(std::abs(closed - 7.25) < 1e-6);
    CHECK(std::abs(closed - sdp) < 1e-5);
    CHECK(j["consistent"].get<bool>());
    CHECK(j["max_delta"].get<double>() < 1e-5);
}

TEST_CASE("malformed descriptors exit with code 2 and name the field") {
    RunResult r = run("fisher --quantity rld-channel --channel '{\"kind\":\"gadc\"}'");
    CHECK(r.code == 2);

    RunResult r2 = run(
        "fisher --quantity rld-channel --channel "
        "'{\"kind\":\"gadc\",\"param\":\"noise\",\"gamma\":0.5,\"N\":0.2,\"bogus\":1}'");
    CHECK(r2.code == 2);

    RunResult r3 = run("fisher --quantity rld-channel --channel 'not json'");
    CHECK(r3.code == 2);
}

TEST_CASE("divergence of identical channels vanishes and alpha=1 routes to BS") {
    RunResult r = run(std::string("divergence --quantity geometric-renyi --alpha 2 --channel ") +
                      kGadcNoise + " --channel2 " + kGadcNoise);
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["value"].get<double>()) < 1e-8);

    RunResult r1 = run(std::string("divergence --quantity geometric-renyi --alpha 1 --channel ") +
                       kGadcNoise + " --channel2 " + kGadcLoss);
    REQUIRE(r1.code == 0);
    auto j1 = nlohmann::json::parse(r1.out);
    CHECK(j1.contains("note"));

    RunResult r2 = run(std::string("divergence --quantity geometric-renyi --alpha 2.5 --channel ") +
                       kGadcNoise + " --channel2 " + kGadcLoss);
    CHECK(r2.code == 2);
}

TEST_CASE("discriminate reports ordered bounds") {
    RunResult r = run(std::string("discriminate --channel ") + kGadcNoise + " --channel2 '" +
                      R"({"kind":"gadc","param":"noise","gamma":0.7,"N":0.4})" +
                      "' --n 10 --prior 0.5");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    double lower = j["chernoff_lower"].get<double>();
    double upper = j["geometric_chernoff_upper"].get<double>();
    CHECK(lower <= upper + 1e-6);
    CHECK(j["nonasymptotic_upper"].get<double>() >= 0.0);
}

TEST_CASE("kraus descriptor round trip") {
    RunResult r = run(std::string("divergence --quantity root-fidelity --channel ") +
                      kIdentityKraus + " --channel2 " + kIdentityKraus);
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["value"].get<double>() - 1.0) < 1e-6);
}

TEST_CASE("figures command writes the requested CSV") {
    std::string path = "/tmp/qdb_test_figure.csv";
    std::remove(path.c_str());
    RunResult r = run("figures --name estimate-noise --gamma 0.5 --grid 0.05:0.95:0.05 --out " +
                      path);
    REQUIRE(r.code == 0);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,rld_bound_log,sld_bound_log");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 19);
    std::remove(path.c_str());
}

TEST_CASE("figures CSV output is byte-identical across runs") {
    std::string p1 = "/tmp/qdb_fig_a.csv", p2 = "/tmp/qdb_fig_b.csv";
    REQUIRE(run("figures --name estimate-noise --gamma 0.5 --grid 0.2:0.4:0.1 --out " + p1)
                .code == 0);
    REQUIRE(run("figures --name estimate-noise --gamma 0.5 --grid 0.2:0.4:0.1 --out " + p2)
                .code == 0);
    std::ifstream a(p1), b(p2);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(!sa.str().empty());
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("selftest runs clean and reproducibly with a fixed seed") {
    RunResult r1 = run("selftest --seed 7 --trials 4");
    CHECK(r1.code == 0);
    RunResult r2 = run("selftest --seed 7 --trials 4");
    CHECK(r2.out == r1.out);
    CHECK(r1.out.find("all invariants hold") != std::string::npos);
}

TEST_CASE("a broken tolerance override fails the named invariant") {
    std::string cmd = std::string("QDB_TOL_CONSISTENCY=1e-18 ") + QDB_CLI_PATH +
                      " selftest --seed 7 --trials 4 2>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    int code = WEXITSTATUS(pclose(pipe));
    CHECK(code == 1);
    CHECK(out.find("FAIL fisher.sld_sdp_agreement") != std::string::npos);
}
