#include "cli.hpp"
#include "fsard/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace fsard;
using namespace fsard::cli;

namespace {

struct Run {
    int code;
    std::string out, log;
};

Run run(std::vector<const char *> args) {
    args.insert(args.begin(), "fsard");
    std::ostringstream out, log;
    const int code = cli::main(static_cast<int>(args.size()), args.data(), out, log);
    return {code, out.str(), log.str()};
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "fsard-cli-test";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("range parsing") {
    const auto r = parse_real_range("0.01:0.05:0.01", "rho");
    REQUIRE(r.size() == 5);
    CHECK(r.back() == doctest::Approx(0.05));
    CHECK(parse_real_range("0.1,0.2", "rho") == std::vector<double>{0.1, 0.2});
    CHECK(parse_real_range("0.3", "rho") == std::vector<double>{0.3});
    CHECK(parse_int_range("2:6:2", "M") == std::vector<int>{2, 4, 6});
    CHECK(parse_int_range("10,20", "N") == std::vector<int>{10, 20});
    try {
        parse_int_range("x", "M");
        FAIL("expected a ConfigError");
    } catch (const ConfigError &e) {
        CHECK(e.parameter() == "M");
    }
    CHECK_THROWS_AS(parse_real_range("0.5:0.1:0.1", "rho"), ConfigError);
}

TEST_CASE("json overlay") {
    ExperimentSpec spec;
    apply_json(spec, Json::parse(R"({"scheme": "fsa-rd-one", "N": [10, 20], "rho": "0.02:0.04:0.02", "seed": 7})"));
    CHECK(spec.scheme == Scheme::fsa_rd_one);
    CHECK(spec.users == std::vector<int>{10, 20});
    CHECK(spec.rho.size() == 2);
    CHECK(spec.seed == 7u);
    CHECK_THROWS_AS(apply_json(spec, Json::parse(R"({"bogus": 1})")), ConfigError);
}

TEST_CASE("invalid frame size is named in the error") {
    const auto r = run({"analyze", "--N", "30", "--V", "4", "--M", "9", "--rho", "0.1", "--gamma", "0.5"});
    CHECK(r.code == ExitCode::usage_error);
    CHECK(r.log.find("invalid parameter M") != std::string::npos);
}

TEST_CASE("unknown flags are usage errors") {
    CHECK(run({"analyze", "--nope"}).code == ExitCode::usage_error);
    CHECK(run({}).code == ExitCode::usage_error);
}

TEST_CASE("version flag") {
    const auto r = run({"--version"});
    CHECK(r.code == ExitCode::ok);
    CHECK(r.out.find("0.") != std::string::npos);
}

TEST_CASE("analyze writes csv with an embedded spec") {
    const auto r = run({"analyze", "--N", "30", "--V", "6", "--M", "3", "--rho", "0.04", "--gamma", "0.35"});
    REQUIRE(r.code == ExitCode::ok);
    CHECK(r.out.rfind("# fsard-csv v1", 0) == 0);
    CHECK(r.out.find("# spec: ") != std::string::npos);
    CHECK(r.out.find("56.5") != std::string::npos);

    // the written file can be replayed as a config
    const auto path = scratch_dir() / "analyze.csv";
    const std::string p = path.string();
    REQUIRE(run({"analyze", "--N", "30", "--V", "6", "--M", "3", "--rho", "0.04", "--gamma", "0.35", "--out", p.c_str()})
                .code == ExitCode::ok);
    const auto replay = run({"analyze", "--config", p.c_str(), "--out", "-"});
    CHECK(replay.code == ExitCode::ok);
    auto rows = [](const std::string &text) { return text.substr(text.find("\nscheme,")); };
    CHECK(rows(replay.out) == rows(r.out));
}

TEST_CASE("analyze json output") {
    const auto r = run({"analyze", "--scheme", "fsa-rd-one", "--N", "30", "--V", "4", "--M", "2:5:1", "--rho", "0.1",
                        "--format", "json"});
    REQUIRE(r.code == ExitCode::ok);
    const auto doc = Json::parse(r.out);
    CHECK(doc["results"].size() == 4);
    CHECK(doc["results"][1]["gamma"].get<double>() == doctest::Approx(0.492).epsilon(1e-3));
}

TEST_CASE("simulate is reproducible with a seed") {
    std::vector<const char *> args{"simulate", "--N", "5", "--V", "3", "--M", "2", "--rho", "0.1", "--gamma", "0.5",
                                   "--horizon", "100000", "--reps", "2", "--seed", "3", "--format", "json"};
    const auto a = run(args), b = run(args);
    REQUIRE(a.code == ExitCode::ok);
    CHECK(a.out == b.out);
    CHECK(run({"simulate", "--scheme", "aloha", "--N", "5", "--rho", "0.1"}).code == ExitCode::usage_error);
}

TEST_CASE("optimize writes a search trace") {
    const auto r = run({"optimize", "--N", "30", "--V", "4", "--rho", "0.02"});
    REQUIRE(r.code == ExitCode::ok);
    CHECK(r.out.find("scheme,N,V,rho,M,param,aaoi,halfwidth") != std::string::npos);
    CHECK(r.log.find("\"best_aaoi\": 72.37") != std::string::npos);
}

TEST_CASE("reproduce rejects unknown targets") {
    const auto dir = (scratch_dir() / "repro").string();
    const auto r = run({"reproduce", "fig9", "--out", dir.c_str()});
    CHECK(r.code == ExitCode::usage_error);
    CHECK(r.log.find("target") != std::string::npos);
}
