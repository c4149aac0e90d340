#include "doctest.h"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

// Drives the installed binary end to end through a shell: exit codes,
// payload contents, determinism, and the config-file merge.

namespace {

using nlohmann::json;

std::string cli_path() {
    const char* p = std::getenv("FRACHEAT_CLI");
    REQUIRE_MESSAGE(p != nullptr, "FRACHEAT_CLI must point at the binary");
    return p;
}

std::string data_dir() {
    const char* p = std::getenv("FRACHEAT_DATA");
    return p ? p : "tests/data";
}

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string tmp_base(const char* tag) {
    return "/tmp/fracheat_cli_" + std::to_string(getpid()) + "_" + tag;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// first column is the coordinate, last is the value
double csv_value_sum(const std::string& text, int* rows = nullptr) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    double sum = 0.0;
    int n = 0;
    while (std::getline(in, line)) {
        const std::size_t comma = line.rfind(',');
        sum += std::stod(line.substr(comma + 1));
        ++n;
    }
    if (rows) *rows = n;
    return sum;
}

} // namespace

TEST_CASE("kernel files carry the unit-mass slice") {
    const std::string base = tmp_base("kernel");
    const RunResult r =
        run("kernel --d 1 --s 1 --t 64 --tol 1e-9 --out " + base);
    REQUIRE(r.exit_code == 0);

    const json h = json::parse(slurp(base + ".json"));
    CHECK(h.at("t").get<double>() == 64.0);
    CHECK(h.at("d").get<int>() == 1);
    CHECK(h.at("mass_grid").get<double>() == doctest::Approx(1.0).epsilon(1e-11));
    const auto L = h.at("L").get<long long>();

    int rows = 0;
    const double sum = csv_value_sum(slurp(base + ".csv"), &rows);
    CHECK(rows == 2 * L + 1);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("identical invocations produce identical bytes") {
    const std::string a = tmp_base("det_a"), b = tmp_base("det_b");
    REQUIRE(run("kernel --d 1 --s 0.75 --t 32 --out " + a).exit_code == 0);
    REQUIRE(run("kernel --d 1 --s 0.75 --t 32 --out " + b).exit_code == 0);
    CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
    CHECK(slurp(a + ".json") == slurp(b + ".json"));
}

TEST_CASE("a worker pool over the time grid returns the serial payload") {
    const std::string a = tmp_base("pool_a"), b = tmp_base("pool_b");
    REQUIRE(run("kernel --d 1 --s 1 --times 4,8,16,32 --jobs 4 --out " + a).exit_code == 0);
    REQUIRE(run("kernel --d 1 --s 1 --times 4,8,16,32 --jobs 1 --out " + b).exit_code == 0);
    for (int i = 0; i < 4; ++i) {
        const std::string suffix = "_" + std::to_string(i);
        CHECK(slurp(a + suffix + ".csv") == slurp(b + suffix + ".csv"));
        CHECK(slurp(a + suffix + ".json") == slurp(b + suffix + ".json"));
    }
}

TEST_CASE("config file fills gaps and flags win") {
    const std::string cfg = tmp_base("cfg") + ".json";
    {
        std::ofstream os(cfg);
        os << R"({"s": 0.5, "t": 16, "tol": 1e-7})";
    }
    const std::string base = tmp_base("merged");
    REQUIRE(run("kernel --config " + cfg + " --s 1 --out " + base).exit_code == 0);
    const json h = json::parse(slurp(base + ".json"));
    CHECK(h.at("s").get<double>() == 1.0);  // flag beat the file
    CHECK(h.at("t").get<double>() == 16.0); // file filled the gap
}

TEST_CASE("usage errors exit 2") {
    CHECK(run("kernel --d 4 --t 1").exit_code == 2);
    CHECK(run("kernel --s 1.5 --t 1").exit_code == 2);
    CHECK(run("kernel").exit_code == 2); // no time grid
    CHECK(run("rates --times 1 --d 1 --s 1").exit_code == 2);
    CHECK(run("no-such-command").exit_code == 2);
    CHECK(run("dirichlet --omega mid3").exit_code == 2); // missing graph
    CHECK(run("dirichlet --graph " + data_dir() + "/path5.json --u0 1,2").exit_code == 2);
}

TEST_CASE("shift datum sweep recovers the similarity exponent") {
    const RunResult r = run("rates --datum shift-e1 --d 1 --s 1 --p inf --assert");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("expected_slope").get<double>() == -0.5);
    CHECK(j.at("slope").get<double>() == doctest::Approx(-0.5).epsilon(0.1));
    CHECK_FALSE(j.at("preasymptotic").get<bool>());
}

TEST_CASE("rates emit a csv sweep when asked") {
    const RunResult r = run("rates --datum shift-e1 --d 1 --s 1 --p 2 --format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("t,", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7); // header + 6 rows
}

TEST_CASE("heavy tail datum passes the qualitative assert") {
    const RunResult r = run(
        "rates --datum heavy-tail --d 1 --s 1 --times 16,32,64,128,256,512,1024 --assert");
    CHECK(r.exit_code == 0);
}

TEST_CASE("optimality mode converges to the profile constant") {
    const RunResult r =
        run("rates --mode optimality --p 1 --s 0.5 --tol 1e-6 --assert --assert-tol 0.05");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    // the s = 1/2 profile is Cauchy; the l1 limit of the derivative is 2/pi
    CHECK(j.at("profile_limit").get<double>() == doctest::Approx(0.6366197723675814).epsilon(1e-3));
    CHECK(j.at("rel_error").get<double>() < 0.05);
}

TEST_CASE("counterexample verifies every requested level") {
    const std::string base = tmp_base("cx");
    const RunResult r =
        run("counterexample --phi t^-0.25 --kmax 2 --assert --out " + base);
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(slurp(base + ".json"));
    CHECK(j.at("achieved_k").get<int>() == 2);
    CHECK(j.at("times")[0].get<double>() == 33554432.0);
    for (const auto& c : j.at("checks")) {
        CHECK(c.at("pass").get<bool>());
        CHECK(c.at("lhs").get<double>() >= c.at("rhs").get<double>());
    }
}

TEST_CASE("a logarithmic budget exhausts the box memory") {
    CHECK(run("counterexample --phi log --kmax 1").exit_code == 4);
}

TEST_CASE("dirichlet report matches the interior path spectrum") {
    const RunResult r = run("dirichlet --graph " + data_dir() +
                            "/path5.json --omega mid3 --s 1 --assert-gap");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    const std::vector<double> want = {0.5857864376269049, 2.0, 3.4142135623730951};
    for (int k = 0; k < 3; ++k) {
        CHECK(j.at("eigenvalues")[k].get<double>() == doctest::Approx(want[k]).epsilon(1e-10));
    }
    CHECK(j.at("raw").at("slope").get<double>() == doctest::Approx(-2.0).epsilon(0.01));
    CHECK(j.at("renormalized").at("slope").get<double>() ==
          doctest::Approx(-(2.0 - want[0])).epsilon(0.01));
}

TEST_CASE("omega can come from the file or from vertex ids") {
    const RunResult file_om =
        run("dirichlet --graph " + data_dir() + "/path5.json --s 1");
    REQUIRE(file_om.exit_code == 0);
    CHECK(json::parse(file_om.out).at("omega") == json({1, 2, 3}));

    const RunResult ids =
        run("positivity --graph " + data_dir() + "/grid23.json --omega 0,1 --s 1");
    REQUIRE(ids.exit_code == 0);
    CHECK(json::parse(ids.out).at("positive").get<bool>());
}

TEST_CASE("positivity report for a fractional interior block") {
    const RunResult r =
        run("positivity --graph " + data_dir() + "/path5.json --omega mid3 --s 0.5 --assert");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("positive").get<bool>());
    CHECK(j.at("min_entry").get<double>() > 0.0);
    CHECK(j.at("metzler").get<bool>());
    CHECK(j.at("irreducible").get<bool>());
}
