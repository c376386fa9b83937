// End-to-end tests for the command line tool: spawns the installed binary and
// checks stdout, stderr, and exit codes against the documented contract.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += "\"";
    cmd += PAGBOUND_CLI_PATH;
    cmd += "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data(const std::string& name) {
    return std::string(PAGBOUND_TEST_DATA) + "/" + name;
}

int count_lines_starting(const std::string& text, const std::string& prefix) {
    int n = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        if (text.compare(pos, prefix.size(), prefix) == 0) ++n;
        pos = end + 1;
    }
    return n;
}

}  // namespace

TEST_CASE("bound emits a JSON report for an unidentified query") {
    CliResult r = run_cli("bound --pag " + data("pair.pag") + " --dist " +
                          data("uniform_bx.json") + " --do B=1 --on X=1");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["query"] == "P_{b=1}(x=1)");
    CHECK(j["identified"] == false);
    CHECK(j["lower"].get<double>() == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(j["upper"].get<double>() == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(j["lower_expr"] == "P(b,x)");
    CHECK(j["upper_expr"] == "P(b,x)-P(b)+1");
    CHECK(j["natural"]["lower"].get<double>() == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(j["natural"]["upper"].get<double>() == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(j["trace"].is_array());
}

TEST_CASE("bound exits 3 when the effect is identified") {
    CliResult r = run_cli("bound --pag " + data("visible_pair.pag") + " --dist " +
                          data("uniform_xy.json") + " --do X=1 --on Y=1");
    CHECK(r.exit_code == 3);
    json j = json::parse(r.out);
    CHECK(j["identified"] == true);
    CHECK(j["lower"].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(j["upper"].get<double>() == j["lower"].get<double>());
    CHECK(j["lower_expr"] == "P(y|x)");
}

TEST_CASE("bound renders text output on request") {
    CliResult r = run_cli("bound --pag " + data("pair.pag") + " --dist " +
                          data("uniform_bx.json") + " --do B=1 --on X=1 --format text");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("query: P_{b=1}(x=1)") != std::string::npos);
    CHECK(r.out.find("interval: [0.250000, 0.750000]") != std::string::npos);
    CHECK(r.out.find("lower: P(b,x)") != std::string::npos);
    CHECK(r.out.find("upper: P(b,x)-P(b)+1") != std::string::npos);
    CHECK(r.out.find("identified: no") != std::string::npos);
}

TEST_CASE("bound works end to end from a sample table") {
    CliResult r = run_cli("bound --pag " + data("sachs.pag") + " --csv " + data("sachs.csv") +
                          " --do PKC=0 --on RAF=0,MEK=0,ERK=0");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["lower"].get<double>() == doctest::Approx(0.017950).epsilon(1e-4));
    CHECK(j["upper"].get<double>() == doctest::Approx(0.464492).epsilon(1e-4));
    CHECK(j["identified"] == false);
}

TEST_CASE("unreadable graph files exit 1") {
    CliResult r = run_cli("bound --pag " + data("broken.pag") + " --dist " +
                          data("uniform_bx.json") + " --do B=1 --on X=1");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("error:") != std::string::npos);
}

TEST_CASE("malformed queries exit 2 and point at usage") {
    SUBCASE("missing outcome") {
        CliResult r = run_cli("bound --pag " + data("pair.pag") + " --dist " +
                              data("uniform_bx.json") + " --do B=1");
        CHECK(r.exit_code == 2);
        CHECK(r.out.find("--on") != std::string::npos);
        CHECK(r.out.find("usage") != std::string::npos);
    }
    SUBCASE("value outside the column range") {
        CliResult r = run_cli("bound --pag " + data("pair.pag") + " --dist " +
                              data("uniform_bx.json") + " --do B=5 --on X=1");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("unknown flag") {
        CliResult r = run_cli("bound --bogus");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("both table sources at once") {
        CliResult r = run_cli("bound --pag " + data("pair.pag") + " --csv " +
                              data("sachs.csv") + " --dist " + data("uniform_bx.json") +
                              " --do B=1 --on X=1");
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("identify prints the estimand or FAIL") {
    SUBCASE("identified, names only") {
        CliResult r = run_cli("identify --pag " + data("hub5.pag") + " --do X --on D");
        CHECK(r.exit_code == 0);
        CHECK(r.out == "P(d|x)\n");
    }
    SUBCASE("identified with values and a table evaluates") {
        CliResult r = run_cli("identify --pag " + data("visible_pair.pag") +
                              " --do X=1 --on Y=1 --dist " + data("uniform_xy.json"));
        CHECK(r.exit_code == 0);
        CHECK(r.out == "P(y|x)\n0.500000\n");
    }
    SUBCASE("not identified") {
        CliResult r = run_cli("identify --pag " + data("chain5.pag") + " --do X,W,Z --on Y");
        CHECK(r.exit_code == 4);
        CHECK(r.out == "FAIL {Y}\n");
    }
    SUBCASE("not identified, JSON format") {
        CliResult r = run_cli("identify --pag " + data("chain5.pag") +
                              " --do X,W,Z --on Y --format json");
        CHECK(r.exit_code == 4);
        json j = json::parse(r.out);
        CHECK(j["identified"] == false);
        CHECK(j["blocking"] == "{Y}");
    }
}

TEST_CASE("enumerate lists equivalence classes and completions") {
    SUBCASE("class members of a two-node graph") {
        CliResult r = run_cli("enumerate " + data("visible_pair.mag"));
        CHECK(r.exit_code == 0);
        CHECK(r.out == "LEG A --> B\nLEG B --> A\n");
    }
    SUBCASE("confounding completions of the diamond") {
        CliResult r = run_cli("enumerate --mbd " + data("diamond.leg"));
        CHECK(r.exit_code == 0);
        CHECK(count_lines_starting(r.out, "MBD ") == 2);
    }
    SUBCASE("JSON format") {
        CliResult r = run_cli("enumerate --mbd " + data("diamond.leg") + " --format json");
        CHECK(r.exit_code == 0);
        json j = json::parse(r.out);
        CHECK(j["mbds"].size() == 2);
    }
}

TEST_CASE("verify stresses bounds against generated models") {
    CliResult r = run_cli("verify --pag " + data("pair.pag") + " --trials 20 --seed 3");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["trials"] == 20);
    CHECK(j["violations"] == 0);
    CHECK(j["max_slack"].get<double>() <= 1e-9);
}

TEST_CASE("verify output does not depend on the worker count") {
    std::string args = "verify --pag " + data("hub5.pag") + " --trials 12 --seed 5";
    CliResult serial = run_cli(args, "PAGBOUND_THREADS=1");
    CliResult parallel = run_cli(args, "PAGBOUND_THREADS=8");
    CHECK(serial.exit_code == 0);
    CHECK(parallel.exit_code == 0);
    CHECK(serial.out == parallel.out);
}
