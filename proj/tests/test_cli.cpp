// Integration tests that drive the command-line binary as a subprocess.  The
// binary path arrives as the last command-line argument (wired up by the test
// harness), so this translation unit supplies its own main.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using json = nlohmann::json;

namespace {

std::string g_binary;

struct RunResult {
    int status = -1;
    std::string out;
};

// Runs the binary with the given arguments, capturing stdout.  stderr is
// folded in only when asked, since usage errors write the message there.
RunResult run_cli(const std::string& args, bool merge_stderr = false,
                  const std::string& env_prefix = "") {
    RunResult r;
    std::string cmd = env_prefix + "\"" + g_binary + "\" " + args;
    cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    int rc = pclose(pipe);
    REQUIRE(WIFEXITED(rc));
    r.status = WEXITSTATUS(rc);
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

bool is_hex16(const std::string& s) {
    if (s.size() != 16) return false;
    for (char c : s)
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// The trailing metadata comment every CSV table must carry.
void require_csv_footer(const std::string& line) {
    REQUIRE(line.rfind("# heckelab 0.1.0 config=", 0) == 0);
    REQUIRE(is_hex16(line.substr(line.find('=') + 1)));
}

}  // namespace

TEST_CASE("usage errors exit with status 2", "[cli]") {
    CHECK(run_cli("").status == 2);
    CHECK(run_cli("bogus-subcommand").status == 2);
    CHECK(run_cli("sum --no-such-flag 1").status == 2);
    CHECK(run_cli("arcs --alpha notanumber").status == 2);
    CHECK(run_cli("arcs --alpha 1/0").status == 2);
    CHECK(run_cli("form --limit 0").status == 2);
    CHECK(run_cli("form --form weight16 --limit 1e5").status == 2);
    CHECK(run_cli("form --form nosuchform --limit 10").status == 2);
    CHECK(run_cli("sum --variant nosuchvariant --limit 1e3").status == 2);
    CHECK(run_cli("certify-localfactor --step 0.5").status == 2);

    auto bare = run_cli("", true);
    CHECK(bare.out.find("subcommand") != std::string::npos);
}

TEST_CASE("help and version exit cleanly", "[cli]") {
    auto help = run_cli("--help", true);
    CHECK(help.status == 0);
    CHECK(help.out.find("verify-all") != std::string::npos);
    CHECK(help.out.find("arcs") != std::string::npos);

    auto version = run_cli("--version", true);
    CHECK(version.status == 0);
    CHECK(version.out.find("0.1.0") != std::string::npos);

    auto sub = run_cli("sum --help", true);
    CHECK(sub.status == 0);
    CHECK(sub.out.find("--alpha") != std::string::npos);
}

TEST_CASE("arcs labels one half as a major arc", "[cli]") {
    auto r = run_cli("arcs --alpha 0.5 --limit 1e6");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j.at("schema_version") == 1);
    CHECK(j.at("tool_version") == "0.1.0");
    CHECK(is_hex16(j.at("config").get<std::string>()));
    CHECK(j.at("kind") == "Major");
    CHECK(j.at("a") == 1);
    CHECK(j.at("q") == 2);
    CHECK(j.at("err").get<double>() == 0.0);
}

TEST_CASE("arcs labels the golden ratio as a minor arc", "[cli]") {
    auto r = run_cli("arcs --alpha golden --limit 1e6");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j.at("kind") == "Minor");
    CHECK(j.at("q") == 196418);  // largest Fibonacci denominator below Q

    auto csv = run_cli("arcs --alpha golden --limit 1e6 --format csv");
    REQUIRE(csv.status == 0);
    auto ls = lines_of(csv.out);
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "kind,a,q,err,threshold,big_q");
    CHECK(ls[1].rfind("Minor,121393,196418,", 0) == 0);
    require_csv_footer(ls[2]);
}

TEST_CASE("form emits a header row, data rows, and a metadata comment", "[cli]") {
    auto r = run_cli("form --limit 10");
    REQUIRE(r.status == 0);
    auto ls = lines_of(r.out);
    REQUIRE(ls.size() == 12);
    CHECK(ls[0] == "n,coeff,lambda");
    CHECK(ls[1] == "1,1,1");
    CHECK(ls[2].rfind("2,-24,", 0) == 0);
    CHECK(ls[5].rfind("5,4830,", 0) == 0);
    require_csv_footer(ls[11]);

    auto w16 = run_cli("form --form weight16 --limit 3");
    REQUIRE(w16.status == 0);
    auto wl = lines_of(w16.out);
    CHECK(wl[2].rfind("2,216,", 0) == 0);
    CHECK(wl[3].rfind("3,-3348,", 0) == 0);

    auto synth = run_cli("form --form synthetic --limit 5 --seed 3");
    REQUIRE(synth.status == 0);
    CHECK(lines_of(synth.out)[0] == "n,lambda");
}

TEST_CASE("sum emits the decay table", "[cli]") {
    auto r = run_cli("sum --variant moebius --alpha golden --limit 2000");
    REQUIRE(r.status == 0);
    auto ls = lines_of(r.out);
    REQUIRE(ls.size() >= 4);
    CHECK(ls[0] == "x,abs_value,over_x,normalized");
    CHECK(ls[ls.size() - 2].rfind("2000,", 0) == 0);
    require_csv_footer(ls.back());

    // Every variant parses and runs on a small range.
    for (const char* v : {"linear", "prime", "prime-log"}) {
        auto rv = run_cli(std::string("sum --variant ") + v + " --alpha 0.25 --limit 300");
        CHECK(rv.status == 0);
    }
}

TEST_CASE("identical configurations give byte-identical output", "[cli]") {
    auto a = run_cli("sum --variant moebius --alpha golden --limit 2000 --form delta --seed 5");
    auto b = run_cli("sum --variant moebius --alpha golden --limit 2000 --form delta --seed 5");
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);

    auto c = run_cli("vaughan --limit 2000 --alpha 0.3");
    auto d = run_cli("vaughan --limit 2000 --alpha 0.3");
    REQUIRE(c.status == 0);
    CHECK(c.out == d.out);
}

TEST_CASE("thread count never changes output bytes", "[cli]") {
    auto one = run_cli("verify-all --limit 2000 --seed 7 --threads 1");
    auto four = run_cli("verify-all --limit 2000 --seed 7 --threads 4");
    REQUIRE(one.status == 0);
    REQUIRE(four.status == 0);
    CHECK(one.out == four.out);

    auto s1 = run_cli("sum --variant moebius --alpha sqrt2-1 --limit 3000 --threads 1");
    auto s3 = run_cli("sum --variant moebius --alpha sqrt2-1 --limit 3000 --threads 3");
    REQUIRE(s1.status == 0);
    CHECK(s1.out == s3.out);
}

TEST_CASE("verify-all reports every check and a summary", "[cli]") {
    auto r = run_cli("verify-all --limit 2000 --seed 7");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("PASS tau-oracle") != std::string::npos);
    CHECK(r.out.find("PASS hecke-integral") != std::string::npos);
    CHECK(r.out.find("PASS vaughan-identity") != std::string::npos);
    CHECK(r.out.find("PASS local-factor") != std::string::npos);
    CHECK(r.out.find("PASS block-determinism") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
    auto ls = lines_of(r.out);
    REQUIRE(!ls.empty());
    CHECK(ls.back() == "SUMMARY pass=16 fail=0");
}

TEST_CASE("vaughan decomposition balances and exits zero", "[cli]") {
    auto r = run_cli("vaughan --limit 2000 --alpha 0.3");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j.at("ok") == true);
    CHECK(j.at("residual").get<double>() <= 1e-8);
    CHECK(j.at("x") == 2000);

    auto csv = run_cli("vaughan --limit 2000 --alpha 0.3 --format csv");
    REQUIRE(csv.status == 0);
    auto ls = lines_of(csv.out);
    REQUIRE(ls.size() == 3);
    CHECK(ls[0].rfind("x,y,z,t_direct_re", 0) == 0);
    require_csv_footer(ls[2]);
}

TEST_CASE("pnt lists one row per character", "[cli]") {
    auto r = run_cli("pnt --q 5 --limit 2000");
    REQUIRE(r.status == 0);
    auto ls = lines_of(r.out);
    REQUIRE(ls.size() == 6);  // header + phi(5) rows + footer
    CHECK(ls[0] == "index,order,conductor,primitive,even,re,im,abs,terms");
    CHECK(ls[1].rfind("0,1,1,0,1,", 0) == 0);  // principal: conductor 1, even
    require_csv_footer(ls[5]);
}

TEST_CASE("certificate subcommand reports a conclusive margin", "[cli]") {
    auto r = run_cli("certify-localfactor --step 1e-2");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j.at("conclusive") == true);
    CHECK(j.at("certified_min").get<double>() >= 0.01);
    CHECK(j.at("margin_p3").get<double>() > 0.125);
}

TEST_CASE("circle table pins the small ternary counts", "[cli]") {
    auto r = run_cli("circle --limit 12");
    REQUIRE(r.status == 0);
    auto ls = lines_of(r.out);
    CHECK(ls[0] == "n,r2,r3,weighted,weighted3,parity_flagged");
    bool saw9 = false, saw10 = false;
    for (const auto& l : ls) {
        if (l.rfind("9,2,4,", 0) == 0) saw9 = true;
        if (l.rfind("10,3,6,", 0) == 0) saw10 = true;
    }
    CHECK(saw9);
    CHECK(saw10);
}

TEST_CASE("cache directory round trip preserves output", "[cli]") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "heckelab-cli-cache-test";
    fs::remove_all(dir);

    std::string env = "HECKELAB_CACHE_DIR=\"" + dir.string() + "\" ";
    auto cold = run_cli("moments --limit 2000");
    auto warm1 = run_cli("moments --limit 2000", false, env);  // populates the cache
    auto warm2 = run_cli("moments --limit 2000", false, env);  // reads it back
    REQUIRE(cold.status == 0);
    REQUIRE(warm1.status == 0);
    REQUIRE(warm2.status == 0);
    CHECK(warm1.out == cold.out);   // cache must never change results
    CHECK(warm2.out == cold.out);
    CHECK(fs::exists(dir / "sieve-2000.bin"));
    CHECK(fs::exists(dir / "delta-2000.bin"));
    fs::remove_all(dir);
}

int main(int argc, char** argv) {
    int forwarded = argc;
    if (forwarded > 1 && argv[forwarded - 1][0] != '-') {
        g_binary = argv[forwarded - 1];
        --forwarded;
    }
    if (g_binary.empty()) {
        std::fprintf(stderr, "usage: test_cli [catch2 options] <path to heckelab binary>\n");
        return 2;
    }
    return Catch::Session().run(forwarded, argv);
}
