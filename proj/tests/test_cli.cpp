// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the command-line tool. The binary path comes from the
// AFRELAY_CLI environment variable (set by the test harness).

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
    const char* p = std::getenv("AFRELAY_CLI");
    REQUIRE_MESSAGE(p != nullptr, "AFRELAY_CLI must point at the built binary");
    return p;
}

struct RunResult {
    int exit_code;
    std::string output;  // stdout only
};

RunResult run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Splits one CSV line into fields.
std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("afrelay_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("version flag") {
    const auto r = run("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("afrelay") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("ser --mod psk --M 8 --K 2 --N 2 --Ks 3").exit_code == 1);
    CHECK(run("ser --mod tuba").exit_code == 1);
    CHECK(run("no-such-command").exit_code == 1);
    CHECK(run("ser --snr-db-range oops").exit_code == 1);
}

TEST_CASE("ser exact-only sweep hits the zero-SNR limit") {
    const auto r = run("ser --mod psk --M 2 --K 1 --N 1 --snr-db-range=-300:-300:0 "
                       "--method exact");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines(r.output);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] ==
          "snr_db,ser_exact,ser_sim,ser_sim_stderr,ber_approx,ber_sim,ber_sim_stderr");
    const auto f = fields(rows[1]);
    REQUIRE(f.size() == 7);
    CHECK(std::stod(f[1]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(f[2].empty());  // no simulation columns in exact mode
    CHECK(f[5].empty());
}

TEST_CASE("ser with simulation is reproducible and worker-invariant") {
    TempDir tmp;
    const std::string base = "ser --mod psk --M 8 --K 2 --N 2 --Ks 2 --Ns 2 "
                             "--snr-db-range 8:10:2 --method both --seed 42 "
                             "--min-symbols 40000 --min-errors 50 --max-symbols 60000 ";
    const auto a = tmp.path / "a.csv";
    const auto b = tmp.path / "b.csv";
    CHECK(run(base + "--workers 1 --out " + a.string()).exit_code == 0);
    CHECK(run(base + "--workers 3 --out " + b.string()).exit_code == 0);
    const std::string csv_a = slurp(a);
    CHECK(csv_a == slurp(b));

    // Simulated SER sits near the exact value (loose envelope; the tight
    // 3-sigma criteria live in the acceptance suite).
    const auto rows = lines(csv_a);
    REQUIRE(rows.size() == 3);
    const auto f = fields(rows[1]);
    const double exact = std::stod(f[1]);
    const double sim = std::stod(f[2]);
    const double se = std::stod(f[3]);
    CHECK(std::fabs(sim - exact) < 5.0 * se);

    // Manifest accompanies the CSV.
    CHECK(fs::exists(a.string() + ".manifest"));
    const std::string manifest = slurp(a.string() + ".manifest");
    CHECK(manifest.find("command = ser") != std::string::npos);
    CHECK(manifest.find("seed = 42") != std::string::npos);
}

TEST_CASE("capacity-table emits the grid and the discrepancy report") {
    TempDir tmp;
    const auto out = tmp.path / "table.csv";
    const auto r = run("capacity-table --K-range 2:7 --N-range 2:10 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const auto rows = lines(slurp(out));
    REQUIRE(rows.size() == 7);  // header + K = 2..7
    CHECK(rows[0].rfind("K_tx,N2,N3", 0) == 0);
    const auto k2 = fields(rows[1]);
    CHECK(k2[0] == "2");
    CHECK(k2[1] == "1");  // (2,2) = 1
    CHECK(k2[4] == "2");  // (2,5) = 2
    const auto k5 = fields(rows[4]);
    CHECK(k5[9] == "2");  // (5,10) = 2

    const std::string report = slurp(out.string() + ".discrepancies.txt");
    CHECK(report.find("K=2 N=4: computed 2, reference 1") != std::string::npos);
}

TEST_CASE("ergodic-capacity near zero SNR is near zero capacity") {
    const auto r = run("ergodic-capacity --K 5 --N 5 --Ks 1 --Ns 1 "
                       "--rho-db-range=-100:-100:0 --trials 200 --seed 7");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines(r.output);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "rho_db,cap_full_mean,cap_full_stderr,cap_sel_mean,cap_sel_stderr");
    const auto f = fields(rows[1]);
    CHECK(std::stod(f[1]) < 1e-8);
    CHECK(std::stod(f[3]) < 1e-8);
}

TEST_CASE("mgf command: normalization at s = 0 and worker-invariant empirical columns") {
    TempDir tmp;
    const std::string base = "mgf --K 2 --N 2 --Ks 1 --Ns 1 --s-grid 0:1:0.5 --empirical "
                             "--trials 30000 --seed 5 ";
    const auto a = tmp.path / "m1.csv";
    const auto b = tmp.path / "m3.csv";
    CHECK(run(base + "--workers 1 --out " + a.string()).exit_code == 0);
    CHECK(run(base + "--workers 3 --out " + b.string()).exit_code == 0);
    const std::string csv = slurp(a);
    CHECK(csv == slurp(b));
    const auto rows = lines(csv);
    REQUIRE(rows.size() == 4);
    const auto f0 = fields(rows[1]);
    CHECK(std::stod(f0[1]) == 1.0);  // closed form at s = 0
    CHECK(std::stod(f0[2]) == 1.0);  // empirical at s = 0 is exactly 1
    CHECK(std::stod(f0[3]) == 0.0);
}

TEST_CASE("mgf closed-form column matches the frozen 1x1 value") {
    const auto r = run("mgf --K 1 --N 1 --s-grid 1:1:0");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines(r.output);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(fields(rows[1])[1]) == doctest::Approx(0.5963473623231941).epsilon(1e-9));
}

TEST_CASE("pdf command dumps terms and integrates to one on the emitted grid") {
    TempDir tmp;
    const auto out = tmp.path / "pdf.csv";
    const auto r = run("pdf --K 2 --N 2 --Ks 2 --Ns 2 --theta-grid 0:150:0.001 --dump-terms "
                       "--out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string terms = slurp(out.string() + ".terms.txt");
    CHECK(terms.find("# transmit branch terms") != std::string::npos);
    CHECK(terms.find("# product terms") != std::string::npos);

    const auto rows = lines(slurp(out));
    REQUIRE(rows.size() >= 150000);
    double trapezoid = 0.0;
    double prev_theta = 0.0, prev_pdf = 0.0;
    bool first = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields(rows[i]);
        const double theta = std::stod(f[0]);
        const double val = std::stod(f[1]);
        if (!first) trapezoid += 0.5 * (val + prev_pdf) * (theta - prev_theta);
        prev_theta = theta;
        prev_pdf = val;
        first = false;
    }
    CHECK(std::fabs(trapezoid - 1.0) < 1e-6);
}

TEST_CASE("config file mirrors the flags and flags override it") {
    TempDir tmp;
    const auto ini = tmp.path / "run.ini";
    {
        std::ofstream f(ini);
        f << "[ser]\n"
          << "mod = psk\n"
          << "M = 2\n"
          << "K = 1\n"
          << "N = 1\n"
          << "snr-db-range = \"-300:-300:0\"\n"
          << "method = exact\n";
    }
    const auto r = run("--config " + ini.string() + " ser");
    REQUIRE(r.exit_code == 0);
    CHECK(std::stod(fields(lines(r.output)[1])[1]) == doctest::Approx(0.5).epsilon(1e-9));

    // A command-line flag wins over the file: M = 8 gives the 7/8 limit.
    const auto r8 = run("--config " + ini.string() + " ser --M 8");
    REQUIRE(r8.exit_code == 0);
    CHECK(std::stod(fields(lines(r8.output)[1])[1]) == doctest::Approx(0.875).epsilon(1e-9));
}

TEST_CASE("validate honours the tolerance tamper hook") {
    // Scaling every tolerance to zero forces failures and a nonzero exit.
    const auto r = run("validate --quick --trials 2000 --tolerance-scale 1e-12");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("[FAIL]") != std::string::npos);
    CHECK(r.output.find("status=fail") != std::string::npos);
}
