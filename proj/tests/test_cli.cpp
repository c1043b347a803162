#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "bvp/cli.hpp"
#include "test_support.hpp"

using namespace bvp;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "bvpcli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = testsup::temp_path(name);
    std::ofstream f(path);
    f << content;
    return path;
}

}  // namespace

TEST_CASE("help requests succeed") {
    CHECK(run_cli({"--help"}).exit_code == 0);
    CHECK(run_cli({"analyze", "--help"}).exit_code == 0);
}

TEST_CASE("analyze prints the Fredholm verdict for the identity problem") {
    const auto res = run_cli({"analyze", testsup::fixture("analyze_identity.json")});
    CHECK(res.exit_code == cli::kExitOk);
    CHECK(res.out.find("index (rm - l):            0") != std::string::npos);
    CHECK(res.out.find("invertible:                yes") != std::string::npos);
    CHECK(res.out.find("solvable for every right-hand side:           yes") !=
          std::string::npos);
}

TEST_CASE("analyze reports kernel and cokernel of a singular problem") {
    const auto res = run_cli({"analyze", testsup::fixture("analyze_singular.json")});
    CHECK(res.exit_code == cli::kExitOk);
    CHECK(res.out.find("dim ker:                   1") != std::string::npos);
    CHECK(res.out.find("dim coker:                 1") != std::string::npos);
    CHECK(res.out.find("invertible:                no") != std::string::npos);
}

TEST_CASE("analyze reports a positive index for an underdetermined problem") {
    const auto res = run_cli({"analyze", testsup::fixture("analyze_underdetermined.json")});
    CHECK(res.exit_code == cli::kExitOk);
    CHECK(res.out.find("index (rm - l):            1") != std::string::npos);
    CHECK(res.out.find("homogeneous problem has only trivial solution: no") !=
          std::string::npos);
}

TEST_CASE("schema problems exit with the schema code") {
    CHECK(run_cli({"analyze", testsup::temp_path("missing_file.json")}).exit_code ==
          cli::kExitSchema);
    const auto bad = write_temp("bvp_cli_bad.json", "{ not json");
    CHECK(run_cli({"analyze", bad}).exit_code == cli::kExitSchema);
    const auto incomplete = write_temp("bvp_cli_incomplete.json", R"({"version": 1})");
    const auto res = run_cli({"analyze", incomplete});
    CHECK(res.exit_code == cli::kExitSchema);
    CHECK(res.err.find("schema error") != std::string::npos);
    // solve on a file without f and c is a schema error, not a crash.
    CHECK(run_cli({"solve", testsup::fixture("analyze_identity.json")}).exit_code ==
          cli::kExitSchema);
    // unknown subcommand / missing argument are parse errors.
    CHECK(run_cli({"frobnicate"}).exit_code == cli::kExitSchema);
    CHECK(run_cli({"analyze"}).exit_code == cli::kExitSchema);
}

TEST_CASE("solve announces each solvability class with its exit code") {
    SUBCASE("unique") {
        const auto res = run_cli({"solve", testsup::fixture("solve_cauchy_unique.json")});
        CHECK(res.exit_code == cli::kExitOk);
        CHECK(res.out.find("status: Unique") != std::string::npos);
        CHECK(res.out.find("ODE residual") != std::string::npos);
    }
    SUBCASE("family") {
        const auto res = run_cli({"solve", testsup::fixture("solve_family.json")});
        CHECK(res.exit_code == cli::kExitOk);
        CHECK(res.out.find("status: Family (kernel dimension 1)") != std::string::npos);
    }
    SUBCASE("inconsistent") {
        const auto res = run_cli({"solve", testsup::fixture("solve_inconsistent.json")});
        CHECK(res.exit_code == cli::kExitInconsistent);
        CHECK(res.out.find("status: Inconsistent") != std::string::npos);
        CHECK(res.out.find("no solution exists") != std::string::npos);
    }
}

TEST_CASE("solve exports solution and kernel trajectories as CSV") {
    const std::string csv_path = testsup::temp_path("bvp_cli_family.csv");
    const auto res = run_cli(
        {"solve", testsup::fixture("solve_family.json"), "--csv", csv_path, "--samples", "11"});
    REQUIRE(res.exit_code == cli::kExitOk);
    const std::string csv = testsup::slurp(csv_path);
    CHECK(csv.rfind("t,", 0) == 0);
    CHECK(csv.find("Re_y_1") != std::string::npos);
    CHECK(csv.find("Re_ker1_1") != std::string::npos);
    // header + 11 samples
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
}

TEST_CASE("verify passes on all five model problems") {
    for (int id = 1; id <= 5; ++id) {
        CAPTURE(id);
        const auto res = run_cli({"verify", std::to_string(id),
                                  testsup::fixture("verify_ex" + std::to_string(id) + ".json")});
        CHECK(res.exit_code == cli::kExitOk);
        CHECK(res.out.find("PASS") != std::string::npos);
    }
    CHECK(run_cli({"verify", "7", testsup::fixture("verify_ex1.json")}).exit_code ==
          cli::kExitSchema);
}

TEST_CASE("limits prints the per-k table and verdicts") {
    SUBCASE("converging family") {
        const auto res = run_cli({"limits", testsup::fixture("limits_converge.json")});
        CHECK(res.exit_code == cli::kExitOk);
        CHECK(res.out.find("matrices converge:     yes") != std::string::npos);
        CHECK(res.out.find("semicontinuity holds:  yes") != std::string::npos);
        CHECK(res.out.find("fitted rate:") != std::string::npos);
    }
    SUBCASE("expected divergence is not an error") {
        const auto res = run_cli({"limits", testsup::fixture("limits_rank_jump.json")});
        CHECK(res.exit_code == cli::kExitOk);
        CHECK(res.out.find("matrices converge:     no") != std::string::npos);
    }
    SUBCASE("unexpected divergence trips the dedicated exit code") {
        // Same family as the rank-jump fixture but marked expect_converge.
        json j = json::parse(testsup::slurp(testsup::fixture("limits_rank_jump.json")));
        j["perturbation"]["expect_converge"] = true;
        const auto path = write_temp("bvp_cli_diverge.json", j.dump());
        CHECK(run_cli({"limits", path}).exit_code == cli::kExitDiverged);
    }
    SUBCASE("a problem without a perturbation block is a schema error") {
        CHECK(run_cli({"limits", testsup::fixture("analyze_identity.json")}).exit_code ==
              cli::kExitSchema);
    }
}

TEST_CASE("limits exports CSV tables") {
    const std::string csv_path = testsup::temp_path("bvp_cli_limits.csv");
    const auto res =
        run_cli({"limits", testsup::fixture("limits_constant.json"), "--csv", csv_path});
    REQUIRE(res.exit_code == cli::kExitOk);
    const std::string csv = testsup::slurp(csv_path);
    CHECK(csv.rfind("k,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 members
}

TEST_CASE("JSON reports are written and byte-stable across runs") {
    const std::string path1 = testsup::temp_path("bvp_cli_rep1.json");
    const std::string path2 = testsup::temp_path("bvp_cli_rep2.json");
    REQUIRE(run_cli({"analyze", testsup::fixture("analyze_singular.json"), "--json", path1})
                .exit_code == cli::kExitOk);
    REQUIRE(run_cli({"analyze", testsup::fixture("analyze_singular.json"), "--json", path2})
                .exit_code == cli::kExitOk);
    const std::string report1 = testsup::slurp(path1);
    CHECK(report1 == testsup::slurp(path2));

    const json parsed = json::parse(report1);
    CHECK(parsed.contains("report"));
    CHECK(parsed.contains("characteristic_matrix"));
    CHECK(parsed.contains("problem"));
    CHECK(parsed.at("report").at("dim_ker") == 1);
}

TEST_CASE("tolerance flags override file and profile settings") {
    // A huge rank tolerance wipes out every singular value of the singular
    // fixture's M, so the kernel swallows the whole space.
    const auto res = run_cli({"--rank-tol", "0.9", "analyze",
                              testsup::fixture("analyze_singular.json")});
    CHECK(res.exit_code == cli::kExitOk);
    CHECK(res.out.find("dim ker:                   2") != std::string::npos);
}

TEST_CASE("the tolerance profile environment variable is honored") {
    setenv("BVP_TOLERANCE_PROFILE", "fast", 1);
    const auto fast = run_cli({"analyze", testsup::fixture("analyze_identity.json")});
    CHECK(fast.exit_code == cli::kExitOk);

    setenv("BVP_TOLERANCE_PROFILE", "nonsense", 1);
    const auto warned = run_cli({"analyze", testsup::fixture("analyze_identity.json")});
    CHECK(warned.exit_code == cli::kExitOk);
    CHECK(warned.err.find("warning") != std::string::npos);
    unsetenv("BVP_TOLERANCE_PROFILE");
}
