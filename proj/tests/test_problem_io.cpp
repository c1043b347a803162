#include <doctest.h>

#include <cmath>

#include "bvp/problem_io.hpp"
#include "test_support.hpp"

using namespace bvp;
using nlohmann::json;

namespace {

json minimal_problem() {
    return json::parse(R"({
        "version": 1,
        "interval": [0.0, 1.0],
        "m": 1, "r": 1, "n": 0,
        "coefficients": [{"kind": "constant", "value": [[0]]}],
        "boundary": {"l": 1, "terms": [
            {"type": "point", "point": 0.0, "order": 0, "alpha": [[1]]}
        ]}
    })");
}

}  // namespace

TEST_CASE("complex and matrix codecs round-trip") {
    CHECK(io::parse_complex(json(3.5)) == Complex(3.5, 0.0));
    CHECK(io::parse_complex(json::array({1.0, -2.0})) == Complex(1.0, -2.0));
    CHECK_THROWS_AS(io::parse_complex(json("x")), SchemaError);
    CHECK_THROWS_AS(io::parse_complex(json::array({1.0})), SchemaError);

    const Matrix m = io::parse_matrix(json::parse("[[1, [0, 2]], [3, 4]]"));
    CHECK(m(0, 1) == Complex(0.0, 2.0));
    CHECK(io::parse_matrix(io::dump_matrix(m)) == m);
    CHECK_THROWS_AS(io::parse_matrix(json::parse("[[1, 2], [3]]")), SchemaError);
    CHECK_THROWS_AS(io::parse_matrix(json::parse("[]")), SchemaError);

    Vector v(2);
    v << Complex(1, 1), Complex(0, -3);
    CHECK(io::parse_vector(io::dump_vector(v)) == v);
}

TEST_CASE("coefficient codecs cover all three representations") {
    const auto c = io::parse_coefficient(
        json::parse(R"({"kind": "constant", "value": [[2]]})"), 1, 1, 0.0);
    CHECK(c.is_constant());
    CHECK(c.eval(0.3)(0, 0) == Complex(2.0, 0.0));

    const auto p = io::parse_coefficient(
        json::parse(R"({"kind": "polynomial", "coefficients": [[[1]], [[2]]]})"), 1, 1, 0.5);
    // base defaults to the interval's left endpoint (0.5 here).
    CHECK(p.eval(1.0)(0, 0).real() == doctest::Approx(2.0));

    const auto s = io::parse_coefficient(
        json::parse(R"({"kind": "sampled",
                        "points": [0.0, 0.5, 1.0],
                        "values": [[[0]], [[0.25]], [[1]]],
                        "order": 2})"),
        1, 1, 0.0);
    CHECK(s.eval(0.5)(0, 0).real() == doctest::Approx(0.25));

    CHECK_THROWS_AS(io::parse_coefficient(json::parse(R"({"kind": "mystery"})"), 1, 1, 0.0),
                    SchemaError);
    CHECK_THROWS_AS(io::parse_coefficient(
                        json::parse(R"({"kind": "constant", "value": [[1, 2]]})"), 1, 1, 0.0),
                    SchemaError);

    const json round = io::dump_coefficient(p);
    CHECK(round.at("kind") == "polynomial");
    CHECK(round.at("base") == 0.5);
}

TEST_CASE("problem files parse, validate and round-trip canonically") {
    const io::Problem problem = io::parse_problem(minimal_problem());
    CHECK(problem.system->m == 1);
    CHECK(problem.boundary.l() == 1);
    CHECK(problem.p == 2.0);
    CHECK_FALSE(problem.f.has_value());

    // serialize -> parse -> serialize is the identity on canonical form.
    const json once = io::serialize_problem(problem);
    const json twice = io::serialize_problem(io::parse_problem(once));
    CHECK(once == twice);
    CHECK(once.dump() == twice.dump());
}

TEST_CASE("schema violations raise SchemaError with the offending field") {
    auto bad = minimal_problem();
    bad.erase("m");
    CHECK_THROWS_WITH_AS(io::parse_problem(bad), doctest::Contains("m"), SchemaError);

    bad = minimal_problem();
    bad["interval"] = json::array({1.0, 0.0});
    CHECK_THROWS_AS(io::parse_problem(bad), SchemaError);

    bad = minimal_problem();
    bad["coefficients"] = json::array();
    CHECK_THROWS_AS(io::parse_problem(bad), SchemaError);

    bad = minimal_problem();
    bad["c"] = json::array({1.0, 2.0});  // l = 1
    CHECK_THROWS_AS(io::parse_problem(bad), SchemaError);

    bad = minimal_problem();
    bad["tolerances"] = json{{"integrator", -1.0}};
    CHECK_THROWS_AS(io::parse_problem(bad), SchemaError);

    bad = minimal_problem();
    bad["version"] = 2;
    CHECK_THROWS_AS(io::parse_problem(bad), SchemaError);

    bad = minimal_problem();
    bad["boundary"]["terms"][0]["order"] = 5.0;  // exceeds n + r
    CHECK_THROWS_AS(io::parse_problem(bad), SchemaError);
}

TEST_CASE("the Sobolev exponent accepts numbers and the infinity token") {
    auto j = minimal_problem();
    j["p"] = 3.5;
    CHECK(io::parse_problem(j).p == 3.5);
    j["p"] = "inf";
    CHECK(std::isinf(io::parse_problem(j).p));
    j["p"] = 0.5;
    CHECK_THROWS_AS(io::parse_problem(j), SchemaError);
    j["p"] = "huge";
    CHECK_THROWS_AS(io::parse_problem(j), SchemaError);
}

TEST_CASE("tolerance defaults seed the parse and file values win") {
    io::Tolerances profile;
    profile.integrator = 1e-6;
    profile.rank = 1e-5;
    auto j = minimal_problem();
    SUBCASE("no file block: defaults pass through") {
        const auto problem = io::parse_problem(j, profile);
        CHECK(problem.tolerances.integrator == 1e-6);
        CHECK(problem.tolerances.rank == 1e-5);
    }
    SUBCASE("file block overrides field-by-field") {
        j["tolerances"] = json{{"integrator", 1e-9}};
        const auto problem = io::parse_problem(j, profile);
        CHECK(problem.tolerances.integrator == 1e-9);
        CHECK(problem.tolerances.rank == 1e-5);  // untouched field keeps the profile
    }
}

TEST_CASE("perturbation blocks parse and build runnable sequences") {
    auto j = minimal_problem();
    j["perturbation"] = json::parse(R"({
        "k_values": [2, 4],
        "scale": {"type": "inverse_power", "power": 1},
        "coefficient_deltas": [[[8]]],
        "boundary_alpha_deltas": [{"term": 0, "delta": [[4]]}]
    })");
    const auto problem = io::parse_problem(j);
    REQUIRE(problem.perturbation.has_value());

    const PerturbationSequence seq = io::build_sequence(problem);
    const auto [system2, operator2] = seq.member(2);
    // scale(2) = 1/2: coefficient 0 + 8/2, alpha 1 + 4/2.
    CHECK(system2->coefficient(0, 0.5)(0, 0) == Complex(4.0, 0.0));
    const auto* pt = std::get_if<PointTerm>(&operator2.terms()[0]);
    REQUIRE(pt != nullptr);
    CHECK(pt->alpha(0, 0) == Complex(3.0, 0.0));
    // The base problem is untouched.
    CHECK(problem.system->coefficient(0, 0.5)(0, 0) == Complex(0.0, 0.0));
}

TEST_CASE("perturbation schema errors are rejected") {
    auto j = minimal_problem();

    j["perturbation"] = json{{"k_values", json::array()}};
    CHECK_THROWS_AS(io::parse_problem(j), SchemaError);

    j["perturbation"] = json::parse(R"({"k_values": [1, 2]})");  // perturbs nothing
    CHECK_THROWS_AS(io::parse_problem(j), SchemaError);

    j["perturbation"] = json::parse(R"({
        "k_values": [1, 2],
        "scale": {"type": "explicit", "values": [1.0]},
        "coefficient_deltas": [[[1]]]
    })");
    CHECK_THROWS_AS(io::parse_problem(j), SchemaError);

    j["perturbation"] = json::parse(R"({
        "k_values": [1],
        "boundary_alpha_deltas": [{"term": 9, "delta": [[1]]}]
    })");
    CHECK_THROWS_AS(io::parse_problem(j), SchemaError);

    j["perturbation"] = json::parse(R"({
        "k_values": [1],
        "coefficient_deltas": [[[1]], [[1]]]
    })");  // r = 1 but two deltas
    CHECK_THROWS_AS(io::parse_problem(j), SchemaError);
}

TEST_CASE("fixture files on disk load cleanly") {
    const auto problem = io::load_problem(testsup::fixture("limits_converge.json"));
    CHECK(problem.system->m == 1);
    REQUIRE(problem.perturbation.has_value());
    CHECK(problem.perturbation->k_values.size() == 6);
    CHECK_THROWS_AS(io::load_problem(testsup::fixture("no_such_file.json")), SchemaError);
}

TEST_CASE("report serialization uses the documented keys") {
    FredholmReport report;
    report.index = 1;
    report.rank = 2;
    report.dim_ker = 3;
    report.dim_coker = 2;
    report.singular_values = {2.0, 1.0};
    report.rank_tol = 1e-10;
    report.invertible = false;
    const json j = io::dump_report(report);
    for (const char* key : {"index", "rank", "dim_ker", "dim_coker", "singular_values",
                            "rank_tol", "invertible"})
        CHECK(j.contains(key));
    CHECK(j.at("index") == 1);
    CHECK(j.at("singular_values").size() == 2);
}

TEST_CASE("convergence reports serialize with null for an undefined rate") {
    ConvergenceReport report;
    ConvergenceRow row;
    row.k = 2;
    row.coeff_norm_gaps = {0.0};
    row.fundsol_gaps = {0.0};
    report.rows.push_back(row);
    report.fitted_rate = std::numeric_limits<double>::quiet_NaN();
    const json j = io::dump_convergence(report);
    CHECK(j.at("fitted_rate").is_null());

    const std::string csv = io::convergence_csv(report);
    CHECK(csv.find("k,") == 0);
    CHECK(csv.find("char_matrix_gap") != std::string::npos);
}

TEST_CASE("trajectory CSV has a time column and labeled components") {
    const Interval iv(0.0, 1.0);
    const CoefficientTrajectory y(
        CoefficientFunction::polynomial({Matrix::Zero(1, 1), Matrix::Identity(1, 1)}, 0.0),
        iv);
    const std::string csv = io::trajectory_csv({&y}, {"y"}, iv, 3);
    std::istringstream lines(csv);
    std::string header, first, mid, last, extra;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, first));
    REQUIRE(std::getline(lines, mid));
    REQUIRE(std::getline(lines, last));
    CHECK_FALSE(std::getline(lines, extra));
    CHECK(header.rfind("t,", 0) == 0);
    CHECK(header.find("Re_y_1") != std::string::npos);
    CHECK(first.rfind("0,", 0) == 0);
    CHECK(mid.rfind("0.5,", 0) == 0);
}
