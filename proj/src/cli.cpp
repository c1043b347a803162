#include "bvp/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "bvp/limits.hpp"
#include "bvp/matfun.hpp"
#include "bvp/problem_io.hpp"
#include "bvp/quadrature.hpp"
#include "bvp/solver.hpp"

namespace bvp::cli {

namespace {

using nlohmann::json;

constexpr double kVerifyTol = 1e-6;

[[noreturn]] void schema_fail(const std::string& message) {
    throw SchemaError("params file: " + message);
}

const json& jreq(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        schema_fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

io::Tolerances profile_defaults(std::ostream& err) {
    io::Tolerances tol;
    const char* profile = std::getenv("BVP_TOLERANCE_PROFILE");
    if (profile == nullptr || std::string(profile) == "default") return tol;
    const std::string name(profile);
    if (name == "strict") {
        tol.integrator = 1e-12;
        tol.quadrature = 1e-12;
        tol.rank = 1e-12;
        tol.consistency = 1e-9;
    } else if (name == "fast") {
        tol.integrator = 1e-8;
        tol.quadrature = 1e-8;
        tol.rank = 1e-8;
        tol.consistency = 1e-5;
    } else {
        err << "warning: unknown BVP_TOLERANCE_PROFILE '" << name
            << "', using defaults\n";
    }
    return tol;
}

struct ToleranceFlags {
    std::optional<double> integrator;
    std::optional<double> quadrature;
    std::optional<double> rank;
    std::optional<double> consistency;

    void apply(io::Tolerances& tol) const {
        if (integrator) tol.integrator = *integrator;
        if (quadrature) tol.quadrature = *quadrature;
        if (rank) tol.rank = *rank;
        if (consistency) tol.consistency = *consistency;
    }
};

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write JSON report to " + path);
    out << j.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write output file " + path);
    out << text;
}

std::string yes_no(bool v) { return v ? "yes" : "no"; }

void print_report(std::ostream& out, const FredholmReport& report, Eigen::Index l,
                  Eigen::Index rm) {
    out << "index (rm - l):            " << report.index << "\n";
    out << "rank:                      " << report.rank << " of min(l, rm) = "
        << std::min(l, rm) << "\n";
    out << "dim ker:                   " << report.dim_ker << "\n";
    out << "dim coker:                 " << report.dim_coker << "\n";
    out << "invertible:                " << yes_no(report.invertible) << "\n";
    out << "singular values:          ";
    for (double s : report.singular_values) out << " " << s;
    out << "\n";
    out << "solvable for every right-hand side:           "
        << yes_no(report.dim_coker == 0) << "\n";
    out << "homogeneous problem has only trivial solution: "
        << yes_no(report.dim_ker == 0) << "\n";
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const std::string& path, const io::Tolerances& defaults,
                const ToleranceFlags& flags, const std::string& json_path,
                std::ostream& out) {
    io::Problem problem = io::load_problem(path, defaults);
    flags.apply(problem.tolerances);
    const SolverOptions opts = problem.tolerances.solver_options();

    FundamentalSystem fundamentals(problem.system, opts.integrator);
    const CharacteristicMatrix M =
        characteristic_matrix(fundamentals, problem.boundary, opts.quad_tol);
    const FredholmReport report = fredholm_report(M, opts.rank_tol);

    const DifferentialSystem& sys = *problem.system;
    out << "problem: m=" << sys.m << " r=" << sys.r << " n=" << sys.n
        << " l=" << problem.boundary.l() << " interval=[" << sys.interval.a << ", "
        << sys.interval.b << "]\n";
    print_report(out, report, M.rows(), M.cols());

    if (!json_path.empty()) {
        write_json(json_path, json{{"problem", io::serialize_problem(problem)},
                                   {"characteristic_matrix", io::dump_characteristic(M)},
                                   {"report", io::dump_report(report)}});
        out << "JSON report written to " << json_path << "\n";
    }
    return kExitOk;
}

// ------------------------------------------------------------------ solve

int cmd_solve(const std::string& path, const io::Tolerances& defaults,
              const ToleranceFlags& flags, const std::string& json_path,
              const std::string& csv_path, int samples, std::ostream& out) {
    io::Problem problem = io::load_problem(path, defaults);
    flags.apply(problem.tolerances);
    if (!problem.f || !problem.c)
        throw SchemaError("solve needs both f and c in the problem file");
    const SolverOptions opts = problem.tolerances.solver_options();

    BvpSolver solver(problem.system, problem.boundary, opts);
    const BvpSolution solution = solver.solve(*problem.f, *problem.c);

    json report{{"report", io::dump_report(solver.report())},
                {"residual", solution.residual}};

    if (solution.status == SolutionStatus::Inconsistent) {
        out << "status: Inconsistent\n";
        out << "least-squares residual: " << solution.residual
            << " (no solution exists)\n";
        report["status"] = "Inconsistent";
        if (!json_path.empty()) write_json(json_path, report);
        return kExitInconsistent;
    }

    const BvpTrajectory& y = *solution.particular;
    const double ode_residual = max_ode_residual(y);
    const Vector boundary_value =
        apply_to_function(problem.boundary, y, opts.quad_tol).col(0);
    const double boundary_residual = (boundary_value - *problem.c).norm();

    if (solution.status == SolutionStatus::Unique) {
        out << "status: Unique\n";
        report["status"] = "Unique";
    } else {
        out << "status: Family (kernel dimension " << solution.dim_ker << ")\n";
        report["status"] = "Family";
        report["dim_ker"] = solution.dim_ker;
    }
    out << "least-squares residual:    " << solution.residual << "\n";
    out << "ODE residual (sup grid):   " << ode_residual << "\n";
    out << "boundary residual |By-c|:  " << boundary_residual << "\n";
    report["ode_residual"] = ode_residual;
    report["boundary_residual"] = boundary_residual;
    report["q_particular"] = io::dump_vector(solution.q_particular);

    if (!csv_path.empty()) {
        std::vector<const Trajectory*> trajectories{&y};
        std::vector<std::string> names{"y"};
        for (std::size_t i = 0; i < solution.kernel_basis.size(); ++i) {
            trajectories.push_back(&solution.kernel_basis[i]);
            names.push_back("ker" + std::to_string(i + 1));
        }
        write_text(csv_path, io::trajectory_csv(trajectories, names,
                                                solver.system().interval, samples));
        out << "trajectories written to " << csv_path << "\n";
    }
    if (!json_path.empty()) write_json(json_path, report);
    return kExitOk;
}

// ----------------------------------------------------------------- verify

struct ExampleBuild {
    std::shared_ptr<const DifferentialSystem> system;
    std::optional<BoundaryOperator> boundary;
    matfun::ExampleParams oracle;
};

Interval parse_interval_field(const json& j) {
    if (!j.contains("interval")) return Interval(0.0, 1.0);
    const json& iv = j.at("interval");
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
        schema_fail("interval must be [a, b]");
    return Interval(iv[0].get<double>(), iv[1].get<double>());
}

std::vector<Matrix> parse_matrix_list(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) schema_fail(std::string(what) + " must be a non-empty list");
    std::vector<Matrix> out;
    for (const json& e : j) out.push_back(io::parse_matrix(e));
    return out;
}

int file_n_or(const json& j, int fallback) {
    if (!j.contains("n")) return fallback;
    if (!j.at("n").is_number_integer()) schema_fail("n must be an integer");
    return j.at("n").get<int>();
}

// Point-evaluation conditions at both endpoints with matrices by order:
// sum_k alpha_k y^(k)(a) + beta_k y^(k)(b).
std::vector<BoundaryTerm> endpoint_terms(const Interval& iv, const std::vector<Matrix>& alpha,
                                         const std::vector<Matrix>& beta) {
    std::vector<BoundaryTerm> terms;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        terms.push_back(PointTerm{iv.a, static_cast<double>(k), alpha[k]});
    for (std::size_t k = 0; k < beta.size(); ++k)
        terms.push_back(PointTerm{iv.b, static_cast<double>(k), beta[k]});
    return terms;
}

ExampleBuild build_example(int example_id, const json& j, double quad_tol) {
    ExampleBuild build;
    build.oracle.interval = parse_interval_field(j);
    const Interval iv = build.oracle.interval;

    if (example_id == 1 || example_id == 3 || example_id == 4) {
        build.oracle.A = io::parse_matrix(jreq(j, "A"));
        if (build.oracle.A.rows() != build.oracle.A.cols())
            schema_fail("A must be square");
        build.oracle.alpha = parse_matrix_list(jreq(j, "alpha"), "alpha");
        if (j.contains("beta"))
            build.oracle.beta = parse_matrix_list(j.at("beta"), "beta");
        const Eigen::Index m = build.oracle.A.rows();
        const Eigen::Index l = build.oracle.alpha.front().rows();
        const int K = static_cast<int>(build.oracle.alpha.size());

        if (example_id == 1) {
            if (!build.oracle.beta.empty())
                schema_fail("example 1 is one-point; beta is not allowed");
            const int n = file_n_or(j, std::max(0, K - 2));
            build.system = std::make_shared<const DifferentialSystem>(
                iv, static_cast<int>(m), 1, n,
                std::vector<CoefficientFunction>{
                    CoefficientFunction::constant(build.oracle.A)});
            build.boundary.emplace(iv, SystemSignature{m, 1, n}, l,
                                   endpoint_terms(iv, build.oracle.alpha, {}));
        } else {
            const int n = file_n_or(j, std::max(0, K - 3));
            const Matrix zero = Matrix::Zero(m, m);
            // Example 3: y'' + A y' (A multiplies y'); example 4: y'' + A y.
            std::vector<CoefficientFunction> coeffs =
                example_id == 3
                    ? std::vector<CoefficientFunction>{CoefficientFunction::constant(zero),
                                                       CoefficientFunction::constant(
                                                           build.oracle.A)}
                    : std::vector<CoefficientFunction>{
                          CoefficientFunction::constant(build.oracle.A),
                          CoefficientFunction::constant(zero)};
            build.system = std::make_shared<const DifferentialSystem>(
                iv, static_cast<int>(m), 2, n, std::move(coeffs));
            build.boundary.emplace(iv, SystemSignature{m, 2, n}, l,
                                   endpoint_terms(iv, build.oracle.alpha,
                                                  build.oracle.beta));
        }
        return build;
    }

    if (example_id == 2) {
        const json& terms_json = jreq(j, "fractional_terms");
        if (!terms_json.is_array() || terms_json.empty())
            schema_fail("example 2 needs fractional_terms");
        int max_ceil = 0;
        for (const json& t : terms_json) {
            matfun::FractionalTerm term;
            term.point = jreq(t, "point").get<double>();
            term.order = jreq(t, "order").get<double>();
            term.alpha = io::parse_matrix(jreq(t, "alpha"));
            max_ceil = std::max(max_ceil, static_cast<int>(std::ceil(term.order - 1e-12)));
            build.oracle.fractional_terms.push_back(std::move(term));
        }
        const Eigen::Index l = build.oracle.fractional_terms.front().alpha.rows();
        const Eigen::Index m = build.oracle.fractional_terms.front().alpha.cols();
        const int n = file_n_or(j, std::max(0, max_ceil - 1));
        build.system = std::make_shared<const DifferentialSystem>(
            iv, static_cast<int>(m), 1, n,
            std::vector<CoefficientFunction>{
                CoefficientFunction::constant(Matrix::Zero(m, m))});
        std::vector<BoundaryTerm> terms;
        for (const auto& t : build.oracle.fractional_terms)
            terms.push_back(PointTerm{t.point, t.order, t.alpha});
        build.boundary.emplace(iv, SystemSignature{m, 1, n}, l, std::move(terms));
        return build;
    }

    if (example_id == 5) {
        const int m = jreq(j, "m").get<int>();
        const Eigen::Index l = jreq(j, "l").get<int>();
        const json& terms_json = jreq(j, "terms");
        if (!terms_json.is_array() || terms_json.empty())
            schema_fail("example 5 needs boundary terms");
        std::vector<BoundaryTerm> terms;
        for (const json& t : terms_json)
            terms.push_back(io::parse_boundary_term(t, l, m, iv));
        int max_order = 0;
        for (const BoundaryTerm& t : terms) {
            if (const auto* pt = std::get_if<PointTerm>(&t))
                max_order = std::max(max_order,
                                     static_cast<int>(std::ceil(pt->order - 1e-12)));
            else
                max_order = std::max(max_order, std::get<IntegralTerm>(t).derivative_order);
        }
        const int n = file_n_or(j, std::max(0, max_order - 1));
        build.system = std::make_shared<const DifferentialSystem>(
            iv, m, 1, n,
            std::vector<CoefficientFunction>{
                CoefficientFunction::constant(Matrix::Zero(m, m))});
        build.boundary.emplace(iv, SystemSignature{m, 1, n}, l, terms);

        // The constant coefficient alpha_0 of the analytic representation:
        // order-0 point matrices plus integrals of order-0 kernels (higher
        // orders annihilate constant functions).
        Matrix alpha0 = Matrix::Zero(l, m);
        for (const BoundaryTerm& t : terms) {
            if (const auto* pt = std::get_if<PointTerm>(&t)) {
                if (std::abs(pt->order) < 1e-12) alpha0 += pt->alpha;
            } else {
                const auto& it = std::get<IntegralTerm>(t);
                if (it.derivative_order == 0)
                    alpha0 += quadrature::integrate(
                        [&](double t_) { return it.kernel.eval(t_); }, iv.a, iv.b, quad_tol);
            }
        }
        build.oracle.alpha = {std::move(alpha0)};
        return build;
    }

    schema_fail("example id must be in 1..5");
}

int cmd_verify(int example_id, const std::string& path, const io::Tolerances& defaults,
               const ToleranceFlags& flags, const std::string& json_path,
               std::ostream& out) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open params file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }

    io::Tolerances tol = defaults;
    flags.apply(tol);
    const ExampleBuild build = build_example(example_id, j, tol.quadrature);

    FundamentalSystem fundamentals(build.system,
                                   IntegratorOptions::from_tol(tol.integrator));
    const CharacteristicMatrix numeric =
        characteristic_matrix(fundamentals, *build.boundary, tol.quadrature);
    const Matrix oracle = matfun::oracle_characteristic_matrix(example_id, build.oracle);

    if (numeric.rows() != oracle.rows() || numeric.cols() != oracle.cols())
        throw ShapeMismatch("numeric and closed-form matrices differ in shape");

    const DifferentialSystem& sys = *build.system;
    out << "example " << example_id
        << ": integrated pipeline vs closed-form characteristic matrix\n";
    double overall = 0.0;
    for (int i = 1; i <= sys.r; ++i) {
        const double gap = (numeric.block_column(i) -
                            oracle.block(0, (i - 1) * sys.m, oracle.rows(), sys.m))
                               .cwiseAbs()
                               .maxCoeff();
        overall = std::max(overall, gap);
        out << "  block " << i << " max |difference| = " << gap << "\n";
    }
    const bool pass = overall <= kVerifyTol;
    out << "  overall max |difference| = " << overall << "  (tolerance " << kVerifyTol
        << ")\n";
    out << (pass ? "PASS" : "FAIL") << "\n";

    if (!json_path.empty())
        write_json(json_path, json{{"example", example_id},
                                   {"max_difference", overall},
                                   {"tolerance", kVerifyTol},
                                   {"pass", pass},
                                   {"numeric", io::dump_matrix(numeric.data())},
                                   {"closed_form", io::dump_matrix(oracle)}});
    return pass ? kExitOk : kExitVerifyFailed;
}

// ----------------------------------------------------------------- limits

int cmd_limits(const std::string& path, const io::Tolerances& defaults,
               const ToleranceFlags& flags, double converge_tol,
               const std::string& json_path, const std::string& csv_path,
               std::ostream& out) {
    io::Problem problem = io::load_problem(path, defaults);
    flags.apply(problem.tolerances);
    if (!problem.perturbation)
        throw SchemaError("limits needs a perturbation block in the problem file");
    const SolverOptions opts = problem.tolerances.solver_options();

    const PerturbationSequence seq = io::build_sequence(problem);
    const SobolevNorm norm{problem.system->n, problem.p, 257};
    const ConvergenceReport report = run_sequence(seq, norm, converge_tol, opts);

    out << std::left << std::setw(8) << "k" << std::setw(19) << "coeff_gap"
        << std::setw(19) << "fundsol_gap" << std::setw(19) << "matrix_gap"
        << std::setw(6) << "rank" << std::setw(5) << "ker" << "coker\n";
    for (const ConvergenceRow& row : report.rows) {
        double coeff_gap = 0.0, sol_gap = 0.0;
        for (double g : row.coeff_norm_gaps) coeff_gap = std::max(coeff_gap, g);
        for (double g : row.fundsol_gaps) sol_gap = std::max(sol_gap, g);
        out << std::left << std::setw(8) << row.k << std::setw(19) << coeff_gap
            << std::setw(19) << sol_gap << std::setw(19) << row.char_matrix_gap
            << std::setw(6) << row.rank_k << std::setw(5) << row.dim_ker_k
            << row.dim_coker_k << "\n";
    }
    out << "matrices converge:     " << yes_no(report.matrices_converge) << " (tolerance "
        << converge_tol << ")\n";
    out << "semicontinuity holds:  " << yes_no(report.semicontinuity_holds) << "\n";
    if (std::isnan(report.fitted_rate))
        out << "fitted rate:           n/a (needs >= 4 positive gaps)\n";
    else
        out << "fitted rate:           " << report.fitted_rate << "\n";

    if (!csv_path.empty()) {
        write_text(csv_path, io::convergence_csv(report));
        out << "CSV written to " << csv_path << "\n";
    }
    if (!json_path.empty()) write_json(json_path, io::dump_convergence(report));

    if (problem.perturbation->expect_converge && !report.matrices_converge)
        return kExitDiverged;
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solvability analysis of boundary-value problems for systems of "
                 "linear ordinary differential equations"};
    app.require_subcommand(1);
    app.fallthrough();

    ToleranceFlags flags;
    double tol_flag = 0.0, quad_flag = 0.0, rank_flag = 0.0, cons_flag = 0.0;
    auto* tol_opt = app.add_option("--tol", tol_flag, "integrator tolerance");
    auto* quad_opt = app.add_option("--quad-tol", quad_flag, "quadrature tolerance");
    auto* rank_opt = app.add_option("--rank-tol", rank_flag, "rank decision tolerance");
    auto* cons_opt =
        app.add_option("--consistency-tol", cons_flag, "solvability residual tolerance");

    std::string file, json_path, csv_path;
    int samples = 201;
    int example_id = 0;
    double converge_tol = 1e-6;

    auto* analyze = app.add_subcommand(
        "analyze", "characteristic matrix, index, Fredholm numbers, invertibility");
    analyze->add_option("file", file, "problem file (JSON)")->required();
    analyze->add_option("--json", json_path, "write the full JSON report here");

    auto* solve =
        app.add_subcommand("solve", "solve Ly = f, By = c and classify the solution set");
    solve->add_option("file", file, "problem file (JSON) with f and c")->required();
    solve->add_option("--json", json_path, "write the full JSON report here");
    solve->add_option("--csv", csv_path, "write solution/kernel trajectories here");
    solve->add_option("--samples", samples, "CSV sample count (default 201)");

    auto* verify = app.add_subcommand(
        "verify", "cross-check the integrated pipeline against a closed-form matrix");
    verify->add_option("example-id", example_id, "model problem id in 1..5")->required();
    verify->add_option("file", file, "params file (JSON)")->required();
    verify->add_option("--json", json_path, "write the comparison as JSON here");

    auto* limits = app.add_subcommand(
        "limits", "run a perturbation family and check convergence/semicontinuity");
    limits->add_option("file", file, "problem file (JSON) with a perturbation block")
        ->required();
    limits->add_option("--json", json_path, "write the JSON summary here");
    limits->add_option("--csv", csv_path, "write the per-k table as CSV here");
    limits->add_option("--converge-tol", converge_tol,
                       "matrix-gap threshold for the convergence verdict");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitSchema;
    }

    if (tol_opt->count() > 0) flags.integrator = tol_flag;
    if (quad_opt->count() > 0) flags.quadrature = quad_flag;
    if (rank_opt->count() > 0) flags.rank = rank_flag;
    if (cons_opt->count() > 0) flags.consistency = cons_flag;

    const io::Tolerances defaults = profile_defaults(err);
    out << std::setprecision(12);

    try {
        if (analyze->parsed())
            return cmd_analyze(file, defaults, flags, json_path, out);
        if (solve->parsed())
            return cmd_solve(file, defaults, flags, json_path, csv_path, samples, out);
        if (verify->parsed())
            return cmd_verify(example_id, file, defaults, flags, json_path, out);
        if (limits->parsed())
            return cmd_limits(file, defaults, flags, converge_tol, json_path, csv_path, out);
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const ValidationError& e) {
        err << "invalid problem: " << e.what() << "\n";
        return kExitSchema;
    } catch (const nlohmann::json::exception& e) {
        err << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    err << "no subcommand selected\n";
    return kExitSchema;
}

}  // namespace bvp::cli
