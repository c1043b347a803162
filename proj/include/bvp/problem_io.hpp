#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "bvp/limits.hpp"
#include "bvp/solver.hpp"

namespace bvp::io {

struct Tolerances {
    double integrator = 1e-10;
    double quadrature = 1e-10;
    double rank = 1e-10;
    double consistency = 1e-7;

    SolverOptions solver_options() const {
        SolverOptions opts;
        opts.integrator = IntegratorOptions::from_tol(integrator);
        opts.quad_tol = quadrature;
        opts.rank_tol = rank;
        opts.consistency_tol = consistency;
        return opts;
    }
};

/// The perturbation-family block of a problem file: each member k shifts
/// coefficient j by scale(k)·coefficient_deltas[j] and point-term alphas by
/// scale(k)·delta, where scale is k^(-power) or an explicit per-k list.
struct PerturbationSpec {
    std::vector<int> k_values;
    bool inverse_power = true;
    double power = 1.0;
    std::vector<double> explicit_scales;  // aligned with k_values when used
    std::vector<std::optional<Matrix>> coefficient_deltas;
    std::vector<std::pair<std::size_t, Matrix>> boundary_alpha_deltas;  // (term index, delta)
    bool expect_converge = true;

    double scale_for(std::size_t position, int k) const;
};

/// A fully parsed problem file.
struct Problem {
    std::shared_ptr<const DifferentialSystem> system;
    BoundaryOperator boundary;
    double p = 2.0;  // Sobolev exponent; infinity allowed
    std::optional<CoefficientFunction> f;
    std::optional<Vector> c;
    std::optional<PerturbationSpec> perturbation;
    Tolerances tolerances;
};

// Element codecs.  Complex numbers are [re, im] pairs (a bare number is
// accepted on input as a real); matrices are row-major nested arrays.
Complex parse_complex(const nlohmann::json& j);
nlohmann::json dump_complex(const Complex& z);
Matrix parse_matrix(const nlohmann::json& j);
nlohmann::json dump_matrix(const Matrix& m);
Vector parse_vector(const nlohmann::json& j);
nlohmann::json dump_vector(const Vector& v);

CoefficientFunction parse_coefficient(const nlohmann::json& j, Eigen::Index rows,
                                      Eigen::Index cols, double interval_base);
nlohmann::json dump_coefficient(const CoefficientFunction& fn);

BoundaryTerm parse_boundary_term(const nlohmann::json& j, Eigen::Index l, Eigen::Index m,
                                 const Interval& interval);

/// Parses and fully cross-validates a problem file; throws SchemaError on
/// malformed input (the CLI maps that to its schema exit code).
/// `defaults` seeds the tolerances; explicit file values override it.
Problem parse_problem(const nlohmann::json& j, const Tolerances& defaults = Tolerances{});
Problem load_problem(const std::string& path, const Tolerances& defaults = Tolerances{});
nlohmann::json serialize_problem(const Problem& problem);

/// Builds the runnable perturbation family from a parsed problem.
PerturbationSequence build_sequence(const Problem& problem);

// Report serialization (stable key order via sorted JSON objects).
nlohmann::json dump_report(const FredholmReport& report);
nlohmann::json dump_characteristic(const CharacteristicMatrix& M);
nlohmann::json dump_convergence(const ConvergenceReport& report);
std::string convergence_csv(const ConvergenceReport& report);

/// CSV of trajectories on a uniform grid: t, then Re/Im of every component
/// of every listed trajectory (columns named in the header).
std::string trajectory_csv(const std::vector<const Trajectory*>& trajectories,
                           const std::vector<std::string>& names, const Interval& interval,
                           int samples);

}  // namespace bvp::io
