#include "bvp/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace bvp::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) {
    throw SchemaError("problem file: " + message);
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

double as_number(const json& j, const char* what) {
    if (!j.is_number()) fail(std::string(what) + " must be a number");
    return j.get<double>();
}

int as_int(const json& j, const char* what) {
    if (!j.is_number_integer()) fail(std::string(what) + " must be an integer");
    return j.get<int>();
}

double parse_exponent(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        fail("p must be a number >= 1 or \"inf\"");
    }
    const double p = as_number(j, "p");
    if (!(p >= 1.0)) fail("p must satisfy p >= 1");
    return p;
}

}  // namespace

double PerturbationSpec::scale_for(std::size_t position, int k) const {
    if (inverse_power) {
        if (k <= 0) fail("k values must be positive for the inverse-power scale");
        return std::pow(static_cast<double>(k), -power);
    }
    if (position >= explicit_scales.size()) fail("explicit scale list shorter than k list");
    return explicit_scales[position];
}

Complex parse_complex(const json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    fail("complex entries must be numbers or [re, im] pairs");
}

json dump_complex(const Complex& z) { return json::array({z.real(), z.imag()}); }

Matrix parse_matrix(const json& j) {
    if (!j.is_array() || j.empty()) fail("matrix must be a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) fail("matrix rows must be non-empty arrays");
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) fail("matrix rows must have equal length");
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                parse_complex(j[i][k]);
    }
    return m;
}

json dump_matrix(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(dump_complex(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Vector parse_vector(const json& j) {
    if (!j.is_array()) fail("vector must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = parse_complex(j[i]);
    return v;
}

json dump_vector(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(dump_complex(v(i)));
    return out;
}

CoefficientFunction parse_coefficient(const json& j, Eigen::Index rows, Eigen::Index cols,
                                      double interval_base) {
    const std::string kind = require(j, "kind").get<std::string>();
    try {
        if (kind == "constant") {
            Matrix value = parse_matrix(require(j, "value"));
            if (value.rows() != rows || value.cols() != cols)
                fail("constant coefficient has the wrong shape");
            return CoefficientFunction::constant(std::move(value));
        }
        if (kind == "polynomial") {
            const json& coeffs = require(j, "coefficients");
            if (!coeffs.is_array() || coeffs.empty())
                fail("polynomial needs a non-empty coefficient list");
            std::vector<Matrix> mats;
            for (const json& c : coeffs) {
                mats.push_back(parse_matrix(c));
                if (mats.back().rows() != rows || mats.back().cols() != cols)
                    fail("polynomial coefficient has the wrong shape");
            }
            const double base =
                j.contains("base") ? as_number(j.at("base"), "base") : interval_base;
            return CoefficientFunction::polynomial(std::move(mats), base);
        }
        if (kind == "sampled") {
            const json& pts = require(j, "points");
            const json& vals = require(j, "values");
            if (!pts.is_array() || !vals.is_array() || pts.size() != vals.size())
                fail("sampled coefficient needs matching points/values arrays");
            std::vector<double> points;
            std::vector<Matrix> values;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                points.push_back(as_number(pts[i], "sample point"));
                values.push_back(parse_matrix(vals[i]));
                if (values.back().rows() != rows || values.back().cols() != cols)
                    fail("sampled value has the wrong shape");
            }
            const int order = as_int(require(j, "order"), "order");
            return CoefficientFunction::sampled(std::move(points), std::move(values), order);
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const ValidationError& e) {
        fail(e.what());
    }
    fail("coefficient kind must be constant, polynomial, or sampled");
}

json dump_coefficient(const CoefficientFunction& fn) {
    json out;
    if (const auto* c = std::get_if<CoefficientFunction::Constant>(&fn.representation())) {
        out["kind"] = "constant";
        out["value"] = dump_matrix(c->value);
    } else if (const auto* p =
                   std::get_if<CoefficientFunction::Polynomial>(&fn.representation())) {
        out["kind"] = "polynomial";
        out["base"] = p->base;
        json coeffs = json::array();
        for (const Matrix& m : p->coefficients) coeffs.push_back(dump_matrix(m));
        out["coefficients"] = std::move(coeffs);
    } else {
        const auto& s = std::get<CoefficientFunction::Sampled>(fn.representation());
        out["kind"] = "sampled";
        out["points"] = s.points;
        json vals = json::array();
        for (const Matrix& m : s.values) vals.push_back(dump_matrix(m));
        out["values"] = std::move(vals);
        out["order"] = s.order;
    }
    return out;
}

BoundaryTerm parse_boundary_term(const json& j, Eigen::Index l, Eigen::Index m,
                                 const Interval& interval) {
    const std::string type = require(j, "type").get<std::string>();
    if (type == "point") {
        PointTerm term{as_number(require(j, "point"), "point"),
                       as_number(require(j, "order"), "order"),
                       parse_matrix(require(j, "alpha"))};
        if (term.alpha.rows() != l || term.alpha.cols() != m)
            fail("point term alpha must be l x m");
        return term;
    }
    if (type == "integral") {
        return IntegralTerm{
            parse_coefficient(require(j, "kernel"), l, m, interval.a),
            as_int(require(j, "derivative_order"), "derivative_order")};
    }
    fail("boundary term type must be point or integral");
}

namespace {

json dump_term(const BoundaryTerm& term) {
    json out;
    if (const auto* pt = std::get_if<PointTerm>(&term)) {
        out["type"] = "point";
        out["point"] = pt->point;
        out["order"] = pt->order;
        out["alpha"] = dump_matrix(pt->alpha);
    } else {
        const auto& it = std::get<IntegralTerm>(term);
        out["type"] = "integral";
        out["derivative_order"] = it.derivative_order;
        out["kernel"] = dump_coefficient(it.kernel);
    }
    return out;
}

PerturbationSpec parse_perturbation(const json& j, int r, std::size_t n_terms) {
    PerturbationSpec spec;
    const json& ks = require(j, "k_values");
    if (!ks.is_array() || ks.empty()) fail("perturbation needs a non-empty k_values list");
    for (const json& k : ks) spec.k_values.push_back(as_int(k, "k value"));

    if (j.contains("scale")) {
        const json& sc = j.at("scale");
        const std::string type = require(sc, "type").get<std::string>();
        if (type == "inverse_power") {
            spec.inverse_power = true;
            spec.power = sc.contains("power") ? as_number(sc.at("power"), "power") : 1.0;
        } else if (type == "explicit") {
            spec.inverse_power = false;
            const json& vals = require(sc, "values");
            if (!vals.is_array() || vals.size() != spec.k_values.size())
                fail("explicit scale values must align with k_values");
            for (const json& v : vals)
                spec.explicit_scales.push_back(as_number(v, "scale value"));
        } else {
            fail("scale type must be inverse_power or explicit");
        }
    }

    if (j.contains("coefficient_deltas")) {
        const json& deltas = j.at("coefficient_deltas");
        if (!deltas.is_array() || deltas.size() != static_cast<std::size_t>(r))
            fail("coefficient_deltas must list one entry (or null) per coefficient");
        for (const json& d : deltas) {
            if (d.is_null())
                spec.coefficient_deltas.emplace_back(std::nullopt);
            else
                spec.coefficient_deltas.emplace_back(parse_matrix(d));
        }
    }
    if (j.contains("boundary_alpha_deltas")) {
        for (const json& d : j.at("boundary_alpha_deltas")) {
            const int idx = as_int(require(d, "term"), "term index");
            if (idx < 0 || static_cast<std::size_t>(idx) >= n_terms)
                fail("boundary_alpha_deltas term index out of range");
            spec.boundary_alpha_deltas.emplace_back(static_cast<std::size_t>(idx),
                                                    parse_matrix(require(d, "delta")));
        }
    }
    if (j.contains("expect_converge")) {
        if (!j.at("expect_converge").is_boolean()) fail("expect_converge must be a boolean");
        spec.expect_converge = j.at("expect_converge").get<bool>();
    }
    if (spec.coefficient_deltas.empty() && spec.boundary_alpha_deltas.empty())
        fail("perturbation block perturbs nothing");
    return spec;
}

json dump_perturbation(const PerturbationSpec& spec) {
    json out;
    out["k_values"] = spec.k_values;
    if (spec.inverse_power)
        out["scale"] = json{{"type", "inverse_power"}, {"power", spec.power}};
    else
        out["scale"] = json{{"type", "explicit"}, {"values", spec.explicit_scales}};
    if (!spec.coefficient_deltas.empty()) {
        json deltas = json::array();
        for (const auto& d : spec.coefficient_deltas)
            deltas.push_back(d ? dump_matrix(*d) : json());
        out["coefficient_deltas"] = std::move(deltas);
    }
    if (!spec.boundary_alpha_deltas.empty()) {
        json deltas = json::array();
        for (const auto& [idx, delta] : spec.boundary_alpha_deltas)
            deltas.push_back(json{{"term", idx}, {"delta", dump_matrix(delta)}});
        out["boundary_alpha_deltas"] = std::move(deltas);
    }
    out["expect_converge"] = spec.expect_converge;
    return out;
}

}  // namespace

Problem parse_problem(const json& j, const Tolerances& defaults) {
    if (!j.is_object()) fail("root must be an object");
    const int version = j.contains("version") ? as_int(j.at("version"), "version") : 1;
    if (version != 1) fail("unsupported file version");

    const json& iv = require(j, "interval");
    if (!iv.is_array() || iv.size() != 2) fail("interval must be [a, b]");
    Interval interval;
    try {
        interval = Interval(as_number(iv[0], "interval endpoint"),
                            as_number(iv[1], "interval endpoint"));
    } catch (const ValidationError& e) {
        fail(e.what());
    }

    const int m = as_int(require(j, "m"), "m");
    const int r = as_int(require(j, "r"), "r");
    const int n = as_int(require(j, "n"), "n");

    const json& coeffs = require(j, "coefficients");
    if (!coeffs.is_array() || coeffs.size() != static_cast<std::size_t>(std::max(r, 0)))
        fail("coefficients must list exactly r entries (A_0 ... A_{r-1})");
    std::vector<CoefficientFunction> coefficient_list;
    for (const json& c : coeffs)
        coefficient_list.push_back(parse_coefficient(c, m, m, interval.a));

    std::shared_ptr<const DifferentialSystem> system;
    try {
        system = std::make_shared<const DifferentialSystem>(interval, m, r, n,
                                                            std::move(coefficient_list));
    } catch (const ValidationError& e) {
        fail(e.what());
    }

    const json& bj = require(j, "boundary");
    const Eigen::Index l = as_int(require(bj, "l"), "l");
    const json& terms_json = require(bj, "terms");
    if (!terms_json.is_array()) fail("boundary terms must be an array");
    std::vector<BoundaryTerm> terms;
    for (const json& t : terms_json) terms.push_back(parse_boundary_term(t, l, m, interval));

    std::optional<BoundaryOperator> boundary;
    try {
        boundary.emplace(interval, SystemSignature{m, r, n}, l, std::move(terms));
    } catch (const ValidationError& e) {
        fail(e.what());
    }

    Problem problem{system, std::move(*boundary), 2.0, std::nullopt, std::nullopt,
                    std::nullopt, defaults};
    if (j.contains("p")) problem.p = parse_exponent(j.at("p"));
    if (j.contains("f"))
        problem.f = parse_coefficient(j.at("f"), m, 1, interval.a);
    if (j.contains("c")) {
        problem.c = parse_vector(j.at("c"));
        if (problem.c->size() != l) fail("c must have l entries");
    }
    if (j.contains("perturbation"))
        problem.perturbation =
            parse_perturbation(j.at("perturbation"), r, problem.boundary.terms().size());
    if (j.contains("tolerances")) {
        const json& tj = j.at("tolerances");
        Tolerances& tol = problem.tolerances;
        if (tj.contains("integrator"))
            tol.integrator = as_number(tj.at("integrator"), "integrator tolerance");
        if (tj.contains("quadrature"))
            tol.quadrature = as_number(tj.at("quadrature"), "quadrature tolerance");
        if (tj.contains("rank")) tol.rank = as_number(tj.at("rank"), "rank tolerance");
        if (tj.contains("consistency"))
            tol.consistency = as_number(tj.at("consistency"), "consistency tolerance");
        for (double v : {tol.integrator, tol.quadrature, tol.rank, tol.consistency})
            if (!(v > 0.0)) fail("tolerances must be positive");
    }
    return problem;
}

Problem load_problem(const std::string& path, const Tolerances& defaults) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open problem file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return parse_problem(j, defaults);
}

json serialize_problem(const Problem& problem) {
    const DifferentialSystem& sys = *problem.system;
    json out;
    out["version"] = 1;
    out["interval"] = json::array({sys.interval.a, sys.interval.b});
    out["m"] = sys.m;
    out["r"] = sys.r;
    out["n"] = sys.n;
    if (std::isinf(problem.p))
        out["p"] = "inf";
    else
        out["p"] = problem.p;
    json coeffs = json::array();
    for (const CoefficientFunction& c : sys.coefficients)
        coeffs.push_back(dump_coefficient(c));
    out["coefficients"] = std::move(coeffs);
    json terms = json::array();
    for (const BoundaryTerm& t : problem.boundary.terms()) terms.push_back(dump_term(t));
    out["boundary"] = json{{"l", problem.boundary.l()}, {"terms", std::move(terms)}};
    if (problem.f) out["f"] = dump_coefficient(*problem.f);
    if (problem.c) out["c"] = dump_vector(*problem.c);
    if (problem.perturbation) out["perturbation"] = dump_perturbation(*problem.perturbation);
    out["tolerances"] = json{{"integrator", problem.tolerances.integrator},
                             {"quadrature", problem.tolerances.quadrature},
                             {"rank", problem.tolerances.rank},
                             {"consistency", problem.tolerances.consistency}};
    return out;
}

PerturbationSequence build_sequence(const Problem& problem) {
    if (!problem.perturbation)
        throw ValidationError("problem file has no perturbation block");
    const PerturbationSpec spec = *problem.perturbation;
    auto base_system = problem.system;
    const BoundaryOperator base_operator = problem.boundary;

    PerturbationSequence seq{base_system, base_operator, {}, spec.k_values};
    // Position of k within k_values, needed for explicit per-k scales.
    std::vector<int> k_values = spec.k_values;
    seq.member = [spec, base_system, base_operator, k_values](int k) {
        std::size_t position = 0;
        for (std::size_t i = 0; i < k_values.size(); ++i)
            if (k_values[i] == k) position = i;
        const double s = spec.scale_for(position, k);

        std::vector<CoefficientFunction> coeffs = base_system->coefficients;
        for (std::size_t jj = 0; jj < spec.coefficient_deltas.size() && jj < coeffs.size();
             ++jj)
            if (spec.coefficient_deltas[jj])
                coeffs[jj] = coeffs[jj].shifted_by(s * (*spec.coefficient_deltas[jj]));
        auto system_k = std::make_shared<const DifferentialSystem>(
            base_system->interval, base_system->m, base_system->r, base_system->n,
            std::move(coeffs));

        std::vector<BoundaryTerm> terms = base_operator.terms();
        for (const auto& [idx, delta] : spec.boundary_alpha_deltas) {
            if (auto* pt = std::get_if<PointTerm>(&terms[idx]))
                pt->alpha += s * delta;
            else
                throw ValidationError("boundary_alpha_deltas must target point terms");
        }
        BoundaryOperator operator_k(base_operator.interval(), base_operator.signature(),
                                    base_operator.l(), std::move(terms));
        return std::make_pair(
            std::static_pointer_cast<const DifferentialSystem>(system_k), operator_k);
    };
    return seq;
}

json dump_report(const FredholmReport& report) {
    return json{{"index", report.index},
                {"rank", report.rank},
                {"dim_ker", report.dim_ker},
                {"dim_coker", report.dim_coker},
                {"singular_values", report.singular_values},
                {"rank_tol", report.rank_tol},
                {"invertible", report.invertible}};
}

json dump_characteristic(const CharacteristicMatrix& M) {
    return json{{"rows", M.rows()},
                {"cols", M.cols()},
                {"m", M.provenance().m},
                {"r", M.provenance().r},
                {"l", M.provenance().l},
                {"integrator_tol", M.provenance().integrator_tol},
                {"quad_tol", M.provenance().quad_tol},
                {"data", dump_matrix(M.data())}};
}

json dump_convergence(const ConvergenceReport& report) {
    json rows = json::array();
    for (const ConvergenceRow& row : report.rows) {
        rows.push_back(json{{"k", row.k},
                            {"coeff_norm_gaps", row.coeff_norm_gaps},
                            {"fundsol_gaps", row.fundsol_gaps},
                            {"char_matrix_gap", row.char_matrix_gap},
                            {"rank", row.rank_k},
                            {"dim_ker", row.dim_ker_k},
                            {"dim_coker", row.dim_coker_k},
                            {"index", row.index_k}});
    }
    json out{{"rows", std::move(rows)},
             {"rank_base", report.rank_base},
             {"dim_ker_base", report.dim_ker_base},
             {"dim_coker_base", report.dim_coker_base},
             {"base_singular_values", report.base_singular_values},
             {"convergence_tol", report.convergence_tol},
             {"matrices_converge", report.matrices_converge},
             {"semicontinuity_holds", report.semicontinuity_holds}};
    if (std::isnan(report.fitted_rate))
        out["fitted_rate"] = nullptr;
    else
        out["fitted_rate"] = report.fitted_rate;
    return out;
}

std::string convergence_csv(const ConvergenceReport& report) {
    std::ostringstream out;
    out.precision(16);
    const std::size_t n_coeff =
        report.rows.empty() ? 0 : report.rows.front().coeff_norm_gaps.size();
    const std::size_t n_sol = report.rows.empty() ? 0 : report.rows.front().fundsol_gaps.size();
    out << "k";
    for (std::size_t j = 0; j < n_coeff; ++j) out << ",coeff_gap_" << j;
    for (std::size_t i = 0; i < n_sol; ++i) out << ",fundsol_gap_" << (i + 1);
    out << ",char_matrix_gap,rank,dim_ker,dim_coker,index\n";
    for (const ConvergenceRow& row : report.rows) {
        out << row.k;
        for (double g : row.coeff_norm_gaps) out << "," << g;
        for (double g : row.fundsol_gaps) out << "," << g;
        out << "," << row.char_matrix_gap << "," << row.rank_k << "," << row.dim_ker_k << ","
            << row.dim_coker_k << "," << row.index_k << "\n";
    }
    return out.str();
}

std::string trajectory_csv(const std::vector<const Trajectory*>& trajectories,
                           const std::vector<std::string>& names, const Interval& interval,
                           int samples) {
    if (trajectories.size() != names.size())
        throw ValidationError("trajectory CSV needs one name per trajectory");
    if (samples < 2) throw ValidationError("trajectory CSV needs at least 2 samples");
    std::ostringstream out;
    out.precision(16);
    out << "t";
    for (std::size_t idx = 0; idx < trajectories.size(); ++idx)
        for (Eigen::Index i = 0; i < trajectories[idx]->rows(); ++i)
            out << ",Re_" << names[idx] << "_" << (i + 1) << ",Im_" << names[idx] << "_"
                << (i + 1);
    out << "\n";
    for (int s = 0; s < samples; ++s) {
        const double t = interval.a + (interval.b - interval.a) * s / (samples - 1);
        out << t;
        for (const Trajectory* traj : trajectories) {
            const Matrix v = traj->value(t);
            for (Eigen::Index i = 0; i < v.rows(); ++i)
                out << "," << v(i, 0).real() << "," << v(i, 0).imag();
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace bvp::io
