#pragma once

// Scenario evaluation for the harness: builds the model a configuration
// describes, evaluates every sweep point (optionally on a worker pool) and
// collects the rows into a ResultTable.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "config.hpp"

namespace zeno::harness {

using Cell = std::variant<double, std::string>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    ScenarioConfig config;  ///< resolved configuration echoed in the header
    bool any_invalid = false;  ///< some row carries validity diagnostics or a failed comparison
};

/// Column layouts of the two table kinds; `<param>` is the swept parameter.
inline std::vector<std::string> run_columns(const std::string& parameter) {
    return {parameter, "W", "est_error", "adiabaticity_ratio", "adiabatic", "method", "status", "diagnostics"};
}

inline std::vector<std::string> compare_columns(const std::string& parameter) {
    return {parameter, "W_perturbative", "W_exact", "abs_gap", "rel_gap", "adiabaticity_ratio", "adiabatic",
            "status"};
}

/// Evaluates `f(i)` for i in [0, count) on `jobs` threads. Results keep index
/// order; the exception of the lowest failing index is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, std::size_t jobs, F f) {
    std::vector<T> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                results[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

inline std::size_t default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// A configuration turned into the objects the library works with.
struct BuiltScenario {
    MeasurementModel model;
    DensityMatrix rho0;
    ZenoDecomposition levels_initial;
    ZenoDecomposition levels_final;
};

inline BuiltScenario build_scenario(const ScenarioConfig& c) {
    const NumericPolicy& policy = c.policy;
    auto basis_state = [&](Eigen::Index dim) {
        ComplexVector psi = ComplexVector::Zero(dim);
        psi(static_cast<Eigen::Index>(c.initial_state)) = 1.0;
        return DensityMatrix::pure(psi, policy);
    };
    switch (c.scenario) {
    case ScenarioKind::spinchain: {
        MeasurementModel model = models::chain_measurement_model(c.chain);
        auto initial = decompose(model.hmeas()(0.0, Side::right, policy), std::nullopt, policy);
        auto final_levels = decompose(model.hmeas()(c.chain.T, Side::left, policy), std::nullopt, policy);
        DensityMatrix rho = c.level_from == 0
                                ? models::ferromagnetic_state(c.chain.n_sites)
                                : DensityMatrix::maximally_mixed(initial.level(c.level_from).projector, policy);
        return {std::move(model), std::move(rho), std::move(initial), std::move(final_levels)};
    }
    case ScenarioKind::pulsed: {
        const HermitianOperator h0(c.h0, policy);
        const Projector pn(c.hmeas, policy);
        MeasurementModel model = models::pulsed_model(h0, pn, c.K, c.tau, c.tau_F.value_or(c.tau));
        auto levels = decompose(HermitianOperator(c.hmeas, policy), std::nullopt, policy);
        return {std::move(model), basis_state(c.h0.rows()), levels, levels};
    }
    case ScenarioKind::continuous:
    case ScenarioKind::custom: {
        const HermitianOperator h0(c.h0, policy);
        const HermitianOperator start(c.hmeas, policy);
        if (!c.hmeas_final) {
            MeasurementModel model = models::continuous_model(h0, start, c.K, c.tau);
            auto levels = decompose(start, std::nullopt, policy);
            return {std::move(model), basis_state(c.h0.rows()), levels, levels};
        }
        const HermitianOperator stop(*c.hmeas_final, policy);
        const ComplexMatrix a = start.matrix();
        const ComplexMatrix slope = (stop.matrix() - a) / c.tau;
        auto hmeas = TimeDependentOperator::smooth(
            c.tau, [a, slope](double t) { return ComplexMatrix(a + t * slope); }, [slope](double) { return slope; });
        MeasurementModel model(TimeDependentOperator::constant(h0, c.tau), std::move(hmeas), c.K, c.tau);
        return {std::move(model), basis_state(c.h0.rows()), decompose(start, std::nullopt, policy),
                decompose(stop, std::nullopt, policy)};
    }
    }
    throw ConfigError("unknown scenario");
}

struct PointResult {
    double value = 0.0;
    double est_error = 0.0;
    AdiabaticityReport adiabaticity;
    Method method = Method::closed_form;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline bool has_closed_form(const ScenarioConfig& c) {
    switch (c.scenario) {
    case ScenarioKind::pulsed:
    case ScenarioKind::continuous: return true;
    case ScenarioKind::custom: return !c.hmeas_final;
    case ScenarioKind::spinchain: return c.chain.n_sites == 2 && c.level_from == 0;
    }
    return false;
}

inline void require_levels(const ScenarioConfig& c, const BuiltScenario& b) {
    const std::size_t count = b.levels_initial.size();
    if (c.level_from >= count || c.level_to >= count)
        throw ConfigError("key '" + to_string(c.scenario) + ".level_to': the measurement has only " +
                          std::to_string(count) + " levels");
}

inline double closed_form_value(const ScenarioConfig& c, const BuiltScenario& b, double& est_error,
                                std::vector<std::string>& diagnostics) {
    const NumericPolicy& policy = c.policy;
    est_error = 0.0;
    if (c.scenario == ScenarioKind::spinchain) {
        if (c.level_to != 2) return 0.0;  // W12 + W13 vanish by parity
        const auto w = models::two_qubit_final(c.chain.h, c.chain.T, c.closed_form_tol);
        diagnostics.insert(diagnostics.end(), w.diagnostics.begin(), w.diagnostics.end());
        est_error = c.closed_form_tol * c.chain.T * c.chain.T;
        return c.chain.T * c.chain.T * w.w14;
    }
    const HermitianOperator h0(c.h0, policy);
    const auto& target = b.levels_initial.level(c.level_to);
    const double factor = trace_factor(h0, b.rho0, target.projector);
    if (c.scenario == ScenarioKind::pulsed) return pulsed_jump(factor, c.K, c.tau, c.tau_F.value_or(c.tau));
    const double gap = target.eigenvalue - b.levels_initial.level(c.level_from).eigenvalue;
    return continuous_jump(factor, c.K, gap, c.tau);
}

inline JumpResult quadrature_value(const ScenarioConfig& c, const BuiltScenario& b) {
    QuadraturePolicy quad;
    quad.tol = c.quad_tol;
    quad.max_doublings = c.max_doublings;
    std::size_t intervals = c.intervals;
    for (int attempt = 0;; ++attempt) {
        const AdiabaticFrame frame = b.model.frame(intervals, c.policy);
        try {
            return general_jump(b.model, b.rho0, c.level_from, c.level_to, frame, quad, c.policy);
        } catch (const InsufficientSampling& e) {
            if (attempt >= 2) throw;
            intervals = std::max(2 * intervals, 2 * ((e.required_nodes() * 5 / 4 + 1) / 2));
        }
    }
}

} // namespace detail

/// The perturbative jump probability at one configuration.
inline PointResult evaluate_point(const ScenarioConfig& c) {
    const BuiltScenario b = build_scenario(c);
    detail::require_levels(c, b);
    PointResult out;
    bool closed = detail::has_closed_form(c);
    if (c.method == Method::closed_form && !closed)
        throw ConfigError("key '" + to_string(c.scenario) + ".method': no closed form for this configuration");
    if (c.method == Method::quadrature) closed = false;
    if (closed) {
        out.method = Method::closed_form;
        out.value = detail::closed_form_value(c, b, out.est_error, out.diagnostics);
        out.adiabaticity = adiabaticity_report(b.model.hmeas(), b.model.coupling(), b.model.grid(c.intervals), c.policy);
        if (!out.adiabaticity.adiabatic) out.diagnostics.push_back("adiabaticity condition not satisfied");
        if (out.value > c.policy.perturbative_limit)
            out.diagnostics.push_back("perturbation theory unreliable: W = " + zeno::detail::format_double(out.value));
    } else {
        out.method = Method::quadrature;
        JumpResult r = detail::quadrature_value(c, b);
        out.value = r.value;
        out.est_error = r.est_error;
        out.adiabaticity = r.adiabaticity;
        out.diagnostics = std::move(r.diagnostics);
    }
    return out;
}

/// Exact transition probability into the final-time target level.
inline double evaluate_exact(const ScenarioConfig& c) {
    const BuiltScenario b = build_scenario(c);
    detail::require_levels(c, b);
    if (b.levels_final.size() != b.levels_initial.size())
        throw NumericalError("oracle_compare: level structure changes between t = 0 and t_final");
    return exact_jump(b.model, b.rho0, b.levels_final.level(c.level_to).projector.matrix(), c.exact_tol, c.policy);
}

inline std::vector<ScenarioConfig> sweep_points(const ScenarioConfig& c) {
    if (!c.sweep) return {c};
    std::vector<ScenarioConfig> out;
    for (double v : c.sweep->values()) out.push_back(c.with_parameter(c.sweep->parameter, v));
    return out;
}

namespace detail {

inline std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += "; ";
        out += p;
    }
    return out;
}

} // namespace detail

inline ResultTable run_scenario(const ScenarioConfig& config, std::size_t jobs = 1) {
    validate(config);
    const auto points = sweep_points(config);
    const std::string parameter = config.primary_parameter();
    auto results = parallel_map<PointResult>(points.size(), jobs, [&](std::size_t i) { return evaluate_point(points[i]); });
    ResultTable table;
    table.columns = run_columns(parameter);
    table.config = config;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const PointResult& r = results[i];
        const bool valid = r.diagnostics.empty();
        table.any_invalid = table.any_invalid || !valid;
        table.rows.push_back({points[i].parameter(parameter), r.value, r.est_error, r.adiabaticity.ratio,
                              std::string(r.adiabaticity.adiabatic ? "true" : "false"), to_string(r.method),
                              std::string(valid ? "ok" : "out_of_validity"), detail::join(r.diagnostics)});
    }
    return table;
}

/// Per sweep point: perturbative W, exact W from the full propagator, the
/// gaps, and pass / fail / out_of_validity against compare.rel_bound.
inline ResultTable oracle_compare(const ScenarioConfig& config, std::size_t jobs = 1) {
    validate(config);
    const auto points = sweep_points(config);
    for (const auto& p : points)
        if (build_scenario(p).model.dim() > 256) throw ConfigError("oracle_compare: dimension exceeds 256");
    const std::string parameter = config.primary_parameter();
    struct Pair {
        PointResult perturbative;
        double exact = 0.0;
    };
    auto results = parallel_map<Pair>(points.size(), jobs, [&](std::size_t i) {
        return Pair{evaluate_point(points[i]), evaluate_exact(points[i])};
    });
    ResultTable table;
    table.columns = compare_columns(parameter);
    table.config = config;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& [p, exact] = results[i];
        const double gap = std::abs(p.value - exact);
        const double rel = std::max(std::abs(p.value), std::abs(exact)) < config.abs_floor
                               ? 0.0
                               : gap / std::max(std::abs(exact), config.abs_floor);
        std::string status;
        if (!p.adiabaticity.adiabatic) status = "out_of_validity";
        else status = rel <= config.rel_bound ? "pass" : "fail";
        table.any_invalid = table.any_invalid || status != "pass";
        table.rows.push_back({points[i].parameter(parameter), p.value, exact, gap, rel, p.adiabaticity.ratio,
                              std::string(p.adiabaticity.adiabatic ? "true" : "false"), status});
    }
    return table;
}

} // namespace zeno::harness
