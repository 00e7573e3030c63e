// Acceptance gate: evaluates the twelve acceptance criteria and prints one
// PASS/FAIL line for each. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace zeno;
using namespace testing_support;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Keeps the first failure message and the worst observed value.
struct Tracker {
    bool pass = true;
    std::string first_failure;
    double worst = 0.0;

    void check(bool ok, const std::string& what) {
        if (!ok && pass) first_failure = what;
        pass = pass && ok;
    }
    void observe(double v) { worst = std::max(worst, v); }
    Outcome outcome(const std::string& summary) const {
        return {pass, pass ? summary : first_failure + " (" + summary + ")"};
    }
};

// 1 -------------------------------------------------------------------------
Outcome two_qubit_matrix_elements() {
    const ComplexMatrix h = models::two_qubit_h0().matrix();
    const double e12 = std::abs(h(1, 0)), e13 = std::abs(h(2, 0)), e14 = std::abs(h(3, 0) - Complex(-1.0));
    Tracker t;
    t.check(e12 <= 1e-12, "<ud|H0|uu> = " + fmt(e12));
    t.check(e13 <= 1e-12, "<du|H0|uu> = " + fmt(e13));
    t.check(e14 <= 1e-12, "<dd|H0|uu> + 1 = " + fmt(e14));
    return t.outcome("<ud|H0|uu>=0, <du|H0|uu>=0, <dd|H0|uu>=-1 to 1e-12");
}

// 2 -------------------------------------------------------------------------
Outcome free_evolution_law() {
    Tracker t;
    for (int k = 0; k < 100; ++k) {
        const double time = 2.0 * std::numbers::pi * k / 99.0;
        const double s = std::sin(time);
        const double err = std::abs(models::free_evolution_reference(time) - s * s);
        t.observe(err);
        t.check(err <= 1e-8, "t = " + fmt(time) + " error " + fmt(err));
    }
    return t.outcome("max |P - sin^2 t| = " + fmt(t.worst) + " over 100 points");
}

// 3 -------------------------------------------------------------------------
Outcome chain_spectrum() {
    models::SpinChainSpec spec;
    spec.h = 1.0;
    const auto d = decompose(models::chain_interaction(spec, 0.0));
    Tracker t;
    t.check(d.size() == 3, "level count " + std::to_string(d.size()));
    if (d.size() == 3) {
        const double expected[3] = {-2.0, 0.0, 2.0};
        for (std::size_t n = 0; n < 3; ++n) {
            const double err = std::abs(d.level(n).eigenvalue - expected[n]);
            t.observe(err);
            t.check(err <= 1e-10, "eigenvalue " + std::to_string(n) + " off by " + fmt(err));
        }
        t.check(d.level(1).projector.rank() == 2, "middle rank " + std::to_string(d.level(1).projector.rank()));
    }
    return t.outcome("eigenvalues {-2, 0, 2}, middle rank 2, max error " + fmt(t.worst));
}

// 4 -------------------------------------------------------------------------
Outcome closed_form_equivalence() {
    std::mt19937_64 rng(seed + 400);
    std::uniform_int_distribution<int> level_count(2, 5);
    std::uniform_int_distribution<int> extra(0, 3);
    std::uniform_real_distribution<double> step(0.5, 1.5), couplings(1.0, 6.0), durations(0.3, 1.5);
    Tracker cont;
    for (int c = 0; c < 20; ++c) {
        std::vector<double> spectrum;
        double value = -1.0;
        const int levels = level_count(rng);
        for (int l = 0; l < levels; ++l) {
            value += step(rng);
            const int copies = 1 + (static_cast<int>(spectrum.size()) + levels - l < 8 ? extra(rng) % 2 : 0);
            for (int k = 0; k < copies && spectrum.size() < 8; ++k) spectrum.push_back(value);
        }
        const ComplexMatrix hmeas = with_spectrum(rng, spectrum);
        const auto dim = static_cast<Eigen::Index>(spectrum.size());
        ComplexMatrix h0 = random_hermitian(rng, dim);
        h0 *= 0.3 / h0.operatorNorm();
        const double K = couplings(rng), tau = durations(rng);
        const auto model = models::continuous_model(HermitianOperator(h0), HermitianOperator(hmeas), K, tau);
        const auto d = decompose(HermitianOperator(hmeas));
        const auto frame = model.frame(64);
        const std::size_t n = static_cast<std::size_t>(c) % d.size();
        const ComplexVector coeffs = random_state(rng, d.level(n).basis.cols());
        const auto rho0 = DensityMatrix::pure(d.level(n).basis * coeffs);
        for (std::size_t m = 0; m < d.size(); ++m) {
            if (m == n) continue;
            const double oracle = continuous_jump(trace_factor(HermitianOperator(h0), rho0, d.level(m).projector), K,
                                                  d.level(m).eigenvalue - d.level(n).eigenvalue, tau);
            const double w = general_jump(model, rho0, n, m, frame, QuadraturePolicy{1e-10, 1e-16}).value;
            const double rel = std::abs(w - oracle) / std::max(oracle, 1e-6);
            cont.observe(rel);
            cont.check(rel <= 1e-6, "continuous model " + std::to_string(c) + " relative gap " + fmt(rel));
        }
    }
    Tracker pulsed;
    const ComplexMatrix h0 = random_hermitian(rng, 3);
    ComplexMatrix pn = ComplexMatrix::Zero(3, 3);
    pn(0, 0) = 1.0;
    const auto rho0 = DensityMatrix::pure(ComplexVector::Unit(3, 0));
    const double factor = trace_factor(HermitianOperator(h0), rho0, Projector(identity(3) - pn));
    for (double K : {5.0, 20.0}) {
        for (auto [tau, tau_free] : {std::pair{1.0, 0.4}, {0.6, 0.15}}) {
            const auto model = models::pulsed_model(HermitianOperator(h0), Projector(pn), K, tau, tau_free);
            const double w = general_jump(model, rho0, 1, 0, model.frame(100), QuadraturePolicy{1e-11, 1e-16}).value;
            const double oracle = pulsed_jump(factor, K, tau, tau_free);
            const double rel = std::abs(w - oracle) / oracle;
            pulsed.observe(rel);
            pulsed.check(rel <= 1e-5, "pulsed K = " + fmt(K) + " relative gap " + fmt(rel));
        }
    }
    Outcome out{cont.pass && pulsed.pass, ""};
    out.detail = "continuous max rel " + fmt(cont.worst) + " (20 models), pulsed max rel " + fmt(pulsed.worst);
    if (!cont.pass) out.detail = cont.first_failure + "; " + out.detail;
    else if (!pulsed.pass) out.detail = pulsed.first_failure + "; " + out.detail;
    return out;
}

// 5 -------------------------------------------------------------------------
Outcome zeno_time_limit() {
    const auto h0 = models::two_qubit_h0();
    const auto rho0 = models::ferromagnetic_state(2);
    const Projector p4 = models::basis_projector({true, true});
    const double tz = zeno_time(h0, rho0, p4);
    const double factor = trace_factor(h0, rho0, p4);
    Tracker t;
    t.check(std::abs(tz - 1.0) <= 1e-12, "tau_z = " + fmt(tz));
    for (double tau : {1e-3, 1e-2}) {
        const double survival = 1.0 - pulsed_jump(factor, 10.0, tau, tau);
        const double coefficient = (1.0 - survival) / (tau * tau);
        const double err = std::abs(coefficient - 1.0 / (tz * tz)) * tz * tz;
        t.observe(err);
        t.check(err < 0.01, "tau = " + fmt(tau) + " coefficient error " + fmt(err));
        // the exact free evolution leaves |uu> at the same quadratic rate
        const double exact = models::free_evolution_reference(tau, 1e-14) / (tau * tau);
        const double exact_err = std::abs(exact - 1.0);
        t.observe(exact_err);
        t.check(exact_err < 0.01, "tau = " + fmt(tau) + " exact coefficient " + fmt(exact));
    }
    return t.outcome("tau_z = " + fmt(tz) + ", max coefficient error " + fmt(t.worst));
}

// 6 -------------------------------------------------------------------------
Outcome k_suppression() {
    // frozen field at s = 0: |uu> (level 0) to |dd> (level 2), gap 4
    const auto h0 = models::two_qubit_h0();
    const HermitianOperator hmeas(models::unit_interaction(2, 0.0));
    const auto levels = decompose(hmeas);
    const auto rho0 = models::ferromagnetic_state(2);
    const double gap = levels.level(2).eigenvalue - levels.level(0).eigenvalue;
    const double factor = trace_factor(h0, rho0, levels.level(2).projector);
    std::vector<double> closed, quadrature;
    for (double K : {10.0, 20.0, 40.0}) {
        const double tau = std::numbers::pi / (K * gap);
        closed.push_back(continuous_jump(factor, K, gap, tau));
        const auto model = models::continuous_model(h0, hmeas, K, tau);
        quadrature.push_back(general_jump(model, rho0, 0, 2, model.frame(32), QuadraturePolicy{1e-12, 1e-16}).value);
    }
    Tracker t;
    const double expected[3] = {1.0, 0.25, 0.0625};
    for (std::size_t i = 0; i < 3; ++i) {
        const double err = std::abs(closed[i] / closed[0] - expected[i]);
        const double qerr = std::abs(quadrature[i] / quadrature[0] - expected[i]);
        t.observe(std::max(err, qerr));
        t.check(err <= 1e-10, "closed-form ratio " + std::to_string(i) + " off by " + fmt(err));
        t.check(qerr <= 1e-10, "quadrature ratio " + std::to_string(i) + " off by " + fmt(qerr));
    }
    return t.outcome("ratios 1 : " + fmt(closed[1] / closed[0]) + " : " + fmt(closed[2] / closed[0]) +
                     ", max deviation " + fmt(t.worst));
}

// 7 -------------------------------------------------------------------------
Outcome decay_rate_identities() {
    std::mt19937_64 rng(seed + 700);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tracker identity_check, survival_check;
    for (int c = 0; c < 10; ++c) {
        SpectralDensity density;
        const int count = 1 + c % 5;
        for (int k = 0; k < count; ++k) density.weights.push_back({0.5 + 4.0 * u(rng), u(rng)});
        const double eps_n = -0.2 * c, K = 5.0 + 10.0 * u(rng), tau = 0.01;
        const double r = decay_rate(density, eps_n, K, tau);
        const double overlap = spectral_overlap(density, eps_n, K, tau).rate;
        const double rel = std::abs(overlap - r) / r;
        identity_check.observe(rel);
        identity_check.check(rel <= 1e-12, "density " + std::to_string(c) + " overlap vs rate " + fmt(rel));
        const double rt = r * tau;
        survival_check.check(rt <= 1e-3, "density " + std::to_string(c) + " R tau = " + fmt(rt));
        for (std::size_t cycles : {10u, 100u, 1000u, 5000u}) {
            const double repeated = repeated_survival(1.0 - rt, cycles);
            const double exponential = exponential_survival(r, static_cast<double>(cycles) * tau);
            const double gap = std::abs(repeated - exponential) / exponential;
            survival_check.observe(gap);
            survival_check.check(gap <= 0.01, "N = " + std::to_string(cycles) + " survival gap " + fmt(gap));
        }
    }
    Outcome out{identity_check.pass && survival_check.pass,
                "overlap/rate max rel " + fmt(identity_check.worst) + ", survival max rel " +
                    fmt(survival_check.worst)};
    if (!identity_check.pass) out.detail = identity_check.first_failure + "; " + out.detail;
    else if (!survival_check.pass) out.detail = survival_check.first_failure + "; " + out.detail;
    return out;
}

// 8 -------------------------------------------------------------------------
Outcome envelope_monotonicity() {
    Tracker t;
    std::ostringstream summary;
    auto scan = [&](const std::vector<double>& params, models::EnvelopeAxis axis, const char* name) {
        double previous = std::numeric_limits<double>::infinity();
        summary << name << ":";
        for (double p : params) {
            const double h = axis == models::EnvelopeAxis::field ? p : 9.0;
            const double T = axis == models::EnvelopeAxis::field ? 1.0 : p;
            const auto point = models::two_qubit_envelope_point(h, T, axis);
            summary << ' ' << fmt(point.value);
            t.check(point.value < previous, std::string(name) + " = " + fmt(p) + " does not decrease");
            previous = point.value;
            // node-doubling stability at the envelope maximum
            const double at_h = axis == models::EnvelopeAxis::field ? point.parameter : h;
            const double at_T = axis == models::EnvelopeAxis::field ? T : point.parameter;
            const double coarse = models::two_qubit_final_composite(at_h, at_T, 1024);
            const double fine = models::two_qubit_final_composite(at_h, at_T, 2048);
            const double rel = std::abs(coarse - fine) / std::abs(fine);
            t.observe(rel);
            t.check(rel < 5e-4, std::string(name) + " = " + fmt(p) + " unstable under doubling: " + fmt(rel));
        }
        summary << "; ";
    };
    scan({9.0, 12.0, 15.0, 20.0, 30.0}, models::EnvelopeAxis::field, "h");
    scan({1.0, 2.0, 4.0, 8.0}, models::EnvelopeAxis::duration, "T");
    summary << "doubling max rel " << fmt(t.worst);
    return t.outcome(summary.str());
}

// 9 -------------------------------------------------------------------------
Outcome cumulative_k() {
    auto F = [](double x) {
        const double r = std::sqrt(x * x + 0.25);
        return std::sqrt(2.0) * (0.5 * x * r + 0.125 * std::log(x + r));
    };
    const double oracle = F(0.5) - F(-0.5);
    const double value = models::cumulative_K(1.0);
    Tracker t;
    t.check(std::abs(value - 0.811612) <= 1e-6, "cumulative_K(1) = " + fmt(value));
    t.check(std::abs(value - oracle) <= 1e-6, "oracle gap " + fmt(std::abs(value - oracle)));
    char buf[96];
    std::snprintf(buf, sizeof buf, "cumulative_K(1) = %.9f, oracle %.9f", value, oracle);
    return t.outcome(buf);
}

// 10 ------------------------------------------------------------------------
Outcome oracle_validity_gate() {
    models::SpinChainSpec spec;
    spec.h = 9.0;
    spec.T = 1.0;
    const auto model = models::chain_measurement_model(spec);
    const auto rho0 = models::ferromagnetic_state(2);
    const auto r = general_jump(model, rho0, 0, 2, model.frame(256), QuadraturePolicy{1e-9, 1e-16});
    const auto final_levels = decompose(model.hmeas()(spec.T, Side::left));
    const double exact = exact_jump(model, rho0, final_levels.level(2).projector.matrix(), 1e-9);
    const double K = model.coupling();
    const double rel = std::abs(r.value - exact) / std::max(exact, 1e-12);
    Tracker t;
    t.check(r.adiabaticity.ratio <= 0.01 * K * K, "adiabaticity ratio " + fmt(r.adiabaticity.ratio));
    t.check(rel <= 0.1, "relative gap " + fmt(rel) + " exceeds 10%");
    return t.outcome("W_perturbative " + fmt(r.value) + ", W_exact " + fmt(exact) + ", relative gap " + fmt(rel) +
                     ", adiabaticity ratio " + fmt(r.adiabaticity.ratio) + " <= " + fmt(0.01 * K * K));
}

// 11 ------------------------------------------------------------------------
Outcome selection_rules() {
    Tracker t;
    for (auto [h, T] : {std::pair{9.0, 1.0}, {15.0, 3.0}}) {
        models::SpinChainSpec spec;
        spec.h = h;
        spec.T = T;
        const auto model = models::chain_measurement_model(spec);
        const auto frame = model.frame(256);
        const auto rho0 = models::ferromagnetic_state(2);
        for (const auto& bits : {std::vector<bool>{false, true}, std::vector<bool>{true, false}}) {
            const auto r = general_jump_into(model, rho0, 0, 1, models::basis_projector(bits), frame,
                                             QuadraturePolicy{1e-6, 1e-14});
            const double w = std::abs(r.value);
            t.observe(w);
            t.check(w <= 1e-10, "(h, T) = (" + fmt(h) + ", " + fmt(T) + ") W = " + fmt(r.value));
        }
    }
    return t.outcome("max |W12|, |W13| = " + fmt(t.worst));
}

// 12 ------------------------------------------------------------------------
Outcome invariant_suite() {
    std::mt19937_64 rng(seed + 1200);
    const NumericPolicy policy;
    Tracker projectors, completeness, unitarity, intertwining, realness;
    std::uniform_int_distribution<int> dims(2, 6);
    for (int c = 0; c < property_cases; ++c) {
        // projectors and completeness of a decomposition with degeneracies
        std::vector<double> spectrum;
        const int dim = dims(rng);
        for (int i = 0; i < dim; ++i) spectrum.push_back(static_cast<double>((i * 7 + c) % 4));
        const ComplexMatrix m = with_spectrum(rng, spectrum);
        const auto d = decompose(HermitianOperator(m));
        ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
        for (std::size_t n = 0; n < d.size(); ++n) {
            const ComplexMatrix& p = d.level(n).projector.matrix();
            projectors.check(max_abs(p * p - p) <= policy.projector_tol && max_abs(p - p.adjoint()) <= 1e-14,
                             "case " + std::to_string(c) + " projector " + std::to_string(n));
            for (std::size_t k = n + 1; k < d.size(); ++k)
                completeness.check(max_abs(p * d.level(k).projector.matrix()) <= policy.completeness_tol,
                                   "case " + std::to_string(c) + " overlap");
            sum += p;
        }
        completeness.check(max_abs(sum - identity(dim)) <= policy.completeness_tol,
                           "case " + std::to_string(c) + " sum of projectors");

        // unitarity of the step exponential and the exact propagator
        const ComplexMatrix h = random_hermitian(rng, dim);
        const ComplexMatrix u = matrix_exp_unitary(HermitianOperator(h), 0.7).matrix();
        const ComplexMatrix a = random_hermitian(rng, dim), b = random_hermitian(rng, dim);
        const auto family = TimeDependentOperator::smooth(
            1.0, [=](double t) { return ComplexMatrix(a + std::sin(2.0 * t) * b); });
        const ComplexMatrix v = exact_propagator(family, 1.0, 1e-8).U.matrix();
        unitarity.check(max_abs(u.adjoint() * u - identity(dim)) <= policy.unitary_tol &&
                            max_abs(v.adjoint() * v - identity(dim)) <= policy.unitary_tol,
                        "case " + std::to_string(c) + " unitarity");

        // frame intertwining on a rotating measurement H(t) = V D V^H, V = exp(-i G t)
        const int fdim = 2 + c % 2;
        std::vector<double> levels;
        for (int i = 0; i < fdim; ++i) levels.push_back(-1.0 + 1.1 * i + 0.2 * (c % 3));
        const ComplexMatrix dmat = with_spectrum(rng, levels);
        ComplexMatrix g = random_hermitian(rng, fdim);
        g *= 0.8 / g.norm();
        const auto hmeas = TimeDependentOperator::smooth(1.0, [=](double t) {
            const ComplexMatrix w = taylor_exp(-imag_unit * t * g);
            return ComplexMatrix(w * dmat * w.adjoint());
        });
        const auto frame = track_frame(hmeas, 3.0, make_grid(1.0, 32));
        intertwining.check(frame.max_intertwining_residual() <= policy.frame_tol,
                           "case " + std::to_string(c) + " residual " + fmt(frame.max_intertwining_residual()));
        intertwining.observe(frame.max_intertwining_residual());

        // kernel realness of the double sum
        ComplexMatrix h0 = random_hermitian(rng, fdim);
        h0 *= 0.5 / h0.operatorNorm();
        const MeasurementModel model(TimeDependentOperator::constant(HermitianOperator(h0), 1.0), hmeas, 3.0, 1.0);
        const auto d0 = decompose(hmeas(0.0));
        const auto rho0 = DensityMatrix::pure(d0.level(0).basis.col(0));
        const auto r = general_jump(model, rho0, 0, 1, frame, QuadraturePolicy{1e-6, 1e-14});
        realness.observe(r.imag_residual);
        realness.check(r.imag_residual <= 1e-6 * (1 + r.value) && r.value >= -1e-9,
                       "case " + std::to_string(c) + " imaginary residual " + fmt(r.imag_residual));
    }
    const std::vector<std::pair<const char*, const Tracker*>> parts{{"projector", &projectors},
                                                                     {"completeness", &completeness},
                                                                     {"unitarity", &unitarity},
                                                                     {"intertwining", &intertwining},
                                                                     {"kernel realness", &realness}};
    Outcome out;
    std::ostringstream detail;
    for (const auto& [name, tr] : parts) {
        if (!tr->pass) {
            out.pass = false;
            detail << name << " failed: " << tr->first_failure << "; ";
        }
    }
    detail << property_cases << " cases each, max frame residual " << fmt(intertwining.worst)
           << ", max imaginary residual " << fmt(realness.worst);
    out.detail = detail.str();
    return out;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"two-qubit H0 matrix elements", two_qubit_matrix_elements},
        {"free evolution follows sin^2 t", free_evolution_law},
        {"spin-chain spectrum of I(0)", chain_spectrum},
        {"closed-form equivalence", closed_form_equivalence},
        {"Zeno-time limit", zeno_time_limit},
        {"K-suppression 1/K^2", k_suppression},
        {"decay-rate identities", decay_rate_identities},
        {"envelope monotonicity", envelope_monotonicity},
        {"cumulative K(1)", cumulative_k},
        {"oracle validity gate (h=9, T=1)", oracle_validity_gate},
        {"selection rules W12, W13", selection_rules},
        {"invariant suite", invariant_suite},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failures;
        std::printf("%s criterion %2zu  %-34s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
