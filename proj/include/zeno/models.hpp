#pragma once

// Concrete measurement scenarios: pulsed and continuous time-independent
// measurements, and the XYZ Heisenberg chain in a field rotated from z to x.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "jump.hpp"

namespace zeno::models {

// ---------------------------------------------------------------------------
// Time-independent measurements

/// Free evolution under H0 for tau_F, then H0 + K P_n until tau; tau_F = tau
/// is free evolution throughout.
inline MeasurementModel pulsed_model(const HermitianOperator& h0, const Projector& pn, double coupling, double tau,
                                     double tau_free) {
    if (!(tau_free >= 0.0 && tau_free <= tau)) throw ValidationError("pulsed_model: need 0 <= tau_F <= tau");
    const HermitianOperator hmeas(pn.matrix());
    CouplingSchedule schedule;
    if (tau_free == tau) schedule = CouplingSchedule([](double, Side) { return 0.0; }, {});
    else if (tau_free > 0.0) schedule = CouplingSchedule::step_on(tau_free);
    return MeasurementModel(TimeDependentOperator::constant(h0, tau), TimeDependentOperator::constant(hmeas, tau),
                            coupling, tau, std::move(schedule));
}

/// H0 + K H_meas, both constant, for a duration tau.
inline MeasurementModel continuous_model(const HermitianOperator& h0, const HermitianOperator& hmeas,
                                         double coupling, double tau) {
    return MeasurementModel(TimeDependentOperator::constant(h0, tau), TimeDependentOperator::constant(hmeas, tau),
                            coupling, tau);
}

// ---------------------------------------------------------------------------
// Spin chain

enum class Boundary { open, periodic };

struct SpinChainSpec {
    int n_sites = 2;
    std::array<double, 3> lambdas{1.0, 2.0, 1.0};
    double h = 9.0;
    double T = 1.0;
    Boundary boundary = Boundary::open;

    /// Critical field magnitude quoted for the chain; a guideline only.
    static constexpr double critical_field = 4.0;

    void validate() const {
        if (n_sites < 2 || n_sites > 12) throw ValidationError("SpinChainSpec: n_sites must be in [2, 12]");
        if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("SpinChainSpec: h must be positive and finite");
        if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("SpinChainSpec: T must be positive and finite");
        for (double l : lambdas)
            if (!std::isfinite(l)) throw ValidationError("SpinChainSpec: couplings must be finite");
    }
};

/// sum over bonds of l1 XX + l2 YY + l3 ZZ; site 1 is the most significant
/// tensor factor and index 0 of each site is spin up.
inline HermitianOperator build_chain_h0(const SpinChainSpec& spec) {
    spec.validate();
    const int n = spec.n_sites;
    const Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    const std::array<ComplexMatrix, 3> sigma{pauli::x(), pauli::y(), pauli::z()};
    const int bonds = spec.boundary == Boundary::periodic && n > 2 ? n : n - 1;
    for (int j = 0; j < bonds; ++j) {
        const int next = (j + 1) % n;
        for (int a = 0; a < 3; ++a) {
            if (spec.lambdas[a] == 0.0) continue;
            h += spec.lambdas[a] * pauli::embed(sigma[a], j, n) * pauli::embed(sigma[a], next, n);
        }
    }
    return HermitianOperator(h);
}

/// K(s) = sqrt(s^2 + (1 - s)^2), the field-direction normalisation.
inline double field_norm(double s) { return std::sqrt(s * s + (1.0 - s) * (1.0 - s)); }

/// Unit-field interaction -sum_j ((1 - s) Z_j + s X_j); the physical
/// interaction is h times this.
inline ComplexMatrix unit_interaction(int n_sites, double s) {
    const ComplexMatrix single = (1.0 - s) * pauli::z() + s * pauli::x();
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (int j = 0; j < n_sites; ++j) out -= pauli::embed(single, j, n_sites);
    return out;
}

/// I(s) = -sum_j h ((1 - s) Z_j + s X_j).
inline HermitianOperator chain_interaction(const SpinChainSpec& spec, double s) {
    spec.validate();
    if (s < 0.0 || s > 1.0) throw ValidationError("chain_interaction: s must lie in [0, 1]");
    return HermitianOperator(spec.h * unit_interaction(spec.n_sites, s));
}

/// I(t / T) on the time horizon [0, T].
inline TimeDependentOperator build_chain_interaction(const SpinChainSpec& spec) {
    spec.validate();
    const int n = spec.n_sites;
    const double h = spec.h;
    const double period = spec.T;
    const ComplexMatrix slope = h * (unit_interaction(n, 1.0) - unit_interaction(n, 0.0)) / period;
    return TimeDependentOperator::smooth(
        period, [n, h, period](double t) { return ComplexMatrix(h * unit_interaction(n, t / period)); },
        [slope](double) { return slope; });
}

/// K = h and H_meas(t) = I(t / T) / h, so the eigenvalues of H_meas are
/// L K(s) with L = n, n - 2, ..., -n.
inline MeasurementModel chain_measurement_model(const SpinChainSpec& spec) {
    spec.validate();
    const int n = spec.n_sites;
    const double period = spec.T;
    const ComplexMatrix slope = (unit_interaction(n, 1.0) - unit_interaction(n, 0.0)) / period;
    auto hmeas = TimeDependentOperator::smooth(
        period, [n, period](double t) { return unit_interaction(n, t / period); },
        [slope](double) { return slope; });
    return MeasurementModel(TimeDependentOperator::constant(build_chain_h0(spec), period), std::move(hmeas), spec.h,
                            period);
}

/// All spins up: the ground state of I(0).
inline DensityMatrix ferromagnetic_state(int n_sites) {
    ComplexVector psi = ComplexVector::Zero(Eigen::Index{1} << n_sites);
    psi(0) = 1.0;
    return DensityMatrix::pure(psi);
}

/// Computational-basis projector |b><b| for a bit pattern of spins where
/// `true` means spin down, site 1 first.
inline Projector basis_projector(const std::vector<bool>& down) {
    const int n = static_cast<int>(down.size());
    Eigen::Index index = 0;
    for (int j = 0; j < n; ++j) index = (index << 1) | (down[static_cast<std::size_t>(j)] ? 1 : 0);
    ComplexMatrix p = ComplexMatrix::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
    p(index, index) = 1.0;
    return Projector(p);
}

/// Closed-form single-site rotation whose columns are the +/- eigenvectors of
/// (1 - s) Z + s X. At s = 0 the s -> 0+ limit diag(1, -1) is returned.
inline ComplexMatrix closed_form_rotation(double s) {
    ComplexMatrix a(2, 2);
    if (s == 0.0) {
        a << 1.0, 0.0, 0.0, -1.0;
        return a;
    }
    const double k = field_norm(s);
    const double minus = std::sqrt(2.0 * k * k - 2.0 * k * (1.0 - s));
    const double plus = std::sqrt(2.0 * k * k + 2.0 * k * (1.0 - s));
    a << s / minus, s / plus, (k - (1.0 - s)) / minus, (-k - (1.0 - s)) / plus;
    return a;
}

/// U(s) = A(s) (x) ... (x) A(s).
inline ComplexMatrix closed_form_chain_rotation(int n_sites, double s) {
    ComplexMatrix u = ComplexMatrix::Identity(1, 1);
    const ComplexMatrix a = closed_form_rotation(s);
    for (int j = 0; j < n_sites; ++j) u = tensor_product(u, a);
    return u;
}

/// int_0^s K(s') ds' by adaptive Gauss-Kronrod.
inline double cumulative_K(double s, double tol = 1e-14) {
    if (s < 0.0 || s > 1.0) throw ValidationError("cumulative_K: s must lie in [0, 1]");
    return quad::integrate([](double x) { return field_norm(x); }, 0.0, s, tol).value;
}

struct TwoQubitJump {
    double w14 = 0.0;  ///< W(P1(0) -> P4(1))
    double w12 = 0.0;  ///< forbidden by the parity of H0
    double w13 = 0.0;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline void two_qubit_diagnostics(double h, double T, std::vector<std::string>& out) {
    if (h < SpinChainSpec::critical_field)
        out.push_back("h < 4: H0 is not a perturbation of the interaction");
    if (h * T < 10.0) out.push_back("hT is not >> 1: adiabatic condition doubtful");
}

} // namespace detail

/// W14 = (int_0^1 cos Theta)^2 + (int_0^1 sin Theta)^2 with
/// Theta(s) = 4 h T int_0^s K. The integrals run over the rotation parameter
/// s; the physical-time probability is T^2 times this value.
inline TwoQubitJump two_qubit_final(double h, double T, double quad_tol = 1e-10) {
    if (!(h > 0.0) || !(T > 0.0)) throw ValidationError("two_qubit_final: need h > 0 and T > 0");
    const double scale = 4.0 * h * T;
    const double inner_tol = std::min(1e-14, 0.01 * quad_tol / std::max(scale, 1.0));
    auto theta = [&](double s) { return scale * cumulative_K(s, inner_tol); };
    const double c = quad::integrate([&](double s) { return std::cos(theta(s)); }, 0.0, 1.0, quad_tol).value;
    const double sn = quad::integrate([&](double s) { return std::sin(theta(s)); }, 0.0, 1.0, quad_tol).value;
    TwoQubitJump out;
    out.w14 = c * c + sn * sn;
    detail::two_qubit_diagnostics(h, T, out.diagnostics);
    return out;
}

/// Fixed-node composite Simpson evaluation of W14 on `intervals` (even)
/// sub-intervals; used for node-doubling stability checks.
inline double two_qubit_final_composite(double h, double T, std::size_t intervals) {
    if (intervals < 2 || intervals % 2 != 0) throw ValidationError("two_qubit_final_composite: even intervals");
    const double scale = 4.0 * h * T;
    std::vector<double> xs(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) xs[i] = static_cast<double>(i) / static_cast<double>(intervals);
    const auto w = quad::simpson_weights(xs);
    double c = 0.0;
    double sn = 0.0;
    double cumulative = 0.0;
    for (std::size_t i = 0; i <= intervals; ++i) {
        if (i > 0) cumulative += quad::integrate([](double x) { return field_norm(x); }, xs[i - 1], xs[i], 1e-15).value;
        c += w[i] * std::cos(scale * cumulative);
        sn += w[i] * std::sin(scale * cumulative);
    }
    return c * c + sn * sn;
}

/// Varied parameter for an envelope scan.
enum class EnvelopeAxis { field, duration };

struct EnvelopePoint {
    double parameter = 0.0;  ///< location of the maximum along the axis
    double value = 0.0;
};

/// Max of W14 over one phase period of the varied parameter starting at the
/// given point: the total phase 4 h T cumulative_K(1) advances by 2 pi.
inline EnvelopePoint two_qubit_envelope_point(double h, double T, EnvelopeAxis axis, std::size_t samples = 256,
                                              double quad_tol = 1e-11) {
    const double total = cumulative_K(1.0);
    const double other = axis == EnvelopeAxis::field ? T : h;
    const double period = 2.0 * std::numbers::pi / (4.0 * other * total);
    auto eval = [&](double p) {
        return axis == EnvelopeAxis::field ? two_qubit_final(p, T, quad_tol).w14 : two_qubit_final(h, p, quad_tol).w14;
    };
    const double start = axis == EnvelopeAxis::field ? h : T;
    double best_p = start;
    double best = eval(start);
    for (std::size_t i = 1; i <= samples; ++i) {
        const double p = start + period * static_cast<double>(i) / static_cast<double>(samples);
        const double v = eval(p);
        if (v > best) {
            best = v;
            best_p = p;
        }
    }
    // Golden-section polish around the best sample.
    const double step = period / static_cast<double>(samples);
    double lo = std::max(start, best_p - step);
    double hi = std::min(start + period, best_p + step);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = eval(x1);
    double f2 = eval(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = eval(x2);
        }
    }
    EnvelopePoint out{best_p, best};
    if (f1 > out.value) out = {x1, f1};
    if (f2 > out.value) out = {x2, f2};
    return out;
}

inline double two_qubit_envelope(double h, double T, EnvelopeAxis axis, std::size_t samples = 256,
                                 double quad_tol = 1e-11) {
    return two_qubit_envelope_point(h, T, axis, samples, quad_tol).value;
}

/// Two-qubit chain (1, 2, 1) without the field.
inline HermitianOperator two_qubit_h0() {
    SpinChainSpec spec;
    spec.n_sites = 2;
    spec.lambdas = {1.0, 2.0, 1.0};
    return build_chain_h0(spec);
}

/// |<dd| U(t) |uu>|^2 under the bare two-qubit H0 via the exact propagator;
/// analytically sin^2 t.
inline double free_evolution_reference(double t, double tol = 1e-10) {
    if (t < 0.0) throw ValidationError("free_evolution_reference: t must be non-negative");
    if (t == 0.0) return 0.0;
    const auto h = TimeDependentOperator::constant(two_qubit_h0(), t);
    const auto u = exact_propagator(h, t, tol);
    return std::norm(u.U.matrix()(3, 0));
}

} // namespace zeno::models
