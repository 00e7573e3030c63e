#pragma once

// Second-order jump probability between Zeno subspaces and the closed forms
// it reduces to for time-independent measurements.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "propagators.hpp"
#include "quadrature.hpp"

namespace zeno {

/// H(t) = H0(t) + K g(t) H_meas(t) on [0, t_final].
class MeasurementModel {
public:
    MeasurementModel(TimeDependentOperator h0, TimeDependentOperator hmeas, double coupling, double t_final,
                     CouplingSchedule schedule = {})
        : h0_(std::move(h0)), hmeas_(std::move(hmeas)), coupling_(coupling), t_final_(t_final),
          schedule_(std::move(schedule)) {
        if (h0_.dim() != hmeas_.dim()) throw ValidationError("MeasurementModel: H0 and H_meas dimensions differ");
        if (!(coupling_ > 0.0) || !std::isfinite(coupling_))
            throw ValidationError("MeasurementModel: K must be positive and finite");
        if (!(t_final_ > 0.0) || t_final_ > h0_.horizon() * (1 + 1e-12) || t_final_ > hmeas_.horizon() * (1 + 1e-12))
            throw ValidationError("MeasurementModel: t_final must lie in (0, horizon]");
    }

    const TimeDependentOperator& h0() const noexcept { return h0_; }
    const TimeDependentOperator& hmeas() const noexcept { return hmeas_; }
    double coupling() const noexcept { return coupling_; }
    double t_final() const noexcept { return t_final_; }
    const CouplingSchedule& schedule() const noexcept { return schedule_; }
    Eigen::Index dim() const { return h0_.dim(); }

    std::vector<double> breakpoints() const {
        auto bps = detail::merge_breakpoints(h0_.breakpoints(), hmeas_.breakpoints(), t_final_);
        return detail::merge_breakpoints(bps, schedule_.breakpoints(), t_final_);
    }

    TimeDependentOperator total_hamiltonian() const { return combine(h0_, coupling_, hmeas_, schedule_); }

    /// The measurement part K g(t) H_meas(t) alone.
    TimeDependentOperator measurement_hamiltonian() const {
        const auto dim = h0_.dim();
        const TimeDependentOperator zero(hmeas_.horizon(), [dim](double, Side) {
            return ComplexMatrix(ComplexMatrix::Zero(dim, dim));
        });
        return combine(zero, coupling_, hmeas_, schedule_);
    }

    std::vector<double> grid(std::size_t intervals) const { return make_grid(t_final_, intervals, breakpoints()); }

    AdiabaticFrame frame(std::size_t intervals, const NumericPolicy& policy = {}) const {
        return track_frame(hmeas_, coupling_, grid(intervals), schedule_, policy);
    }

private:
    TimeDependentOperator h0_;
    TimeDependentOperator hmeas_;
    double coupling_;
    double t_final_;
    CouplingSchedule schedule_;
};

struct QuadraturePolicy {
    double tol = 1e-7;          ///< relative change between node doublings
    double abs_tol = 1e-14;     ///< absolute floor for values near zero
    int max_doublings = 8;
    std::size_t max_nodes = 1u << 15;
    double min_nodes_per_period = 10.0;
};

struct JumpResult {
    double value = 0.0;
    double imag_residual = 0.0;
    double est_error = 0.0;
    AdiabaticityReport adiabaticity;
    std::size_t nodes_used = 0;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline void require_in_subspace(const DensityMatrix& rho0, const ComplexMatrix& pn, double tol) {
    const double defect = max_norm(pn * rho0.matrix() * pn - rho0.matrix());
    if (defect > tol)
        throw ValidationError("general_jump: rho0 is not supported in the initial Zeno subspace (defect " +
                              format_double(defect) + ")");
}

/// Splits grid indices into smooth pieces delimited by breakpoints on the grid.
inline std::vector<std::pair<std::size_t, std::size_t>> grid_pieces(const std::vector<double>& grid,
                                                                    const std::vector<double>& breakpoints) {
    std::vector<std::pair<std::size_t, std::size_t>> pieces;
    std::size_t start = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (k + 1 == grid.size() || on_grid(breakpoints, grid[k])) {
            pieces.emplace_back(start, k);
            start = k;
        }
    }
    return pieces;
}

inline bool all_pieces_even(const std::vector<std::pair<std::size_t, std::size_t>>& pieces) {
    for (auto [a, b] : pieces)
        if ((b - a) % 2 != 0) return false;
    return true;
}

/// Tensor-product composite Simpson sum over [0, t]^2 of
///   tr(f(t1) rho0 f(t2) Q) exp(i (theta(t1) - theta(t2)))
/// with f = A^H H0 A and theta = phi_m - phi_n taken from the frame nodes.
inline Complex jump_double_sum(const MeasurementModel& model, const AdiabaticFrame& frame, const ComplexMatrix& rho0,
                               const ComplexMatrix& target, std::size_t n, std::size_t m,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pieces) {
    const auto grid = frame.grid();
    std::vector<ComplexMatrix> left_factors;
    std::vector<ComplexMatrix> right_factors;
    for (auto [a, b] : pieces) {
        const std::vector<double> xs(grid.begin() + static_cast<std::ptrdiff_t>(a),
                                     grid.begin() + static_cast<std::ptrdiff_t>(b) + 1);
        const std::vector<double> w = quad::simpson_weights(xs);
        for (std::size_t k = a; k <= b; ++k) {
            const FrameNode& node = frame.node(k);
            const Side side = k == b ? Side::left : Side::right;
            const ComplexMatrix f = node.intertwiner.adjoint() * model.h0().raw(node.t, side) * node.intertwiner;
            const double theta = node.phases[m] - node.phases[n];
            const Complex e = std::exp(imag_unit * theta);
            left_factors.push_back(w[k - a] * e * (f * rho0));
            right_factors.push_back(w[k - a] * std::conj(e) * (f * target));
        }
    }

    // Both integrals run over the full square, so the double sum factorises:
    // sum_kl tr(X_k Y_l) = tr((sum_k X_k)(sum_l Y_l)).
    const ComplexMatrix x_total = quad::pairwise_sum<ComplexMatrix>(left_factors);
    const ComplexMatrix y_total = quad::pairwise_sum<ComplexMatrix>(right_factors);
    return trace_of_product(x_total, y_total);
}

inline double max_spacing(const std::vector<double>& grid) {
    double h = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) h = std::max(h, grid[k] - grid[k - 1]);
    return h;
}

} // namespace detail

/// W(P_n(0) -> Q) at the frame's final node, where Q <= P_m(0) is a target
/// projector inside level m (Q = P_m(0) gives the full level).
///
/// The double integral is evaluated by tensor-product composite Simpson on the
/// frame grid (split at breakpoints), refined by bisecting every interval and
/// re-tracking the frame until the relative change is below quad.tol.
inline JumpResult general_jump_into(const MeasurementModel& model, const DensityMatrix& rho0, std::size_t n,
                                    std::size_t m, const Projector& target, const AdiabaticFrame& frame,
                                    const QuadraturePolicy& quad = {}, const NumericPolicy& policy = {}) {
    if (n >= frame.level_count() || m >= frame.level_count())
        throw ValidationError("general_jump: level index out of range");
    if (m == n) throw ValidationError("general_jump: target level must differ from the initial level");
    if (rho0.dim() != model.dim() || target.dim() != model.dim() || frame.dim() != model.dim())
        throw ValidationError("general_jump: dimension mismatch");
    detail::require_in_subspace(rho0, frame.initial_projector(n), policy.subspace_tol);
    if (max_norm(target.matrix() * frame.initial_projector(m) - target.matrix()) > 1e-8)
        throw ValidationError("general_jump: target projector is not contained in level m");

    const double t_final = frame.t_final();
    std::vector<double> grid = frame.grid();

    double omega = 0.0;
    for (const auto& node : frame.nodes()) {
        const double g = std::max(std::abs(model.schedule()(node.t, Side::left)),
                                  std::abs(model.schedule()(node.t, Side::right)));
        omega = std::max(omega, std::abs(frame.coupling() * g * (node.eigenvalues[m] - node.eigenvalues[n])));
    }
    if (omega > 0.0) {
        const double per_period = 2.0 * std::numbers::pi / omega / detail::max_spacing(grid);
        if (per_period < quad.min_nodes_per_period) {
            const auto required = static_cast<std::size_t>(
                std::ceil(quad.min_nodes_per_period * omega * t_final / (2.0 * std::numbers::pi))) + 1;
            throw InsufficientSampling("general_jump: " + detail::format_double(per_period) +
                                           " nodes per phase period; need a grid of at least " +
                                           std::to_string(required) + " nodes",
                                       required);
        }
    }

    auto breakpoints = detail::merge_breakpoints(frame.breakpoints(), model.h0().breakpoints(), t_final);
    auto pieces = detail::grid_pieces(grid, breakpoints);
    std::optional<AdiabaticFrame> owned;
    const AdiabaticFrame* current = &frame;
    if (!detail::all_pieces_even(pieces)) {
        grid = bisect_grid(grid);
        owned.emplace(track_frame(model.hmeas(), model.coupling(), grid, model.schedule(), policy));
        current = &*owned;
        pieces = detail::grid_pieces(grid, breakpoints);
    }

    const ComplexMatrix& rho = rho0.matrix();
    Complex value = detail::jump_double_sum(model, *current, rho, target.matrix(), n, m, pieces);
    double change = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int doubling = 0; doubling < quad.max_doublings; ++doubling) {
        grid = bisect_grid(grid);
        if (grid.size() > quad.max_nodes) break;
        owned.emplace(track_frame(model.hmeas(), model.coupling(), grid, model.schedule(), policy));
        current = &*owned;
        pieces = detail::grid_pieces(grid, breakpoints);
        const Complex refined = detail::jump_double_sum(model, *current, rho, target.matrix(), n, m, pieces);
        change = std::abs(refined.real() - value.real());
        value = refined;
        if (change <= std::max(quad.tol * std::abs(value.real()), quad.abs_tol)) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("general_jump: quadrature did not reach relative tolerance " +
                                   detail::format_double(quad.tol) + " (last change " +
                                   detail::format_double(change) + ")",
                               value.real());

    JumpResult result;
    result.value = value.real();
    result.imag_residual = std::abs(value.imag());
    result.est_error = change;
    result.nodes_used = grid.size();
    result.adiabaticity = adiabaticity_report(model.hmeas(), model.coupling(), grid, policy);
    if (result.value > policy.perturbative_limit)
        result.diagnostics.push_back("perturbation theory unreliable: W = " + detail::format_double(result.value));
    if (!result.adiabaticity.adiabatic) result.diagnostics.push_back("adiabaticity condition not satisfied");
    if (result.imag_residual > 1e-6 * (1.0 + std::abs(result.value)))
        result.diagnostics.push_back("imaginary residual above 1e-6 (1 + W)");
    return result;
}

/// W(P_n(0) -> P_m(t)) into the full (possibly degenerate) level m.
inline JumpResult general_jump(const MeasurementModel& model, const DensityMatrix& rho0, std::size_t n, std::size_t m,
                               const AdiabaticFrame& frame, const QuadraturePolicy& quad = {},
                               const NumericPolicy& policy = {}) {
    if (m >= frame.level_count()) throw ValidationError("general_jump: level index out of range");
    return general_jump_into(model, rho0, n, m, Projector(frame.initial_projector(m), policy), frame, quad, policy);
}

/// Tr{Q(t) U rho0 U^H} with the exact propagator of the full Hamiltonian;
/// `target_at_t` is the target projector at the final time.
inline double exact_jump(const MeasurementModel& model, const DensityMatrix& rho0, const ComplexMatrix& target_at_t,
                         double tol, const NumericPolicy& policy = {}) {
    const PropagatorResult u = exact_propagator(model.total_hamiltonian(), model.t_final(), tol, {}, policy);
    return trace_of_product(target_at_t, u.U.matrix() * rho0.matrix() * u.U.matrix().adjoint()).real();
}

// ---------------------------------------------------------------------------
// Closed forms for time-independent measurements

/// Tr{P_m H0 rho0 H0}
inline double trace_factor(const HermitianOperator& h0, const DensityMatrix& rho0, const Projector& pm) {
    if (h0.dim() != rho0.dim() || h0.dim() != pm.dim()) throw ValidationError("trace_factor: dimension mismatch");
    return trace_of_product(pm.matrix() * h0.matrix(), rho0.matrix() * h0.matrix()).real();
}

/// Pulsed measurement: free evolution for tau_F, then K P_n until tau.
inline double pulsed_jump(double trace_factor, double coupling, double tau, double tau_free) {
    if (trace_factor < 0.0) throw ValidationError("pulsed_jump: trace factor must be non-negative");
    if (!(coupling > 0.0)) throw ValidationError("pulsed_jump: K must be positive");
    if (!(tau_free >= 0.0 && tau_free <= tau)) throw ValidationError("pulsed_jump: need 0 <= tau_F <= tau");
    const double half = 0.5 * coupling * (tau - tau_free);
    const double s = std::sin(half);
    return trace_factor * (tau_free * tau_free + 4.0 * tau_free / coupling * s * std::cos(half) +
                           4.0 / (coupling * coupling) * s * s);
}

/// tau_z with tau_z^-2 = Tr{P_m H0 rho0 H0}; +infinity when the factor vanishes.
inline double zeno_time(const HermitianOperator& h0, const DensityMatrix& rho0, const Projector& pm) {
    const double factor = trace_factor(h0, rho0, pm);
    if (factor < -1e-12)
        throw NumericalError("zeno_time: negative trace factor " + detail::format_double(factor));
    if (factor <= 1e-14) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(factor);
}

/// 4 sin^2(K de tau / 2) / (K de)^2 times the trace factor.
inline double continuous_jump(double trace_factor, double coupling, double delta_eps, double tau) {
    if (delta_eps == 0.0) throw ValidationError("continuous_jump: degenerate levels (delta_eps = 0)");
    if (!(coupling > 0.0)) throw ValidationError("continuous_jump: K must be positive");
    const double omega = coupling * delta_eps;
    const double s = std::sin(0.5 * omega * tau);
    return trace_factor * 4.0 * s * s / (omega * omega);
}

/// Delta-function weights g_m at eps_m of G(eps).
struct SpectralDensity {
    struct Weight {
        double eps;
        double g;
    };
    std::vector<Weight> weights;

    double total() const {
        double s = 0.0;
        for (const auto& w : weights) s += w.g;
        return s;
    }

    /// Centre of gravity eps_M.
    double centre() const {
        const double z = total();
        if (!(z > 0.0)) return 0.0;
        double s = 0.0;
        for (const auto& w : weights) s += w.g * w.eps;
        return s / z;
    }

    /// Width Gamma_R as the weighted standard deviation.
    double width() const {
        const double z = total();
        if (!(z > 0.0)) return 0.0;
        const double c = centre();
        double s = 0.0;
        for (const auto& w : weights) s += w.g * (w.eps - c) * (w.eps - c);
        return std::sqrt(s / z);
    }

    /// G(eps) for rho0 in level n: g_m = Tr{P_m H0 rho0 H0} for m != n.
    static SpectralDensity from_levels(const HermitianOperator& h0, const DensityMatrix& rho0,
                                       const ZenoDecomposition& levels, std::size_t n) {
        SpectralDensity d;
        for (std::size_t m = 0; m < levels.size(); ++m) {
            if (m == n) continue;
            d.weights.push_back({levels.level(m).eigenvalue, trace_factor(h0, rho0, levels.level(m).projector)});
        }
        return d;
    }
};

namespace detail {

inline void require_off_level(const SpectralDensity& density, double eps_n) {
    for (const auto& w : density.weights) {
        if (w.g < 0.0) throw ValidationError("spectral density weights must be non-negative");
        if (w.eps == eps_n) throw ValidationError("spectral density has weight at eps_m = eps_n");
    }
}

} // namespace detail

inline double decay_rate(const SpectralDensity& density, double eps_n, double coupling, double tau) {
    detail::require_off_level(density, eps_n);
    if (!(tau > 0.0)) throw ValidationError("decay_rate: tau must be positive");
    double rate = 0.0;
    for (const auto& w : density.weights) rate += continuous_jump(w.g, coupling, w.eps - eps_n, tau) / tau;
    return rate;
}

/// exp(-R t): survival after repeated continuous-measurement cycles.
inline double exponential_survival(double rate, double t) { return std::exp(-rate * t); }

/// W(P_n, t) = W(P_n, tau)^N for N confirmations.
inline double repeated_survival(double survival_per_cycle, std::size_t cycles) {
    return std::pow(survival_per_cycle, static_cast<double>(cycles));
}

struct QzeCheck {
    double nu = 0.0;          ///< 1 / tau
    double gamma_r = 0.0;     ///< width of G
    double center_gap = 0.0;  ///< |eps_n - eps_M|
    bool qze = false;
};

struct SpectralOverlap {
    double rate = 0.0;
    QzeCheck check;
};

/// R = 2 pi int G(eps) F(eps) d eps with G a sum of weighted deltas, and the
/// QZE condition nu >> Gamma_R, |eps_n - eps_M| at policy.qze_margin.
inline SpectralOverlap spectral_overlap(const SpectralDensity& density, double eps_n, double coupling, double tau,
                                        const NumericPolicy& policy = {}) {
    detail::require_off_level(density, eps_n);
    if (!(tau > 0.0) || !(coupling > 0.0)) throw ValidationError("spectral_overlap: need tau > 0 and K > 0");
    auto kernel = [&](double eps) {
        const double d = eps - eps_n;
        const double s = std::sin(0.5 * coupling * d * tau);
        return 4.0 * s * s / (2.0 * std::numbers::pi * coupling * coupling * d * d * tau);
    };
    SpectralOverlap out;
    for (const auto& w : density.weights) out.rate += 2.0 * std::numbers::pi * w.g * kernel(w.eps);
    out.check.nu = 1.0 / tau;
    out.check.gamma_r = density.width();
    out.check.center_gap = std::abs(eps_n - density.centre());
    out.check.qze = out.check.nu >= policy.qze_margin * std::max(out.check.gamma_r, out.check.center_gap);
    return out;
}

} // namespace zeno
