#pragma once

#include <cmath>
#include <vector>

#include "frame.hpp"

namespace zeno {

struct PropagatorResult {
    UnitaryOperator U;
    std::size_t steps_used = 0;
    double est_error = 0.0;  ///< max-norm change on the last step doubling
};

struct ExactPropagatorOptions {
    std::size_t initial_steps = 16;
    int max_doublings = 20;
};

namespace detail {

/// Midpoint product prod_j exp(-i H(t_mid) dt) over [t_start, t_final] with
/// `steps_per_piece[p]` equal steps in each smooth piece.
inline ComplexMatrix midpoint_product(const TimeDependentOperator& h, const std::vector<double>& edges,
                                      const std::vector<std::size_t>& steps_per_piece, const NumericPolicy& policy) {
    ComplexMatrix u = identity(h.dim());
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p];
        const double dt = (edges[p + 1] - a) / static_cast<double>(steps_per_piece[p]);
        for (std::size_t j = 0; j < steps_per_piece[p]; ++j) {
            const double mid = a + (static_cast<double>(j) + 0.5) * dt;
            u = unitary_exponential(eigh(h(mid, Side::right, policy)), dt) * u;
        }
    }
    return u;
}

} // namespace detail

/// Time-ordered propagator U(t_final, t_start) of H by step doubling of the
/// midpoint exponential product until two successive results differ by less
/// than `tol` in max norm. Breakpoints of H are always step boundaries.
inline PropagatorResult exact_propagator(const TimeDependentOperator& h, double t_start, double t_final, double tol,
                                         const ExactPropagatorOptions& options = {},
                                         const NumericPolicy& policy = {}) {
    if (!(tol > 0.0)) throw ValidationError("exact_propagator: tol must be positive");
    if (t_start < 0.0 || t_final > h.horizon() * (1.0 + 1e-12) || t_final < t_start)
        throw ValidationError("exact_propagator: [t_start, t_final] must lie within the horizon");
    if (t_final == t_start) return {UnitaryOperator::identity(h.dim()), 0, 0.0};

    std::vector<double> edges{t_start};
    for (double b : h.breakpoints())
        if (b > t_start && b < t_final) edges.push_back(b);
    edges.push_back(t_final);

    const double total = t_final - t_start;
    std::vector<std::size_t> steps;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p)
        steps.push_back(std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(options.initial_steps * (edges[p + 1] - edges[p]) / total))));

    ComplexMatrix previous = detail::midpoint_product(h, edges, steps, policy);
    double change = std::numeric_limits<double>::infinity();
    for (int doubling = 0; doubling < options.max_doublings; ++doubling) {
        for (auto& s : steps) s *= 2;
        ComplexMatrix current = detail::midpoint_product(h, edges, steps, policy);
        change = max_norm(current - previous);
        previous = std::move(current);
        if (change < tol) {
            std::size_t used = 0;
            for (auto s : steps) used += s;
            NumericPolicy relaxed = policy;
            relaxed.unitary_tol = std::max(policy.unitary_tol, 10.0 * tol);
            return {UnitaryOperator(previous, relaxed), used, change};
        }
    }
    throw ConvergenceError("exact_propagator: no convergence after " + std::to_string(options.max_doublings) +
                               " doublings (last change " + detail::format_double(change) + ")",
                           change);
}

inline PropagatorResult exact_propagator(const TimeDependentOperator& h, double t_final, double tol,
                                         const ExactPropagatorOptions& options = {},
                                         const NumericPolicy& policy = {}) {
    return exact_propagator(h, 0.0, t_final, tol, options, policy);
}

/// U0(t_k, 0) ~ A(t_k) sum_n exp(-i phi_n(t_k)) P_n(0) at a frame grid node.
inline UnitaryOperator adiabatic_propagator(const AdiabaticFrame& frame, double t_k,
                                            const NumericPolicy& policy = {}) {
    const FrameNode& node = frame.node(frame.node_index(t_k));
    ComplexMatrix phase_op = ComplexMatrix::Zero(frame.dim(), frame.dim());
    for (std::size_t n = 0; n < frame.level_count(); ++n)
        phase_op += std::exp(-imag_unit * node.phases[n]) * frame.initial_projector(n);
    return UnitaryOperator(node.intertwiner * phase_op, policy);
}

} // namespace zeno
