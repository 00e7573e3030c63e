#pragma once

// Continuous tracking of Zeno subspaces along a time grid: the adiabatic
// intertwiner A(t), dynamical phases, and the adiabaticity diagnostic.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "decomposition.hpp"
#include "time_dependent.hpp"

namespace zeno {

struct FrameNode {
    double t = 0.0;
    ComplexMatrix intertwiner;               ///< A(t), unitary, A(0) = I
    std::vector<ComplexMatrix> projectors;   ///< P_n(t) in t = 0 level order
    std::vector<double> eigenvalues;         ///< eps_n(t)
    std::vector<double> phases;              ///< phi_n(t) = int_0^t K g eps_n
};

/// Time-gridded adiabatic frame. Levels keep the ordering of the t = 0
/// decomposition; later nodes are matched to it by continuity.
class AdiabaticFrame {
public:
    AdiabaticFrame(std::vector<FrameNode> nodes, std::vector<std::size_t> ranks, double coupling,
                   std::vector<double> breakpoints)
        : nodes_(std::move(nodes)), ranks_(std::move(ranks)), coupling_(coupling),
          breakpoints_(std::move(breakpoints)) {}

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t level_count() const noexcept { return ranks_.size(); }
    std::size_t rank(std::size_t level) const { return ranks_.at(level); }
    double coupling() const noexcept { return coupling_; }
    double t_final() const { return nodes_.back().t; }
    Eigen::Index dim() const { return nodes_.front().intertwiner.rows(); }

    const FrameNode& node(std::size_t k) const { return nodes_.at(k); }
    const std::vector<FrameNode>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

    std::vector<double> grid() const {
        std::vector<double> g;
        g.reserve(nodes_.size());
        for (const auto& n : nodes_) g.push_back(n.t);
        return g;
    }

    /// Index of the grid node at time t; there is no interpolation between nodes.
    std::size_t node_index(double t) const {
        const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t,
                                         [](const FrameNode& n, double x) { return n.t < x; });
        const double slack = 1e-12 * (1.0 + std::abs(t));
        if (it != nodes_.end() && std::abs(it->t - t) <= slack) return static_cast<std::size_t>(it - nodes_.begin());
        if (it != nodes_.begin() && std::abs((it - 1)->t - t) <= slack)
            return static_cast<std::size_t>(it - nodes_.begin() - 1);
        throw ValidationError("AdiabaticFrame: t = " + detail::format_double(t) + " is not a grid node");
    }

    const ComplexMatrix& initial_projector(std::size_t level) const { return nodes_.front().projectors.at(level); }

    /// max over nodes and levels of ||A P_n(0) A^H - P_n(t_k)||_max
    double max_intertwining_residual() const {
        double worst = 0.0;
        for (const auto& node : nodes_)
            for (std::size_t n = 0; n < level_count(); ++n)
                worst = std::max(worst, max_norm(node.intertwiner * initial_projector(n) * node.intertwiner.adjoint() -
                                                 node.projectors[n]));
        return worst;
    }

private:
    std::vector<FrameNode> nodes_;
    std::vector<std::size_t> ranks_;
    double coupling_;
    std::vector<double> breakpoints_;
};

namespace detail {

/// Unitary factor of the polar decomposition.
inline ComplexMatrix polar_unitary(const ComplexMatrix& a) {
    Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

struct LevelSnapshot {
    std::vector<ComplexMatrix> projectors;  // in reference level order
    std::vector<double> eigenvalues;
    ComplexMatrix generator;                 // G = sum_n dP_n/dt P_n, anti-Hermitian
};

class LevelTracker {
public:
    LevelTracker(const TimeDependentOperator& hmeas, const NumericPolicy& policy)
        : hmeas_(hmeas), policy_(policy) {
        const ZenoDecomposition d0 = decompose(hmeas(0.0, Side::right, policy), std::nullopt, policy);
        tol_ = d0.degeneracy_tol();
        for (const auto& l : d0.levels()) {
            ranks_.push_back(l.projector.rank());
            initial_.projectors.push_back(l.projector.matrix());
            initial_.eigenvalues.push_back(l.eigenvalue);
        }
    }

    const std::vector<std::size_t>& ranks() const noexcept { return ranks_; }
    const LevelSnapshot& initial() const noexcept { return initial_; }
    double degeneracy_tol() const noexcept { return tol_; }

    /// Decomposes H_meas(t), labels levels by maximal overlap with `previous`
    /// and forms the transport generator from dH/dt.
    LevelSnapshot snapshot(double t, Side side, double step, const LevelSnapshot& previous,
                           const std::string& where) const {
        const ZenoDecomposition d = decompose(hmeas_(t, side, policy_), tol_, policy_);
        if (d.size() != ranks_.size())
            throw NumericalError("level crossing detected at " + where + " (t = " + format_double(t) + "): " +
                                 std::to_string(d.size()) + " levels instead of " + std::to_string(ranks_.size()));
        const std::size_t count = d.size();
        std::vector<int> assigned(count, -1);
        std::vector<bool> taken(count, false);
        for (std::size_t n = 0; n < count; ++n) {
            int best = -1;
            double best_overlap = -1.0;
            for (std::size_t j = 0; j < count; ++j) {
                if (taken[j]) continue;
                const double overlap =
                    trace_of_product(previous.projectors[n], d.level(j).projector.matrix()).real() /
                    static_cast<double>(ranks_[n]);
                const bool tie = best >= 0 && std::abs(overlap - best_overlap) <= 1e-9;
                if (best < 0 || (!tie && overlap > best_overlap) ||
                    (tie && std::abs(d.level(j).eigenvalue - previous.eigenvalues[n]) <
                                std::abs(d.level(best).eigenvalue - previous.eigenvalues[n]))) {
                    best = static_cast<int>(j);
                    best_overlap = std::max(best_overlap, overlap);
                }
            }
            if (d.level(best).projector.rank() != ranks_[n])
                throw NumericalError("level crossing detected at " + where + ": rank of level " + std::to_string(n) +
                                     " changed");
            taken[best] = true;
            assigned[n] = best;
        }
        LevelSnapshot out;
        for (std::size_t n = 0; n < count; ++n) {
            out.projectors.push_back(d.level(assigned[n]).projector.matrix());
            out.eigenvalues.push_back(d.level(assigned[n]).eigenvalue);
        }
        const ComplexMatrix dh = hmeas_.derivative(t, side, step);
        const auto dim = dh.rows();
        out.generator = ComplexMatrix::Zero(dim, dim);
        for (std::size_t n = 0; n < count; ++n) {
            const ComplexMatrix dh_pn = dh * out.projectors[n];
            for (std::size_t m = 0; m < count; ++m) {
                if (m == n) continue;
                out.generator += out.projectors[m] * dh_pn / (out.eigenvalues[n] - out.eigenvalues[m]);
            }
        }
        return out;
    }

private:
    const TimeDependentOperator& hmeas_;
    NumericPolicy policy_;
    double tol_ = 0.0;
    std::vector<std::size_t> ranks_;
    LevelSnapshot initial_;
};

inline bool on_grid(std::span<const double> grid, double t) {
    const double slack = 1e-12 * (1.0 + std::abs(t));
    return std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(g - t) <= slack; });
}

inline void validate_grid(std::span<const double> grid, double horizon, const std::vector<double>& breakpoints) {
    if (grid.size() < 2) throw ValidationError("frame grid needs at least two nodes");
    if (grid.front() != 0.0) throw ValidationError("frame grid must start at t = 0");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw ValidationError("frame grid must be strictly increasing");
    if (grid.back() > horizon * (1.0 + 1e-12))
        throw ValidationError("frame grid extends beyond the operator horizon");
    for (double b : breakpoints)
        if (b < grid.back() && !on_grid(grid, b))
            throw ValidationError("frame grid must contain the breakpoint t = " + format_double(b));
}

} // namespace detail

/// Uniform grid of `intervals` steps on [0, t_final] with every breakpoint in
/// (0, t_final) inserted; each piece receives a share of the intervals
/// proportional to its length, rounded up to an even count.
inline std::vector<double> make_grid(double t_final, std::size_t intervals, std::vector<double> breakpoints = {}) {
    if (!(t_final > 0.0) || intervals == 0) throw ValidationError("make_grid: need t_final > 0 and intervals > 0");
    breakpoints = detail::clean_breakpoints(std::move(breakpoints), t_final);
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), breakpoints.begin(), breakpoints.end());
    edges.push_back(t_final);
    std::vector<double> grid{0.0};
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p];
        const double b = edges[p + 1];
        auto count = static_cast<std::size_t>(std::ceil(static_cast<double>(intervals) * (b - a) / t_final));
        count = std::max<std::size_t>(2, count + (count % 2));
        for (std::size_t i = 1; i < count; ++i) grid.push_back(a + (b - a) * static_cast<double>(i) / count);
        grid.push_back(b);
    }
    return grid;
}

/// Grid with every interval bisected.
inline std::vector<double> bisect_grid(std::span<const double> grid) {
    std::vector<double> out;
    out.reserve(2 * grid.size());
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        out.push_back(grid[k]);
        out.push_back(0.5 * (grid[k] + grid[k + 1]));
    }
    out.push_back(grid.back());
    return out;
}

/// Integrates i dA/dt = M(t) A with M = i sum_n (dP_n/dt) P_n by classical RK4
/// on the grid, re-projecting A onto the unitary group after every step.
/// Phases phi_n accumulate K g(t) eps_n(t) with Simpson's rule per interval.
///
/// Throws NumericalError on a level crossing or when the intertwining residual
/// at any node exceeds policy.frame_tol.
inline AdiabaticFrame track_frame(const TimeDependentOperator& hmeas, double coupling, std::span<const double> grid,
                                  const CouplingSchedule& schedule = {}, const NumericPolicy& policy = {}) {
    if (!std::isfinite(coupling)) throw ValidationError("track_frame: K must be finite");
    const auto breakpoints = detail::merge_breakpoints(hmeas.breakpoints(), schedule.breakpoints(), hmeas.horizon());
    detail::validate_grid(grid, hmeas.horizon(), breakpoints);

    const detail::LevelTracker tracker(hmeas, policy);
    const std::size_t levels = tracker.ranks().size();
    const auto dim = hmeas.dim();
    auto is_break = [&](double t) { return detail::on_grid(breakpoints, t); };
    auto node_name = [](std::size_t k) { return "node " + std::to_string(k); };

    const double first_step = grid[1] - grid[0];
    detail::LevelSnapshot at_start =
        tracker.snapshot(grid[0], Side::right, first_step, tracker.initial(), node_name(0));

    std::vector<FrameNode> nodes;
    nodes.reserve(grid.size());
    nodes.push_back(FrameNode{0.0, identity(dim), at_start.projectors, at_start.eigenvalues,
                              std::vector<double>(levels, 0.0)});

    ComplexMatrix a = identity(dim);
    std::vector<double> phases(levels, 0.0);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t0 = grid[k];
        const double t1 = grid[k + 1];
        const double h = t1 - t0;
        if (k > 0 && is_break(t0))
            at_start = tracker.snapshot(t0, Side::right, h, at_start, node_name(k) + " (right limit)");
        const detail::LevelSnapshot mid =
            tracker.snapshot(t0 + 0.5 * h, Side::right, h, at_start, "midpoint after " + node_name(k));
        const detail::LevelSnapshot end = tracker.snapshot(t1, Side::left, h, mid, node_name(k + 1));

        const ComplexMatrix k1 = at_start.generator * a;
        const ComplexMatrix k2 = mid.generator * (a + 0.5 * h * k1);
        const ComplexMatrix k3 = mid.generator * (a + 0.5 * h * k2);
        const ComplexMatrix k4 = end.generator * (a + h * k3);
        a = detail::polar_unitary(a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));

        const double g0 = coupling * schedule(t0, Side::right);
        const double gm = coupling * schedule(t0 + 0.5 * h, Side::right);
        const double g1 = coupling * schedule(t1, Side::left);
        for (std::size_t n = 0; n < levels; ++n)
            phases[n] += h / 6.0 *
                         (g0 * at_start.eigenvalues[n] + 4.0 * gm * mid.eigenvalues[n] + g1 * end.eigenvalues[n]);

        for (std::size_t n = 0; n < levels; ++n) {
            const double residual =
                max_norm(a * nodes.front().projectors[n] * a.adjoint() - end.projectors[n]);
            if (residual > policy.frame_tol)
                throw NumericalError("frame residual " + detail::format_double(residual) + " at " +
                                     node_name(k + 1) + " exceeds tolerance " +
                                     detail::format_double(policy.frame_tol) + "; refine the grid");
        }
        nodes.push_back(FrameNode{t1, a, end.projectors, end.eigenvalues, phases});

        const double next_h = k + 2 < grid.size() ? grid[k + 2] - t1 : h;
        at_start = is_break(t1) ? end : tracker.snapshot(t1, Side::right, next_h, mid, node_name(k + 1));
    }
    return AdiabaticFrame(std::move(nodes), tracker.ranks(), coupling, breakpoints);
}

/// Outcome of the adiabaticity condition |alpha_max / eps_min| << K^2.
struct AdiabaticityReport {
    double eps_min = std::numeric_limits<double>::infinity();  ///< min Bohr gap of K H_meas over nodes
    double alpha_max = 0.0;   ///< max over nodes and levels of sum_n |alpha_mn|^2
    double ratio = 0.0;       ///< alpha_max / eps_min
    double K_squared = 0.0;
    double margin = 0.01;
    bool adiabatic = true;    ///< ratio <= margin * K^2
};

/// alpha_mn = -<m|dH_meas/dt|n> / eps_mn on the instantaneous eigenbasis.
/// For degenerate levels the squared sum runs over all eigenvector pairs,
/// i.e. ||P_m dH P_n||_F^2 / eps_mn^2.
inline AdiabaticityReport adiabaticity_report(const TimeDependentOperator& hmeas, double coupling,
                                              std::span<const double> grid, const NumericPolicy& policy = {}) {
    detail::validate_grid(grid, hmeas.horizon(), hmeas.breakpoints());
    const ZenoDecomposition d0 = decompose(hmeas(0.0, Side::right, policy), std::nullopt, policy);
    const double tol = d0.degeneracy_tol();
    const std::size_t levels = d0.size();

    AdiabaticityReport report;
    report.K_squared = coupling * coupling;
    report.margin = policy.adiabatic_margin;
    double gap_min = std::numeric_limits<double>::infinity();

    auto visit = [&](double t, Side side, double step) {
        const ZenoDecomposition d = decompose(hmeas(t, side, policy), tol, policy);
        if (d.size() != levels)
            throw NumericalError("adiabaticity_report: level structure changes at t = " + detail::format_double(t) +
                                 "; alpha is undefined near a degeneracy");
        if (d.size() < 2) return;
        const ComplexMatrix dh = hmeas.derivative(t, side, step);
        for (std::size_t m = 0; m < d.size(); ++m) {
            double alpha = 0.0;
            for (std::size_t n = 0; n < d.size(); ++n) {
                if (n == m) continue;
                const double bohr = d.level(m).eigenvalue - d.level(n).eigenvalue;
                if (std::abs(bohr) < tol)
                    throw NumericalError("adiabaticity_report: near-degenerate Bohr frequency at t = " +
                                         detail::format_double(t));
                gap_min = std::min(gap_min, std::abs(bohr));
                const ComplexMatrix block = d.level(m).basis.adjoint() * dh * d.level(n).basis;
                alpha += block.squaredNorm() / (bohr * bohr);
            }
            report.alpha_max = std::max(report.alpha_max, alpha);
        }
    };

    const auto& bps = hmeas.breakpoints();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double step = k + 1 < grid.size() ? grid[k + 1] - grid[k] : grid[k] - grid[k - 1];
        const bool is_break = detail::on_grid(bps, grid[k]);
        if (k + 1 == grid.size() || is_break) visit(grid[k], Side::left, step);
        if (k + 1 < grid.size()) visit(grid[k], Side::right, step);
    }
    report.eps_min = std::abs(coupling) * gap_min;
    report.ratio = std::isfinite(report.eps_min) && report.eps_min > 0.0 ? report.alpha_max / report.eps_min : 0.0;
    report.adiabatic = report.ratio <= report.margin * report.K_squared;
    return report;
}

} // namespace zeno
