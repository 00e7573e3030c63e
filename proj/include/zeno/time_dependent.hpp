#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "operator.hpp"

namespace zeno {

/// Which one-sided limit to take at a breakpoint. Away from breakpoints both
/// sides evaluate to the same value.
enum class Side { left, right };

/// Closed interval between consecutive breakpoints (or horizon edges).
struct Piece {
    double begin = 0.0;
    double end = 0.0;
};

namespace detail {

inline std::vector<double> clean_breakpoints(std::vector<double> bps, double horizon) {
    std::erase_if(bps, [horizon](double b) { return !(b > 0.0 && b < horizon); });
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return bps;
}

inline std::vector<double> merge_breakpoints(const std::vector<double>& a, const std::vector<double>& b,
                                             double horizon) {
    std::vector<double> all = a;
    all.insert(all.end(), b.begin(), b.end());
    return clean_breakpoints(std::move(all), horizon);
}

/// Piece in `breakpoints` that holds t, preferring the piece ending at t when
/// side == left and t is a breakpoint.
inline Piece piece_containing(const std::vector<double>& breakpoints, double horizon, double t, Side side) {
    double begin = 0.0;
    double end = horizon;
    for (double b : breakpoints) {
        if (b < t || (b == t && side == Side::right)) {
            begin = b;
        } else {
            end = b;
            break;
        }
    }
    return {begin, end};
}

} // namespace detail

/// Scalar coupling envelope g(t) multiplying K * H_meas(t); the default is 1.
/// Theta-function (pulsed) measurements are written as a piecewise-constant
/// schedule with its switching times as breakpoints.
class CouplingSchedule {
public:
    using Function = std::function<double(double, Side)>;

    CouplingSchedule() = default;
    CouplingSchedule(Function g, std::vector<double> breakpoints)
        : g_(std::move(g)), breakpoints_(std::move(breakpoints)) {
        std::sort(breakpoints_.begin(), breakpoints_.end());
    }

    /// g(t) = 1 for t >= switch_on, 0 before.
    static CouplingSchedule step_on(double switch_on) {
        return CouplingSchedule(
            [switch_on](double t, Side side) {
                if (t > switch_on) return 1.0;
                if (t < switch_on) return 0.0;
                return side == Side::right ? 1.0 : 0.0;
            },
            {switch_on});
    }

    double operator()(double t, Side side = Side::right) const { return g_ ? g_(t, side) : 1.0; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    bool is_constant() const noexcept { return !g_; }

private:
    Function g_;
    std::vector<double> breakpoints_;
};

/// Piecewise-smooth Hermitian operator on [0, horizon].
class TimeDependentOperator {
public:
    using Evaluator = std::function<ComplexMatrix(double, Side)>;

    TimeDependentOperator(double horizon, Evaluator evaluator, std::vector<double> breakpoints = {},
                          Evaluator derivative = {})
        : horizon_(horizon),
          evaluator_(std::move(evaluator)),
          derivative_(std::move(derivative)),
          breakpoints_(detail::clean_breakpoints(std::move(breakpoints), horizon)) {
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw ValidationError("TimeDependentOperator: horizon must be positive and finite");
        if (!evaluator_) throw ValidationError("TimeDependentOperator: empty evaluator");
        dim_ = evaluator_(0.0, Side::right).rows();
    }

    static TimeDependentOperator constant(const HermitianOperator& h, double horizon) {
        ComplexMatrix m = h.matrix();
        const auto dim = m.rows();
        return TimeDependentOperator(
            horizon, [m](double, Side) { return m; }, {},
            [dim](double, Side) { return ComplexMatrix(ComplexMatrix::Zero(dim, dim)); });
    }

    /// A smooth operator given as a plain function of time.
    static TimeDependentOperator smooth(double horizon, std::function<ComplexMatrix(double)> f,
                                        std::function<ComplexMatrix(double)> df = {}) {
        Evaluator d;
        if (df) d = [df](double t, Side) { return df(t); };
        return TimeDependentOperator(horizon, [f](double t, Side) { return f(t); }, {}, std::move(d));
    }

    double horizon() const noexcept { return horizon_; }
    Eigen::Index dim() const noexcept { return dim_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    bool has_analytic_derivative() const noexcept { return static_cast<bool>(derivative_); }

    ComplexMatrix raw(double t, Side side = Side::right) const { return evaluator_(t, side); }

    HermitianOperator operator()(double t, Side side = Side::right, const NumericPolicy& policy = {}) const {
        return HermitianOperator(evaluator_(t, side), policy);
    }

    Piece piece_at(double t, Side side) const { return detail::piece_containing(breakpoints_, horizon_, t, side); }

    /// dH/dt at t inside the smooth piece selected by `side`. Without an
    /// analytic derivative a fourth-order stencil of spacing
    /// min(0.05 * step_hint, piece / 8) is used, shifted to one side near the
    /// piece edges so it never crosses a breakpoint.
    ComplexMatrix derivative(double t, Side side, double step_hint) const {
        if (derivative_) return derivative_(t, side);
        const Piece piece = piece_at(t, side);
        const double length = piece.end - piece.begin;
        const double delta = std::min(0.05 * step_hint, length / 8.0);
        if (!(delta > 0.0)) throw ValidationError("TimeDependentOperator::derivative: degenerate piece");
        auto at = [&](double x) {
            if (x <= piece.begin) return evaluator_(piece.begin, Side::right);
            if (x >= piece.end) return evaluator_(piece.end, Side::left);
            return evaluator_(x, Side::right);
        };
        if (t - 2 * delta >= piece.begin && t + 2 * delta <= piece.end) {
            return (at(t - 2 * delta) - 8.0 * at(t - delta) + 8.0 * at(t + delta) - at(t + 2 * delta)) /
                   (12.0 * delta);
        }
        if (t - piece.begin < piece.end - t) {
            return (-25.0 * at(t) + 48.0 * at(t + delta) - 36.0 * at(t + 2 * delta) + 16.0 * at(t + 3 * delta) -
                    3.0 * at(t + 4 * delta)) /
                   (12.0 * delta);
        }
        return (25.0 * at(t) - 48.0 * at(t - delta) + 36.0 * at(t - 2 * delta) - 16.0 * at(t - 3 * delta) +
                3.0 * at(t - 4 * delta)) /
               (12.0 * delta);
    }

private:
    double horizon_;
    Evaluator evaluator_;
    Evaluator derivative_;
    std::vector<double> breakpoints_;
    Eigen::Index dim_ = 0;
};

/// H0(t) + K g(t) Hmeas(t) as a single operator.
inline TimeDependentOperator combine(const TimeDependentOperator& h0, double coupling,
                                     const TimeDependentOperator& hmeas, const CouplingSchedule& schedule = {}) {
    if (h0.dim() != hmeas.dim()) throw ValidationError("combine: operator dimensions differ");
    const double horizon = std::min(h0.horizon(), hmeas.horizon());
    auto bps = detail::merge_breakpoints(h0.breakpoints(), hmeas.breakpoints(), horizon);
    bps = detail::merge_breakpoints(bps, schedule.breakpoints(), horizon);
    return TimeDependentOperator(
        horizon,
        [h0, hmeas, coupling, schedule](double t, Side side) {
            return ComplexMatrix(h0.raw(t, side) + coupling * schedule(t, side) * hmeas.raw(t, side));
        },
        std::move(bps));
}

} // namespace zeno
