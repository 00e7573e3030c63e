#pragma once

// Dense complex operator algebra: validated operator types, Hermitian
// eigendecomposition, unitary exponentials, traces and Kronecker products.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "numeric_policy.hpp"

namespace zeno {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex imag_unit{0.0, 1.0};

inline double max_norm(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline ComplexMatrix identity(Eigen::Index dim) {
    return ComplexMatrix::Identity(dim, dim);
}

namespace detail {

inline void require_square_finite(const ComplexMatrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols())
        throw ValidationError(std::string(what) + ": matrix must be square and non-empty");
    if (!m.allFinite()) throw ValidationError(std::string(what) + ": matrix has non-finite entries");
}

inline double hermiticity_defect(const ComplexMatrix& m) {
    return max_norm(m - m.adjoint());
}

} // namespace detail

/// Self-adjoint matrix. Construction symmetrises away the sub-tolerance
/// anti-Hermitian remainder so downstream eigensolvers see an exact M = M^H.
class HermitianOperator {
public:
    explicit HermitianOperator(ComplexMatrix m, const NumericPolicy& policy = {}) {
        detail::require_square_finite(m, "HermitianOperator");
        const double defect = detail::hermiticity_defect(m);
        if (defect > policy.hermitian_tol * (1.0 + max_norm(m)))
            throw ValidationError("HermitianOperator: ||M - M^H||_max = " +
                                  detail::format_double(defect) + " exceeds tolerance");
        matrix_ = 0.5 * (m + m.adjoint());
    }

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Eigen::Index dim() const noexcept { return matrix_.rows(); }

private:
    ComplexMatrix matrix_;
};

class UnitaryOperator {
public:
    explicit UnitaryOperator(ComplexMatrix m, const NumericPolicy& policy = {}) : matrix_(std::move(m)) {
        detail::require_square_finite(matrix_, "UnitaryOperator");
        const double defect = max_norm(matrix_.adjoint() * matrix_ - zeno::identity(matrix_.rows()));
        if (defect > policy.unitary_tol)
            throw ValidationError("UnitaryOperator: ||U^H U - I||_max = " + detail::format_double(defect));
    }

    static UnitaryOperator identity(Eigen::Index dim) { return UnitaryOperator(zeno::identity(dim)); }

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Eigen::Index dim() const noexcept { return matrix_.rows(); }

private:
    ComplexMatrix matrix_;
};

/// Orthogonal projector with its (integer) rank.
class Projector {
public:
    explicit Projector(ComplexMatrix m, const NumericPolicy& policy = {}) {
        detail::require_square_finite(m, "Projector");
        if (detail::hermiticity_defect(m) > policy.projector_tol)
            throw ValidationError("Projector: matrix is not Hermitian");
        if (max_norm(m * m - m) > policy.projector_tol)
            throw ValidationError("Projector: matrix is not idempotent");
        const double tr = m.trace().real();
        const double rounded = std::round(tr);
        if (std::abs(tr - rounded) > policy.rank_tol)
            throw ValidationError("Projector: trace " + detail::format_double(tr) + " is not an integer");
        matrix_ = 0.5 * (m + m.adjoint());
        rank_ = static_cast<std::size_t>(std::max(0.0, rounded));
    }

    /// Projector onto the span of orthonormal columns.
    static Projector from_orthonormal_columns(const ComplexMatrix& columns, const NumericPolicy& policy = {}) {
        return Projector(columns * columns.adjoint(), policy);
    }

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Eigen::Index dim() const noexcept { return matrix_.rows(); }
    std::size_t rank() const noexcept { return rank_; }

private:
    ComplexMatrix matrix_;
    std::size_t rank_ = 0;
};

class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m, const NumericPolicy& policy = {}) {
        detail::require_square_finite(m, "DensityMatrix");
        if (detail::hermiticity_defect(m) > policy.hermitian_tol * (1.0 + max_norm(m)))
            throw ValidationError("DensityMatrix: matrix is not Hermitian");
        matrix_ = 0.5 * (m + m.adjoint());
        const double tr = matrix_.trace().real();
        if (std::abs(tr - 1.0) > policy.density_trace_tol)
            throw ValidationError("DensityMatrix: trace " + detail::format_double(tr) + " != 1");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -policy.density_eig_tol)
            throw ValidationError("DensityMatrix: negative eigenvalue " +
                                  detail::format_double(solver.eigenvalues().minCoeff()));
    }

    static DensityMatrix pure(const ComplexVector& state, const NumericPolicy& policy = {}) {
        const double norm = state.norm();
        if (!(norm > 0.0)) throw ValidationError("DensityMatrix::pure: zero state");
        const ComplexVector psi = state / norm;
        return DensityMatrix(psi * psi.adjoint(), policy);
    }

    /// Normalised restriction of the identity to a subspace: P / rank.
    static DensityMatrix maximally_mixed(const Projector& p, const NumericPolicy& policy = {}) {
        if (p.rank() == 0) throw ValidationError("DensityMatrix::maximally_mixed: rank-0 projector");
        return DensityMatrix(p.matrix() / static_cast<double>(p.rank()), policy);
    }

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Eigen::Index dim() const noexcept { return matrix_.rows(); }

private:
    ComplexMatrix matrix_;
};

struct Eigensystem {
    RealVector values;   ///< ascending
    ComplexMatrix vectors;  ///< orthonormal columns, phase-fixed
};

/// Multiplies each column by a phase so its largest-magnitude entry is real
/// positive. Among entries within 1e-12 of the maximum the first one wins.
inline void fix_column_phases(ComplexMatrix& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        const double peak = vectors.col(c).cwiseAbs().maxCoeff();
        if (peak == 0.0) continue;
        Eigen::Index pivot = 0;
        while (std::abs(vectors(pivot, c)) < peak * (1.0 - 1e-12)) ++pivot;
        const Complex z = vectors(pivot, c);
        vectors.col(c) *= std::conj(z) / std::abs(z);
    }
}

/// Hermitian eigendecomposition H = V diag(lambda) V^H with ascending
/// eigenvalues.
inline Eigensystem eigh(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) throw NumericalError("eigh: eigensolver did not converge");
    Eigensystem out{solver.eigenvalues(), solver.eigenvectors()};
    fix_column_phases(out.vectors);
    return out;
}

inline Eigensystem eigh(const ComplexMatrix& m, const NumericPolicy& policy = {}) {
    return eigh(HermitianOperator(m, policy));
}

/// exp(-i H dt) through the spectral decomposition of H.
inline ComplexMatrix unitary_exponential(const Eigensystem& es, double dt) {
    ComplexVector phases(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) phases(i) = std::exp(-imag_unit * es.values(i) * dt);
    return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

inline UnitaryOperator matrix_exp_unitary(const HermitianOperator& h, double dt,
                                          const NumericPolicy& policy = {}) {
    if (!std::isfinite(dt)) throw ValidationError("matrix_exp_unitary: dt must be finite");
    return UnitaryOperator(unitary_exponential(eigh(h), dt), policy);
}

/// tr(A B) without forming the product.
inline Complex trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a.transpose().array() * b.array()).sum();
}

/// Trace of the ordered product m_0 m_1 ... m_{k-1}.
inline Complex trace_product(std::span<const ComplexMatrix> ms) {
    if (ms.empty()) throw ValidationError("trace_product: empty list");
    const auto dim = ms.front().rows();
    for (const auto& m : ms)
        if (m.rows() != dim || m.cols() != dim) throw ValidationError("trace_product: dimension mismatch");
    if (ms.size() == 1) return ms.front().trace();
    ComplexMatrix left = ms.front();
    for (std::size_t i = 1; i + 1 < ms.size(); ++i) left = left * ms[i];
    return trace_of_product(left, ms.back());
}

inline Complex trace_product(std::initializer_list<ComplexMatrix> ms) {
    return trace_product(std::span<const ComplexMatrix>(ms.begin(), ms.size()));
}

/// Kronecker product a (x) b; the first factor indexes the slow block.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols())
        throw ValidationError("tensor_product: factors must be square");
    const auto na = a.rows();
    const auto nb = b.rows();
    ComplexMatrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
    return out;
}

namespace pauli {

inline ComplexMatrix x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline ComplexMatrix y() {
    ComplexMatrix m(2, 2);
    m << 0, -imag_unit, imag_unit, 0;
    return m;
}

/// diag(1, -1): index 0 is spin up.
inline ComplexMatrix z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

/// Single-site operator `op` acting on `site` (0-based) of an `n`-site chain.
inline ComplexMatrix embed(const ComplexMatrix& op, int site, int n) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int j = 0; j < n; ++j) out = tensor_product(out, j == site ? op : zeno::identity(2));
    return out;
}

} // namespace pauli

} // namespace zeno
