#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "zeno/zeno.hpp"

namespace testing_support {

using zeno::Complex;
using zeno::ComplexMatrix;
using zeno::ComplexVector;

inline constexpr std::uint64_t seed = 20240611;
inline constexpr int property_cases = 100;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index dim) {
    std::normal_distribution<double> g;
    ComplexMatrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index dim) {
    const ComplexMatrix a = random_matrix(rng, dim);
    return 0.5 * (a + a.adjoint());
}

/// Haar-ish unitary from the QR factorisation of a Gaussian matrix.
inline ComplexMatrix random_unitary(std::mt19937_64& rng, Eigen::Index dim) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(rng, dim));
    return qr.householderQ() * ComplexMatrix::Identity(dim, dim);
}

/// Hermitian matrix with the given spectrum in a random basis.
inline ComplexMatrix with_spectrum(std::mt19937_64& rng, const std::vector<double>& eigenvalues) {
    const auto dim = static_cast<Eigen::Index>(eigenvalues.size());
    const ComplexMatrix u = random_unitary(rng, dim);
    zeno::RealVector d(dim);
    for (Eigen::Index i = 0; i < dim; ++i) d(i) = eigenvalues[static_cast<std::size_t>(i)];
    const ComplexMatrix m = u * d.cast<Complex>().asDiagonal() * u.adjoint();
    return 0.5 * (m + m.adjoint());
}

inline ComplexVector random_state(std::mt19937_64& rng, Eigen::Index dim) {
    std::normal_distribution<double> g;
    ComplexVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    return v / v.norm();
}

inline ComplexMatrix random_density(std::mt19937_64& rng, Eigen::Index dim) {
    const ComplexMatrix a = random_matrix(rng, dim);
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

/// exp(X) by scaling and squaring of a truncated Taylor series; independent of
/// any eigendecomposition.
inline ComplexMatrix taylor_exp(const ComplexMatrix& x) {
    const double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    double scaled = norm;
    while (scaled > 0.25) {
        scaled *= 0.5;
        ++squarings;
    }
    const ComplexMatrix y = x / std::pow(2.0, squarings);
    ComplexMatrix term = ComplexMatrix::Identity(x.rows(), x.cols());
    ComplexMatrix sum = term;
    for (int k = 1; k <= 24; ++k) {
        term = term * y / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace testing_support
