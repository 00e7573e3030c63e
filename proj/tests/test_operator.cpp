#include <gtest/gtest.h>

#include "support.hpp"

using namespace zeno;
using namespace testing_support;

TEST(HermitianOperator, RejectsNonHermitianAndNonSquare) {
    ComplexMatrix m(2, 2);
    m << 1, 2, 0, 1;
    EXPECT_THROW(HermitianOperator{m}, ValidationError);
    EXPECT_THROW(HermitianOperator{ComplexMatrix(2, 3)}, ValidationError);
    EXPECT_THROW(HermitianOperator{ComplexMatrix(0, 0)}, ValidationError);
    ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(HermitianOperator{bad}, ValidationError);
}

TEST(HermitianOperator, SymmetrisesSubToleranceDefect) {
    ComplexMatrix m = pauli::x();
    m(0, 1) += 1e-13;
    const HermitianOperator h(m);
    EXPECT_EQ(max_abs(h.matrix() - h.matrix().adjoint()), 0.0);
}

TEST(UnitaryOperator, ValidatesUnitarity) {
    EXPECT_NO_THROW(UnitaryOperator{pauli::y()});
    EXPECT_THROW(UnitaryOperator{2.0 * pauli::x()}, ValidationError);
    EXPECT_EQ(max_abs(UnitaryOperator::identity(3).matrix() - ComplexMatrix::Identity(3, 3)), 0.0);
}

TEST(Projector, RankAndValidation) {
    std::mt19937_64 rng(seed);
    const ComplexMatrix u = random_unitary(rng, 5);
    const Projector p = Projector::from_orthonormal_columns(u.leftCols(2));
    EXPECT_EQ(p.rank(), 2u);
    EXPECT_THROW(Projector{0.5 * ComplexMatrix::Identity(2, 2)}, ValidationError);
    EXPECT_EQ(Projector{ComplexMatrix::Zero(3, 3)}.rank(), 0u);
}

TEST(DensityMatrix, Validation) {
    EXPECT_THROW(DensityMatrix{ComplexMatrix::Identity(2, 2)}, ValidationError);  // trace 2
    ComplexMatrix neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    EXPECT_THROW(DensityMatrix{neg}, ValidationError);
    EXPECT_THROW(DensityMatrix::pure(ComplexVector::Zero(2)), ValidationError);
    const Projector p(ComplexMatrix(Eigen::Vector3cd(1, 1, 0).asDiagonal()));
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(p);
    EXPECT_NEAR(mixed.matrix()(0, 0).real(), 0.5, 1e-15);
    EXPECT_THROW(DensityMatrix::maximally_mixed(Projector{ComplexMatrix::Zero(2, 2)}), ValidationError);
}

TEST(Eigh, ReconstructsAndOrthonormalProperty) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dims(1, 9);
    for (int c = 0; c < property_cases; ++c) {
        const ComplexMatrix m = random_hermitian(rng, dims(rng));
        const Eigensystem es = eigh(m);
        const ComplexMatrix v = es.vectors;
        EXPECT_LT(max_abs(v * es.values.cast<Complex>().asDiagonal() * v.adjoint() - m), 1e-10 * (1 + max_abs(m)));
        EXPECT_LT(max_abs(v.adjoint() * v - ComplexMatrix::Identity(v.cols(), v.cols())), 1e-12);
        for (Eigen::Index i = 1; i < es.values.size(); ++i) EXPECT_LE(es.values(i - 1), es.values(i));
        for (Eigen::Index col = 0; col < v.cols(); ++col) {
            Eigen::Index pivot;
            v.col(col).cwiseAbs().maxCoeff(&pivot);
            EXPECT_GT(v(pivot, col).real(), 0.0);
            EXPECT_NEAR(v(pivot, col).imag(), 0.0, 1e-14);
        }
    }
}

TEST(Eigh, PauliSpectra) {
    for (const ComplexMatrix& s : {pauli::x(), pauli::y(), pauli::z()}) {
        const auto es = eigh(s);
        EXPECT_NEAR(es.values(0), -1.0, 1e-14);
        EXPECT_NEAR(es.values(1), 1.0, 1e-14);
    }
}

TEST(MatrixExpUnitary, MatchesTaylorOracleProperty) {
    std::mt19937_64 rng(seed + 1);
    std::uniform_int_distribution<int> dims(1, 8);
    std::uniform_real_distribution<double> times(-3.0, 3.0);
    for (int c = 0; c < property_cases; ++c) {
        const ComplexMatrix m = random_hermitian(rng, dims(rng));
        const double dt = times(rng);
        const UnitaryOperator u = matrix_exp_unitary(HermitianOperator(m), dt);
        const ComplexMatrix oracle = taylor_exp(-imag_unit * dt * m);
        EXPECT_LT(max_abs(u.matrix() - oracle), 1e-10);
        EXPECT_LT(max_abs(u.matrix().adjoint() * u.matrix() - ComplexMatrix::Identity(m.rows(), m.rows())), 1e-12);
    }
}

TEST(MatrixExpUnitary, ZeroStepIsIdentityAndNonFiniteRejected) {
    const HermitianOperator h(pauli::z());
    EXPECT_LT(max_abs(matrix_exp_unitary(h, 0.0).matrix() - identity(2)), 1e-15);
    EXPECT_THROW(matrix_exp_unitary(h, std::numeric_limits<double>::infinity()), ValidationError);
}

TEST(TraceProduct, CyclicInvarianceProperty) {
    std::mt19937_64 rng(seed + 2);
    std::uniform_int_distribution<int> dims(1, 6);
    std::uniform_int_distribution<int> lengths(2, 5);
    for (int c = 0; c < property_cases; ++c) {
        const int dim = dims(rng);
        std::vector<ComplexMatrix> ms;
        for (int k = lengths(rng); k > 0; --k) ms.push_back(random_matrix(rng, dim));
        const Complex base = trace_product(ms);
        std::rotate(ms.begin(), ms.begin() + 1, ms.end());
        const Complex rotated = trace_product(ms);
        EXPECT_LE(std::abs(base - rotated), 1e-12 * std::max(1.0, std::abs(base)));
    }
}

TEST(TraceProduct, DimensionMismatchAndEmpty) {
    EXPECT_THROW(trace_product({identity(2), identity(3)}), ValidationError);
    EXPECT_THROW(trace_product(std::span<const ComplexMatrix>{}), ValidationError);
    EXPECT_EQ(trace_product({identity(4)}), Complex(4.0));
}

TEST(TensorProduct, MixedProductProperty) {
    std::mt19937_64 rng(seed + 3);
    for (int c = 0; c < property_cases; ++c) {
        const ComplexMatrix a = random_matrix(rng, 2), b = random_matrix(rng, 3);
        const ComplexMatrix x = random_matrix(rng, 2), y = random_matrix(rng, 3);
        const ComplexMatrix lhs = tensor_product(a, b) * tensor_product(x, y);
        const ComplexMatrix rhs = tensor_product(a * x, b * y);
        EXPECT_LT(max_abs(lhs - rhs), 1e-12 * (1 + max_abs(rhs)));
    }
}

TEST(TensorProduct, SiteZeroIsMostSignificant) {
    const ComplexMatrix z1 = pauli::embed(pauli::z(), 0, 2);
    // basis |s1 s2>, index = 2 s1 + s2; Z on site 1 flips sign on indices 2, 3
    EXPECT_EQ(z1(0, 0), Complex(1.0));
    EXPECT_EQ(z1(1, 1), Complex(1.0));
    EXPECT_EQ(z1(2, 2), Complex(-1.0));
    EXPECT_EQ(z1(3, 3), Complex(-1.0));
}

TEST(Pauli, Algebra) {
    const ComplexMatrix x = pauli::x(), y = pauli::y(), z = pauli::z();
    EXPECT_LT(max_abs(x * y - imag_unit * z), 1e-15);
    EXPECT_LT(max_abs(x * x - identity(2)), 1e-15);
    EXPECT_LT(max_abs(y * z + z * y), 1e-15);
}
