#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "operator.hpp"

namespace zeno {

/// One Zeno subspace: an eigenvalue of the measurement Hamiltonian together
/// with the projector onto its (possibly degenerate) eigenspace.
struct ZenoLevel {
    double eigenvalue = 0.0;
    Projector projector;
    ComplexMatrix basis;  ///< orthonormal eigenvectors spanning the level
};

/// Spectral decomposition H = sum_n eps_n P_n grouped into Zeno levels,
/// sorted by ascending eigenvalue.
class ZenoDecomposition {
public:
    ZenoDecomposition(std::vector<ZenoLevel> levels, double degeneracy_tol, std::vector<std::string> warnings)
        : levels_(std::move(levels)), degeneracy_tol_(degeneracy_tol), warnings_(std::move(warnings)) {}

    const std::vector<ZenoLevel>& levels() const noexcept { return levels_; }
    const ZenoLevel& level(std::size_t n) const { return levels_.at(n); }
    std::size_t size() const noexcept { return levels_.size(); }
    double degeneracy_tol() const noexcept { return degeneracy_tol_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    Eigen::Index dim() const { return levels_.front().projector.dim(); }

    /// sum_n eps_n P_n
    ComplexMatrix reconstruct() const {
        ComplexMatrix out = ComplexMatrix::Zero(dim(), dim());
        for (const auto& l : levels_) out += l.eigenvalue * l.projector.matrix();
        return out;
    }

    /// Smallest gap between distinct levels; +inf for a single level.
    double min_gap() const {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < levels_.size(); ++i)
            gap = std::min(gap, levels_[i].eigenvalue - levels_[i - 1].eigenvalue);
        return gap;
    }

    /// Index of the level whose projector contains `p` (tr(P_n p) = rank p).
    std::optional<std::size_t> level_containing(const Projector& p, double tol = 1e-8) const {
        for (std::size_t n = 0; n < levels_.size(); ++n) {
            const double overlap = trace_of_product(levels_[n].projector.matrix(), p.matrix()).real();
            if (std::abs(overlap - static_cast<double>(p.rank())) <= tol) return n;
        }
        return std::nullopt;
    }

private:
    std::vector<ZenoLevel> levels_;
    double degeneracy_tol_;
    std::vector<std::string> warnings_;
};

/// Default clustering tolerance: 1e-8 of the spectral range. A spectrum whose
/// range is only rounding noise counts as flat and uses max(1, |eps|max).
inline double default_degeneracy_tol(const RealVector& ascending, const NumericPolicy& policy = {}) {
    const double range = ascending(ascending.size() - 1) - ascending(0);
    const double scale = std::max(1.0, ascending.cwiseAbs().maxCoeff());
    return policy.degeneracy_rel_tol * (range > 1e-6 * scale ? range : scale);
}

inline ZenoDecomposition decompose(const Eigensystem& es, double tol, const NumericPolicy& policy = {}) {
    if (!(tol >= 0.0)) throw ValidationError("decompose: degeneracy tolerance must be non-negative");
    std::vector<ZenoLevel> levels;
    std::vector<std::string> warnings;
    const auto dim = es.values.size();
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= dim; ++i) {
        if (i < dim) {
            const double gap = es.values(i) - es.values(i - 1);
            if (gap > 0.5 * tol && gap < 2.0 * tol)
                warnings.push_back("ambiguous clustering: gap " + detail::format_double(gap) +
                                   " between eigenvalues " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                   " is within a factor 2 of the degeneracy tolerance");
            if (gap <= tol) continue;
        }
        const Eigen::Index count = i - start;
        const ComplexMatrix basis = es.vectors.middleCols(start, count);
        const double spread = es.values(i - 1) - es.values(start);
        if (spread > tol)
            warnings.push_back("level " + std::to_string(levels.size()) + " has internal spread " +
                               detail::format_double(spread) + " above the degeneracy tolerance");
        levels.push_back(ZenoLevel{es.values.segment(start, count).mean(),
                                   Projector::from_orthonormal_columns(basis, policy), basis});
        start = i;
    }
    return ZenoDecomposition(std::move(levels), tol, std::move(warnings));
}

inline ZenoDecomposition decompose(const HermitianOperator& h, std::optional<double> degeneracy_tol = {},
                                   const NumericPolicy& policy = {}) {
    const Eigensystem es = eigh(h);
    return decompose(es, degeneracy_tol.value_or(default_degeneracy_tol(es.values, policy)), policy);
}

} // namespace zeno
