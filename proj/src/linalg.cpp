#include "sdeu/linalg.hpp"

#include "sdeu/error.hpp"

#include <algorithm>
#include <cmath>

namespace sdeu {
namespace {

bool has_unit_diagonal(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (std::abs(m(i, i) - 1.0) > 1e-12) return false;
    }
    return true;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix rescale_to_unit_diagonal(const Matrix& m) {
    const Vector inv_sd = m.diagonal().cwiseSqrt().cwiseInverse();
    Matrix out = inv_sd.asDiagonal() * m * inv_sd.asDiagonal();
    out = symmetrize(out);
    out.diagonal().setOnes();
    return out;
}

}  // namespace

CorrelationMatrix CorrelationMatrix::checked(Matrix m) {
    CorrelationMatrix c{std::move(m)};
    if (auto why = c.violation(); !why.empty()) throw InvalidParameter(why);
    return c;
}

std::string CorrelationMatrix::violation() const {
    if (entries.rows() == 0 || entries.rows() != entries.cols()) return "correlation not square";
    if (!entries.allFinite()) return "correlation has non-finite entries";
    if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        return "correlation not symmetric";
    }
    if (!has_unit_diagonal(entries)) return "correlation diagonal not unit";
    // Small slack under the floor: repaired matrices sit exactly on it.
    if (min_eigenvalue(entries) < kPdFloor * (1.0 - 1e-6)) return "correlation not positive definite";
    return {};
}

CholeskyFactor cholesky(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("cholesky: matrix not square");
    const Eigen::Index n = m.rows();
    Matrix lower = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            if (i == j) {
                if (!(s > 0.0)) {
                    throw NotPositiveDefinite("cholesky: non-positive pivot at row " +
                                              std::to_string(i));
                }
                lower(i, i) = std::sqrt(s);
            } else {
                lower(i, j) = s / lower(j, j);
            }
        }
    }
    return {std::move(lower)};
}

double reconstruction_error(const CholeskyFactor& factor, const Matrix& source) {
    const double denom = source.norm();
    const double diff = (factor.reconstruct() - source).norm();
    return denom > 0.0 ? diff / denom : diff;
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Matrix nearest_pd_repair(const Matrix& m, double floor) {
    if (m.rows() != m.cols()) throw DimensionMismatch("nearest_pd_repair: matrix not square");
    const Matrix sym = symmetrize(m);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.eigenvalues().minCoeff() >= floor) return m;

    const bool unit = has_unit_diagonal(m);
    const Matrix& vecs = solver.eigenvectors();
    // Rescaling to unit diagonal can pull the spectrum slightly under the
    // clip level, so the clip level is raised until the result clears floor.
    double clip = floor;
    Matrix out;
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Vector clipped = solver.eigenvalues().cwiseMax(clip);
        out = symmetrize(vecs * clipped.asDiagonal() * vecs.transpose());
        if (unit) out = rescale_to_unit_diagonal(out);
        if (min_eigenvalue(out) >= floor) return out;
        clip *= 2.0;
    }
    return out;
}

CorrelationMatrix sample_correlation(Eigen::Index dim, double strength, RngStream& rng) {
    if (dim < 1) throw InvalidParameter("sample_correlation: dim must be >= 1");
    if (!(strength >= 0.0 && strength <= 1.0)) {
        throw InvalidParameter("sample_correlation: strength must lie in [0, 1]");
    }
    if (dim == 1) return CorrelationMatrix::identity(1);

    const Eigen::Index k = std::max<Eigen::Index>(1, (dim + 1) / 2);
    Matrix loading(dim, k);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) loading(i, j) = rng.normal();
    }
    Matrix cov = loading * loading.transpose();
    for (Eigen::Index i = 0; i < dim; ++i) cov(i, i) += 0.1 + rng.uniform();

    Matrix corr = rescale_to_unit_diagonal(cov);
    corr = strength * corr + (1.0 - strength) * Matrix::Identity(dim, dim);
    corr.diagonal().setOnes();
    return {nearest_pd_repair(corr, kPdFloor)};
}

}  // namespace sdeu
