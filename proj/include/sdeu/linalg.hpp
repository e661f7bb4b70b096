#pragma once

#include "sdeu/rng.hpp"

#include <Eigen/Dense>

#include <string>

namespace sdeu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// n x D sample matrix, one draw per row.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Eigenvalue floor applied by every correlation repair.
inline constexpr double kPdFloor = 1e-8;
/// Relative Frobenius tolerance for L L^T against its source.
inline constexpr double kCholeskyTolerance = 1e-10;

/// Lower-triangular factor with strictly positive diagonal.
struct CholeskyFactor {
    Matrix lower;

    [[nodiscard]] Eigen::Index dim() const { return lower.rows(); }
    [[nodiscard]] Matrix reconstruct() const { return lower * lower.transpose(); }
};

/// Symmetric, unit-diagonal correlation matrix.
///
/// Holds whatever it is given; `violation()` reports the first broken
/// invariant so deserialized or hand-edited specs can be diagnosed rather
/// than rejected outright.
struct CorrelationMatrix {
    Matrix entries;

    static CorrelationMatrix identity(Eigen::Index dim) { return {Matrix::Identity(dim, dim)}; }
    /// Validating constructor; throws InvalidParameter on a broken invariant.
    static CorrelationMatrix checked(Matrix m);

    [[nodiscard]] Eigen::Index dim() const { return entries.rows(); }
    /// Empty when valid, else a description of the failing rule.
    [[nodiscard]] std::string violation() const;
};

/// Cholesky-Banachiewicz factorization. Throws NotPositiveDefinite when a pivot is <= 0.
CholeskyFactor cholesky(const Matrix& m);

/// Clip eigenvalues to >= floor and re-symmetrize; when the input had a unit
/// diagonal the result is rescaled back to one. Inputs whose spectrum already
/// clears the floor are returned unchanged.
Matrix nearest_pd_repair(const Matrix& m, double floor = kPdFloor);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

/// Random correlation from a low-rank Gaussian loading model blended towards
/// the identity. strength 0 gives the identity, 1 the raw factor model.
CorrelationMatrix sample_correlation(Eigen::Index dim, double strength, RngStream& rng);

/// Relative Frobenius error of L L^T against `source`.
double reconstruction_error(const CholeskyFactor& factor, const Matrix& source);

}  // namespace sdeu
