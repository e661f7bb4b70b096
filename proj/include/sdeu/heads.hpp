#pragma once

#include "sdeu/linalg.hpp"
#include "sdeu/rng.hpp"

#include <vector>

namespace sdeu {

/// Multivariate Gaussian mixture over one D-dimensional cross-section.
struct GmmParams {
    std::vector<double> weights;
    Matrix means;                     // K x D
    std::vector<Matrix> scale_chols;  // K lower-triangular D x D

    [[nodiscard]] std::size_t n_components() const { return weights.size(); }
    [[nodiscard]] Eigen::Index dims() const { return means.cols(); }
    /// Throws InvalidParameter on a broken invariant.
    void validate() const;
};

/// Mixture of Azzalini-Capitanio multivariate skew-t components.
struct SkewTParams {
    std::vector<double> weights;
    std::vector<double> dof;          // nu_k > 2
    Matrix locations;                 // K x D
    std::vector<Matrix> scale_chols;  // K lower-triangular D x D, Sigma_k = L L^T
    Matrix skews;                     // K x D (alpha)

    [[nodiscard]] std::size_t n_components() const { return weights.size(); }
    [[nodiscard]] Eigen::Index dims() const { return locations.cols(); }
    void validate() const;
};

SampleMatrix gmm_sample(const GmmParams& p, std::size_t n, RngStream& rng);
double gmm_log_density(const GmmParams& p, const Vector& x);

/// Conditioning construction: (x0, z) jointly normal with corr(x0, z) = delta,
/// z flipped when x0 < 0, then scaled by sqrt(nu / chi2_nu) and mapped through
/// location and per-dimension scales.
SampleMatrix skewt_sample(const SkewTParams& p, std::size_t n, RngStream& rng);

/// log sum_k w_k 2 t_D(x; mu, Sigma, nu) T_1(alpha' w^-1 (x - mu) sqrt((nu + D)/(nu + Q)); nu + D)
/// where w = sqrt(diag Sigma) and Q is the squared Mahalanobis norm.
double skewt_log_density(const SkewTParams& p, const Vector& x);

}  // namespace sdeu
