#include "sdeu/heads.hpp"

#include "sdeu/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace sdeu {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void validate_mixture(const std::vector<double>& weights, const std::vector<Matrix>& chols,
                      Eigen::Index rows, Eigen::Index dims, const char* what) {
    const std::string head(what);
    if (weights.empty()) throw InvalidParameter(head + ": at least one component required");
    if (dims < 1) throw InvalidParameter(head + ": D must be >= 1");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidParameter(head + ": weights must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter(head + ": weights must sum to 1");
    if (rows != static_cast<Eigen::Index>(weights.size()) || chols.size() != weights.size()) {
        throw InvalidParameter(head + ": component counts disagree");
    }
    for (const Matrix& l : chols) {
        if (l.rows() != dims || l.cols() != dims) throw InvalidParameter(head + ": scale factor must be D x D");
        for (Eigen::Index i = 0; i < dims; ++i) {
            if (!(l(i, i) > 0.0)) throw InvalidParameter(head + ": scale diagonal must be > 0");
            for (Eigen::Index j = i + 1; j < dims; ++j) {
                if (l(i, j) != 0.0) throw InvalidParameter(head + ": scale factor must be lower triangular");
            }
        }
    }
}

std::size_t pick_component(const std::vector<double>& weights, RngStream& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        last_positive = k;
        cum += weights[k];
        if (u < cum) return k;
    }
    return last_positive;
}

double log_sum_exp(const std::vector<double>& terms) {
    double m = kNegInf;
    for (double t : terms) m = std::max(m, t);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

double log_det_lower(const Matrix& l) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return s;
}

struct SkewComponent {
    Vector omega;       // per-dimension scale sqrt(diag Sigma)
    Matrix joint_chol;  // Cholesky of [[1, delta'], [delta, Omega_bar]]
};

SkewComponent prepare_skew(const Matrix& chol, const Vector& alpha) {
    const Eigen::Index d = chol.rows();
    const Matrix sigma = chol * chol.transpose();
    SkewComponent c;
    c.omega = sigma.diagonal().cwiseSqrt();
    const Vector inv = c.omega.cwiseInverse();
    const Matrix corr = inv.asDiagonal() * sigma * inv.asDiagonal();
    const Vector corr_alpha = corr * alpha;
    const Vector delta = corr_alpha / std::sqrt(1.0 + alpha.dot(corr_alpha));
    Matrix joint(d + 1, d + 1);
    joint(0, 0) = 1.0;
    joint.block(1, 0, d, 1) = delta;
    joint.block(0, 1, 1, d) = delta.transpose();
    joint.block(1, 1, d, d) = corr;
    c.joint_chol = cholesky(joint).lower;
    return c;
}

}  // namespace

void GmmParams::validate() const {
    validate_mixture(weights, scale_chols, means.rows(), means.cols(), "gmm");
}

void SkewTParams::validate() const {
    validate_mixture(weights, scale_chols, locations.rows(), locations.cols(), "skew_t");
    if (dof.size() != weights.size()) throw InvalidParameter("skew_t: dof count disagrees");
    for (double nu : dof) {
        if (!(nu > 2.0) || !std::isfinite(nu)) throw InvalidParameter("skew_t: dof must be > 2");
    }
    if (skews.rows() != locations.rows() || skews.cols() != locations.cols()) {
        throw InvalidParameter("skew_t: skew matrix must be K x D");
    }
}

SampleMatrix gmm_sample(const GmmParams& p, std::size_t n, RngStream& rng) {
    p.validate();
    const Eigen::Index d = p.dims();
    SampleMatrix out(static_cast<Eigen::Index>(n), d);
    Vector z(d);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t k = pick_component(p.weights, rng);
        for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
        out.row(static_cast<Eigen::Index>(s)) =
            (p.means.row(static_cast<Eigen::Index>(k)).transpose() +
             p.scale_chols[k].triangularView<Eigen::Lower>() * z)
                .transpose();
    }
    return out;
}

double gmm_log_density(const GmmParams& p, const Vector& x) {
    p.validate();
    const Eigen::Index d = p.dims();
    if (x.size() != d) throw DimensionMismatch("gmm_log_density: point has wrong length");
    const double log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
    std::vector<double> terms;
    terms.reserve(p.n_components());
    for (std::size_t k = 0; k < p.n_components(); ++k) {
        if (p.weights[k] <= 0.0) continue;
        const Matrix& l = p.scale_chols[k];
        const Vector r = x - p.means.row(static_cast<Eigen::Index>(k)).transpose();
        const Vector y = l.triangularView<Eigen::Lower>().solve(r);
        terms.push_back(std::log(p.weights[k]) + log_norm - log_det_lower(l) - 0.5 * y.squaredNorm());
    }
    return log_sum_exp(terms);
}

SampleMatrix skewt_sample(const SkewTParams& p, std::size_t n, RngStream& rng) {
    p.validate();
    const Eigen::Index d = p.dims();
    std::vector<SkewComponent> comps;
    comps.reserve(p.n_components());
    for (std::size_t k = 0; k < p.n_components(); ++k) {
        comps.push_back(prepare_skew(p.scale_chols[k], p.skews.row(static_cast<Eigen::Index>(k)).transpose()));
    }
    SampleMatrix out(static_cast<Eigen::Index>(n), d);
    Vector u(d + 1);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t k = pick_component(p.weights, rng);
        for (Eigen::Index i = 0; i <= d; ++i) u(i) = rng.normal();
        const Vector v = comps[k].joint_chol.triangularView<Eigen::Lower>() * u;
        Vector z = v.tail(d);
        if (v(0) < 0.0) z = -z;
        const double nu = p.dof[k];
        const double w = 2.0 * sample_gamma(0.5 * nu, rng) / nu;
        const Vector y = p.locations.row(static_cast<Eigen::Index>(k)).transpose() +
                         comps[k].omega.cwiseProduct(z) / std::sqrt(w);
        out.row(static_cast<Eigen::Index>(s)) = y.transpose();
    }
    return out;
}

double skewt_log_density(const SkewTParams& p, const Vector& x) {
    p.validate();
    const Eigen::Index d = p.dims();
    if (x.size() != d) throw DimensionMismatch("skewt_log_density: point has wrong length");
    const auto dd = static_cast<double>(d);
    std::vector<double> terms;
    terms.reserve(p.n_components());
    for (std::size_t k = 0; k < p.n_components(); ++k) {
        if (p.weights[k] <= 0.0) continue;
        const Matrix& l = p.scale_chols[k];
        const double nu = p.dof[k];
        const Vector r = x - p.locations.row(static_cast<Eigen::Index>(k)).transpose();
        const Vector y = l.triangularView<Eigen::Lower>().solve(r);
        const double q = y.squaredNorm();
        const double log_t = std::lgamma(0.5 * (nu + dd)) - std::lgamma(0.5 * nu) -
                             0.5 * dd * std::log(nu * std::numbers::pi) - log_det_lower(l) -
                             0.5 * (nu + dd) * std::log1p(q / nu);
        double skew_arg = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double omega = l.row(i).norm();
            skew_arg += p.skews(static_cast<Eigen::Index>(k), i) * r(i) / omega;
        }
        double log_skew = 0.0;  // log(2 * 1/2) at the centre
        if (skew_arg != 0.0) {
            skew_arg *= std::sqrt((nu + dd) / (nu + q));
            const boost::math::students_t_distribution<double> t1(nu + dd);
            log_skew = std::log(2.0 * boost::math::cdf(t1, skew_arg));
        }
        terms.push_back(std::log(p.weights[k]) + log_t + log_skew);
    }
    return log_sum_exp(terms);
}

}  // namespace sdeu
