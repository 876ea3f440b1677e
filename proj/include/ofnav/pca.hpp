#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ofnav/error.hpp"

namespace ofnav {

/// Fitted principal-component projection.
/// components is q x d, row-major, rows orthonormal; eigenvalues descending.
struct PcaModel {
    std::vector<double> mean;
    std::vector<double> components;
    std::vector<double> eigenvalues;  // retained components only
    double retained_ratio = 0.9;
    double total_variance = 0.0;      // trace of the sample covariance

    std::size_t dim() const noexcept { return mean.size(); }
    std::size_t rank() const noexcept { return eigenvalues.size(); }

    std::span<const double> component(std::size_t r) const {
        return std::span<const double>(components).subspan(r * dim(), dim());
    }
};

/// Centres the samples, eigendecomposes the covariance (divisor n-1) and keeps
/// the smallest leading set of components whose variance share reaches `retained`.
/// Each component is signed so its first non-negligible coordinate is positive.
inline PcaModel pca_fit(const std::vector<std::vector<double>>& samples, double retained = 0.9) {
    if (samples.size() < 2) fail(ErrorKind::InvalidArgument, "pca_fit: need at least 2 samples");
    require(retained > 0.0 && retained <= 1.0, "pca_fit: retained must be in (0,1]");
    const std::size_t d = samples.front().size();
    require(d >= 1, "pca_fit: empty feature vectors");
    const std::size_t n = samples.size();
    for (const auto& s : samples) {
        if (s.size() != d) fail(ErrorKind::InvalidArgument, "pca_fit: dimension mismatch between samples");
    }

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = samples[i][j];
            if (!std::isfinite(v)) fail(ErrorKind::Numeric, "pca_fit: non-finite input");
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    const Eigen::RowVectorXd mu = x.colwise().mean();
    x.rowwise() -= mu;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) fail(ErrorKind::Numeric, "pca_fit: eigendecomposition failed");
    // ascending -> descending
    const Eigen::VectorXd evals = es.eigenvalues().reverse();
    const Eigen::MatrixXd evecs = es.eigenvectors().rowwise().reverse();

    double total = cov.trace();
    double clamped_sum = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) clamped_sum += std::max(evals(i), 0.0);

    std::size_t q = d;
    if (clamped_sum > 0.0) {
        double cum = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            cum += std::max(evals(static_cast<Eigen::Index>(k)), 0.0);
            if (cum / clamped_sum >= retained) {
                q = k + 1;
                break;
            }
        }
    }

    PcaModel m;
    m.retained_ratio = retained;
    m.total_variance = total;
    m.mean.assign(mu.data(), mu.data() + d);
    m.components.resize(q * d);
    m.eigenvalues.resize(q);
    for (std::size_t k = 0; k < q; ++k) {
        Eigen::VectorXd v = evecs.col(static_cast<Eigen::Index>(k));
        const double scale = v.cwiseAbs().maxCoeff();
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            if (std::abs(v(j)) > 1e-10 * scale) {
                if (v(j) < 0) v = -v;
                break;
            }
        }
        for (std::size_t j = 0; j < d; ++j) m.components[k * d + j] = v(static_cast<Eigen::Index>(j));
        m.eigenvalues[k] = std::max(evals(static_cast<Eigen::Index>(k)), 0.0);
    }
    return m;
}

/// components * (x - mean)
inline std::vector<double> pca_project(const PcaModel& m, std::span<const double> x) {
    if (x.size() != m.dim()) fail(ErrorKind::InvalidArgument, "pca_project: dimension mismatch");
    const std::size_t d = m.dim();
    std::vector<double> out(m.rank(), 0.0);
    for (std::size_t k = 0; k < m.rank(); ++k) {
        const double* c = m.components.data() + k * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += c[j] * (x[j] - m.mean[j]);
        out[k] = acc;
    }
    return out;
}

/// mean + components^T * z
inline std::vector<double> pca_reconstruct(const PcaModel& m, std::span<const double> z) {
    if (z.size() != m.rank()) fail(ErrorKind::InvalidArgument, "pca_reconstruct: dimension mismatch");
    std::vector<double> out = m.mean;
    for (std::size_t k = 0; k < m.rank(); ++k) {
        const double* c = m.components.data() + k * m.dim();
        for (std::size_t j = 0; j < m.dim(); ++j) out[j] += z[k] * c[j];
    }
    return out;
}

inline void to_json(nlohmann::json& j, const PcaModel& m) {
    j = nlohmann::json{{"mean", m.mean},
                       {"components", m.components},
                       {"eigenvalues", m.eigenvalues},
                       {"retained_ratio", m.retained_ratio},
                       {"total_variance", m.total_variance},
                       {"rows", m.rank()},
                       {"cols", m.dim()}};
}

inline void from_json(const nlohmann::json& j, PcaModel& m) {
    m.mean = j.at("mean").get<std::vector<double>>();
    m.components = j.at("components").get<std::vector<double>>();
    m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    m.retained_ratio = j.at("retained_ratio").get<double>();
    m.total_variance = j.value("total_variance", 0.0);
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    if (cols != m.mean.size() || rows != m.eigenvalues.size() || m.components.size() != rows * cols) {
        fail(ErrorKind::DataFormat, "pca model: inconsistent shapes");
    }
}

}  // namespace ofnav
