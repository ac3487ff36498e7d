#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"

namespace csi {

// Principal components of the training distribution. Rows of `components`
// are orthonormal; explained_variance is non-increasing and uses the
// divisor-n covariance so that the mean squared reconstruction error of a
// k-component model equals the sum of the discarded eigenvalues.
struct PcaModel {
    std::vector<double> mean;        // D
    Matrix components;               // n_components x D
    std::vector<double> explained_variance;

    std::size_t input_dims() const { return mean.size(); }
    std::size_t component_count() const { return components.rows(); }
};

inline PcaModel pca_fit(const Matrix& train, std::size_t n_components) {
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    if (n_components < 1 || n_components > std::min(n, d))
        throw ConfigError("n_components must be within [1, min(N, D)]");

    const Matrix cov = covariance(train);
    auto eig = jacobi_eigen(cov);

    PcaModel model;
    model.mean = column_means(train);
    model.components = Matrix(n_components, d);
    model.explained_variance.resize(n_components);
    for (std::size_t k = 0; k < n_components; ++k) {
        model.explained_variance[k] = eig.values[k];
        auto src = eig.vectors.row(k);
        auto dst = model.components.row(k);
        // Deterministic sign: the largest-magnitude entry is positive
        // (first such entry on ties).
        std::size_t arg = 0;
        for (std::size_t i = 1; i < d; ++i)
            if (std::abs(src[i]) > std::abs(src[arg])) arg = i;
        const double sign = src[arg] < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i) dst[i] = sign * src[i];
    }
    return model;
}

// First k components of a larger model; the eigenbasis is nested, so this
// equals refitting with k components.
inline PcaModel pca_truncate(const PcaModel& model, std::size_t k) {
    if (k == 0 || k > model.component_count())
        throw ConfigError("cannot truncate PCA model to " + std::to_string(k) + " components");
    PcaModel out;
    out.mean = model.mean;
    out.components = Matrix(k, model.input_dims());
    out.explained_variance.assign(model.explained_variance.begin(),
                                  model.explained_variance.begin() + static_cast<long>(k));
    for (std::size_t r = 0; r < k; ++r) {
        auto src = model.components.row(r);
        std::copy(src.begin(), src.end(), out.components.row(r).begin());
    }
    return out;
}

inline void pca_project(const PcaModel& model, std::span<const double> frame,
                        std::span<double> coeffs) {
    const std::size_t d = model.input_dims();
    if (frame.size() != d) throw ShapeError("frame does not match PCA input dimension");
    if (coeffs.size() != model.component_count())
        throw ShapeError("coefficient vector does not match component count");
    for (std::size_t k = 0; k < model.component_count(); ++k) {
        auto comp = model.components.row(k);
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) acc += comp[i] * (frame[i] - model.mean[i]);
        coeffs[k] = acc;
    }
}

inline std::vector<double> pca_project(const PcaModel& model, std::span<const double> frame) {
    std::vector<double> coeffs(model.component_count());
    pca_project(model, frame, coeffs);
    return coeffs;
}

inline void pca_reconstruct(const PcaModel& model, std::span<const double> coeffs,
                            std::span<double> frame) {
    const std::size_t d = model.input_dims();
    if (coeffs.size() != model.component_count())
        throw ShapeError("coefficient vector does not match component count");
    if (frame.size() != d) throw ShapeError("output frame does not match PCA input dimension");
    for (std::size_t i = 0; i < d; ++i) frame[i] = model.mean[i];
    for (std::size_t k = 0; k < model.component_count(); ++k) {
        auto comp = model.components.row(k);
        const double c = coeffs[k];
        for (std::size_t i = 0; i < d; ++i) frame[i] += c * comp[i];
    }
}

inline std::vector<double> pca_reconstruct(const PcaModel& model, std::span<const double> coeffs) {
    std::vector<double> frame(model.input_dims());
    pca_reconstruct(model, coeffs, frame);
    return frame;
}

inline Matrix pca_project_all(const PcaModel& model, const Matrix& frames) {
    Matrix out(frames.rows(), model.component_count());
    for (std::size_t r = 0; r < frames.rows(); ++r)
        pca_project(model, frames.row(r), out.row(r));
    return out;
}

inline Matrix pca_reconstruct_all(const PcaModel& model, const Matrix& coeffs) {
    Matrix out(coeffs.rows(), model.input_dims());
    for (std::size_t r = 0; r < coeffs.rows(); ++r)
        pca_reconstruct(model, coeffs.row(r), out.row(r));
    return out;
}

}  // namespace csi
