#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "ovd/capon.hpp"
#include "ovd/errors.hpp"

namespace ovd {

using FeatureVector = Eigen::VectorXd;

/// Row-major flatten of a range-azimuth map; length = range_bins * angle_bins.
inline FeatureVector flatten(const RangeAzimuthMap& map) {
    const Eigen::Index rows = map.values.rows();
    const Eigen::Index cols = map.values.cols();
    FeatureVector v(rows * cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index a = 0; a < cols; ++a) v(r * cols + a) = map.values(r, a);
    }
    return v;
}

/// Standardization plus orthonormal projection fitted on training data only.
/// Immutable after fit; transform never updates it.
struct PcaModel {
    Eigen::VectorXd mean;                     // D
    Eigen::VectorXd scale;                    // D, per-feature std, floored
    Eigen::MatrixXd components;               // d x D, orthonormal rows
    Eigen::VectorXd explained_variance_ratio; // d, non-increasing

    Eigen::Index input_dim() const { return mean.size(); }
    Eigen::Index output_dim() const { return components.rows(); }
};

inline constexpr double kPcaScaleFloor = 1e-12;

/// Standardizes the training matrix (subtract mean, divide by per-feature
/// std), takes the SVD, and keeps the smallest number of components whose
/// cumulative explained variance reaches variance_target. variance_target of
/// 1.0 keeps the full numerical rank (lossless reconstruction of training
/// data).
inline PcaModel fit_pca(const std::vector<FeatureVector>& training,
                        double variance_target) {
    if (training.size() < 2) {
        throw ConfigError("PCA needs at least 2 training vectors, got " +
                          std::to_string(training.size()));
    }
    if (!(variance_target > 0.0) || variance_target > 1.0) {
        throw ConfigError("variance_target must lie in (0, 1]");
    }
    const Eigen::Index dim = training.front().size();
    if (dim == 0) throw ConfigError("PCA cannot fit zero-length vectors");
    for (const FeatureVector& v : training) {
        if (v.size() != dim) {
            throw ConfigError("PCA training vectors must all have equal length");
        }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(training.size());
    Eigen::MatrixXd data(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) data.row(i) = training[static_cast<std::size_t>(i)];

    PcaModel model;
    model.mean = data.colwise().mean();
    Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
    model.scale = (centered.array().square().colwise().sum() /
                   static_cast<double>(n - 1))
                      .sqrt()
                      .matrix();
    model.scale = model.scale.cwiseMax(kPcaScaleFloor);
    Eigen::MatrixXd standardized =
        centered.array().rowwise() / model.scale.transpose().array();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(standardized, Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues(); // sorted descending
    Eigen::VectorXd variances = sigma.array().square() / static_cast<double>(n - 1);
    const double total = variances.sum();
    if (!(total > 0.0)) {
        throw NumericalError("PCA training data has zero variance after standardization");
    }

    const double rank_tol = sigma(0) * static_cast<double>(std::max(n, dim)) *
                            std::numeric_limits<double>::epsilon();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > rank_tol) ++rank;
    }
    Eigen::Index keep;
    if (variance_target >= 1.0) {
        keep = rank;
    } else {
        keep = 0;
        double cumulative = 0.0;
        for (Eigen::Index i = 0; i < variances.size(); ++i) {
            cumulative += variances(i) / total;
            ++keep;
            if (cumulative >= variance_target) break;
        }
        keep = std::min(keep, std::max<Eigen::Index>(rank, 1));
    }
    if (keep < 1) keep = 1;

    model.components = svd.matrixV().leftCols(keep).transpose();
    model.explained_variance_ratio = (variances.head(keep) / total).eval();
    return model;
}

/// Projection to the principal subspace: ((v - mean)/scale) * components^T.
inline FeatureVector transform(const PcaModel& model, const FeatureVector& v) {
    if (v.size() != model.input_dim()) {
        throw ConfigError("PCA transform length mismatch: got " +
                          std::to_string(v.size()) + ", expected " +
                          std::to_string(model.input_dim()));
    }
    const Eigen::VectorXd standardized =
        ((v - model.mean).array() / model.scale.array()).matrix();
    return model.components * standardized;
}

/// Maps a projected vector back to the original feature space.
inline FeatureVector inverse_transform(const PcaModel& model, const FeatureVector& z) {
    if (z.size() != model.output_dim()) {
        throw ConfigError("PCA inverse transform length mismatch");
    }
    const Eigen::VectorXd standardized = model.components.transpose() * z;
    return (standardized.array() * model.scale.array()).matrix() + model.mean;
}

// JSON persistence (versioned; matrices row-major).

namespace detail {

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                          .get<double>();
        }
    }
    return m;
}

} // namespace detail

inline void to_json(nlohmann::json& j, const PcaModel& m) {
    j = nlohmann::json{{"version", 1},
                       {"mean", detail::vector_to_json(m.mean)},
                       {"scale", detail::vector_to_json(m.scale)},
                       {"components", detail::matrix_to_json(m.components)},
                       {"explained_variance_ratio",
                        detail::vector_to_json(m.explained_variance_ratio)}};
}

inline void from_json(const nlohmann::json& j, PcaModel& m) {
    if (j.at("version").get<int>() != 1) {
        throw ConfigError("unsupported PCA model version");
    }
    m.mean = detail::vector_from_json(j.at("mean"));
    m.scale = detail::vector_from_json(j.at("scale"));
    m.components = detail::matrix_from_json(j.at("components"));
    m.explained_variance_ratio =
        detail::vector_from_json(j.at("explained_variance_ratio"));
}

} // namespace ovd
