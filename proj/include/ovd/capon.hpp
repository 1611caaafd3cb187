#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ovd/errors.hpp"
#include "ovd/frontend.hpp"

namespace ovd {

/// Sample covariance of the virtual-channel vector at one range bin,
/// Hermitian by construction, positive definite after diagonal loading.
struct CovarianceMatrix {
    Eigen::MatrixXcd entries;
    double loading = 0.0;   // absolute diagonal loading actually applied
    bool degenerate = false; // trace was zero; absolute epsilon loading used
};

/// a_l = exp(-j * 2*pi * spacing * l * sin(theta)), l = 0..L-1.
/// theta in [-pi/2, pi/2]; a(0) is all-ones.
inline Eigen::VectorXcd steering(double theta, int n_channels, double spacing = 0.5) {
    if (!(std::abs(theta) <= std::numbers::pi / 2.0)) {
        throw ConfigError("steering angle must lie in [-pi/2, pi/2]");
    }
    Eigen::VectorXcd a(n_channels);
    const double phase_step = 2.0 * std::numbers::pi * spacing * std::sin(theta);
    for (int l = 0; l < n_channels; ++l) a(l) = std::polar(1.0, -phase_step * l);
    return a;
}

/// R_hat = (1/M) * sum_m x_m x_m^H over the chirp snapshots at range_bin,
/// symmetrized, then loaded with loading_factor * trace(R_hat)/L on the
/// diagonal. A zero-trace input falls back to an absolute 1e-12 loading and
/// is flagged degenerate.
inline CovarianceMatrix estimate_covariance(const RangeProfileCube& profiles,
                                            int range_bin, double loading_factor) {
    if (profiles.n_chirps < 1) throw ConfigError("covariance needs at least 1 snapshot");
    if (range_bin < 0 || range_bin >= profiles.n_bins) {
        throw ConfigError("range bin out of range: " + std::to_string(range_bin));
    }
    if (loading_factor < 0.0) throw ConfigError("loading_factor must be >= 0");

    const int L = profiles.n_channels;
    const int M = profiles.n_chirps;
    Eigen::MatrixXcd snapshots(L, M);
    for (int m = 0; m < M; ++m) {
        for (int l = 0; l < L; ++l) snapshots(l, m) = profiles.at(m, l, range_bin);
    }
    CovarianceMatrix cov;
    cov.entries = (snapshots * snapshots.adjoint()) / static_cast<double>(M);
    cov.entries = 0.5 * (cov.entries + cov.entries.adjoint().eval());

    const double trace = cov.entries.trace().real();
    if (loading_factor > 0.0) {
        if (trace > 0.0) {
            cov.loading = loading_factor * trace / static_cast<double>(L);
        } else {
            cov.loading = 1e-12;
            cov.degenerate = true;
        }
        cov.entries += cov.loading * Eigen::MatrixXcd::Identity(L, L);
    }
    return cov;
}

/// Capon output power 1/(a^H R^-1 a) for each grid angle, computed through a
/// Cholesky solve. Requires R positive definite; all outputs are > 0.
inline std::vector<double> capon_spectrum(const CovarianceMatrix& cov,
                                          const std::vector<double>& angle_grid,
                                          double spacing = 0.5) {
    const int L = static_cast<int>(cov.entries.rows());
    Eigen::LLT<Eigen::MatrixXcd> llt(cov.entries);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(
            "covariance matrix is not positive definite; increase diagonal loading");
    }
    std::vector<double> spectrum;
    spectrum.reserve(angle_grid.size());
    for (double theta : angle_grid) {
        const Eigen::VectorXcd a = steering(theta, L, spacing);
        const double denom = a.dot(llt.solve(a)).real();
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            throw NumericalError(
                "Capon denominator is not positive; increase diagonal loading");
        }
        spectrum.push_back(1.0 / denom);
    }
    return spectrum;
}

/// Capon power over (range bin x angle bin); rows ordered by increasing
/// range. Strictly positive and finite everywhere.
struct RangeAzimuthMap {
    Eigen::MatrixXd values;         // (range_bins x angle_bins)
    std::vector<double> range_axis; // m
    std::vector<double> angle_axis; // rad
};

/// 181 grid angles, -90 to +90 degrees in 1-degree steps.
inline std::vector<double> default_angle_grid() {
    std::vector<double> grid;
    grid.reserve(181);
    for (int deg = -90; deg <= 90; ++deg) {
        grid.push_back(static_cast<double>(deg) * std::numbers::pi / 180.0);
    }
    return grid;
}

/// Row r of the map is the Capon spectrum of the covariance at range bin r.
/// Expects clutter-removed profiles.
inline RangeAzimuthMap range_azimuth_map(const RangeProfileCube& profiles,
                                         const std::vector<double>& angle_grid,
                                         double loading_factor, double spacing = 0.5) {
    if (angle_grid.empty()) throw ConfigError("angle grid must not be empty");
    RangeAzimuthMap map;
    map.range_axis = profiles.range_axis;
    map.angle_axis = angle_grid;
    map.values.resize(profiles.n_bins, static_cast<Eigen::Index>(angle_grid.size()));
    for (int r = 0; r < profiles.n_bins; ++r) {
        const CovarianceMatrix cov = estimate_covariance(profiles, r, loading_factor);
        std::vector<double> row;
        try {
            row = capon_spectrum(cov, angle_grid, spacing);
        } catch (const NumericalError& e) {
            throw NumericalError("range bin " + std::to_string(r) + ": " + e.what());
        }
        for (std::size_t a = 0; a < row.size(); ++a) {
            map.values(r, static_cast<Eigen::Index>(a)) = row[a];
        }
    }
    return map;
}

/// CSV export, one "range_m,angle_deg,value" row per map cell.
inline void write_map_csv(const RangeAzimuthMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write map CSV: " + path);
    out.precision(9);
    for (Eigen::Index r = 0; r < map.values.rows(); ++r) {
        for (Eigen::Index a = 0; a < map.values.cols(); ++a) {
            out << map.range_axis[static_cast<std::size_t>(r)] << ","
                << map.angle_axis[static_cast<std::size_t>(a)] * 180.0 / std::numbers::pi
                << "," << map.values(r, a) << "\n";
        }
    }
    if (!out) throw IoError("failed writing map CSV: " + path);
}

/// 8-bit binary PGM, rows = range bins, columns = angles, min-max normalized.
inline void write_map_pgm(const RangeAzimuthMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write map PGM: " + path);
    const Eigen::Index rows = map.values.rows();
    const Eigen::Index cols = map.values.cols();
    const double lo = map.values.minCoeff();
    const double hi = map.values.maxCoeff();
    const double span = hi - lo;
    out << "P5\n" << cols << " " << rows << "\n255\n";
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index a = 0; a < cols; ++a) {
            const double v = span > 0.0 ? (map.values(r, a) - lo) / span : 0.0;
            out.put(static_cast<char>(static_cast<unsigned char>(
                std::clamp(v * 255.0, 0.0, 255.0))));
        }
    }
    if (!out) throw IoError("failed writing map PGM: " + path);
}

} // namespace ovd
