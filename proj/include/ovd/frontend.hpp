#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "ovd/detail/fft.hpp"
#include "ovd/errors.hpp"
#include "ovd/scene_sim.hpp"

namespace ovd {

enum class WindowKind { Rectangular, Hann, Hamming };

/// Per-chirp range profiles across the virtual array. Bin k sits at range
/// range_axis[k] = k * (adc_rate/fft_size) * c / (2*chirp_slope); bin 0 is
/// range 0 and the axis is strictly increasing.
struct RangeProfileCube {
    int n_chirps = 0;
    int n_channels = 0;
    int n_bins = 0;
    std::vector<std::complex<double>> bins; // (chirp, channel, range_bin)
    std::vector<double> range_axis;         // m

    std::complex<double>& at(int chirp, int channel, int bin) {
        return bins[(static_cast<std::size_t>(chirp) * n_channels + channel) * n_bins +
                    bin];
    }
    const std::complex<double>& at(int chirp, int channel, int bin) const {
        return bins[(static_cast<std::size_t>(chirp) * n_channels + channel) * n_bins +
                    bin];
    }
};

inline std::vector<double> window_weights(WindowKind kind, int n) {
    std::vector<double> w(n, 1.0);
    if (n <= 1) return w;
    const double denom = static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = 2.0 * std::numbers::pi * i / denom;
        switch (kind) {
            case WindowKind::Rectangular: break;
            case WindowKind::Hann: w[i] = 0.5 * (1.0 - std::cos(x)); break;
            case WindowKind::Hamming: w[i] = 0.54 - 0.46 * std::cos(x); break;
        }
    }
    return w;
}

/// Windowed, zero-padded, unitary (1/sqrt(N)) FFT over fast time for every
/// (chirp, channel). fft_size must be a power of two >= samples per chirp;
/// pass 0 to use the next power of two.
inline RangeProfileCube range_fft(const RawDataCube& cube,
                                  WindowKind window = WindowKind::Hann,
                                  int fft_size = 0) {
    if (fft_size == 0) {
        fft_size = static_cast<int>(
            detail::next_power_of_two(static_cast<std::size_t>(cube.n_samples)));
    }
    if (fft_size < cube.n_samples) {
        throw ConfigError("fft_size " + std::to_string(fft_size) +
                          " is smaller than samples per chirp " +
                          std::to_string(cube.n_samples));
    }
    if (!detail::is_power_of_two(static_cast<std::size_t>(fft_size))) {
        throw ConfigError("fft_size must be a power of two, got " +
                          std::to_string(fft_size));
    }

    RangeProfileCube out;
    out.n_chirps = cube.n_chirps;
    out.n_channels = cube.n_channels;
    out.n_bins = fft_size;
    out.bins.resize(static_cast<std::size_t>(out.n_chirps) * out.n_channels * fft_size);
    out.range_axis.resize(fft_size);
    const double bin_spacing = (cube.config.adc_rate / fft_size) * kSpeedOfLight /
                               (2.0 * cube.config.chirp_slope);
    for (int k = 0; k < fft_size; ++k) out.range_axis[k] = k * bin_spacing;

    const std::vector<double> w = window_weights(window, cube.n_samples);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fft_size));
    std::vector<std::complex<double>> buffer(fft_size);
    for (int p = 0; p < cube.n_chirps; ++p) {
        for (int l = 0; l < cube.n_channels; ++l) {
            std::fill(buffer.begin(), buffer.end(), std::complex<double>{0.0, 0.0});
            for (int n = 0; n < cube.n_samples; ++n) {
                buffer[n] = cube.at(p, l, n) * w[n];
            }
            detail::fft_radix2(buffer);
            for (int k = 0; k < fft_size; ++k) out.at(p, l, k) = buffer[k] * scale;
        }
    }
    return out;
}

/// Stationary clutter removal: subtracts the mean over chirps for each
/// (virtual channel, range bin), nulling zero-velocity scatterers while
/// sparing anything whose phase moves across the frame. Idempotent.
inline RangeProfileCube remove_clutter(const RangeProfileCube& profiles) {
    if (profiles.n_chirps < 2) {
        throw ConfigError("clutter removal needs at least 2 chirps per channel, got " +
                          std::to_string(profiles.n_chirps));
    }
    RangeProfileCube out = profiles;
    const double inv_m = 1.0 / static_cast<double>(profiles.n_chirps);
    for (int l = 0; l < profiles.n_channels; ++l) {
        for (int k = 0; k < profiles.n_bins; ++k) {
            std::complex<double> mean{0.0, 0.0};
            for (int p = 0; p < profiles.n_chirps; ++p) mean += profiles.at(p, l, k);
            mean *= inv_m;
            for (int p = 0; p < profiles.n_chirps; ++p) out.at(p, l, k) -= mean;
        }
    }
    return out;
}

/// Debug dump of one chirp/channel range profile as CSV (range_m, magnitude).
inline void dump_range_profile_csv(const RangeProfileCube& profiles, int chirp,
                                   int channel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write range profile CSV: " + path);
    for (int k = 0; k < profiles.n_bins; ++k) {
        out << profiles.range_axis[k] << "," << std::abs(profiles.at(chirp, channel, k))
            << "\n";
    }
}

} // namespace ovd
