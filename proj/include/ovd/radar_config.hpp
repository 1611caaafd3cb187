#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ovd/detail/fft.hpp"
#include "ovd/errors.hpp"

namespace ovd {

/// Propagation speed used for all range/beat-frequency arithmetic.
inline constexpr double kSpeedOfLight = 3.0e8; // m/s

/// Waveform, sampling, and array parameters of the TDM-MIMO FMCW radar.
/// All values in SI units. Defaults follow the 77 GHz automotive sensor
/// configuration used throughout the tests.
struct RadarConfig {
    double chirp_slope = 98e6 / 1e-6;    // Hz/s
    double chirp_period = 580e-6;        // s, total repetition period incl. idle
    double sweep_bandwidth = 3920e6;     // Hz
    double frame_rate = 6.25;            // frames/s
    double adc_rate = 2.2e6;             // complex samples/s
    double start_wavelength = kSpeedOfLight / 77e9; // m, at ramp start frequency
    int n_tx = 2;
    int n_rx = 4;
    int n_chirps_per_tx = 64;
    double element_spacing = 0.5;        // virtual ULA spacing in wavelengths

    int n_virtual_channels() const { return n_tx * n_rx; }
    double active_ramp_time() const { return sweep_bandwidth / chirp_slope; }
};

/// Quantities derived from a validated RadarConfig.
struct DerivedParams {
    int samples_per_chirp;      // complex fast-time samples on the active ramp
    int range_bin_count;        // FFT size, next power of two >= samples_per_chirp
    double range_resolution;    // m
    double max_range;           // m, range mapped to the maximum beat frequency
    double angular_resolution;  // rad, 2/L for the L-element half-wavelength ULA
    int n_virtual_channels;
};

/// Throws ConfigError naming the violated invariant.
inline void validate(const RadarConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("invalid radar config: " + what);
    };
    require(c.chirp_slope > 0.0, "chirp_slope must be strictly positive");
    require(c.chirp_period > 0.0, "chirp_period must be strictly positive");
    require(c.sweep_bandwidth > 0.0, "sweep_bandwidth must be strictly positive");
    require(c.adc_rate > 0.0, "adc_rate must be strictly positive");
    require(c.frame_rate > 0.0, "frame_rate must be strictly positive");
    require(c.n_tx >= 1, "n_tx must be at least 1");
    require(c.n_rx >= 1, "n_rx must be at least 1");
    require(c.n_chirps_per_tx >= 1, "n_chirps_per_tx must be at least 1");
    require(c.element_spacing > 0.0, "element_spacing must be strictly positive");
    require(c.start_wavelength > 0.0, "start_wavelength must be strictly positive");
    require(c.active_ramp_time() <= c.chirp_period,
            "active ramp time sweep_bandwidth/chirp_slope exceeds chirp_period");
    require(static_cast<double>(c.n_tx) * c.n_chirps_per_tx * c.chirp_period <=
                1.0 / c.frame_rate,
            "n_tx * n_chirps_per_tx chirps do not fit in one frame period");
}

/// Validates, then computes resolutions and sample counts.
/// Deterministic and total on valid configs.
inline DerivedParams derive(const RadarConfig& c) {
    validate(c);
    DerivedParams d;
    d.samples_per_chirp =
        static_cast<int>(std::floor(c.adc_rate * c.sweep_bandwidth / c.chirp_slope));
    if (d.samples_per_chirp < 1) {
        throw ConfigError("invalid radar config: fewer than one ADC sample per chirp");
    }
    d.range_bin_count = static_cast<int>(
        detail::next_power_of_two(static_cast<std::size_t>(d.samples_per_chirp)));
    d.range_resolution = kSpeedOfLight / (2.0 * c.sweep_bandwidth);
    d.max_range = c.adc_rate * kSpeedOfLight / (2.0 * c.chirp_slope);
    d.n_virtual_channels = c.n_virtual_channels();
    d.angular_resolution = 2.0 / static_cast<double>(d.n_virtual_channels);
    return d;
}

inline void to_json(nlohmann::json& j, const RadarConfig& c) {
    j = nlohmann::json{{"chirp_slope", c.chirp_slope},
                       {"chirp_period", c.chirp_period},
                       {"sweep_bandwidth", c.sweep_bandwidth},
                       {"frame_rate", c.frame_rate},
                       {"adc_rate", c.adc_rate},
                       {"start_wavelength", c.start_wavelength},
                       {"n_tx", c.n_tx},
                       {"n_rx", c.n_rx},
                       {"n_chirps_per_tx", c.n_chirps_per_tx},
                       {"element_spacing", c.element_spacing}};
}

/// Strict parse: unknown keys are rejected so typos fail fast.
inline void from_json(const nlohmann::json& j, RadarConfig& c) {
    static const char* known[] = {"chirp_slope",    "chirp_period",
                                  "sweep_bandwidth", "frame_rate",
                                  "adc_rate",        "start_wavelength",
                                  "n_tx",            "n_rx",
                                  "n_chirps_per_tx", "element_spacing"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown radar config key: " + key);
    }
    c = RadarConfig{};
    if (j.contains("chirp_slope")) j.at("chirp_slope").get_to(c.chirp_slope);
    if (j.contains("chirp_period")) j.at("chirp_period").get_to(c.chirp_period);
    if (j.contains("sweep_bandwidth")) j.at("sweep_bandwidth").get_to(c.sweep_bandwidth);
    if (j.contains("frame_rate")) j.at("frame_rate").get_to(c.frame_rate);
    if (j.contains("adc_rate")) j.at("adc_rate").get_to(c.adc_rate);
    if (j.contains("start_wavelength")) j.at("start_wavelength").get_to(c.start_wavelength);
    if (j.contains("n_tx")) j.at("n_tx").get_to(c.n_tx);
    if (j.contains("n_rx")) j.at("n_rx").get_to(c.n_rx);
    if (j.contains("n_chirps_per_tx")) j.at("n_chirps_per_tx").get_to(c.n_chirps_per_tx);
    if (j.contains("element_spacing")) j.at("element_spacing").get_to(c.element_spacing);
}

inline RadarConfig load_radar_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open radar config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed radar config JSON in " + path + ": " + e.what());
    }
    RadarConfig c = j.get<RadarConfig>();
    validate(c);
    return c;
}

} // namespace ovd
