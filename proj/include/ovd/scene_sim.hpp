#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ovd/detail/random.hpp"
#include "ovd/detail/sha256.hpp"
#include "ovd/errors.hpp"
#include "ovd/occupancy.hpp"
#include "ovd/radar_config.hpp"

namespace ovd {

/// One point scatterer. Range is encoded in the beat frequency 2*range*K/c;
/// azimuth in the virtual-array phase progression. Breathing adds a slow
/// sinusoidal range micro-motion so occupants survive clutter removal.
struct Target {
    double range = 1.0;               // m
    double azimuth = 0.0;             // rad, in (-pi/2, pi/2)
    double gain = 1.0;                // linear amplitude
    double velocity = 0.0;            // m/s, radial
    double breathing_amplitude = 0.0; // m
    double breathing_rate = 0.0;      // Hz
};

/// A parametric scene: moving/breathing targets, static clutter, noise.
/// Fully reproducible under a fixed rng_seed.
struct Scene {
    std::vector<Target> targets;
    std::vector<Target> clutter;      // velocity = 0, breathing_amplitude = 0
    double noise_power = 0.0;         // variance of the additive complex noise
    double phase_noise_std = 0.0;     // rad per chirp, random-walk step
    std::uint64_t rng_seed = 0;
};

/// Complex baseband samples indexed (chirp within frame, virtual channel,
/// fast-time sample). Chirp index counts TDM chirp *pairs*: all L = n_tx*n_rx
/// virtual channels of one pair are presented together.
struct RawDataCube {
    int n_chirps = 0;
    int n_channels = 0;
    int n_samples = 0;
    std::vector<std::complex<double>> samples;
    RadarConfig config;

    std::complex<double>& at(int chirp, int channel, int sample) {
        return samples[(static_cast<std::size_t>(chirp) * n_channels + channel) *
                           n_samples +
                       sample];
    }
    const std::complex<double>& at(int chirp, int channel, int sample) const {
        return samples[(static_cast<std::size_t>(chirp) * n_channels + channel) *
                           n_samples +
                       sample];
    }
};

namespace detail {

inline void validate_scatterer(const Target& t, double max_range, const char* kind) {
    if (!(t.range > 0.0)) {
        throw ConfigError(std::string(kind) + " range must be strictly positive");
    }
    if (t.range >= max_range) {
        throw ConfigError(std::string(kind) + " at range " + std::to_string(t.range) +
                          " m is beyond max_range " + std::to_string(max_range) + " m");
    }
    if (!(std::abs(t.azimuth) < std::numbers::pi / 2.0)) {
        throw ConfigError(std::string(kind) + " azimuth must be within (-pi/2, pi/2)");
    }
    if (!(t.gain > 0.0)) {
        throw ConfigError(std::string(kind) + " gain must be strictly positive");
    }
    if (t.breathing_amplitude < 0.0) {
        throw ConfigError(std::string(kind) + " breathing_amplitude must be >= 0");
    }
}

} // namespace detail

/// Forward-synthesizes the raw baseband cube for a scene.
///
/// For every scatterer and virtual channel l = tx*n_rx + rx, the contribution
/// to chirp pair p, fast-time sample n is
///   gain * exp(-j(2*pi*f_b*t_f + (4*pi/lambda_max)*displacement + pi_step*l*sin(azimuth)))
/// with f_b = 2*range(t_s)*K/c evaluated at that chirp's slow time,
/// displacement = velocity*t_s + breathing_amplitude*sin(2*pi*breathing_rate*t_s),
/// and pi_step = 2*pi*element_spacing. TDM ordering: the two transmitters
/// alternate chirps, so channels of tx 1 observe slow time one chirp period
/// after channels of tx 0 within the same pair (not compensated).
///
/// The optional random-walk phase is common to all channels of one physical
/// chirp; additive noise is circular white Gaussian of power noise_power.
inline RawDataCube synthesize(const Scene& scene, const RadarConfig& config) {
    const DerivedParams derived = derive(config);
    if (scene.noise_power < 0.0) throw ConfigError("noise_power must be >= 0");
    if (scene.phase_noise_std < 0.0) throw ConfigError("phase_noise_std must be >= 0");
    for (const Target& t : scene.targets) {
        detail::validate_scatterer(t, derived.max_range, "target");
    }
    for (const Target& t : scene.clutter) {
        detail::validate_scatterer(t, derived.max_range, "clutter");
    }

    RawDataCube cube;
    cube.n_chirps = config.n_chirps_per_tx;
    cube.n_channels = derived.n_virtual_channels;
    cube.n_samples = derived.samples_per_chirp;
    cube.config = config;
    cube.samples.assign(static_cast<std::size_t>(cube.n_chirps) * cube.n_channels *
                            cube.n_samples,
                        {0.0, 0.0});

    const double steer_step = 2.0 * std::numbers::pi * config.element_spacing;
    const double two_pi = 2.0 * std::numbers::pi;

    auto add_scatterer = [&](const Target& t) {
        const double sin_theta = std::sin(t.azimuth);
        for (int p = 0; p < cube.n_chirps; ++p) {
            for (int tx = 0; tx < config.n_tx; ++tx) {
                const double t_s = (static_cast<double>(p) * config.n_tx + tx) *
                                   config.chirp_period;
                const double displacement =
                    t.velocity * t_s +
                    t.breathing_amplitude * std::sin(two_pi * t.breathing_rate * t_s);
                const double beat_freq =
                    2.0 * (t.range + displacement) * config.chirp_slope / kSpeedOfLight;
                const double slow_phase =
                    2.0 * two_pi * displacement / config.start_wavelength;
                // constant per-sample phase increment within one chirp
                const std::complex<double> step =
                    std::polar(1.0, -two_pi * beat_freq / config.adc_rate);
                for (int rx = 0; rx < config.n_rx; ++rx) {
                    const int l = tx * config.n_rx + rx;
                    std::complex<double> value =
                        std::polar(t.gain, -(slow_phase + steer_step * l * sin_theta));
                    std::complex<double>* row = &cube.at(p, l, 0);
                    for (int n = 0; n < cube.n_samples; ++n) {
                        row[n] += value;
                        value *= step;
                    }
                }
            }
        }
    };

    for (const Target& t : scene.targets) add_scatterer(t);
    for (const Target& t : scene.clutter) add_scatterer(t);

    if (scene.phase_noise_std > 0.0) {
        detail::Rng walk_rng(detail::mix_seed(scene.rng_seed, 2));
        double psi = 0.0;
        for (int p = 0; p < cube.n_chirps; ++p) {
            for (int tx = 0; tx < config.n_tx; ++tx) {
                psi += scene.phase_noise_std * walk_rng.normal();
                const std::complex<double> rot = std::polar(1.0, -psi);
                for (int rx = 0; rx < config.n_rx; ++rx) {
                    const int l = tx * config.n_rx + rx;
                    std::complex<double>* row = &cube.at(p, l, 0);
                    for (int n = 0; n < cube.n_samples; ++n) row[n] *= rot;
                }
            }
        }
    }

    if (scene.noise_power > 0.0) {
        detail::Rng noise_rng(detail::mix_seed(scene.rng_seed, 1));
        for (std::complex<double>& s : cube.samples) {
            s += noise_rng.complex_normal(scene.noise_power);
        }
    }
    return cube;
}

/// Seat layout and scene statistics of the simulated cabin. These are free
/// parameters of the simulator; the defaults describe a three-row minivan
/// within the radar's unambiguous range.
struct CabinGeometry {
    std::vector<double> row_ranges = {0.8, 1.6, 2.4};          // m, radar at dashboard
    std::vector<double> azimuth_cells = {-20.0 * std::numbers::pi / 180.0,
                                         20.0 * std::numbers::pi / 180.0}; // rad
    double seat_range_jitter = 0.15;   // m, uniform half-width of the seat footprint
    double seat_azimuth_jitter = 8.0 * std::numbers::pi / 180.0; // rad
    double gain_min = 1.0;
    double gain_max = 1.6;
    double breathing_amplitude_min = 0.006; // m
    double breathing_amplitude_max = 0.012; // m
    double breathing_rate_min = 0.2;        // Hz
    double breathing_rate_max = 0.5;        // Hz
    double noise_power = 0.1;
    double phase_noise_std = 0.0;
    std::vector<Target> clutter = default_clutter();

    static std::vector<Target> default_clutter() {
        std::vector<Target> c;
        c.push_back({.range = 0.35, .azimuth = 0.0, .gain = 2.0});
        const double deg20 = 20.0 * std::numbers::pi / 180.0;
        for (double r : {0.8, 1.6, 2.4}) {
            c.push_back({.range = r + 0.2, .azimuth = -deg20, .gain = 0.5});
            c.push_back({.range = r + 0.2, .azimuth = deg20, .gain = 0.5});
        }
        return c;
    }
};

/// Builds the scene for one labeled frame: one breathing occupant per
/// occupied row, placed in a randomly chosen seat cell of that row and
/// jittered within the seat footprint, plus the fixed cabin clutter.
/// The empty class plants clutter only.
inline Scene scene_for_class(OccupancyClass label, const CabinGeometry& geometry,
                             std::uint64_t rng_seed) {
    if (geometry.row_ranges.size() != 3) {
        throw ConfigError("cabin geometry must define exactly 3 seat rows");
    }
    if (geometry.azimuth_cells.empty()) {
        throw ConfigError("cabin geometry must define at least one azimuth cell per row");
    }
    detail::Rng rng(detail::mix_seed(rng_seed, 0xC0FFEEULL));
    Scene scene;
    const std::array<bool, 3> rows = occupied_rows(label);
    for (int row = 0; row < 3; ++row) {
        if (!rows[row]) continue;
        Target t;
        const std::size_t cell = rng.below(geometry.azimuth_cells.size());
        t.range = geometry.row_ranges[row] +
                  rng.uniform(-geometry.seat_range_jitter, geometry.seat_range_jitter);
        t.azimuth = geometry.azimuth_cells[cell] +
                    rng.uniform(-geometry.seat_azimuth_jitter, geometry.seat_azimuth_jitter);
        t.gain = rng.uniform(geometry.gain_min, geometry.gain_max);
        t.velocity = 0.0;
        t.breathing_amplitude = rng.uniform(geometry.breathing_amplitude_min,
                                            geometry.breathing_amplitude_max);
        t.breathing_rate =
            rng.uniform(geometry.breathing_rate_min, geometry.breathing_rate_max);
        scene.targets.push_back(t);
    }
    scene.clutter = geometry.clutter;
    scene.noise_power = geometry.noise_power;
    scene.phase_noise_std = geometry.phase_noise_std;
    scene.rng_seed = detail::mix_seed(rng_seed, 0xA015EULL);
    return scene;
}

// --- JSON interfaces ---

inline void to_json(nlohmann::json& j, const Target& t) {
    j = nlohmann::json{{"range", t.range},
                       {"azimuth", t.azimuth},
                       {"gain", t.gain},
                       {"velocity", t.velocity},
                       {"breathing_amplitude", t.breathing_amplitude},
                       {"breathing_rate", t.breathing_rate}};
}

inline void from_json(const nlohmann::json& j, Target& t) {
    t = Target{};
    j.at("range").get_to(t.range);
    j.at("azimuth").get_to(t.azimuth);
    if (j.contains("gain")) j.at("gain").get_to(t.gain);
    if (j.contains("velocity")) j.at("velocity").get_to(t.velocity);
    if (j.contains("breathing_amplitude")) j.at("breathing_amplitude").get_to(t.breathing_amplitude);
    if (j.contains("breathing_rate")) j.at("breathing_rate").get_to(t.breathing_rate);
}

inline void to_json(nlohmann::json& j, const Scene& s) {
    j = nlohmann::json{{"targets", s.targets},
                       {"clutter", s.clutter},
                       {"noise_power", s.noise_power},
                       {"phase_noise_std", s.phase_noise_std},
                       {"rng_seed", s.rng_seed}};
}

inline void from_json(const nlohmann::json& j, Scene& s) {
    s = Scene{};
    if (j.contains("targets")) j.at("targets").get_to(s.targets);
    if (j.contains("clutter")) j.at("clutter").get_to(s.clutter);
    if (j.contains("noise_power")) j.at("noise_power").get_to(s.noise_power);
    if (j.contains("phase_noise_std")) j.at("phase_noise_std").get_to(s.phase_noise_std);
    if (j.contains("rng_seed")) j.at("rng_seed").get_to(s.rng_seed);
}

inline void to_json(nlohmann::json& j, const CabinGeometry& g) {
    j = nlohmann::json{{"row_ranges", g.row_ranges},
                       {"azimuth_cells", g.azimuth_cells},
                       {"seat_range_jitter", g.seat_range_jitter},
                       {"seat_azimuth_jitter", g.seat_azimuth_jitter},
                       {"gain_min", g.gain_min},
                       {"gain_max", g.gain_max},
                       {"breathing_amplitude_min", g.breathing_amplitude_min},
                       {"breathing_amplitude_max", g.breathing_amplitude_max},
                       {"breathing_rate_min", g.breathing_rate_min},
                       {"breathing_rate_max", g.breathing_rate_max},
                       {"noise_power", g.noise_power},
                       {"phase_noise_std", g.phase_noise_std},
                       {"clutter", g.clutter}};
}

inline void from_json(const nlohmann::json& j, CabinGeometry& g) {
    g = CabinGeometry{};
    if (j.contains("row_ranges")) j.at("row_ranges").get_to(g.row_ranges);
    if (j.contains("azimuth_cells")) j.at("azimuth_cells").get_to(g.azimuth_cells);
    if (j.contains("seat_range_jitter")) j.at("seat_range_jitter").get_to(g.seat_range_jitter);
    if (j.contains("seat_azimuth_jitter")) j.at("seat_azimuth_jitter").get_to(g.seat_azimuth_jitter);
    if (j.contains("gain_min")) j.at("gain_min").get_to(g.gain_min);
    if (j.contains("gain_max")) j.at("gain_max").get_to(g.gain_max);
    if (j.contains("breathing_amplitude_min")) j.at("breathing_amplitude_min").get_to(g.breathing_amplitude_min);
    if (j.contains("breathing_amplitude_max")) j.at("breathing_amplitude_max").get_to(g.breathing_amplitude_max);
    if (j.contains("breathing_rate_min")) j.at("breathing_rate_min").get_to(g.breathing_rate_min);
    if (j.contains("breathing_rate_max")) j.at("breathing_rate_max").get_to(g.breathing_rate_max);
    if (j.contains("noise_power")) j.at("noise_power").get_to(g.noise_power);
    if (j.contains("phase_noise_std")) j.at("phase_noise_std").get_to(g.phase_noise_std);
    if (j.contains("clutter")) j.at("clutter").get_to(g.clutter);
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed scene JSON in " + path + ": " + e.what());
    }
    return j.get<Scene>();
}

inline CabinGeometry load_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open geometry file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed geometry JSON in " + path + ": " + e.what());
    }
    return j.get<CabinGeometry>();
}

// --- cube export: flat little-endian float32 (re, im) pairs in
// (chirp, channel, sample) order, plus a JSON sidecar ---

static_assert(std::endian::native == std::endian::little,
              "cube export assumes a little-endian host");

inline void save_cube(const RawDataCube& cube, const std::string& bin_path,
                      const std::string& sidecar_path) {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw IoError("cannot write cube binary: " + bin_path);
    std::vector<float> buffer;
    buffer.reserve(cube.samples.size() * 2);
    for (const std::complex<double>& s : cube.samples) {
        buffer.push_back(static_cast<float>(s.real()));
        buffer.push_back(static_cast<float>(s.imag()));
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!out) throw IoError("failed writing cube binary: " + bin_path);

    nlohmann::json config_json = cube.config;
    nlohmann::json sidecar = {{"n_chirps", cube.n_chirps},
                              {"n_channels", cube.n_channels},
                              {"n_samples", cube.n_samples},
                              {"config", config_json},
                              {"config_sha256", detail::sha256_hex(config_json.dump())}};
    std::ofstream meta(sidecar_path);
    if (!meta) throw IoError("cannot write cube sidecar: " + sidecar_path);
    meta << sidecar.dump(2) << "\n";
}

inline RawDataCube load_cube(const std::string& bin_path,
                             const std::string& sidecar_path) {
    std::ifstream meta(sidecar_path);
    if (!meta) throw IoError("cannot open cube sidecar: " + sidecar_path);
    nlohmann::json sidecar;
    meta >> sidecar;

    RawDataCube cube;
    sidecar.at("n_chirps").get_to(cube.n_chirps);
    sidecar.at("n_channels").get_to(cube.n_channels);
    sidecar.at("n_samples").get_to(cube.n_samples);
    cube.config = sidecar.at("config").get<RadarConfig>();

    const std::size_t count = static_cast<std::size_t>(cube.n_chirps) *
                              cube.n_channels * cube.n_samples;
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw IoError("cannot open cube binary: " + bin_path);
    std::vector<float> buffer(count * 2);
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size() * sizeof(float)) {
        throw IoError("cube binary truncated: " + bin_path);
    }
    cube.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        cube.samples[i] = {static_cast<double>(buffer[2 * i]),
                           static_cast<double>(buffer[2 * i + 1])};
    }
    return cube;
}

} // namespace ovd
