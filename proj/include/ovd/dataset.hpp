#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ovd/capon.hpp"
#include "ovd/detail/random.hpp"
#include "ovd/detail/sha256.hpp"
#include "ovd/errors.hpp"
#include "ovd/features.hpp"
#include "ovd/frontend.hpp"
#include "ovd/occupancy.hpp"
#include "ovd/radar_config.hpp"
#include "ovd/scene_sim.hpp"

namespace ovd {

/// Processing knobs shared by dataset generation and single-map export.
struct ProcessingOptions {
    WindowKind window = WindowKind::Hann;
    int fft_size = 0;            // 0 = next power of two
    double loading_factor = 0.01;
};

/// One frame: scene synthesis, range FFT, clutter removal, Capon map.
inline RangeAzimuthMap process_frame(const Scene& scene, const RadarConfig& config,
                                     const ProcessingOptions& options = {}) {
    const RawDataCube cube = synthesize(scene, config);
    const RangeProfileCube profiles = range_fft(cube, options.window, options.fft_size);
    const RangeProfileCube cleaned = remove_clutter(profiles);
    return range_azimuth_map(cleaned, default_angle_grid(), options.loading_factor,
                             config.element_spacing);
}

struct ManifestItem {
    OccupancyClass label = OccupancyClass::NoOne;
    std::uint64_t seed = 0;     // per-item scene seed
    std::string path;           // relative to the dataset directory
    std::string sha256;         // of the map file contents
};

/// Index of a generated dataset: balanced per-class map files plus the
/// hashes needed to verify them and reproduce the run.
struct DatasetManifest {
    int range_bins = 0;
    int angle_bins = 0;
    int per_class = 0;
    RadarConfig config;
    CabinGeometry geometry;
    std::string config_sha256;
    std::string geometry_sha256;
    std::vector<ManifestItem> items;

    std::array<int, kNumClasses> class_counts() const {
        std::array<int, kNumClasses> counts{};
        for (const ManifestItem& item : items) {
            counts[static_cast<std::size_t>(static_cast<int>(item.label))] += 1;
        }
        return counts;
    }
};

inline void to_json(nlohmann::json& j, const ManifestItem& item) {
    j = nlohmann::json{{"class", class_name(item.label)},
                       {"seed", item.seed},
                       {"path", item.path},
                       {"sha256", item.sha256}};
}

inline void from_json(const nlohmann::json& j, ManifestItem& item) {
    item.label = class_from_name(j.at("class").get<std::string>());
    j.at("seed").get_to(item.seed);
    j.at("path").get_to(item.path);
    j.at("sha256").get_to(item.sha256);
}

inline void to_json(nlohmann::json& j, const DatasetManifest& m) {
    nlohmann::json counts;
    const auto per_class_counts = m.class_counts();
    for (OccupancyClass c : kAllClasses) {
        counts[class_name(c)] = per_class_counts[static_cast<std::size_t>(static_cast<int>(c))];
    }
    j = nlohmann::json{{"version", 1},
                       {"range_bins", m.range_bins},
                       {"angle_bins", m.angle_bins},
                       {"per_class", m.per_class},
                       {"config", m.config},
                       {"geometry", m.geometry},
                       {"config_sha256", m.config_sha256},
                       {"geometry_sha256", m.geometry_sha256},
                       {"class_counts", counts},
                       {"items", m.items}};
}

inline void from_json(const nlohmann::json& j, DatasetManifest& m) {
    if (j.at("version").get<int>() != 1) {
        throw ConfigError("unsupported dataset manifest version");
    }
    j.at("range_bins").get_to(m.range_bins);
    j.at("angle_bins").get_to(m.angle_bins);
    j.at("per_class").get_to(m.per_class);
    m.config = j.at("config").get<RadarConfig>();
    m.geometry = j.at("geometry").get<CabinGeometry>();
    j.at("config_sha256").get_to(m.config_sha256);
    j.at("geometry_sha256").get_to(m.geometry_sha256);
    m.items = j.at("items").get<std::vector<ManifestItem>>();
}

namespace detail {

/// float32 little-endian, row-major map payload.
inline void write_map_binary(const RangeAzimuthMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write map file: " + path);
    std::vector<float> buffer;
    buffer.reserve(static_cast<std::size_t>(map.values.size()));
    for (Eigen::Index r = 0; r < map.values.rows(); ++r) {
        for (Eigen::Index a = 0; a < map.values.cols(); ++a) {
            buffer.push_back(static_cast<float>(map.values(r, a)));
        }
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!out) throw IoError("failed writing map file: " + path);
}

inline Eigen::VectorXd read_map_binary(const std::string& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open map file: " + path);
    std::vector<float> buffer(count);
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) {
        throw IoError("map file truncated: " + path);
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) v(static_cast<Eigen::Index>(i)) = buffer[i];
    return v;
}

} // namespace detail

/// Generates per_class labeled frames for every class, processes each to a
/// range-azimuth map, and persists maps plus manifest under out_dir.
/// Layout: out_dir/manifest.json, out_dir/maps/<class>/<index>.bin.
/// The manifest is written last, atomically (write + rename).
inline DatasetManifest generate(const RadarConfig& config, const CabinGeometry& geometry,
                                int per_class, std::uint64_t seed,
                                const std::string& out_dir,
                                const ProcessingOptions& options = {}) {
    if (per_class < 1) throw ConfigError("per_class must be at least 1");
    validate(config);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create dataset directory " + out_dir + ": " + ec.message());

    DatasetManifest manifest;
    manifest.per_class = per_class;
    manifest.config = config;
    manifest.geometry = geometry;
    manifest.config_sha256 = detail::sha256_hex(nlohmann::json(config).dump());
    manifest.geometry_sha256 = detail::sha256_hex(nlohmann::json(geometry).dump());

    for (OccupancyClass label : kAllClasses) {
        const fs::path class_dir = fs::path(out_dir) / "maps" / class_name(label);
        fs::create_directories(class_dir, ec);
        if (ec) {
            throw IoError("cannot create class directory " + class_dir.string() + ": " +
                          ec.message());
        }
        for (int index = 0; index < per_class; ++index) {
            const std::uint64_t item_seed =
                detail::mix_seed(seed, static_cast<std::uint64_t>(label),
                                 static_cast<std::uint64_t>(index));
            const Scene scene = scene_for_class(label, geometry, item_seed);
            const RangeAzimuthMap map = process_frame(scene, config, options);
            if (manifest.range_bins == 0) {
                manifest.range_bins = static_cast<int>(map.values.rows());
                manifest.angle_bins = static_cast<int>(map.values.cols());
            }
            const std::string rel_path =
                (fs::path("maps") / class_name(label) / (std::to_string(index) + ".bin"))
                    .generic_string();
            const std::string abs_path = (fs::path(out_dir) / rel_path).string();
            detail::write_map_binary(map, abs_path);
            ManifestItem item;
            item.label = label;
            item.seed = item_seed;
            item.path = rel_path;
            item.sha256 = detail::sha256_file(abs_path);
            manifest.items.push_back(std::move(item));
        }
    }

    const nlohmann::json manifest_json = manifest;
    const fs::path final_path = fs::path(out_dir) / "manifest.json";
    const fs::path tmp_path = fs::path(out_dir) / "manifest.json.tmp";
    {
        std::ofstream out(tmp_path);
        if (!out) throw IoError("cannot write manifest: " + tmp_path.string());
        out << manifest_json.dump(2) << "\n";
        if (!out) throw IoError("failed writing manifest: " + tmp_path.string());
    }
    fs::rename(tmp_path, final_path, ec);
    if (ec) throw IoError("cannot finalize manifest: " + ec.message());
    return manifest;
}

inline DatasetManifest load_manifest(const std::string& dataset_dir) {
    const std::string path =
        (std::filesystem::path(dataset_dir) / "manifest.json").string();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest JSON in " + path + ": " + e.what());
    }
    return j.get<DatasetManifest>();
}

/// Stratified train/test split: each class contributes exactly
/// train_fraction of its items to the train manifest. The per-class item
/// order is shuffled with the given seed; the split is disjoint and
/// exhaustive.
inline std::pair<DatasetManifest, DatasetManifest> split(const DatasetManifest& manifest,
                                                         double train_fraction,
                                                         std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie strictly between 0 and 1");
    }
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < manifest.items.size(); ++i) {
        by_class[static_cast<std::size_t>(static_cast<int>(manifest.items[i].label))]
            .push_back(i);
    }

    DatasetManifest train = manifest;
    DatasetManifest test = manifest;
    train.items.clear();
    test.items.clear();

    detail::Rng rng(detail::mix_seed(seed, 0x5137ULL));
    for (int c = 0; c < kNumClasses; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.empty()) continue;
        const double exact = static_cast<double>(idx.size()) * train_fraction;
        const double rounded = std::round(exact);
        if (std::abs(exact - rounded) > 1e-9) {
            throw ConfigError(std::string("per-class count ") +
                              std::to_string(idx.size()) + " times train fraction " +
                              std::to_string(train_fraction) +
                              " is not a whole number; choose a per-class count "
                              "divisible by the split");
        }
        for (std::size_t i = idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(idx[i - 1], idx[j]);
        }
        const std::size_t n_train = static_cast<std::size_t>(rounded);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_train ? train : test).items.push_back(manifest.items[idx[i]]);
        }
    }
    return {train, test};
}

struct LabeledFeatures {
    Eigen::MatrixXd X; // one flattened map per row
    std::vector<OccupancyClass> y;
};

/// Loads every map referenced by the manifest, hash-verifying each file.
inline LabeledFeatures load_features(const DatasetManifest& manifest,
                                     const std::string& dataset_dir) {
    const std::size_t dim =
        static_cast<std::size_t>(manifest.range_bins) * manifest.angle_bins;
    LabeledFeatures out;
    out.X.resize(static_cast<Eigen::Index>(manifest.items.size()),
                 static_cast<Eigen::Index>(dim));
    out.y.reserve(manifest.items.size());
    for (std::size_t i = 0; i < manifest.items.size(); ++i) {
        const ManifestItem& item = manifest.items[i];
        const std::string path =
            (std::filesystem::path(dataset_dir) / item.path).string();
        const std::string digest = detail::sha256_file(path);
        if (digest != item.sha256) {
            throw IoError("map file hash mismatch for " + path);
        }
        out.X.row(static_cast<Eigen::Index>(i)) =
            detail::read_map_binary(path, dim).transpose();
        out.y.push_back(item.label);
    }
    return out;
}

} // namespace ovd
