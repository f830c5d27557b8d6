// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * Forward simulator used as the end-to-end oracle.
 *
 * Scenes are built from known temperature and emissivity fields, pushed
 * through a linear atmosphere
 *     sensor = gain * ground + offset + N(0, sigma^2)
 * and accompanied by the field readings a ground team would have taken.
 *
 * Noise comes from a counter-based generator: every draw is a pure function
 * of (seed, stream, counter), hashed with the SplitMix64 finalizer, and
 * Gaussian deviates use Box-Muller on draws 2i and 2i+1. Results therefore do
 * not depend on thread count or evaluation order.
 */

#pragma once

#include <rooftherm/detail/parallel.hpp>
#include <rooftherm/error.hpp>
#include <rooftherm/instrument.hpp>
#include <rooftherm/radiometry.hpp>
#include <rooftherm/raster.hpp>
#include <rooftherm/spectra.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rooftherm {

// ---------------------------------------------------------------------------
// Counter-based random numbers

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

/// Uniform in the open interval (0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return (static_cast<double>(counter_hash(seed, stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const double u1 = counter_uniform(seed, stream, 2 * index);
    const double u2 = counter_uniform(seed, stream, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Stream ids keep independent draws apart.
namespace streams {
inline constexpr std::uint64_t layout = 1;
inline constexpr std::uint64_t readings = 2;
inline constexpr std::uint64_t calibration = 3;
inline constexpr std::uint64_t image_base = 1000;
} // namespace streams

// ---------------------------------------------------------------------------
// Forward model

struct Atmosphere {
    double gain = 1.0;
    double offset = 0.0;      // W m-2
    double noise_sigma = 0.0; // W m-2
    std::uint64_t seed = 0;
};

struct SimulationOptions {
    /// Cold-sky radiance reflected by every surface: ground += (1 - eps) * M_bb(sky).
    std::optional<double> sky_temperature;
    std::uint64_t stream = streams::image_base;
    double lambda_step = kDefaultLambdaStep;
    unsigned threads = 1;
};

namespace detail {

/// Band exitance for each distinct temperature in the raster.
inline std::unordered_map<double, double> exitance_cache(const RadianceRaster& temperature, const WavelengthBand& band,
                                                         double lambda_step, unsigned threads) {
    std::vector<double> unique;
    for (double t : temperature.values)
        if (!temperature.is_nodata(t)) unique.push_back(t);
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    std::vector<double> values(unique.size());
    parallel_for(unique.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) values[i] = band_exitance(band, unique[i], lambda_step);
    });
    std::unordered_map<double, double> cache;
    cache.reserve(unique.size());
    for (std::size_t i = 0; i < unique.size(); ++i) cache.emplace(unique[i], values[i]);
    return cache;
}

} // namespace detail

/// Ground-leaving band exitance of a temperature/emissivity scene (no atmosphere).
inline RadianceRaster simulate_ground(const RadianceRaster& temperature, const RadianceRaster& emissivity,
                                      const WavelengthBand& band, const SimulationOptions& options = {}) {
    if (!temperature.same_grid(emissivity)) throw ConfigError("temperature and emissivity rasters are not aligned");
    const auto cache = detail::exitance_cache(temperature, band, options.lambda_step, options.threads);
    const double sky = options.sky_temperature ? band_exitance(band, *options.sky_temperature, options.lambda_step) : 0.0;
    RadianceRaster ground = temperature.like(temperature.nodata);
    ground.band = band;
    for (std::size_t i = 0; i < ground.size(); ++i) {
        const double t = temperature.values[i];
        const double eps = emissivity.values[i];
        if (temperature.is_nodata(t) || emissivity.is_nodata(eps)) continue;
        ground.values[i] = eps * cache.at(t) + (1.0 - eps) * sky;
    }
    return ground;
}

/// sensor = gain * ground + offset + N(0, sigma^2); the noise for pixel i is
/// counter_gaussian(seed, stream, i).
inline RadianceRaster apply_atmosphere(const RadianceRaster& ground, const Atmosphere& atmosphere,
                                       std::uint64_t stream = streams::image_base) {
    if (!(atmosphere.gain > 0.0)) throw DomainError("atmospheric gain must be positive");
    if (!(atmosphere.noise_sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
    RadianceRaster sensor = ground;
    for (std::size_t i = 0; i < sensor.size(); ++i) {
        const double g = ground.values[i];
        if (ground.is_nodata(g)) continue;
        double v = atmosphere.gain * g + atmosphere.offset;
        if (atmosphere.noise_sigma > 0.0) v += atmosphere.noise_sigma * counter_gaussian(atmosphere.seed, stream, i);
        sensor.values[i] = v;
    }
    return sensor;
}

inline RadianceRaster simulate_at_sensor(const RadianceRaster& temperature, const RadianceRaster& emissivity,
                                         const Atmosphere& atmosphere, const WavelengthBand& band,
                                         const SimulationOptions& options = {}) {
    return apply_atmosphere(simulate_ground(temperature, emissivity, band, options), atmosphere, options.stream);
}

// ---------------------------------------------------------------------------
// Scene description

struct SyntheticBuilding {
    std::int64_t building_id = 0;
    std::string material;
    double temperature = 0.0; // K
    Ring polygon;
};

struct SyntheticTarget {
    std::string target_id;
    std::string material;
    double temperature = 0.0; // K
    double x = 0.0;
    double y = 0.0;
};

struct RandomBuildings {
    std::size_t count = 0;
    std::vector<std::string> materials = kRoofMaterials;
    std::size_t min_size_cells = 8;
    std::size_t max_size_cells = 20;
    double t_min = 266.0;
    double t_max = 280.0;
};

struct RandomTargets {
    std::size_t count = 0;
    std::vector<std::string> materials = {"asphalt", "concrete", "water", "black_board"};
    double t_min = 266.0;
    double t_max = 288.0;
};

struct ImageSpec {
    std::string image_id = "img1";
    std::string flight_line = "1";
    double offset_jitter = 0.0; // W m-2 added to the atmospheric offset
};

struct InstrumentSpec {
    std::string instrument_id = "ir1";
    double slope = 1.0;
    double offset = 0.0; // K
};

struct SceneSpec {
    std::size_t ncols = 512;
    std::size_t nrows = 512;
    double cellsize = 0.3;
    double xll = 0.0;
    double yll = 0.0;

    double background_temperature = 270.0;
    double background_gradient_x = 0.0; // K per map unit
    double background_gradient_y = 0.0;
    std::string background_material = "concrete";

    std::vector<SyntheticBuilding> buildings;
    RandomBuildings random_buildings;
    std::vector<SyntheticTarget> targets;
    RandomTargets random_targets;
    std::size_t target_size_cells = 5;

    std::vector<ImageSpec> images{ImageSpec{}};
    Atmosphere atmosphere{0.4, 3.0, 0.0, 1};
    double noise_fraction = 0.0; // if > 0, sigma = fraction * mean noise-free sensor exitance
    std::optional<double> sky_temperature;

    std::vector<InstrumentSpec> instruments{InstrumentSpec{}};
    double device_emissivity = kDeviceEmissivity;
    double medium_emissivity = kWaterEmissivity;
    double calibration_start = 276.15; // K
    double calibration_step = 0.5;     // K
    std::size_t calibration_count = 41;
    double reading_noise = 0.0;     // K, field readings
    double calibration_noise = 0.0; // K, session readings
    bool roof_readings = true;

    WavelengthBand band = kImagerBand;
    WavelengthBand device_band = kThermometerBand;
    double lambda_step = kDefaultLambdaStep;
    MaterialTable materials = builtin_material_table();
};

struct Scene {
    RadianceRaster temperature; // K
    RadianceRaster emissivity;  // imager band
    FootprintSet footprints;
    std::vector<SyntheticTarget> targets; // explicit and generated
    std::vector<FieldReading> readings;   // targets and roofs
    std::vector<FieldReading> calibration_session;
};

struct SimulatedDataset {
    Scene scene;
    std::vector<RadianceRaster> ground;  // per image, before the atmosphere
    std::vector<RadianceRaster> sensors; // per image
    double noise_sigma = 0.0;
};

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("scene spec: bad value for '") + key + "'");
    }
}

inline std::string json_label(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline Ring rect_ring(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

} // namespace detail

/// SceneSpec from its JSON document. Unset keys keep their defaults.
inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
    using detail::json_get;
    if (!j.is_object()) throw ConfigError("scene spec must be a JSON object");
    SceneSpec s;
    try {
        s.ncols = json_get(j, "ncols", s.ncols);
        s.nrows = json_get(j, "nrows", s.nrows);
        s.cellsize = json_get(j, "cellsize", s.cellsize);
        s.xll = json_get(j, "xllcorner", s.xll);
        s.yll = json_get(j, "yllcorner", s.yll);
        if (j.contains("band")) s.band = WavelengthBand::parse(j["band"].get<std::string>());
        if (j.contains("device_band")) s.device_band = WavelengthBand::parse(j["device_band"].get<std::string>());
        s.lambda_step = json_get(j, "lambda_step_um", s.lambda_step);

        if (j.contains("background")) {
            const auto& b = j["background"];
            s.background_temperature = json_get(b, "temperature_K", s.background_temperature);
            s.background_gradient_x = json_get(b, "gradient_x_K_per_unit", s.background_gradient_x);
            s.background_gradient_y = json_get(b, "gradient_y_K_per_unit", s.background_gradient_y);
            s.background_material = json_get(b, "material", s.background_material);
        }

        if (j.contains("materials")) {
            for (const auto& [name, m] : j["materials"].items()) {
                for (const auto& [band, e] : m.items()) s.materials.set(name, WavelengthBand::parse(band), e.get<double>());
            }
        }

        for (const auto& b : j.value("buildings", nlohmann::json::array())) {
            SyntheticBuilding sb;
            sb.building_id = b.at("building_id").get<std::int64_t>();
            sb.material = b.at("material").get<std::string>();
            sb.temperature = b.at("temperature_K").get<double>();
            for (const auto& p : b.at("polygon")) sb.polygon.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            if (sb.polygon.size() > 1 && sb.polygon.front().x == sb.polygon.back().x &&
                sb.polygon.front().y == sb.polygon.back().y)
                sb.polygon.pop_back();
            s.buildings.push_back(std::move(sb));
        }
        if (j.contains("random_buildings")) {
            const auto& r = j["random_buildings"];
            s.random_buildings.count = json_get(r, "count", s.random_buildings.count);
            s.random_buildings.materials = json_get(r, "materials", s.random_buildings.materials);
            s.random_buildings.min_size_cells = json_get(r, "min_size_cells", s.random_buildings.min_size_cells);
            s.random_buildings.max_size_cells = json_get(r, "max_size_cells", s.random_buildings.max_size_cells);
            s.random_buildings.t_min = json_get(r, "t_min_K", s.random_buildings.t_min);
            s.random_buildings.t_max = json_get(r, "t_max_K", s.random_buildings.t_max);
        }
        for (const auto& t : j.value("targets", nlohmann::json::array())) {
            SyntheticTarget st;
            st.target_id = detail::json_label(t.at("target_id"));
            st.material = t.at("material").get<std::string>();
            st.temperature = t.at("temperature_K").get<double>();
            st.x = t.at("x").get<double>();
            st.y = t.at("y").get<double>();
            s.targets.push_back(std::move(st));
        }
        if (j.contains("random_targets")) {
            const auto& r = j["random_targets"];
            s.random_targets.count = json_get(r, "count", s.random_targets.count);
            s.random_targets.materials = json_get(r, "materials", s.random_targets.materials);
            s.random_targets.t_min = json_get(r, "t_min_K", s.random_targets.t_min);
            s.random_targets.t_max = json_get(r, "t_max_K", s.random_targets.t_max);
        }
        s.target_size_cells = json_get(j, "target_size_cells", s.target_size_cells);

        if (j.contains("images")) {
            s.images.clear();
            for (const auto& im : j["images"]) {
                ImageSpec is;
                is.image_id = detail::json_label(im.at("image_id"));
                is.flight_line = im.contains("flight_line") ? detail::json_label(im["flight_line"]) : is.flight_line;
                is.offset_jitter = json_get(im, "offset_jitter", 0.0);
                s.images.push_back(std::move(is));
            }
        }
        if (j.contains("atmosphere")) {
            const auto& a = j["atmosphere"];
            s.atmosphere.gain = json_get(a, "gain", s.atmosphere.gain);
            s.atmosphere.offset = json_get(a, "offset", s.atmosphere.offset);
            s.atmosphere.noise_sigma = json_get(a, "noise_sigma", s.atmosphere.noise_sigma);
            s.noise_fraction = json_get(a, "noise_fraction", s.noise_fraction);
        }
        s.atmosphere.seed = json_get(j, "seed", s.atmosphere.seed);
        if (j.contains("sky_temperature_K") && !j["sky_temperature_K"].is_null())
            s.sky_temperature = j["sky_temperature_K"].get<double>();

        if (j.contains("instruments")) {
            s.instruments.clear();
            for (const auto& in : j["instruments"]) {
                InstrumentSpec is;
                is.instrument_id = detail::json_label(in.at("instrument_id"));
                is.slope = json_get(in, "slope", 1.0);
                is.offset = json_get(in, "offset", 0.0);
                s.instruments.push_back(std::move(is));
            }
        }
        s.device_emissivity = json_get(j, "device_emissivity", s.device_emissivity);
        s.medium_emissivity = json_get(j, "medium_emissivity", s.medium_emissivity);
        if (j.contains("calibration")) {
            const auto& c = j["calibration"];
            s.calibration_start = json_get(c, "start_K", s.calibration_start);
            s.calibration_step = json_get(c, "step_K", s.calibration_step);
            s.calibration_count = json_get(c, "count", s.calibration_count);
            s.calibration_noise = json_get(c, "noise_K", s.calibration_noise);
        }
        s.reading_noise = json_get(j, "reading_noise_K", s.reading_noise);
        s.roof_readings = json_get(j, "roof_readings", s.roof_readings);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scene spec: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("scene spec: ") + e.what());
    }
    if (s.ncols < 1 || s.nrows < 1 || !(s.cellsize > 0.0)) throw ConfigError("scene spec: invalid grid");
    if (s.images.empty()) throw ConfigError("scene spec: at least one image is required");
    if (s.instruments.empty()) throw ConfigError("scene spec: at least one instrument is required");
    if (!(s.atmosphere.gain > 0.0)) throw ConfigError("scene spec: atmospheric gain must be positive");
    if (s.atmosphere.noise_sigma < 0.0 || s.noise_fraction < 0.0) throw ConfigError("scene spec: negative noise");
    for (const auto& in : s.instruments)
        if (!(in.slope > 0.0)) throw ConfigError("scene spec: instrument slope must be positive");
    if (s.target_size_cells < 1) throw ConfigError("scene spec: target_size_cells must be >= 1");
    if (s.random_buildings.count && (s.random_buildings.materials.empty() ||
                                     s.random_buildings.min_size_cells < 1 ||
                                     s.random_buildings.min_size_cells > s.random_buildings.max_size_cells))
        throw ConfigError("scene spec: invalid random_buildings");
    if (s.random_targets.count && s.random_targets.materials.empty())
        throw ConfigError("scene spec: random_targets needs materials");
    return s;
}

namespace detail {

/// Displayed temperature a thermometer would show for a target.
///   effective: blackbody-equivalent kinetic temperature seen by a perfect
///              instrument (includes reflected sky when present),
///   instrument: what this instrument's chain returns (its distortion),
///   displayed: radiant temperature under the device emissivity setting.
inline double displayed_for(double kinetic_true, double e_target, const InstrumentSpec& inst,
                            const SceneSpec& spec, double noise) {
    const auto& band = spec.device_band;
    double effective = kinetic_true;
    if (spec.sky_temperature) {
        const double m = e_target * band_exitance(band, kinetic_true, spec.lambda_step) +
                         (1.0 - e_target) * band_exitance(band, *spec.sky_temperature, spec.lambda_step);
        effective = solve_band_temperature(band, m / e_target, spec.lambda_step);
    }
    const double instrument_kinetic = (effective - inst.offset) / inst.slope + noise;
    const double received = e_target * band_exitance(band, instrument_kinetic, spec.lambda_step);
    return solve_band_temperature(band, received / spec.device_emissivity, spec.lambda_step);
}

} // namespace detail

/// Builds the truth rasters, footprints and field readings. `device_table`
/// supplies the temperature grid on which calibration-session kinetic
/// temperatures are placed.
inline Scene generate_scene(const SceneSpec& spec, const PlanckTable& device_table) {
    Scene scene;
    const auto& mats = spec.materials;
    const std::uint64_t seed = spec.atmosphere.seed;

    scene.temperature = RadianceRaster::filled(spec.ncols, spec.nrows, spec.xll, spec.yll, spec.cellsize, 0.0);
    scene.emissivity = scene.temperature.like(mats.emissivity(spec.background_material, spec.band));
    for (std::size_t row = 0; row < spec.nrows; ++row)
        for (std::size_t col = 0; col < spec.ncols; ++col) {
            const auto c = scene.temperature.cell_center(row, col);
            scene.temperature.at(row, col) = spec.background_temperature +
                                             spec.background_gradient_x * (c.x - spec.xll) +
                                             spec.background_gradient_y * (c.y - spec.yll);
        }

    // Explicit buildings must fit inside the grid.
    std::vector<SyntheticBuilding> buildings = spec.buildings;
    for (const auto& b : buildings) {
        detail::check_ring(b.polygon, b.building_id);
        for (const auto& p : b.polygon)
            if (p.x < spec.xll || p.y < spec.yll || p.x > scene.temperature.xmax() || p.y > scene.temperature.ymax())
                throw GeometryError("building " + std::to_string(b.building_id) + " extends outside the grid");
    }
    std::vector<SyntheticTarget> targets = spec.targets;

    // Random layout: shuffle equal slots; buildings then targets take slots in order.
    const std::size_t rb = spec.random_buildings.count, rt = spec.random_targets.count;
    if (rb + rt > 0) {
        const std::size_t slot = std::max(spec.random_buildings.max_size_cells, spec.target_size_cells) + 4;
        const std::size_t slots_x = spec.ncols / slot, slots_y = spec.nrows / slot;
        if (slots_x * slots_y < rb + rt) throw GeometryError("grid too small for the requested random layout");
        std::vector<std::size_t> order(slots_x * slots_y);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(counter_hash(seed, streams::layout, i) % (i + 1));
            std::swap(order[i], order[j]);
        }
        std::int64_t next_id = 1;
        for (const auto& b : buildings) next_id = std::max(next_id, b.building_id + 1);
        auto uniform = [&](std::uint64_t counter) { return counter_uniform(seed, streams::layout, counter); };
        const double cs = spec.cellsize;
        for (std::size_t k = 0; k < rb + rt; ++k) {
            const std::size_t sx = order[k] % slots_x, sy = order[k] / slots_x;
            const double x0 = spec.xll + static_cast<double>(sx * slot + 2) * cs;
            const double y0 = spec.yll + static_cast<double>(sy * slot + 2) * cs;
            const std::uint64_t base = 1'000'000 + 8 * k;
            if (k < rb) {
                const auto& r = spec.random_buildings;
                const std::size_t span = r.max_size_cells - r.min_size_cells + 1;
                const auto w = r.min_size_cells + static_cast<std::size_t>(uniform(base) * static_cast<double>(span));
                const auto h = r.min_size_cells + static_cast<std::size_t>(uniform(base + 1) * static_cast<double>(span));
                SyntheticBuilding b;
                b.building_id = next_id++;
                b.material = r.materials[k % r.materials.size()];
                b.temperature = r.t_min + uniform(base + 2) * (r.t_max - r.t_min);
                b.polygon = detail::rect_ring(x0, y0, x0 + static_cast<double>(w) * cs, y0 + static_cast<double>(h) * cs);
                buildings.push_back(std::move(b));
            } else {
                const auto& r = spec.random_targets;
                const std::size_t idx = k - rb;
                SyntheticTarget t;
                t.target_id = "T" + std::to_string(idx + 1);
                t.material = r.materials[idx % r.materials.size()];
                t.temperature = r.t_min + uniform(base + 3) * (r.t_max - r.t_min);
                const double centre = static_cast<double>(spec.target_size_cells / 2) + 0.5;
                t.x = x0 + centre * cs;
                t.y = y0 + centre * cs;
                targets.push_back(std::move(t));
            }
        }
    }

    for (const auto& b : buildings) scene.footprints.buildings.push_back({b.building_id, b.material, {b.polygon}});
    const auto mask = rasterize(scene.footprints, scene.temperature);
    std::map<std::int64_t, const SyntheticBuilding*> by_id;
    for (const auto& b : buildings) by_id[b.building_id] = &b;
    for (std::size_t i = 0; i < mask.ids.size(); ++i) {
        if (mask.ids[i] == BuildingMask::kNoBuilding) continue;
        const auto* b = by_id.at(mask.ids[i]);
        scene.temperature.values[i] = b->temperature;
        scene.emissivity.values[i] = mats.emissivity(b->material, spec.band);
    }

    // Targets are painted as square patches centred on their cell.
    for (const auto& t : targets) {
        auto cell = scene.temperature.locate(t.x, t.y);
        if (!cell) throw GeometryError("target '" + t.target_id + "' lies outside the grid");
        const auto half = static_cast<std::ptrdiff_t>(spec.target_size_cells / 2);
        const double eps = mats.emissivity(t.material, spec.band);
        for (std::ptrdiff_t dr = -half; dr < static_cast<std::ptrdiff_t>(spec.target_size_cells) - half; ++dr)
            for (std::ptrdiff_t dc = -half; dc < static_cast<std::ptrdiff_t>(spec.target_size_cells) - half; ++dc) {
                const auto r = static_cast<std::ptrdiff_t>(cell->row) + dr;
                const auto c = static_cast<std::ptrdiff_t>(cell->col) + dc;
                if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(spec.nrows) ||
                    c >= static_cast<std::ptrdiff_t>(spec.ncols))
                    throw GeometryError("target '" + t.target_id + "' patch extends outside the grid");
                scene.temperature.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = t.temperature;
                scene.emissivity.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = eps;
            }
    }
    scene.targets = targets;

    // Field readings: targets first, then one per roof at its first masked cell.
    std::size_t reading_index = 0;
    auto add_reading = [&](const std::string& id, const std::string& material, double kinetic, double x, double y,
                           const std::string& role) {
        const auto& inst = spec.instruments[reading_index % spec.instruments.size()];
        const double e_target = mats.emissivity(material, spec.device_band);
        const double noise =
            spec.reading_noise > 0.0 ? spec.reading_noise * counter_gaussian(seed, streams::readings, reading_index) : 0.0;
        FieldReading r;
        r.instrument_id = inst.instrument_id;
        r.displayed_temp = detail::displayed_for(kinetic, e_target, inst, spec, noise);
        r.material = material;
        r.x = x;
        r.y = y;
        r.timestamp = 60.0 * static_cast<double>(reading_index);
        r.target_id = id;
        r.role = role;
        scene.readings.push_back(std::move(r));
        ++reading_index;
    };
    for (const auto& t : targets) add_reading(t.target_id, t.material, t.temperature, t.x, t.y, "target");
    if (spec.roof_readings) {
        std::map<std::int64_t, Point> first_cell;
        for (std::size_t row = 0; row < mask.nrows; ++row)
            for (std::size_t col = 0; col < mask.ncols; ++col) {
                const auto id = mask.at(row, col);
                if (id != BuildingMask::kNoBuilding && !first_cell.count(id))
                    first_cell[id] = scene.temperature.cell_center(row, col);
            }
        for (const auto& [id, p] : first_cell) {
            const auto* b = by_id.at(id);
            add_reading(std::to_string(id), b->material, b->temperature, p.x, p.y, "roof");
        }
    }

    // Calibration session: kinetic temperatures sit on the table grid so the
    // chain reproduces them without interpolation error.
    const auto grid_index = [&](double t) {
        return static_cast<std::size_t>(std::llround((t - device_table.t_min()) / device_table.t_step()));
    };
    const std::size_t start = grid_index(spec.calibration_start);
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.calibration_step / device_table.t_step())));
    std::uint64_t cal_counter = 0;
    for (const auto& inst : spec.instruments) {
        for (std::size_t s = 0; s < spec.calibration_count; ++s) {
            const std::size_t idx = start + s * stride;
            if (idx >= device_table.size()) throw ConfigError("calibration cycle leaves the Planck table range");
            double kinetic = device_table.temperature(idx);
            const double control = inst.slope * kinetic + inst.offset;
            if (spec.calibration_noise > 0.0)
                kinetic += spec.calibration_noise * counter_gaussian(seed, streams::calibration, cal_counter);
            ++cal_counter;
            const double received = spec.medium_emissivity * band_exitance(spec.device_band, kinetic, spec.lambda_step);
            FieldReading r;
            r.instrument_id = inst.instrument_id;
            r.control_temp = control;
            r.displayed_temp = solve_band_temperature(spec.device_band, received / spec.device_emissivity, spec.lambda_step);
            r.material = "water";
            r.timestamp = 30.0 * static_cast<double>(s);
            scene.calibration_session.push_back(std::move(r));
        }
    }
    return scene;
}

/// Scene plus one at-sensor raster per image.
inline SimulatedDataset simulate_dataset(const SceneSpec& spec, const PlanckTable& device_table, unsigned threads = 1) {
    SimulatedDataset ds;
    ds.scene = generate_scene(spec, device_table);
    SimulationOptions opts;
    opts.sky_temperature = spec.sky_temperature;
    opts.lambda_step = spec.lambda_step;
    opts.threads = threads;
    const auto ground = simulate_ground(ds.scene.temperature, ds.scene.emissivity, spec.band, opts);

    double sigma = spec.atmosphere.noise_sigma;
    if (spec.noise_fraction > 0.0) {
        double sum = 0.0;
        std::size_t n = 0;
        for (double g : ground.values)
            if (!ground.is_nodata(g)) {
                sum += spec.atmosphere.gain * g + spec.atmosphere.offset;
                ++n;
            }
        sigma = spec.noise_fraction * sum / static_cast<double>(n);
    }
    ds.noise_sigma = sigma;
    for (std::size_t k = 0; k < spec.images.size(); ++k) {
        const auto& im = spec.images[k];
        Atmosphere atm = spec.atmosphere;
        atm.offset += im.offset_jitter;
        atm.noise_sigma = sigma;
        auto g = ground;
        g.image_id = im.image_id;
        g.flight_line = im.flight_line;
        auto sensor = apply_atmosphere(g, atm, streams::image_base + k);
        ds.ground.push_back(std::move(g));
        ds.sensors.push_back(std::move(sensor));
    }
    return ds;
}

} // namespace rooftherm
