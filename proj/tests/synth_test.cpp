// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#include <rooftherm/synth.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace rooftherm {
namespace {

const PlanckTable& device_table() {
    static const PlanckTable t = build_planck_table(kThermometerBand);
    return t;
}

TEST(CounterRng, DeterministicAndWellSpread) {
    EXPECT_EQ(counter_hash(1, 2, 3), counter_hash(1, 2, 3));
    EXPECT_NE(counter_hash(1, 2, 3), counter_hash(1, 2, 4));
    EXPECT_NE(counter_hash(1, 2, 3), counter_hash(2, 2, 3));
    EXPECT_NE(counter_hash(1, 2, 3), counter_hash(1, 3, 3));
    // SplitMix64 reference output for state 0 after one increment.
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);

    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = counter_uniform(42, 7, static_cast<std::uint64_t>(i));
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double g = counter_gaussian(42, 7, static_cast<std::uint64_t>(i));
        sum += g;
        sq += g * g;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(SimulateAtSensor, IdentityAtmosphereGivesBlackbody) {
    auto temp = RadianceRaster::filled(4, 3, 0, 0, 1, 0.0);
    for (std::size_t i = 0; i < temp.size(); ++i) temp.values[i] = 260.0 + 3.0 * static_cast<double>(i);
    const auto eps = temp.like(1.0);
    const auto sensor = simulate_at_sensor(temp, eps, Atmosphere{1.0, 0.0, 0.0, 0}, kImagerBand);
    for (std::size_t i = 0; i < temp.size(); ++i) {
        const double expected = oracle::band_exitance_series(8.0, 9.2, temp.values[i]);
        EXPECT_NEAR(sensor.values[i], expected, 1e-7 * expected);
    }
}

TEST(SimulateAtSensor, AffineAtmosphereOnUniformField) {
    const auto temp = RadianceRaster::filled(3, 3, 0, 0, 1, 275.0);
    const auto eps = temp.like(0.95);
    const auto ground = simulate_ground(temp, eps, kImagerBand);
    const auto sensor = apply_atmosphere(ground, Atmosphere{0.5, 2.0, 0.0, 0});
    for (std::size_t i = 0; i < ground.size(); ++i) EXPECT_EQ(sensor.values[i], 0.5 * ground.values[0] + 2.0);
    EXPECT_THROW(simulate_ground(temp, RadianceRaster::filled(2, 3, 0, 0, 1, 1.0), kImagerBand), ConfigError);
    EXPECT_THROW(apply_atmosphere(ground, Atmosphere{0.0, 0.0, 0.0, 0}), DomainError);
}

TEST(SimulateAtSensor, NoiseIsSeededAndPixelAddressed) {
    const auto temp = RadianceRaster::filled(50, 40, 0, 0, 1, 275.0);
    const auto eps = temp.like(0.95);
    const Atmosphere atm{0.4, 3.0, 0.5, 99};
    const auto a = simulate_at_sensor(temp, eps, atm, kImagerBand);
    const auto b = simulate_at_sensor(temp, eps, atm, kImagerBand);
    EXPECT_EQ(a.values, b.values);
    SimulationOptions threaded;
    threaded.threads = 4;
    EXPECT_EQ(simulate_at_sensor(temp, eps, atm, kImagerBand, threaded).values, a.values);
    auto other = atm;
    other.seed = 100;
    EXPECT_NE(simulate_at_sensor(temp, eps, other, kImagerBand).values, a.values);
    const double clean = 0.4 * simulate_ground(temp, eps, kImagerBand).values[0] + 3.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(a.values[i], clean + 0.5 * counter_gaussian(99, streams::image_base, i));
}

TEST(SimulateGround, SkyTermAddsReflectedRadiance) {
    const auto temp = RadianceRaster::filled(1, 1, 0, 0, 1, 275.0);
    const auto eps = temp.like(0.633);
    SimulationOptions opts;
    opts.sky_temperature = 240.0;
    const double g = simulate_ground(temp, eps, kImagerBand, opts).values[0];
    EXPECT_NEAR(g, 0.633 * band_exitance(kImagerBand, 275.0) + 0.367 * band_exitance(kImagerBand, 240.0), 1e-12);
}

TEST(GenerateScene, SingleBuildingOnBackground) {
    SceneSpec spec;
    spec.ncols = spec.nrows = 20;
    spec.cellsize = 1.0;
    spec.buildings = {{7, "asphalt", 278.0, {{5, 5}, {10, 5}, {10, 9}, {5, 9}}}};
    const auto scene = generate_scene(spec, device_table());
    const auto mask = rasterize(scene.footprints, scene.temperature);
    EXPECT_EQ(mask.count(), 20u);
    for (std::size_t i = 0; i < mask.ids.size(); ++i) {
        const bool in = mask.ids[i] == 7;
        EXPECT_EQ(scene.temperature.values[i], in ? 278.0 : 270.0);
        EXPECT_EQ(scene.emissivity.values[i], in ? 0.93084419 : 0.95352648);
    }
    ASSERT_EQ(scene.readings.size(), 1u);
    EXPECT_EQ(scene.readings[0].role, "roof");
    EXPECT_EQ(scene.readings[0].target_id, "7");

    spec.buildings.clear();
    const auto empty = generate_scene(spec, device_table());
    for (double t : empty.temperature.values) EXPECT_EQ(t, 270.0);
    EXPECT_TRUE(empty.footprints.buildings.empty());

    spec.buildings = {{1, "tar", 280.0, {{15, 15}, {25, 15}, {25, 19}}}};
    EXPECT_THROW(generate_scene(spec, device_table()), GeometryError);
}

TEST(GenerateScene, RandomLayoutIsDeterministicAndDisjoint) {
    SceneSpec spec;
    spec.ncols = spec.nrows = 256;
    spec.random_buildings.count = 30;
    spec.random_targets.count = 20;
    const auto a = generate_scene(spec, device_table());
    const auto b = generate_scene(spec, device_table());
    EXPECT_EQ(a.temperature.values, b.temperature.values);
    EXPECT_EQ(readings_csv(a.readings), readings_csv(b.readings));
    ASSERT_EQ(a.footprints.buildings.size(), 30u);
    ASSERT_EQ(a.targets.size(), 20u);
    const auto mask = rasterize(a.footprints, a.temperature);
    std::set<std::int64_t> ids(mask.ids.begin(), mask.ids.end());
    EXPECT_EQ(ids.size(), 31u); // 30 buildings plus empty
    for (const auto& t : a.targets) {
        const auto cell = a.temperature.locate(t.x, t.y);
        EXPECT_TRUE(mask.empty_at(cell->row, cell->col));
        EXPECT_NEAR(sample(a.temperature, t.x, t.y, 3), t.temperature, 1e-9);
    }
    spec.atmosphere.seed = 2;
    EXPECT_NE(generate_scene(spec, device_table()).temperature.values, a.temperature.values);
    spec.random_buildings.count = 200;
    EXPECT_THROW(generate_scene(spec, device_table()), GeometryError);
}

TEST(GenerateScene, InstrumentDistortionRecoveredThroughCalibration) {
    SceneSpec spec;
    spec.ncols = spec.nrows = 10;
    spec.instruments = {{"a", 1.02, -0.3}, {"b", 0.97, 2.5}};
    const auto scene = generate_scene(spec, device_table());
    const auto session = session_from_readings(scene.calibration_session, spec.device_emissivity, spec.medium_emissivity);
    const auto a = fit_instrument(session, "a", device_table());
    const auto b = fit_instrument(session, "b", device_table());
    EXPECT_NEAR(a.slope, 1.02, 1e-6);
    EXPECT_NEAR(a.offset, -0.3, 1e-6);
    EXPECT_NEAR(b.slope, 0.97, 1e-6);
    EXPECT_NEAR(b.offset, 2.5, 1e-6);
    // Session file round-trip keeps the recovery.
    const auto reread = session_from_readings(read_readings_csv(readings_csv(scene.calibration_session)),
                                              spec.device_emissivity, spec.medium_emissivity);
    EXPECT_NEAR(fit_instrument(reread, "a", device_table()).slope, 1.02, 1e-6);
}

TEST(GenerateScene, FieldReadingsInvertToTruth) {
    SceneSpec spec;
    spec.ncols = spec.nrows = 128;
    spec.random_buildings.count = 6;
    spec.random_targets.count = 8;
    spec.instruments = {{"a", 1.02, -0.3}};
    const auto scene = generate_scene(spec, device_table());
    const std::map<std::string, InstrumentCalibration> cals = {{"a", {"a", 1.02, -0.3, 1.0, 41}}};
    for (std::size_t i = 0; i < scene.targets.size(); ++i) {
        const double k = field_kinetic_temperature(scene.readings[i], cals, spec.materials, 0.95, device_table());
        EXPECT_NEAR(k, scene.targets[i].temperature, 1e-3);
    }
}

TEST(SimulateDataset, NoiseFractionAndImages) {
    SceneSpec spec;
    spec.ncols = spec.nrows = 64;
    spec.noise_fraction = 0.02;
    spec.images = {{"3749", "39", 0.0}, {"3750", "39", 0.3}};
    const auto ds = simulate_dataset(spec, device_table());
    ASSERT_EQ(ds.sensors.size(), 2u);
    double mean = 0.0;
    for (double g : ds.ground[0].values) mean += 0.4 * g + 3.0;
    mean /= static_cast<double>(ds.ground[0].size());
    EXPECT_NEAR(ds.noise_sigma, 0.02 * mean, 1e-12);
    EXPECT_EQ(ds.sensors[1].image_id, "3750");
    EXPECT_EQ(ds.sensors[1].flight_line, "39");
    EXPECT_NE(ds.sensors[0].values, ds.sensors[1].values);
}

TEST(SceneSpecJson, ParsesAndRejects) {
    const auto spec = scene_spec_from_json(nlohmann::json::parse(R"({
        "ncols": 64, "nrows": 32, "cellsize": 0.5, "seed": 11,
        "background": {"temperature_K": 268, "material": "water"},
        "materials": {"slate": {"8-9.2": 0.9, "8-14": 0.91}},
        "buildings": [{"building_id": 3, "material": "slate", "temperature_K": 275,
                       "polygon": [[1,1],[4,1],[4,4],[1,4],[1,1]]}],
        "random_targets": {"count": 2},
        "images": [{"image_id": 3749, "flight_line": 39}],
        "atmosphere": {"gain": 0.5, "offset": 2.0, "noise_sigma": 0.1},
        "instruments": [{"instrument_id": "ir9", "slope": 1.01}],
        "calibration": {"start_K": 280, "count": 5},
        "sky_temperature_K": 240
    })"));
    EXPECT_EQ(spec.ncols, 64u);
    EXPECT_EQ(spec.atmosphere.seed, 11u);
    EXPECT_EQ(spec.buildings[0].polygon.size(), 4u);
    EXPECT_EQ(spec.images[0].image_id, "3749");
    EXPECT_EQ(spec.materials.emissivity("slate", kImagerBand), 0.9);
    EXPECT_EQ(*spec.sky_temperature, 240.0);
    EXPECT_EQ(spec.calibration_count, 5u);

    EXPECT_THROW(scene_spec_from_json(nlohmann::json::array()), ConfigError);
    EXPECT_THROW(scene_spec_from_json(nlohmann::json::parse(R"({"ncols": "wide"})")), ConfigError);
    EXPECT_THROW(scene_spec_from_json(nlohmann::json::parse(R"({"atmosphere": {"gain": -1}})")), ConfigError);
    EXPECT_THROW(scene_spec_from_json(nlohmann::json::parse(R"({"buildings": [{"material": "tar"}]})")), ConfigError);
}

} // namespace
} // namespace rooftherm
