// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#include <rooftherm/instrument.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace rooftherm {
namespace {

// Exact inversion of 0.95/0.9838 * B(276.15 K) over 8-14 um, 40-digit arithmetic.
constexpr double kKineticFor27615 = 274.1954071134159;

const PlanckTable& device_table() {
    static const PlanckTable t = build_planck_table(kThermometerBand);
    return t;
}

// What an instrument set to e_device displays for a medium at `kinetic`.
double displayed_oracle(double kinetic, double e_device, double e_medium) {
    return oracle::band_temperature_series(8.0, 14.0, oracle::band_exitance_series(8.0, 14.0, kinetic) * e_medium / e_device);
}

CalibrationSession linear_session(const std::string& id, double slope, double offset, double sigma, std::uint64_t seed,
                                  std::size_t n = 40, double start = 276.0, double span = 20.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
    CalibrationSession s;
    for (std::size_t i = 0; i < n; ++i) {
        // Kinetic values on table nodes so the LUT inversion is exact.
        const double kinetic = std::round((start + span * static_cast<double>(i) / static_cast<double>(n - 1)) * 10) / 10;
        const double control = slope * kinetic + offset + (sigma > 0 ? sigma * noise(rng) : 0.0);
        s.points.push_back({id, control, displayed_oracle(kinetic, s.device_emissivity, s.medium_emissivity)});
    }
    return s;
}

TEST(RadiantToKinetic, EqualEmissivitiesAreIdentity) {
    for (double t : {250.0, 276.15, 299.99})
        EXPECT_NEAR(radiant_to_kinetic(t, 0.9, 0.9, device_table()), t, 1e-4);
}

TEST(RadiantToKinetic, WaterExample) {
    const double k = radiant_to_kinetic(276.15, kDeviceEmissivity, kWaterEmissivity, device_table());
    EXPECT_NEAR(k, kKineticFor27615, 1e-4);
    EXPECT_GT(k, 274.1);
    EXPECT_LT(k, 274.3);
    EXPECT_LT(radiant_to_kinetic(276.15, 0.95, 1.0, device_table()), 276.15);
}

TEST(RadiantToKinetic, SignAndMonotonicityProperties) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> e(0.85, 1.0), t(250.0, 310.0);
    for (int i = 0; i < 1000; ++i) {
        const double ed = e(rng), et = e(rng), td = t(rng);
        const double k = radiant_to_kinetic(td, ed, et, device_table());
        if (et > ed) EXPECT_LT(k, td);
        if (et < ed) EXPECT_GT(k, td);
        EXPECT_LT(k, radiant_to_kinetic(td + 0.2, ed, et, device_table()));
    }
}

TEST(RadiantToKinetic, OutOfTable) {
    EXPECT_THROW(radiant_to_kinetic(229.0, 0.95, 0.95, device_table()), OutOfRangeError);
    EXPECT_THROW(radiant_to_kinetic(329.5, 1.0, 0.5, device_table()), OutOfRangeError);
    EXPECT_THROW(radiant_to_kinetic(280.0, 0.0, 1.0, device_table()), DomainError);
}

TEST(FitInstrument, RecoversExactLine) {
    const auto s = linear_session("ir3", 1.02, -0.3, 0.0, 1);
    const auto cal = fit_instrument(s, "ir3", device_table());
    EXPECT_NEAR(cal.slope, 1.02, 1e-9);
    EXPECT_NEAR(cal.offset, -0.3, 1e-6);
    EXPECT_NEAR(cal.r_squared, 1.0, 1e-12);
    EXPECT_EQ(cal.n, 40u);
}

TEST(FitInstrument, NoisySlopeWithinOnePercentAcrossSeeds) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = linear_session("ir1", 0.97, 8.0, 0.1, seed);
        const auto cal = fit_instrument(s, "ir1", device_table());
        std::vector<double> k, c;
        for (const auto& p : s.points) {
            k.push_back(radiant_to_kinetic(p.displayed_temp, 0.95, 0.9838, device_table()));
            c.push_back(p.control_temp);
        }
        EXPECT_NEAR(cal.slope, oracle::naive_ols(k, c).slope, 1e-9);
        EXPECT_NEAR(cal.slope, 0.97, 0.01) << "seed " << seed;
    }
}

TEST(FitInstrument, DegenerateAndNarrowSessions) {
    CalibrationSession same;
    for (int i = 0; i < 5; ++i) same.points.push_back({"a", 280.0, 281.0});
    EXPECT_THROW(fit_instrument(same, "a", device_table()), DegenerateFitError);
    EXPECT_THROW(fit_instrument(same, "missing", device_table()), DegenerateFitError);
    const auto narrow = linear_session("n", 1.0, 0.0, 0.0, 1, 10, 280.0, 3.0);
    EXPECT_THROW(fit_instrument(narrow, "n", device_table()), DomainError);
}

TEST(NormalizeReading, Arithmetic) {
    const InstrumentCalibration id{"x", 1.0, 0.0, 1.0, 2};
    EXPECT_EQ(normalize_reading(id, 281.5), 281.5);
    const InstrumentCalibration c{"x", 1.02, -0.3, 1.0, 2};
    EXPECT_NEAR(normalize_reading(c, 280.0), 285.3, 1e-12);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t(240.0, 320.0);
    for (int i = 0; i < 200; ++i) {
        const double v = t(rng);
        EXPECT_NEAR(denormalize_reading(c, normalize_reading(c, v)), v, 1e-10);
    }
}

TEST(SessionFromReadings, BracketAveraging) {
    std::vector<FieldReading> rows;
    auto control = [&](double ts, double k) {
        FieldReading r;
        r.instrument_id = "control";
        r.control_temp = k;
        r.timestamp = ts;
        rows.push_back(r);
    };
    auto reading = [&](double ts, double d) {
        FieldReading r;
        r.instrument_id = "ir1";
        r.displayed_temp = d;
        r.timestamp = ts;
        rows.push_back(r);
    };
    control(0, 280.0);
    reading(1, 281.0);
    control(2, 280.4);
    reading(3, 290.0);
    const auto s = session_from_readings(rows, 0.95, 0.9838);
    ASSERT_EQ(s.points.size(), 2u);
    EXPECT_DOUBLE_EQ(s.points[0].control_temp, 280.2);
    EXPECT_DOUBLE_EQ(s.points[1].control_temp, 280.4);
    EXPECT_EQ(s.instruments(), std::vector<std::string>{"ir1"});

    std::vector<FieldReading> orphan(1);
    orphan[0].instrument_id = "ir2";
    orphan[0].displayed_temp = 280.0;
    EXPECT_THROW(session_from_readings(orphan, 0.95, 0.9838), ConfigError);
}

TEST(FieldChain, DeterministicAndOrderIndependent) {
    const auto materials = builtin_material_table();
    std::map<std::string, InstrumentCalibration> cals = {{"a", {"a", 1.01, -1.5, 1.0, 10}},
                                                         {"b", {"b", 0.99, 2.0, 1.0, 10}}};
    std::vector<FieldReading> readings;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> t(265.0, 300.0);
    for (int i = 0; i < 30; ++i) {
        FieldReading r;
        r.instrument_id = i % 2 ? "a" : "b";
        r.displayed_temp = t(rng);
        r.material = i % 3 ? "asphalt" : "concrete";
        readings.push_back(r);
    }
    std::vector<double> forward;
    for (const auto& r : readings)
        forward.push_back(field_kinetic_temperature(r, cals, materials, 0.95, device_table()));
    std::vector<std::size_t> order(readings.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order)
        EXPECT_EQ(field_kinetic_temperature(readings[i], cals, materials, 0.95, device_table()), forward[i]);
    readings[0].instrument_id = "zz";
    EXPECT_THROW(field_kinetic_temperature(readings[0], cals, materials, 0.95, device_table()), LookupError);
}

TEST(ReadingsCsv, RoundTripAndErrors) {
    const std::string text =
        "instrument_id,control_temp_C,displayed_temp_C,material,x,y,timestamp,target_id,role\n"
        "control,3.0,,,,,0,,\n"
        "ir1,,4.25,asphalt,10.5,20.5,60,T1,target\n"
        "ir1,,8.5,metal,1,2,120,17,roof\n";
    const auto rows = read_readings_csv(text);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_DOUBLE_EQ(*rows[0].control_temp, 276.15);
    EXPECT_FALSE(rows[0].displayed_temp);
    EXPECT_DOUBLE_EQ(*rows[1].displayed_temp, 277.4);
    EXPECT_EQ(rows[2].role, "roof");
    EXPECT_EQ(read_readings_csv(readings_csv(rows)).size(), 3u);
    EXPECT_EQ(readings_csv(read_readings_csv(readings_csv(rows))), readings_csv(rows));

    EXPECT_THROW(read_readings_csv("instrument_id,control_temp_C\nir1,3\n"), ParseError);
    try {
        read_readings_csv("instrument_id,displayed_temp_C\nir1,3\nir1,warm\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(CalibrationsCsv, RoundTripSkipsFailures) {
    const std::vector<InstrumentCalibration> cals = {{"ir1", 1.02, -0.3, 0.999, 40}};
    const auto text = calibrations_csv(cals, {{"ir2", "fewer than 2 pairs, sorry"}});
    EXPECT_NE(text.find("ir2,,,,error: fewer than 2 pairs; sorry"), std::string::npos) << text;
    const auto back = read_calibrations_csv(text);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back.at("ir1").slope, 1.02);
    EXPECT_EQ(back.at("ir1").offset, -0.3);
}

} // namespace
} // namespace rooftherm
