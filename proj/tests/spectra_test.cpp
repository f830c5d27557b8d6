// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#include <rooftherm/spectra.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

namespace rooftherm {
namespace {

const std::filesystem::path kSpectra = ROOFTHERM_SPECTRA_DIR;

// Planck-weighted mean of a linear 0.90 -> 0.96 emissivity ramp over 8-14 um at
// 300 K, frozen from a 40-digit quadrature.
constexpr double kRampBandEmissivity = 0.9288024495643651;

SpectralCurve flat(double value, double lo = 7.0, double hi = 15.0, CurveKind kind = CurveKind::emissivity) {
    SpectralCurve c;
    c.wavelengths = {lo, hi};
    c.values = {value, value};
    c.kind = kind;
    c.material = "flat";
    return c;
}

TEST(ParseSpectralCurve, PercentAndFractionFormsAgree) {
    const auto pct = parse_spectral_curve("8.0 5.0\n14.0 5.0", "a");
    const auto frac = parse_spectral_curve("8.0 0.05\n14.0 0.05", "a");
    ASSERT_EQ(pct.values.size(), 2u);
    EXPECT_DOUBLE_EQ(pct.values[0], 0.05);
    EXPECT_EQ(pct.wavelengths, frac.wavelengths);
    EXPECT_DOUBLE_EQ(pct.values[1], frac.values[1]);
    EXPECT_EQ(pct.kind, CurveKind::reflectance);
}

TEST(ParseSpectralCurve, SortsRowsAndSkipsCommentsAndMetadata) {
    const auto c = parse_spectral_curve("Name: sample\nUnits: um\n# note\n\n14,0.2\n8,0.1\n11,0.15\n", "x");
    EXPECT_EQ(c.wavelengths, (std::vector<double>{8, 11, 14}));
    EXPECT_EQ(c.material, "x");
}

TEST(ParseSpectralCurve, ReportsLineNumbers) {
    EXPECT_THROW(parse_spectral_curve("8.0 0.05", "a"), ParseError);
    try {
        parse_spectral_curve("8.0 0.05\n9.0 abc\n", "a");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    try {
        parse_spectral_curve("8.0 0.05\n9.0 0.04\n8.0 0.06\n", "a");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    }
    EXPECT_THROW(parse_spectral_curve("8.0 -0.1\n9.0 0.5\n", "a"), ParseError);
}

TEST(EmissivityCurve, KirchhoffComplement) {
    const auto e = emissivity_curve(flat(0.05, 7, 15, CurveKind::reflectance));
    EXPECT_DOUBLE_EQ(e.values[0], 0.95);
    EXPECT_EQ(e.kind, CurveKind::emissivity);
    const auto bb = emissivity_curve(flat(0.0, 7, 15, CurveKind::reflectance));
    EXPECT_EQ(bb.values[1], 1.0);
    EXPECT_THROW(emissivity_curve(e), DomainError);
}

TEST(BandEmissivity, GrayBodyIsExact) {
    for (double t : {230.0, 300.0, 340.0})
        EXPECT_NEAR(band_emissivity(flat(0.95), kThermometerBand, t), 0.95, 1e-12);
    EXPECT_THROW(band_emissivity(flat(0.05, 7, 15, CurveKind::reflectance), kImagerBand), DomainError);
}

TEST(BandEmissivity, RampMatchesIndependentQuadrature) {
    SpectralCurve ramp;
    ramp.wavelengths = {8.0, 14.0};
    ramp.values = {0.90, 0.96};
    ramp.kind = CurveKind::emissivity;
    const auto eps = [](double l) { return 0.90 + 0.01 * (l - 8.0); };
    const std::size_t n = 60000;
    const double num = oracle::simpson([&](double l) { return eps(l) * oracle::planck(l, 300.0); }, 8.0, 14.0, n);
    const double den = oracle::simpson([](double l) { return oracle::planck(l, 300.0); }, 8.0, 14.0, n);
    EXPECT_NEAR(num / den, kRampBandEmissivity, 1e-12);
    EXPECT_NEAR(band_emissivity(ramp, kThermometerBand), kRampBandEmissivity, 1e-7);

    const auto file = emissivity_curve(parse_spectral_curve(detail::read_file(kSpectra / "ramp.txt"), "ramp"));
    EXPECT_NEAR(band_emissivity(file, kThermometerBand), kRampBandEmissivity, 1e-7);
}

TEST(BandEmissivity, BoundedByCurveExtremes) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.3, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        SpectralCurve c;
        c.kind = CurveKind::emissivity;
        c.material = "random";
        for (int i = 0; i <= 20; ++i) {
            c.wavelengths.push_back(7.5 + 0.4 * i);
            c.values.push_back(u(rng));
        }
        const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
        const double e = band_emissivity(c, kImagerBand);
        EXPECT_GE(e, *lo);
        EXPECT_LE(e, *hi);
    }
}

TEST(BandEmissivity, CoverageErrorNamesGap) {
    try {
        band_emissivity(flat(0.9, 8.5, 15), kImagerBand);
        FAIL();
    } catch (const CoverageError& e) {
        EXPECT_NE(std::string(e.what()).find("[8, 8.5]"), std::string::npos) << e.what();
    }
    try {
        band_emissivity(flat(0.9, 7, 12), kThermometerBand);
        FAIL();
    } catch (const CoverageError& e) {
        EXPECT_NE(std::string(e.what()).find("[12, 14]"), std::string::npos) << e.what();
    }
}

TEST(MaterialTable, BuildsFromCurvesAndRoundTrips) {
    EXPECT_TRUE(material_table({}, {kImagerBand}).empty());
    const auto gray = emissivity_curve(parse_spectral_curve(detail::read_file(kSpectra / "gray_body.txt"), "gray_body"));
    const auto table = material_table({gray}, {kImagerBand, kThermometerBand});
    EXPECT_NEAR(table.emissivity("gray_body", kImagerBand), 0.95, 1e-12);
    EXPECT_NEAR(table.emissivity("gray_body", kThermometerBand), 0.95, 1e-12);
    EXPECT_THROW(table.emissivity("slate", kImagerBand), LookupError);
    EXPECT_THROW(table.emissivity("gray_body", WavelengthBand(3, 5)), LookupError);

    const auto back = read_material_table(material_table_csv(table));
    EXPECT_EQ(back.emissivity("gray_body", kImagerBand), table.emissivity("gray_body", kImagerBand));

    auto narrow = gray;
    narrow.wavelengths = {8.0, 9.0};
    narrow.values = {0.9, 0.9};
    try {
        material_table({narrow}, {kImagerBand});
        FAIL();
    } catch (const CoverageError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("gray_body: ", 0), 0u);
    }
}

TEST(MaterialTable, BuiltinRows) {
    const auto t = builtin_material_table();
    EXPECT_NEAR(t.emissivity("water", kImagerBand), 0.9838, 0.005);
    EXPECT_NEAR(t.emissivity("metal", kThermometerBand), 0.619, 0.01);
    EXPECT_EQ(t.emissivity("asphalt", kImagerBand), 0.93084419);
    for (const auto& m : kRoofMaterials) EXPECT_TRUE(t.contains(m, kImagerBand)) << m;
    EXPECT_THROW(read_material_table("material,band_lo,band_hi,emissivity\nx,8,9.2,1.3\n"), ParseError);
}

} // namespace
} // namespace rooftherm
