// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <rooftherm/regression.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

namespace rooftherm {
namespace {

TEST(FitLine, ExactLine) {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(20.0 + 1.7 * i);
        y.push_back(3.1676 * x.back() - 7.6481);
    }
    const auto fit = fit_line(x, y);
    EXPECT_NEAR(fit.slope, 3.1676, 1e-12);
    EXPECT_NEAR(fit.intercept, -7.6481, 1e-10);
    EXPECT_EQ(fit.r_squared, 1.0);
    for (double d : fit.cooks_distances) EXPECT_EQ(d, 0.0);
}

TEST(FitLine, Degenerate) {
    const std::vector<double> x = {2, 2, 2}, y = {1, 2, 3};
    EXPECT_THROW(fit_line(x, y), DegenerateFitError);
    EXPECT_THROW(fit_line(std::vector<double>{1}, std::vector<double>{1}), DegenerateFitError);
    EXPECT_THROW(fit_line(std::vector<double>{1, 2}, std::vector<double>{1}), DomainError);
}

TEST(FitLine, OutlierHasLargestCooksDistance) {
    const std::vector<double> x = {1, 2, 3, 4}, y = {1, 2, 3, 9};
    const auto fit = fit_line(x, y);
    const auto brute = oracle::cooks_leave_one_out(x, y);
    const auto top = std::max_element(fit.cooks_distances.begin(), fit.cooks_distances.end());
    EXPECT_EQ(top - fit.cooks_distances.begin(), 3);
    EXPECT_EQ(std::max_element(brute.begin(), brute.end()) - brute.begin(), 3);
}

// Hand-rolled generator: random small datasets with a noisy line and an
// occasional gross outlier.
struct Dataset {
    std::vector<double> x, y;
};

Dataset random_dataset(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> size(3, 20);
    std::uniform_real_distribution<double> coord(-5.0, 15.0), slope(-3.0, 3.0), noise_scale(0.01, 2.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset d;
    const int n = size(rng);
    const double b = slope(rng), a = coord(rng), s = noise_scale(rng);
    for (int i = 0; i < n; ++i) {
        d.x.push_back(coord(rng));
        d.y.push_back(a + b * d.x.back() + s * noise(rng));
    }
    if (n > 4 && rng() % 3 == 0) d.y[rng() % n] += 25.0 * s;
    return d;
}

TEST(FitLine, CooksDistanceMatchesLeaveOneOut) {
    std::mt19937_64 rng(2026);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_dataset(rng);
        const auto fit = fit_line(d.x, d.y);
        const auto brute = oracle::cooks_leave_one_out(d.x, d.y);
        for (std::size_t i = 0; i < d.x.size(); ++i)
            ASSERT_NEAR(fit.cooks_distances[i], brute[i], 1e-9 * brute[i]) << "trial " << trial << " point " << i;
    }
}

TEST(FitLine, AgreesWithNaiveNormalEquations) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_dataset(rng);
        const auto fit = fit_line(d.x, d.y);
        const auto ref = oracle::naive_ols(d.x, d.y);
        EXPECT_NEAR(fit.slope, ref.slope, 1e-9 * std::max(1.0, std::abs(ref.slope)));
        EXPECT_NEAR(fit.intercept, ref.intercept, 1e-9 * std::max(1.0, std::abs(ref.intercept)));
    }
}

TEST(FitLine, ResidualAndLeverageInvariants) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_dataset(rng);
        const auto fit = fit_line(d.x, d.y);
        double sum_r = 0, dot = 0, scale = 0, sum_h = 0;
        for (std::size_t i = 0; i < d.x.size(); ++i) {
            sum_r += fit.residuals[i];
            dot += fit.residuals[i] * d.x[i];
            scale += std::abs(fit.residuals[i]) * (1.0 + std::abs(d.x[i]));
            sum_h += fit.leverages[i];
            EXPECT_GE(fit.leverages[i], 0.0);
            EXPECT_LE(fit.leverages[i], 1.0 + 1e-12);
            EXPECT_GE(fit.cooks_distances[i], 0.0);
        }
        EXPECT_NEAR(sum_r, 0.0, 1e-9 * std::max(scale, 1e-12));
        EXPECT_NEAR(dot, 0.0, 1e-9 * std::max(scale, 1e-12));
        EXPECT_NEAR(sum_h, 2.0, 1e-12);
        EXPECT_GE(fit.r_squared, 0.0);
        EXPECT_LE(fit.r_squared, 1.0);
    }
}

} // namespace
} // namespace rooftherm
