// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <rooftherm/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rooftherm {

/// Ordinary least squares y = slope * x + intercept with per-point influence
/// diagnostics.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double residual_std = 0.0; // sqrt(SSE / (n - 2)); 0 when n == 2
    std::size_t n = 0;
    std::vector<double> fitted;
    std::vector<double> residuals;
    std::vector<double> leverages;
    std::vector<double> cooks_distances;

    double predict(double x) const { return slope * x + intercept; }
};

/// Fits by centred sums. Cook's distance uses
///   D_i = r_i^2 h_i / (p s^2 (1 - h_i)^2),  p = 2,
/// and is reported as zero for all points when the fit is exact to machine
/// precision (SSE at rounding level relative to the total sum of squares).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("regressor and response lengths differ");
    const std::size_t n = x.size();
    if (n < 2) throw DegenerateFitError("line fit needs at least 2 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw DegenerateFitError("regressor has fewer than 2 distinct values");

    LineFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.fitted.resize(n);
    fit.residuals.resize(n);
    fit.leverages.resize(n);
    fit.cooks_distances.assign(n, 0.0);

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Centred form keeps the prediction accurate when |mean x| >> spread.
        fit.fitted[i] = my + fit.slope * (x[i] - mx);
        fit.residuals[i] = y[i] - fit.fitted[i];
        sse += fit.residuals[i] * fit.residuals[i];
        const double dx = x[i] - mx;
        fit.leverages[i] = 1.0 / static_cast<double>(n) + dx * dx / sxx;
    }

    const bool exact = sse <= 1e-20 * syy || syy == 0.0;
    fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
    if (exact) fit.r_squared = 1.0;

    if (n > 2) {
        const double s2 = sse / static_cast<double>(n - 2);
        fit.residual_std = std::sqrt(s2);
        if (!exact) {
            constexpr double p = 2.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double h = fit.leverages[i];
                const double one_minus = 1.0 - h;
                fit.cooks_distances[i] = one_minus > 0.0
                                             ? fit.residuals[i] * fit.residuals[i] * h / (p * s2 * one_minus * one_minus)
                                             : 0.0;
            }
        }
    }
    return fit;
}

} // namespace rooftherm
