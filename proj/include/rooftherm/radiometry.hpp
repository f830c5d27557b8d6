// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * Blackbody radiometry for broad infrared bands.
 *
 * All temperatures are Kelvin, wavelengths micrometres, spectral exitance
 * W m-2 um-1 and band exitance W m-2. Band integrals use the composite
 * trapezoid rule on a uniform wavelength grid that includes both band edges.
 * The inverse (exitance -> temperature) goes through a PlanckTable: a dense,
 * strictly monotone table searched by bisection and linearly interpolated.
 */

#pragma once

#include <rooftherm/detail/parallel.hpp>
#include <rooftherm/detail/text.hpp>
#include <rooftherm/error.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace rooftherm {

namespace constants {
inline constexpr double planck = 6.62607015e-34;    // J s
inline constexpr double light_speed = 2.99792458e8; // m s-1
inline constexpr double boltzmann = 1.380649e-23;   // J K-1
inline constexpr double celsius_offset = 273.15;
} // namespace constants

inline double celsius_to_kelvin(double c) { return c + constants::celsius_offset; }
inline double kelvin_to_celsius(double k) { return k - constants::celsius_offset; }

inline constexpr double kDefaultLambdaStep = 0.001; // um
inline constexpr double kDefaultTableMin = 230.0;   // K
inline constexpr double kDefaultTableMax = 330.0;   // K
inline constexpr double kDefaultTableStep = 0.1;    // K

/// Closed wavelength interval [lo, hi] in micrometres.
class WavelengthBand {
public:
    WavelengthBand(double lo_um, double hi_um) : lo_(lo_um), hi_(hi_um) {
        if (!std::isfinite(lo_um) || !std::isfinite(hi_um) || !(lo_um > 0.0) || !(lo_um < hi_um))
            throw DomainError("invalid wavelength band [" + detail::format_double(lo_um) + ", " +
                              detail::format_double(hi_um) + "]");
    }

    /// Parses "8-9.2" or "8:9.2".
    static WavelengthBand parse(std::string_view text) {
        auto t = detail::trim(text);
        auto sep = t.find_first_of("-:", 1);
        if (sep == std::string_view::npos) throw ParseError("band must look like 'lo-hi': " + std::string(text), 0);
        auto lo = detail::parse_double(t.substr(0, sep));
        auto hi = detail::parse_double(t.substr(sep + 1));
        if (!lo || !hi) throw ParseError("band must look like 'lo-hi': " + std::string(text), 0);
        return {*lo, *hi};
    }

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double width() const noexcept { return hi_ - lo_; }
    bool covers(double lambda) const noexcept { return lambda >= lo_ && lambda <= hi_; }

    std::string label() const { return detail::format_double(lo_) + "-" + detail::format_double(hi_); }

    friend auto operator<=>(const WavelengthBand&, const WavelengthBand&) = default;
    friend bool operator==(const WavelengthBand&, const WavelengthBand&) = default;

private:
    double lo_;
    double hi_;
};

inline const WavelengthBand kImagerBand{8.0, 9.2};
inline const WavelengthBand kThermometerBand{8.0, 14.0};

/// Planck spectral exitance M(lambda, T) = 2 pi h c^2 / lambda^5 / (exp(hc / lambda k T) - 1).
inline double spectral_exitance(double lambda_um, double temperature_k) {
    if (!(lambda_um > 0.0) || !(temperature_k > 0.0))
        throw DomainError("spectral_exitance requires positive wavelength and temperature");
    using namespace constants;
    const double lambda = lambda_um * 1e-6;
    const double x = planck * light_speed / (lambda * boltzmann * temperature_k);
    const double l5 = lambda * lambda * lambda * lambda * lambda;
    // per metre of wavelength -> per micrometre
    return 2.0 * std::numbers::pi * planck * light_speed * light_speed / l5 / std::expm1(x) * 1e-6;
}

namespace detail {

/// Uniform grid over the band: `intervals` steps of equal width. A step that
/// does not divide the band exactly is shrunk to the nearest one that does.
struct BandGrid {
    double lo;
    double step;
    std::size_t intervals;

    double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

inline BandGrid make_grid(const WavelengthBand& band, double lambda_step) {
    if (!(lambda_step > 0.0) || !(lambda_step <= band.width() * (1.0 + 1e-12)))
        throw DomainError("lambda_step must be in (0, band width]");
    auto n = static_cast<std::size_t>(std::ceil(band.width() / lambda_step - 1e-9));
    n = std::max<std::size_t>(n, 1);
    return {band.lo(), band.width() / static_cast<double>(n), n};
}

} // namespace detail

/// Trapezoid-rule integral of spectral_exitance over the band.
inline double band_exitance(const WavelengthBand& band, double temperature_k,
                            double lambda_step = kDefaultLambdaStep) {
    if (!(temperature_k > 0.0)) throw DomainError("band_exitance requires a positive temperature");
    const auto grid = detail::make_grid(band, lambda_step);
    double sum = 0.5 * (spectral_exitance(band.lo(), temperature_k) + spectral_exitance(band.hi(), temperature_k));
    for (std::size_t i = 1; i < grid.intervals; ++i) sum += spectral_exitance(grid.at(i), temperature_k);
    return sum * grid.step;
}

/// Re-expresses exitance associated with emissivity `e_from` at emissivity `e_to`.
inline double rescale_exitance(double exitance, double e_from, double e_to) {
    if (!(e_from > 0.0 && e_from <= 1.0) || !(e_to > 0.0 && e_to <= 1.0))
        throw DomainError("emissivities must lie in (0, 1]");
    if (!(exitance >= 0.0)) throw DomainError("exitance must be non-negative");
    return exitance * (e_to / e_from);
}

/// Band exitance tabulated on a uniform temperature grid.
class PlanckTable {
public:
    PlanckTable(WavelengthBand band, double t_min, double t_max, double t_step, double lambda_step,
                std::vector<double> exitances)
        : band_(band), t_min_(t_min), t_max_(t_max), t_step_(t_step), lambda_step_(lambda_step),
          exitance_(std::move(exitances)) {
        const auto n = entry_count(t_min, t_max, t_step);
        if (exitance_.size() != n)
            throw DomainError("table needs " + std::to_string(n) + " entries, got " +
                              std::to_string(exitance_.size()));
        for (std::size_t i = 1; i < exitance_.size(); ++i)
            if (!(exitance_[i] > exitance_[i - 1])) throw DomainError("table exitance is not strictly increasing");
        if (!(exitance_.front() > 0.0)) throw DomainError("table exitance must be positive");
    }

    const WavelengthBand& band() const noexcept { return band_; }
    double t_min() const noexcept { return t_min_; }
    double t_max() const noexcept { return t_max_; }
    double t_step() const noexcept { return t_step_; }
    double lambda_step() const noexcept { return lambda_step_; }
    std::size_t size() const noexcept { return exitance_.size(); }

    double temperature(std::size_t i) const { return t_min_ + static_cast<double>(i) * t_step_; }
    double exitance(std::size_t i) const { return exitance_[i]; }
    double min_exitance() const { return exitance_.front(); }
    double max_exitance() const { return exitance_.back(); }
    bool in_range(double exitance) const { return exitance >= min_exitance() && exitance <= max_exitance(); }

    /// Temperature whose band exitance equals `exitance`. Never extrapolates.
    double invert(double exitance) const {
        if (!in_range(exitance))
            throw OutOfRangeError("exitance " + detail::format_double(exitance) + " W/m2 outside table range [" +
                                      detail::format_double(min_exitance()) + ", " +
                                      detail::format_double(max_exitance()) + "] for band " + band_.label(),
                                  exitance);
        auto it = std::upper_bound(exitance_.begin(), exitance_.end(), exitance);
        if (it == exitance_.end()) return temperature(size() - 1);
        const auto hi = static_cast<std::size_t>(it - exitance_.begin());
        const auto lo = hi - 1;
        const double frac = (exitance - exitance_[lo]) / (exitance_[hi] - exitance_[lo]);
        return temperature(lo) + frac * t_step_;
    }

    static std::size_t entry_count(double t_min, double t_max, double t_step) {
        if (!(t_min > 0.0) || !(t_min < t_max) || !(t_step > 0.0) || !std::isfinite(t_max))
            throw DomainError("table requires 0 < t_min < t_max and t_step > 0");
        const double steps = (t_max - t_min) / t_step;
        const double rounded = std::round(steps);
        if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, steps))
            throw DomainError("temperature range is not a whole number of t_step");
        return static_cast<std::size_t>(rounded) + 1;
    }

private:
    WavelengthBand band_;
    double t_min_;
    double t_max_;
    double t_step_;
    double lambda_step_;
    std::vector<double> exitance_;
};

inline PlanckTable build_planck_table(const WavelengthBand& band, double t_min = kDefaultTableMin,
                                      double t_max = kDefaultTableMax, double t_step = kDefaultTableStep,
                                      double lambda_step = kDefaultLambdaStep, unsigned threads = 1) {
    const auto n = PlanckTable::entry_count(t_min, t_max, t_step);
    std::vector<double> exitance(n);
    detail::parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            exitance[i] = band_exitance(band, t_min + static_cast<double>(i) * t_step, lambda_step);
    });
    return {band, t_min, t_max, t_step, lambda_step, std::move(exitance)};
}

inline double invert_band_exitance(const PlanckTable& table, double exitance) { return table.invert(exitance); }

/// Temperature with band_exitance(band, T) == exitance, solved to machine
/// precision by safeguarded Newton iteration rather than table lookup.
inline double solve_band_temperature(const WavelengthBand& band, double exitance,
                                     double lambda_step = kDefaultLambdaStep) {
    if (!(exitance > 0.0)) throw DomainError("exitance must be positive");
    double lo = 1.0, hi = 5000.0;
    if (band_exitance(band, hi, lambda_step) < exitance) throw DomainError("exitance beyond solver range");
    double t = 300.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double f = band_exitance(band, t, lambda_step) - exitance;
        if (f == 0.0) return t;
        if (f > 0.0) hi = t; else lo = t;
        const double dt = 1e-4 * t;
        const double df = (band_exitance(band, t + dt, lambda_step) - (f + exitance)) / dt;
        double next = t - f / df;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-13 * t) return next;
        t = next;
    }
    return t;
}

// CSV (temperature_K, exitance_Wm2) plus a JSON sidecar with the grid parameters.

inline std::string planck_table_csv(const PlanckTable& table) {
    std::string out = "temperature_K,exitance_Wm2\n";
    for (std::size_t i = 0; i < table.size(); ++i)
        out += detail::format_double(table.temperature(i)) + "," + detail::format_double(table.exitance(i)) + "\n";
    return out;
}

inline nlohmann::json planck_table_sidecar(const PlanckTable& table) {
    return {{"band_lo_um", table.band().lo()}, {"band_hi_um", table.band().hi()},
            {"t_min_K", table.t_min()},        {"t_max_K", table.t_max()},
            {"t_step_K", table.t_step()},      {"lambda_step_um", table.lambda_step()}};
}

inline PlanckTable read_planck_table(std::string_view csv, const nlohmann::json& sidecar) {
    try {
        WavelengthBand band(sidecar.at("band_lo_um").get<double>(), sidecar.at("band_hi_um").get<double>());
        const double t_min = sidecar.at("t_min_K").get<double>();
        const double t_max = sidecar.at("t_max_K").get<double>();
        const double t_step = sidecar.at("t_step_K").get<double>();
        const double lambda_step = sidecar.at("lambda_step_um").get<double>();
        auto table = detail::CsvTable::parse(csv);
        table.require({"temperature_K", "exitance_Wm2"});
        std::vector<double> exitance;
        exitance.reserve(table.size());
        for (std::size_t r = 0; r < table.size(); ++r) {
            const double t = table.number(r, "temperature_K");
            const double expected = t_min + static_cast<double>(r) * t_step;
            if (std::abs(t - expected) > 1e-9 * std::max(1.0, expected))
                throw ParseError("temperature off the uniform grid", table.line(r));
            exitance.push_back(table.number(r, "exitance_Wm2"));
        }
        return {band, t_min, t_max, t_step, lambda_step, std::move(exitance)};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("planck table sidecar: ") + e.what(), 0);
    }
}

} // namespace rooftherm
