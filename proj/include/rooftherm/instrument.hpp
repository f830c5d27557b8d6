// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * Field IR thermometers: displayed (radiant) -> kinetic temperature and
 * per-instrument normalization against a contact control thermometer.
 *
 * A thermometer set to emissivity e_device displays T_d such that the
 * received band exitance equals e_device * M_bb(T_d). A target of emissivity
 * e_target at kinetic temperature T_k emits e_target * M_bb(T_k), hence
 *   M_bb(T_k) = M_bb(T_d) * e_device / e_target.
 */

#pragma once

#include <rooftherm/detail/text.hpp>
#include <rooftherm/error.hpp>
#include <rooftherm/radiometry.hpp>
#include <rooftherm/regression.hpp>
#include <rooftherm/spectra.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rooftherm {

inline constexpr double kDeviceEmissivity = 0.95;
inline constexpr double kWaterEmissivity = 0.9838;
/// Instrument id marking alcohol-thermometer bracket rows in a session file.
inline constexpr std::string_view kControlInstrument = "control";

/// One row of a field or calibration-session CSV. Temperatures in Kelvin.
struct FieldReading {
    std::string instrument_id;
    std::optional<double> control_temp;   // alcohol thermometer, K
    std::optional<double> displayed_temp; // IR thermometer, K
    std::string material;
    double x = 0.0;
    double y = 0.0;
    double timestamp = 0.0; // s
    std::string target_id;
    std::string role = "target"; // "target" (ELC) or "roof" (validation)
};

struct CalibrationPoint {
    std::string instrument_id;
    double control_temp;   // K
    double displayed_temp; // K
};

struct CalibrationSession {
    std::vector<CalibrationPoint> points;
    double device_emissivity = kDeviceEmissivity;
    double medium_emissivity = kWaterEmissivity;

    std::vector<std::string> instruments() const {
        std::set<std::string> ids;
        for (const auto& p : points) ids.insert(p.instrument_id);
        return {ids.begin(), ids.end()};
    }
};

struct InstrumentCalibration {
    std::string instrument_id;
    double slope = 1.0;
    double offset = 0.0; // K
    double r_squared = 1.0;
    std::size_t n = 0;
};

inline double radiant_to_kinetic(double displayed_temp, double e_device, double e_target, const PlanckTable& table) {
    if (!(e_device > 0.0 && e_device <= 1.0) || !(e_target > 0.0 && e_target <= 1.0))
        throw DomainError("emissivities must lie in (0, 1]");
    if (!(displayed_temp >= table.t_min() && displayed_temp <= table.t_max()))
        throw OutOfRangeError("displayed temperature " + detail::format_double(displayed_temp) +
                                  " K outside table range",
                              displayed_temp);
    const double displayed_bb = band_exitance(table.band(), displayed_temp, table.lambda_step());
    return table.invert(rescale_exitance(displayed_bb, e_target, e_device));
}

/// OLS control = slope * kinetic + offset over one instrument's session points.
inline InstrumentCalibration fit_instrument(const CalibrationSession& session, const std::string& instrument_id,
                                            const PlanckTable& table) {
    std::vector<double> kinetic, control;
    for (const auto& p : session.points) {
        if (p.instrument_id != instrument_id) continue;
        kinetic.push_back(
            radiant_to_kinetic(p.displayed_temp, session.device_emissivity, session.medium_emissivity, table));
        control.push_back(p.control_temp);
    }
    if (kinetic.size() < 2)
        throw DegenerateFitError("instrument '" + instrument_id + "' has fewer than 2 calibration pairs");
    LineFit fit;
    try {
        fit = fit_line(kinetic, control);
    } catch (const DegenerateFitError&) {
        throw DegenerateFitError("instrument '" + instrument_id + "' has fewer than 2 distinct kinetic values");
    }
    const auto [lo, hi] = std::minmax_element(control.begin(), control.end());
    if (*hi - *lo < 5.0)
        throw DomainError("instrument '" + instrument_id + "' control temperatures span less than 5 K");
    if (!(fit.slope > 0.0)) throw DegenerateFitError("instrument '" + instrument_id + "' has a non-positive slope");
    return {instrument_id, fit.slope, fit.intercept, fit.r_squared, kinetic.size()};
}

inline double normalize_reading(const InstrumentCalibration& cal, double kinetic_temp) {
    return cal.slope * kinetic_temp + cal.offset;
}

inline double denormalize_reading(const InstrumentCalibration& cal, double normalized_temp) {
    return (normalized_temp - cal.offset) / cal.slope;
}

/// Builds a session from CSV rows. Instrument rows without their own control
/// value take the mean of the nearest `control` bracket rows before and after
/// them in time (or the single available one).
inline CalibrationSession session_from_readings(const std::vector<FieldReading>& rows, double device_emissivity,
                                                double medium_emissivity) {
    std::vector<std::pair<double, double>> brackets; // (timestamp, control K)
    for (const auto& r : rows)
        if (r.instrument_id == kControlInstrument && r.control_temp) brackets.emplace_back(r.timestamp, *r.control_temp);
    std::stable_sort(brackets.begin(), brackets.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    CalibrationSession session;
    session.device_emissivity = device_emissivity;
    session.medium_emissivity = medium_emissivity;
    for (const auto& r : rows) {
        if (r.instrument_id == kControlInstrument) continue;
        if (!r.displayed_temp) throw ParseError("instrument '" + r.instrument_id + "' row lacks a displayed temperature", 0);
        double control;
        if (r.control_temp) {
            control = *r.control_temp;
        } else {
            auto after = std::lower_bound(brackets.begin(), brackets.end(), r.timestamp,
                                          [](const auto& b, double t) { return b.first < t; });
            std::optional<double> before_v, after_v;
            if (after != brackets.end()) after_v = after->second;
            if (after != brackets.begin()) before_v = std::prev(after)->second;
            if (!before_v && !after_v)
                throw ConfigError("instrument '" + r.instrument_id + "' row has no control temperature or bracket");
            control = before_v && after_v ? 0.5 * (*before_v + *after_v) : before_v ? *before_v : *after_v;
        }
        session.points.push_back({r.instrument_id, control, *r.displayed_temp});
    }
    return session;
}

/// Displayed reading -> emissivity-corrected, normalized kinetic temperature.
inline double field_kinetic_temperature(const FieldReading& reading,
                                        const std::map<std::string, InstrumentCalibration>& calibrations,
                                        const MaterialTable& materials, double device_emissivity,
                                        const PlanckTable& device_table) {
    if (!reading.displayed_temp) throw DomainError("reading lacks a displayed temperature");
    auto cal = calibrations.find(reading.instrument_id);
    if (cal == calibrations.end()) throw LookupError("no calibration for instrument '" + reading.instrument_id + "'");
    const double e_target = materials.emissivity(reading.material, device_table.band());
    const double kinetic = radiant_to_kinetic(*reading.displayed_temp, device_emissivity, e_target, device_table);
    return normalize_reading(cal->second, kinetic);
}

// CSV columns: instrument_id, control_temp_C, displayed_temp_C, material, x, y,
// timestamp, target_id, role. Only instrument_id and displayed_temp_C are required.

inline std::vector<FieldReading> read_readings_csv(std::string_view text) {
    auto t = detail::CsvTable::parse(text);
    t.require({"instrument_id", "displayed_temp_C"});
    std::vector<FieldReading> out;
    out.reserve(t.size());
    for (std::size_t r = 0; r < t.size(); ++r) {
        FieldReading f;
        f.instrument_id = t.cell(r, "instrument_id");
        if (f.instrument_id.empty()) throw ParseError("empty instrument_id", t.line(r));
        if (auto c = t.optional_number(r, "control_temp_C")) f.control_temp = celsius_to_kelvin(*c);
        if (auto d = t.optional_number(r, "displayed_temp_C")) f.displayed_temp = celsius_to_kelvin(*d);
        f.material = t.cell(r, "material");
        f.x = t.optional_number(r, "x").value_or(0.0);
        f.y = t.optional_number(r, "y").value_or(0.0);
        f.timestamp = t.optional_number(r, "timestamp").value_or(0.0);
        f.target_id = t.cell(r, "target_id");
        if (!t.cell(r, "role").empty()) f.role = detail::lower(t.cell(r, "role"));
        if (f.role != "target" && f.role != "roof") throw ParseError("role must be 'target' or 'roof'", t.line(r));
        out.push_back(std::move(f));
    }
    return out;
}

inline std::string readings_csv(const std::vector<FieldReading>& readings) {
    using detail::format_double;
    std::string out = "instrument_id,control_temp_C,displayed_temp_C,material,x,y,timestamp,target_id,role\n";
    for (const auto& r : readings) {
        out += r.instrument_id + ",";
        out += (r.control_temp ? format_double(kelvin_to_celsius(*r.control_temp)) : "") + ",";
        out += (r.displayed_temp ? format_double(kelvin_to_celsius(*r.displayed_temp)) : "") + ",";
        out += r.material + "," + format_double(r.x) + "," + format_double(r.y) + "," + format_double(r.timestamp) +
               "," + r.target_id + "," + r.role + "\n";
    }
    return out;
}

/// `failures` maps instrument id -> error message; those rows carry empty
/// coefficients and the message in `status`.
inline std::string calibrations_csv(const std::vector<InstrumentCalibration>& cals,
                                    const std::map<std::string, std::string>& failures = {}) {
    std::map<std::string, std::string> rows;
    for (const auto& c : cals)
        rows[c.instrument_id] = detail::format_double(c.slope) + "," + detail::format_double(c.offset) + "," +
                                detail::format_double(c.r_squared) + ",ok";
    for (const auto& [id, message] : failures) {
        std::string msg = message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        rows[id] = ",,,error: " + msg;
    }
    std::string out = "instrument_id,slope,offset,r_squared,status\n";
    for (const auto& [id, row] : rows) out += id + "," + row + "\n";
    return out;
}

/// Rows with an empty slope (failed fits) are skipped.
inline std::map<std::string, InstrumentCalibration> read_calibrations_csv(std::string_view text) {
    auto t = detail::CsvTable::parse(text);
    t.require({"instrument_id", "slope", "offset"});
    std::map<std::string, InstrumentCalibration> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        if (t.cell(r, "slope").empty()) continue;
        InstrumentCalibration c;
        c.instrument_id = t.cell(r, "instrument_id");
        c.slope = t.number(r, "slope");
        c.offset = t.number(r, "offset");
        c.r_squared = t.optional_number(r, "r_squared").value_or(1.0);
        if (!(c.slope > 0.0)) throw ParseError("slope must be positive", t.line(r));
        out[c.instrument_id] = c;
    }
    return out;
}

} // namespace rooftherm
