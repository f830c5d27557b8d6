// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <rooftherm/detail/parallel.hpp>
#include <rooftherm/detail/text.hpp>
#include <rooftherm/elc.hpp>
#include <rooftherm/error.hpp>
#include <rooftherm/instrument.hpp>
#include <rooftherm/radiometry.hpp>
#include <rooftherm/raster.hpp>
#include <rooftherm/spectra.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rooftherm {

struct BuildingReport {
    std::int64_t building_id = 0;
    std::string material;
    std::string image_id;
    std::string flight_line;
    std::size_t pixel_count = 0;
    double mean_temp = 0.0; // K
    double min_temp = 0.0;  // K
    double max_temp = 0.0;  // K
};

struct ValidationRecord {
    std::int64_t building_id = 0;
    std::string material;
    double predicted_temp = 0.0; // K
    double field_temp = 0.0;     // K
    std::string image_id;
};

struct MaterialError {
    double rmse = 0.0;       // K
    std::size_t n = 0;
    double mean_error = 0.0; // K, predicted - field; negative means underestimation
};

struct OverlapPair {
    std::int64_t building_id = 0;
    std::string image_a;
    std::string image_b;
    double temp_a = 0.0; // K
    double temp_b = 0.0; // K
    double delta = 0.0;  // temp_a - temp_b, K
    bool same_flight_line = false;
};

/// Field readings with role "target" -> ELC ground targets carrying the
/// emissivity-corrected, normalized kinetic temperature.
inline std::vector<GroundTarget> ground_targets(const std::vector<FieldReading>& readings,
                                                const std::map<std::string, InstrumentCalibration>& calibrations,
                                                const MaterialTable& materials, double device_emissivity,
                                                const PlanckTable& device_table) {
    std::vector<GroundTarget> out;
    for (const auto& r : readings) {
        if (r.role != "target") continue;
        out.push_back({r.target_id, r.material,
                       field_kinetic_temperature(r, calibrations, materials, device_emissivity, device_table), r.x, r.y});
    }
    return out;
}

/// Field readings with role "roof" -> building id -> normalized kinetic
/// temperatures. The reading's target_id is the building id.
inline std::map<std::int64_t, std::vector<double>> roof_field_temperatures(
    const std::vector<FieldReading>& readings, const std::map<std::string, InstrumentCalibration>& calibrations,
    const MaterialTable& materials, double device_emissivity, const PlanckTable& device_table) {
    std::map<std::int64_t, std::vector<double>> out;
    for (const auto& r : readings) {
        if (r.role != "roof") continue;
        auto id = detail::parse_int(r.target_id);
        if (!id) throw ConfigError("roof reading target_id '" + r.target_id + "' is not a building id");
        out[*id].push_back(field_kinetic_temperature(r, calibrations, materials, device_emissivity, device_table));
    }
    return out;
}

/// At-sensor -> ground-leaving exitance. The raster band, when known, must match the model's.
inline CorrectedRaster correct_raster(const RadianceRaster& sensor, const ElcModel& model, unsigned threads = 1) {
    if (sensor.band && model.band && !(*sensor.band == *model.band))
        throw ConfigError("raster '" + sensor.image_id + "' band " + sensor.band->label() +
                          " does not match the ELC model band " + model.band->label());
    auto out = apply_elc(model, sensor, threads);
    if (!out.raster.band) out.raster.band = model.band;
    return out;
}

struct RooftopResult {
    RadianceRaster temperature; // K, nodata outside buildings
    std::vector<BuildingReport> reports;
    std::size_t out_of_table_pixels = 0;
    std::size_t masked_pixels = 0;
};

/// Per masked pixel: blackbody exitance = ground / epsilon_material, then table inversion.
/// Pixels outside the table become nodata and are counted.
inline RooftopResult rooftop_temperatures(const RadianceRaster& ground, const BuildingMask& mask,
                                          const FootprintSet& footprints, const MaterialTable& materials,
                                          const PlanckTable& table, unsigned threads = 1) {
    if (mask.ncols != ground.ncols || mask.nrows != ground.nrows)
        throw ConfigError("building mask does not match raster '" + ground.image_id + "'");
    if (ground.band && !(*ground.band == table.band()))
        throw ConfigError("raster band " + ground.band->label() + " does not match Planck table band " +
                          table.band().label());

    std::map<std::int64_t, std::pair<std::string, double>> building_eps;
    for (const auto& b : footprints.buildings)
        building_eps[b.building_id] = {b.material, materials.emissivity(b.material, table.band())};

    RooftopResult result;
    result.temperature = ground.like(ground.nodata);
    result.temperature.band = table.band();
    std::vector<unsigned char> outside(ground.size(), 0);
    detail::parallel_for(ground.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto id = mask.ids[i];
            if (id == BuildingMask::kNoBuilding) continue;
            const double g = ground.values[i];
            if (ground.is_nodata(g)) continue;
            auto it = building_eps.find(id);
            if (it == building_eps.end()) continue;
            const double bb = rescale_exitance(std::max(g, 0.0), it->second.second, 1.0);
            if (!table.in_range(bb)) {
                outside[i] = 1;
                continue;
            }
            result.temperature.values[i] = table.invert(bb);
        }
    });
    result.out_of_table_pixels = static_cast<std::size_t>(std::count(outside.begin(), outside.end(), 1));
    result.masked_pixels = mask.count();

    struct Acc {
        std::size_t n = 0;
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
    };
    std::map<std::int64_t, Acc> acc;
    for (std::size_t i = 0; i < ground.size(); ++i) {
        const auto id = mask.ids[i];
        if (id == BuildingMask::kNoBuilding) continue;
        const double t = result.temperature.values[i];
        if (result.temperature.is_nodata(t)) continue;
        auto& a = acc[id];
        ++a.n;
        a.sum += t;
        a.lo = std::min(a.lo, t);
        a.hi = std::max(a.hi, t);
    }
    for (const auto& [id, a] : acc) {
        BuildingReport r;
        r.building_id = id;
        r.material = building_eps.at(id).first;
        r.image_id = ground.image_id;
        r.flight_line = ground.flight_line;
        r.pixel_count = a.n;
        r.mean_temp = a.sum / static_cast<double>(a.n);
        r.min_temp = a.lo;
        r.max_temp = a.hi;
        result.reports.push_back(std::move(r));
    }
    return result;
}

/// Joins building reports with field temperatures by building id. Several
/// field values for one building are averaged.
inline std::vector<ValidationRecord> validation_records(const std::vector<BuildingReport>& reports,
                                                        const std::map<std::int64_t, std::vector<double>>& field_temps) {
    std::vector<ValidationRecord> out;
    for (const auto& r : reports) {
        auto it = field_temps.find(r.building_id);
        if (it == field_temps.end() || it->second.empty()) continue;
        double sum = 0.0;
        for (double t : it->second) sum += t;
        out.push_back({r.building_id, r.material, r.mean_temp, sum / static_cast<double>(it->second.size()), r.image_id});
    }
    return out;
}

inline std::map<std::string, MaterialError> rmse_by_material(const std::vector<ValidationRecord>& records) {
    std::map<std::string, MaterialError> out;
    std::map<std::string, std::pair<double, double>> sums; // (sum sq, sum)
    for (const auto& r : records) {
        const double e = r.predicted_temp - r.field_temp;
        auto& s = sums[r.material];
        s.first += e * e;
        s.second += e;
        ++out[r.material].n;
    }
    for (auto& [material, m] : out) {
        const auto n = static_cast<double>(m.n);
        m.rmse = std::sqrt(sums[material].first / n);
        m.mean_error = sums[material].second / n;
    }
    return out;
}

/// Every unordered pair of reports sharing a building, sorted by |delta| descending.
inline std::vector<OverlapPair> overlap_report(const std::vector<BuildingReport>& reports) {
    std::vector<OverlapPair> out;
    for (std::size_t i = 0; i < reports.size(); ++i)
        for (std::size_t j = i + 1; j < reports.size(); ++j) {
            const auto& a = reports[i];
            const auto& b = reports[j];
            if (a.building_id != b.building_id) continue;
            out.push_back({a.building_id, a.image_id, b.image_id, a.mean_temp, b.mean_temp, a.mean_temp - b.mean_temp,
                           a.flight_line == b.flight_line});
        }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& x, const auto& y) { return std::abs(x.delta) > std::abs(y.delta); });
    return out;
}

// ---------------------------------------------------------------------------
// CSV outputs. Temperatures in degrees Celsius, differences in K, printed
// with 10 significant digits so Kelvin/Celsius round-off does not show.

namespace detail {
inline std::string report_number(double v) { return format_general(v, 10); }
} // namespace detail

inline std::string building_reports_csv(const std::vector<BuildingReport>& reports) {
    using detail::report_number;
    std::string out = "building_id,material,image_id,flight_line,pixel_count,mean_C,min_C,max_C\n";
    for (const auto& r : reports)
        out += std::to_string(r.building_id) + "," + r.material + "," + r.image_id + "," + r.flight_line + "," +
               std::to_string(r.pixel_count) + "," + report_number(kelvin_to_celsius(r.mean_temp)) + "," +
               report_number(kelvin_to_celsius(r.min_temp)) + "," + report_number(kelvin_to_celsius(r.max_temp)) + "\n";
    return out;
}

inline std::vector<BuildingReport> read_building_reports_csv(std::string_view text) {
    auto t = detail::CsvTable::parse(text);
    t.require({"building_id", "image_id", "mean_C"});
    std::vector<BuildingReport> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        BuildingReport b;
        auto id = detail::parse_int(t.cell(r, "building_id"));
        if (!id) throw ParseError("building_id must be an integer", t.line(r));
        b.building_id = *id;
        b.material = t.cell(r, "material");
        b.image_id = t.cell(r, "image_id");
        b.flight_line = t.cell(r, "flight_line");
        b.pixel_count = static_cast<std::size_t>(t.optional_number(r, "pixel_count").value_or(1.0));
        b.mean_temp = celsius_to_kelvin(t.number(r, "mean_C"));
        b.min_temp = t.optional_number(r, "min_C") ? celsius_to_kelvin(t.number(r, "min_C")) : b.mean_temp;
        b.max_temp = t.optional_number(r, "max_C") ? celsius_to_kelvin(t.number(r, "max_C")) : b.mean_temp;
        out.push_back(std::move(b));
    }
    return out;
}

inline std::string validation_csv(const std::vector<ValidationRecord>& records) {
    using detail::report_number;
    std::string out = "building_id,material,image_id,predicted_C,field_C,error_K\n";
    for (const auto& r : records)
        out += std::to_string(r.building_id) + "," + r.material + "," + r.image_id + "," +
               report_number(kelvin_to_celsius(r.predicted_temp)) + "," + report_number(kelvin_to_celsius(r.field_temp)) +
               "," + report_number(r.predicted_temp - r.field_temp) + "\n";
    return out;
}

inline std::string rmse_csv(const std::map<std::string, MaterialError>& stats) {
    using detail::report_number;
    std::string out = "material,n,rmse_K,mean_error_K\n";
    for (const auto& [m, s] : stats)
        out += m + "," + std::to_string(s.n) + "," + report_number(s.rmse) + "," + report_number(s.mean_error) + "\n";
    return out;
}

inline std::string overlap_csv(const std::vector<OverlapPair>& pairs) {
    using detail::report_number;
    std::string out = "building_id,image_a,image_b,temp_a_C,temp_b_C,delta_K,same_flight_line\n";
    for (const auto& p : pairs)
        out += std::to_string(p.building_id) + "," + p.image_a + "," + p.image_b + "," +
               report_number(kelvin_to_celsius(p.temp_a)) + "," + report_number(kelvin_to_celsius(p.temp_b)) + "," +
               report_number(p.delta) + "," + (p.same_flight_line ? "true" : "false") + "\n";
    return out;
}

} // namespace rooftherm
