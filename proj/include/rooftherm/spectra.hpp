// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <rooftherm/detail/text.hpp>
#include <rooftherm/error.hpp>
#include <rooftherm/radiometry.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rooftherm {

enum class CurveKind { reflectance, emissivity };

/// Sampled wavelength -> value function for one material.
struct SpectralCurve {
    std::vector<double> wavelengths; // um, strictly increasing
    std::vector<double> values;      // dimensionless, [0, 1]
    CurveKind kind = CurveKind::reflectance;
    std::string material;

    double front() const { return wavelengths.front(); }
    double back() const { return wavelengths.back(); }

    /// Linear interpolation; callers guarantee lambda is inside the sample range.
    double at(double lambda) const {
        auto it = std::lower_bound(wavelengths.begin(), wavelengths.end(), lambda);
        if (it == wavelengths.begin()) return values.front();
        if (it == wavelengths.end()) return values.back();
        const auto hi = static_cast<std::size_t>(it - wavelengths.begin());
        const auto lo = hi - 1;
        const double f = (lambda - wavelengths[lo]) / (wavelengths[hi] - wavelengths[lo]);
        return values[lo] + f * (values[hi] - values[lo]);
    }
};

/// Reads a two-column (wavelength um, value) curve. Separators are commas or
/// whitespace, '#' starts a comment line, and `Key: value` metadata lines are
/// accepted before the first data row (spectral-library headers). Values whose
/// maximum exceeds 1.5 are taken as percent.
inline SpectralCurve parse_spectral_curve(std::string_view text, std::string material_name) {
    std::vector<std::pair<double, double>> rows;
    std::vector<std::size_t> row_lines;
    std::size_t lineno = 0;
    for (auto raw : detail::split_lines(text)) {
        ++lineno;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto fields = detail::split_fields(line);
        auto w = fields.size() == 2 ? detail::parse_double(fields[0]) : std::nullopt;
        auto v = fields.size() == 2 ? detail::parse_double(fields[1]) : std::nullopt;
        if (w && v) {
            rows.emplace_back(*w, *v);
            row_lines.push_back(lineno);
            continue;
        }
        const bool metadata = rows.empty() && line.find(':') != std::string_view::npos &&
                              !detail::parse_double(fields.front());
        if (!metadata) throw ParseError("expected two numeric columns (wavelength, value)", lineno);
    }
    if (rows.size() < 2) throw ParseError("spectral curve needs at least 2 samples", lineno);

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rows[a].first < rows[b].first; });

    double max_value = 0.0;
    for (const auto& r : rows) max_value = std::max(max_value, r.second);
    const double scale = max_value > 1.5 ? 0.01 : 1.0;

    SpectralCurve curve;
    curve.kind = CurveKind::reflectance;
    curve.material = std::move(material_name);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& [w, v] = rows[order[k]];
        if (!(w > 0.0)) throw ParseError("wavelength must be positive", row_lines[order[k]]);
        if (k > 0 && w == curve.wavelengths.back())
            throw ParseError("duplicate wavelength " + detail::format_double(w), row_lines[order[k]]);
        const double value = v * scale;
        if (value < 0.0 || value > 1.0) throw ParseError("value outside [0, 1] after normalization", row_lines[order[k]]);
        curve.wavelengths.push_back(w);
        curve.values.push_back(value);
    }
    return curve;
}

/// Kirchhoff's law for opaque surfaces: emissivity = 1 - reflectance.
inline SpectralCurve emissivity_curve(const SpectralCurve& reflectance) {
    if (reflectance.kind != CurveKind::reflectance)
        throw DomainError("curve '" + reflectance.material + "' is already an emissivity curve");
    SpectralCurve out = reflectance;
    out.kind = CurveKind::emissivity;
    for (auto& v : out.values) v = 1.0 - v;
    return out;
}

/// Weighted band mean of a curve: trapezoid integrals of value*weight and
/// weight on a uniform grid, value linearly interpolated between samples.
inline double weighted_band_mean(const SpectralCurve& curve, const WavelengthBand& band,
                                 const std::function<double(double)>& weight,
                                 double lambda_step = kDefaultLambdaStep) {
    if (curve.wavelengths.size() < 2) throw DomainError("curve needs at least 2 samples");
    if (curve.front() > band.lo() || curve.back() < band.hi()) {
        std::string gap;
        if (curve.front() > band.lo())
            gap = "[" + detail::format_double(band.lo()) + ", " + detail::format_double(std::min(curve.front(), band.hi())) + "]";
        if (curve.back() < band.hi())
            gap += (gap.empty() ? "" : " and ") + std::string("[") +
                   detail::format_double(std::max(curve.back(), band.lo())) + ", " + detail::format_double(band.hi()) + "]";
        throw CoverageError("curve '" + curve.material + "' does not cover " + gap + " um of band " + band.label());
    }
    const auto grid = detail::make_grid(band, lambda_step);
    double num = 0.0, den = 0.0;
    std::size_t seg = 0;
    for (std::size_t i = 0; i <= grid.intervals; ++i) {
        const double lambda = i == grid.intervals ? band.hi() : grid.at(i);
        while (seg + 2 < curve.wavelengths.size() && curve.wavelengths[seg + 1] < lambda) ++seg;
        const double w0 = curve.wavelengths[seg], w1 = curve.wavelengths[seg + 1];
        const double f = std::clamp((lambda - w0) / (w1 - w0), 0.0, 1.0);
        const double value = curve.values[seg] + f * (curve.values[seg + 1] - curve.values[seg]);
        const double trap = (i == 0 || i == grid.intervals) ? 0.5 : 1.0;
        const double wt = weight(lambda) * trap;
        num += value * wt;
        den += wt;
    }
    return num / den;
}

/// Planck-weighted mean emissivity over a band at reference temperature t_ref.
inline double band_emissivity(const SpectralCurve& curve, const WavelengthBand& band, double t_ref = 300.0,
                              double lambda_step = kDefaultLambdaStep) {
    if (curve.kind != CurveKind::emissivity)
        throw DomainError("band_emissivity needs an emissivity curve, got reflectance for '" + curve.material + "'");
    if (!(t_ref > 0.0)) throw DomainError("reference temperature must be positive");
    return weighted_band_mean(curve, band, [t_ref](double l) { return spectral_exitance(l, t_ref); }, lambda_step);
}

/// material -> band -> band emissivity.
class MaterialTable {
public:
    void set(const std::string& material, const WavelengthBand& band, double emissivity) {
        if (!(emissivity > 0.0 && emissivity <= 1.0))
            throw DomainError("emissivity of '" + material + "' must be in (0, 1]");
        rows_[material].insert_or_assign(band, emissivity);
    }

    double emissivity(const std::string& material, const WavelengthBand& band) const {
        auto it = rows_.find(material);
        if (it == rows_.end()) throw LookupError("material '" + material + "' not in material table");
        auto jt = it->second.find(band);
        if (jt == it->second.end())
            throw LookupError("material '" + material + "' has no emissivity for band " + band.label());
        return jt->second;
    }

    bool contains(const std::string& material, const WavelengthBand& band) const {
        auto it = rows_.find(material);
        return it != rows_.end() && it->second.count(band) != 0;
    }

    bool empty() const { return rows_.empty(); }
    std::size_t size() const { return rows_.size(); }
    const std::map<std::string, std::map<WavelengthBand, double>>& rows() const { return rows_; }

private:
    std::map<std::string, std::map<WavelengthBand, double>> rows_;
};

inline MaterialTable material_table(const std::vector<SpectralCurve>& curves, const std::vector<WavelengthBand>& bands,
                                    double t_ref = 300.0, double lambda_step = kDefaultLambdaStep) {
    MaterialTable table;
    for (const auto& curve : curves) {
        for (const auto& band : bands) {
            try {
                table.set(curve.material, band, band_emissivity(curve, band, t_ref, lambda_step));
            } catch (const CoverageError& e) {
                throw CoverageError(curve.material + ": " + e.what());
            }
        }
    }
    return table;
}

/// Roof materials every run supports; more may come from the material table.
inline const std::vector<std::string> kRoofMaterials = {"asphalt", "metal", "rubber_membrane", "tar"};

/// Published 8-9.2 / 8-14 um band emissivities for common urban surfaces,
/// keyed by the material names used throughout the toolkit.
inline MaterialTable builtin_material_table() {
    struct Row {
        const char* name;
        double lwir_narrow;
        double lwir_wide;
    };
    static constexpr Row rows[] = {
        {"asphalt", 0.93084419, 0.946427167},
        {"concrete", 0.95352648, 0.970666471},
        {"water", 0.98378147, 0.983423632},
        {"black_board", 0.95584074, 0.948549302},
        {"grass", 0.98178366, 0.983275663},
        {"tar", 0.95830696, 0.958712242},
        {"tree", 0.97863716, 0.977182788},
        {"soil", 0.91176422, 0.955334553},
        {"rubber_white", 0.96455994, 0.967303921},
        {"rubber_membrane", 0.91196318, 0.913549303},
        {"metal", 0.632978, 0.619098699},
        {"metal_rusted", 0.72807754, 0.790403235},
    };
    MaterialTable t;
    for (const auto& r : rows) {
        t.set(r.name, kImagerBand, r.lwir_narrow);
        t.set(r.name, kThermometerBand, r.lwir_wide);
    }
    return t;
}

inline std::string material_table_csv(const MaterialTable& table) {
    std::string out = "material,band_lo,band_hi,emissivity\n";
    for (const auto& [material, bands] : table.rows())
        for (const auto& [band, e] : bands)
            out += material + "," + detail::format_double(band.lo()) + "," + detail::format_double(band.hi()) + "," +
                   detail::format_double(e) + "\n";
    return out;
}

inline MaterialTable read_material_table(std::string_view csv) {
    auto t = detail::CsvTable::parse(csv);
    t.require({"material", "band_lo", "band_hi", "emissivity"});
    MaterialTable table;
    for (std::size_t r = 0; r < t.size(); ++r) {
        try {
            table.set(t.cell(r, "material"), WavelengthBand(t.number(r, "band_lo"), t.number(r, "band_hi")),
                      t.number(r, "emissivity"));
        } catch (const DomainError& e) {
            throw ParseError(e.what(), t.line(r));
        }
    }
    return table;
}

} // namespace rooftherm
