// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * Empirical line calibration: an affine map from at-sensor to
 * ground-leaving band exitance, fitted on ground targets of known
 * temperature and emissivity.
 */

#pragma once

#include <rooftherm/detail/parallel.hpp>
#include <rooftherm/detail/text.hpp>
#include <rooftherm/error.hpp>
#include <rooftherm/radiometry.hpp>
#include <rooftherm/raster.hpp>
#include <rooftherm/regression.hpp>
#include <rooftherm/spectra.hpp>

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rooftherm {

struct TargetPair {
    std::string target_id;
    std::string material;
    bool pervious = false;
    double ground_exitance = 0.0; // W m-2
    double sensor_exitance = 0.0; // W m-2
    double x = 0.0;
    double y = 0.0;
    std::string source_image;
};

struct ElcModel {
    double gain = 1.0;
    double offset = 0.0; // W m-2
    double r_squared = 1.0;
    std::size_t n_points = 0;
    std::optional<WavelengthBand> band;

    double apply(double sensor_exitance) const { return gain * sensor_exitance + offset; }
};

struct PointDiagnostics {
    double fitted = 0.0;
    double residual = 0.0;
    double leverage = 0.0;
    double cooks_distance = 0.0;
};

struct RegressionDiagnostics {
    std::vector<PointDiagnostics> points; // aligned with the fitted pairs
    double r_squared = 0.0;
    double residual_std = 0.0;
};

struct ElcFit {
    ElcModel model;
    RegressionDiagnostics diagnostics;
};

/// Materials treated as pervious (dropped before fitting) unless configured otherwise.
inline const std::set<std::string> kDefaultPerviousMaterials = {"grass", "soil", "tree"};

/// A field target with its normalized kinetic temperature.
struct GroundTarget {
    std::string target_id;
    std::string material;
    double kinetic_temp = 0.0; // K
    double x = 0.0;
    double y = 0.0;
};

/// ground = epsilon_material * M_bb(band, T); sensor = raster sample at the
/// target (first raster, in the given order, whose extent holds the point).
inline std::vector<TargetPair> prepare_pairs(const std::vector<GroundTarget>& targets, const MaterialTable& materials,
                                             const std::vector<RadianceRaster>& rasters, const PlanckTable& table,
                                             int window = 3,
                                             const std::set<std::string>& pervious = kDefaultPerviousMaterials) {
    std::vector<TargetPair> pairs;
    pairs.reserve(targets.size());
    for (const auto& t : targets) {
        const double eps = materials.emissivity(t.material, table.band());
        const RadianceRaster* source = nullptr;
        for (const auto& r : rasters)
            if (r.contains(t.x, t.y)) {
                source = &r;
                break;
            }
        if (!source)
            throw UnmatchedTargetError("target '" + t.target_id + "' at (" + detail::format_double(t.x) + ", " +
                                       detail::format_double(t.y) + ") lies outside every raster");
        TargetPair p;
        p.target_id = t.target_id;
        p.material = t.material;
        p.pervious = pervious.count(t.material) != 0;
        p.ground_exitance = band_exitance(table.band(), t.kinetic_temp, table.lambda_step()) * eps;
        p.sensor_exitance = sample(*source, t.x, t.y, window);
        p.x = t.x;
        p.y = t.y;
        p.source_image = source->image_id;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

inline std::vector<TargetPair> filter_impervious(const std::vector<TargetPair>& pairs) {
    std::vector<TargetPair> out;
    std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out), [](const auto& p) { return !p.pervious; });
    return out;
}

/// OLS of ground on sensor: ground = gain * sensor + offset.
inline ElcFit fit_elc(const std::vector<TargetPair>& pairs) {
    if (pairs.size() < 3) throw DegenerateFitError("ELC fit needs at least 3 target pairs, got " + std::to_string(pairs.size()));
    std::vector<double> sensor, ground;
    for (const auto& p : pairs) {
        sensor.push_back(p.sensor_exitance);
        ground.push_back(p.ground_exitance);
    }
    LineFit fit;
    try {
        fit = fit_line(sensor, ground);
    } catch (const DegenerateFitError&) {
        throw DegenerateFitError("ELC fit needs at least 2 distinct at-sensor values");
    }
    ElcFit out;
    out.model = {fit.slope, fit.intercept, fit.r_squared, fit.n, std::nullopt};
    out.diagnostics.r_squared = fit.r_squared;
    out.diagnostics.residual_std = fit.residual_std;
    for (std::size_t i = 0; i < fit.n; ++i)
        out.diagnostics.points.push_back({fit.fitted[i], fit.residuals[i], fit.leverages[i], fit.cooks_distances[i]});
    return out;
}

// Pruning rules for influential points.
struct PruneNone {};
struct PruneFourOverN {};
struct PruneAbsolute {
    double threshold;
};
struct PruneTopK {
    std::size_t k;
};
using PruneRule = std::variant<PruneNone, PruneFourOverN, PruneAbsolute, PruneTopK>;

/// "none", "4/n", "abs:<threshold>", "top:<k>".
inline PruneRule parse_prune_rule(std::string_view text) {
    const auto t = detail::lower(detail::trim(text));
    if (t == "none") return PruneNone{};
    if (t == "4/n") return PruneFourOverN{};
    if (t.rfind("abs:", 0) == 0) {
        auto v = detail::parse_double(std::string_view(t).substr(4));
        if (!v || *v < 0.0) throw ConfigError("bad absolute Cook's threshold: " + t);
        return PruneAbsolute{*v};
    }
    if (t.rfind("top:", 0) == 0) {
        auto v = detail::parse_int(std::string_view(t).substr(4));
        if (!v || *v < 0) throw ConfigError("bad top-k count: " + t);
        return PruneTopK{static_cast<std::size_t>(*v)};
    }
    throw ConfigError("unknown pruning rule '" + std::string(text) + "' (use none, 4/n, abs:X, top:K)");
}

inline std::string prune_rule_label(const PruneRule& rule) {
    struct Visitor {
        std::string operator()(PruneNone) const { return "none"; }
        std::string operator()(PruneFourOverN) const { return "4/n"; }
        std::string operator()(PruneAbsolute a) const { return "abs:" + detail::format_double(a.threshold); }
        std::string operator()(PruneTopK k) const { return "top:" + std::to_string(k.k); }
    };
    return std::visit(Visitor{}, rule);
}

struct PruneResult {
    ElcFit fit;
    std::vector<TargetPair> retained;
    std::vector<std::string> removed_ids;
    double r_squared_before = 0.0;
    double r_squared_after = 0.0;
};

/// Drops influential points by the rule and refits once.
inline PruneResult prune_and_refit(const std::vector<TargetPair>& pairs, const RegressionDiagnostics& diagnostics,
                                   const PruneRule& rule = PruneFourOverN{}) {
    if (diagnostics.points.size() != pairs.size()) throw DomainError("diagnostics do not match the pairs");
    const std::size_t n = pairs.size();
    std::vector<bool> drop(n, false);
    if (std::holds_alternative<PruneFourOverN>(rule) || std::holds_alternative<PruneAbsolute>(rule)) {
        const double threshold = std::holds_alternative<PruneFourOverN>(rule) ? 4.0 / static_cast<double>(n)
                                                                              : std::get<PruneAbsolute>(rule).threshold;
        for (std::size_t i = 0; i < n; ++i) drop[i] = diagnostics.points[i].cooks_distance > threshold;
    } else if (const auto* top = std::get_if<PruneTopK>(&rule)) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
            return diagnostics.points[a].cooks_distance > diagnostics.points[b].cooks_distance;
        });
        for (std::size_t i = 0; i < std::min(top->k, n); ++i) drop[order[i]] = true;
    }

    PruneResult out;
    for (std::size_t i = 0; i < n; ++i) {
        if (drop[i]) out.removed_ids.push_back(pairs[i].target_id);
        else out.retained.push_back(pairs[i]);
    }
    if (out.retained.size() < 3)
        throw RefusalError("pruning would leave " + std::to_string(out.retained.size()) + " pairs (need at least 3)");
    out.r_squared_before = diagnostics.r_squared;
    out.fit = fit_elc(out.retained);
    out.r_squared_after = out.fit.model.r_squared;
    return out;
}

inline double apply_elc(const ElcModel& model, double sensor_exitance) { return model.apply(sensor_exitance); }

struct CorrectedRaster {
    RadianceRaster raster;
    std::size_t invalid_pixels = 0; // corrected value <= 0, set to nodata
};

/// Per-pixel model application; nodata passes through, non-positive results become nodata.
inline CorrectedRaster apply_elc(const ElcModel& model, const RadianceRaster& sensor, unsigned threads = 1) {
    CorrectedRaster out{sensor, 0};
    std::vector<unsigned char> invalid(sensor.size(), 0);
    detail::parallel_for(sensor.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double v = sensor.values[i];
            if (sensor.is_nodata(v)) {
                out.raster.values[i] = sensor.nodata;
                continue;
            }
            const double g = model.apply(v);
            if (g > 0.0) {
                out.raster.values[i] = g;
            } else {
                out.raster.values[i] = sensor.nodata;
                invalid[i] = 1;
            }
        }
    });
    out.invalid_pixels = static_cast<std::size_t>(std::count(invalid.begin(), invalid.end(), 1));
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string pairs_csv(const std::vector<TargetPair>& pairs) {
    using detail::format_double;
    std::string out = "target_id,material,pervious,ground_exitance,sensor_exitance,x,y,image\n";
    for (const auto& p : pairs)
        out += p.target_id + "," + p.material + "," + (p.pervious ? "true" : "false") + "," +
               format_double(p.ground_exitance) + "," + format_double(p.sensor_exitance) + "," + format_double(p.x) +
               "," + format_double(p.y) + "," + p.source_image + "\n";
    return out;
}

inline std::vector<TargetPair> read_pairs_csv(std::string_view text) {
    auto t = detail::CsvTable::parse(text);
    t.require({"target_id", "ground_exitance", "sensor_exitance"});
    std::vector<TargetPair> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        TargetPair p;
        p.target_id = t.cell(r, "target_id");
        p.material = t.cell(r, "material");
        p.pervious = detail::parse_bool(t.cell(r, "pervious"));
        p.ground_exitance = t.number(r, "ground_exitance");
        p.sensor_exitance = t.number(r, "sensor_exitance");
        if (!(p.ground_exitance > 0.0) || !(p.sensor_exitance > 0.0))
            throw ParseError("exitances must be positive", t.line(r));
        p.x = t.optional_number(r, "x").value_or(0.0);
        p.y = t.optional_number(r, "y").value_or(0.0);
        p.source_image = t.cell(r, "image");
        out.push_back(std::move(p));
    }
    return out;
}

inline nlohmann::json model_json(const ElcModel& m) {
    nlohmann::json j = {{"gain", m.gain}, {"offset", m.offset}, {"r_squared", m.r_squared}, {"n_points", m.n_points}};
    if (m.band) {
        j["band_lo_um"] = m.band->lo();
        j["band_hi_um"] = m.band->hi();
    }
    return j;
}

inline ElcModel model_from_json(const nlohmann::json& j) {
    try {
        ElcModel m;
        m.gain = j.at("gain").get<double>();
        m.offset = j.at("offset").get<double>();
        m.r_squared = j.value("r_squared", 1.0);
        m.n_points = j.value("n_points", std::size_t{0});
        if (j.contains("band_lo_um") && j.contains("band_hi_um"))
            m.band = WavelengthBand(j["band_lo_um"].get<double>(), j["band_hi_um"].get<double>());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("ELC model: ") + e.what(), 0);
    }
}

/// Standard-normal quantiles for a Q-Q plot of n points (Blom positions).
inline std::vector<double> normal_quantiles(std::size_t n) {
    boost::math::normal_distribution<double> normal;
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i)
        q[i] = boost::math::quantile(normal, (static_cast<double>(i) + 1.0 - 0.375) / (static_cast<double>(n) + 0.25));
    return q;
}

/// Per-point diagnostics plus the series behind the ground-vs-sensor scatter,
/// fitted-vs-residual and normal Q-Q plots.
inline nlohmann::json diagnostics_json(const std::vector<TargetPair>& pairs, const ElcFit& fit) {
    nlohmann::json points = nlohmann::json::array();
    std::vector<double> standardized;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& d = fit.diagnostics.points[i];
        const double s = fit.diagnostics.residual_std;
        const double denom = s * std::sqrt(std::max(0.0, 1.0 - d.leverage));
        const double z = denom > 0.0 ? d.residual / denom : 0.0;
        standardized.push_back(z);
        points.push_back({{"index", i + 1},
                          {"target_id", pairs[i].target_id},
                          {"material", pairs[i].material},
                          {"sensor_exitance", pairs[i].sensor_exitance},
                          {"ground_exitance", pairs[i].ground_exitance},
                          {"fitted", d.fitted},
                          {"residual", d.residual},
                          {"standardized_residual", z},
                          {"leverage", d.leverage},
                          {"cooks_distance", d.cooks_distance}});
    }
    auto sorted = standardized;
    std::sort(sorted.begin(), sorted.end());
    const auto q = normal_quantiles(sorted.size());
    nlohmann::json qq = nlohmann::json::array();
    for (std::size_t i = 0; i < sorted.size(); ++i) qq.push_back({{"theoretical", q[i]}, {"sample", sorted[i]}});
    return {{"model", model_json(fit.model)},
            {"r_squared", fit.diagnostics.r_squared},
            {"residual_std", fit.diagnostics.residual_std},
            {"points", points},
            {"normal_qq", qq}};
}

} // namespace rooftherm
