// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * Grids and footprints.
 *
 * Grids are north-up, row-major with row 0 at the top, anchored at the
 * lower-left corner. Cell (row, col) covers
 *   x in [xll + col*cs, xll + (col+1)*cs),
 *   y in [yll + (nrows-1-row)*cs, yll + (nrows-row)*cs).
 * Text I/O follows the ESRI ASCII grid format; a raw little-endian float64
 * format with a JSON header carries the same content losslessly.
 */

#pragma once

#include <rooftherm/detail/text.hpp>
#include <rooftherm/error.hpp>
#include <rooftherm/radiometry.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rooftherm {

inline constexpr double kDefaultNodata = -9999.0;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct CellIndex {
    std::size_t row = 0;
    std::size_t col = 0;
};

struct RadianceRaster {
    std::size_t ncols = 0;
    std::size_t nrows = 0;
    double xll = 0.0;
    double yll = 0.0;
    double cellsize = 1.0;
    double nodata = kDefaultNodata;
    std::vector<double> values;
    std::optional<WavelengthBand> band;
    std::string image_id;
    std::string flight_line;

    static RadianceRaster filled(std::size_t ncols, std::size_t nrows, double xll, double yll, double cellsize,
                                 double value, double nodata = kDefaultNodata) {
        RadianceRaster r;
        r.ncols = ncols;
        r.nrows = nrows;
        r.xll = xll;
        r.yll = yll;
        r.cellsize = cellsize;
        r.nodata = nodata;
        r.values.assign(ncols * nrows, value);
        r.validate();
        return r;
    }

    void validate() const {
        if (ncols < 1 || nrows < 1) throw DomainError("raster needs at least one row and column");
        if (!(cellsize > 0.0) || !std::isfinite(cellsize)) throw DomainError("cellsize must be positive");
        if (values.size() != ncols * nrows) throw DomainError("raster value count does not match dimensions");
    }

    std::size_t size() const { return values.size(); }
    double& at(std::size_t row, std::size_t col) { return values[row * ncols + col]; }
    double at(std::size_t row, std::size_t col) const { return values[row * ncols + col]; }

    bool is_nodata(double v) const { return std::isnan(v) || v == nodata; }
    bool is_nodata(std::size_t row, std::size_t col) const { return is_nodata(at(row, col)); }

    double xmax() const { return xll + static_cast<double>(ncols) * cellsize; }
    double ymax() const { return yll + static_cast<double>(nrows) * cellsize; }

    Point cell_center(std::size_t row, std::size_t col) const {
        return {xll + (static_cast<double>(col) + 0.5) * cellsize,
                yll + (static_cast<double>(nrows - row) - 0.5) * cellsize};
    }

    bool contains(double x, double y) const { return x >= xll && x < xmax() && y >= yll && y < ymax(); }

    std::optional<CellIndex> locate(double x, double y) const {
        if (!contains(x, y)) return std::nullopt;
        auto col = static_cast<std::size_t>(std::floor((x - xll) / cellsize));
        auto from_bottom = static_cast<std::size_t>(std::floor((y - yll) / cellsize));
        col = std::min(col, ncols - 1);
        from_bottom = std::min(from_bottom, nrows - 1);
        return CellIndex{nrows - 1 - from_bottom, col};
    }

    bool same_grid(const RadianceRaster& o) const {
        return ncols == o.ncols && nrows == o.nrows && xll == o.xll && yll == o.yll && cellsize == o.cellsize;
    }

    /// Same geometry and metadata, every cell set to `value`.
    RadianceRaster like(double value) const {
        RadianceRaster r = *this;
        r.values.assign(values.size(), value);
        return r;
    }
};

// ---------------------------------------------------------------------------
// ESRI ASCII grid

inline RadianceRaster read_ascii_grid(std::string_view text) {
    RadianceRaster r;
    std::map<std::string, double> header;
    bool x_center = false, y_center = false;
    std::size_t lineno = 0;
    std::size_t expected = 0;
    bool in_data = false;
    std::size_t data_start_line = 0;
    for (auto raw : detail::split_lines(text)) {
        ++lineno;
        auto line = detail::trim(raw);
        if (line.empty()) continue;
        if (!in_data) {
            auto fields = detail::split_fields(line);
            if (!fields.empty() && !detail::parse_double(fields.front())) {
                if (fields.size() != 2) throw ParseError("malformed header line", lineno);
                auto key = detail::lower(fields[0]);
                auto value = detail::parse_double(fields[1]);
                if (!value) throw ParseError("non-numeric header value for '" + key + "'", lineno);
                if (key == "xllcenter") { key = "xllcorner"; x_center = true; }
                if (key == "yllcenter") { key = "yllcorner"; y_center = true; }
                header[key] = *value;
                continue;
            }
            for (const char* key : {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"})
                if (!header.count(key)) throw ParseError(std::string("missing header key '") + key + "'", lineno);
            const double nc = header["ncols"], nr = header["nrows"];
            if (nc < 1 || nr < 1 || nc != std::floor(nc) || nr != std::floor(nr))
                throw ParseError("ncols and nrows must be positive integers", lineno);
            r.ncols = static_cast<std::size_t>(nc);
            r.nrows = static_cast<std::size_t>(nr);
            r.cellsize = header["cellsize"];
            if (!(r.cellsize > 0.0)) throw ParseError("cellsize must be positive", lineno);
            r.xll = header["xllcorner"] - (x_center ? 0.5 * r.cellsize : 0.0);
            r.yll = header["yllcorner"] - (y_center ? 0.5 * r.cellsize : 0.0);
            if (header.count("nodata_value")) r.nodata = header["nodata_value"];
            expected = r.ncols * r.nrows;
            r.values.reserve(expected);
            in_data = true;
            data_start_line = lineno;
        }
        for (auto tok : detail::split_fields(line)) {
            auto v = detail::parse_double(tok);
            if (!v) throw ParseError("non-numeric cell value '" + std::string(tok) + "'", lineno);
            if (r.values.size() == expected)
                throw ParseError("too many cell values: expected " + std::to_string(expected), lineno);
            r.values.push_back(*v);
        }
    }
    if (!in_data) throw ParseError("grid has a header but no cell values", lineno);
    if (r.values.size() != expected)
        throw ParseError("expected " + std::to_string(expected) + " cell values, found " +
                             std::to_string(r.values.size()) + " (data starts at line " +
                             std::to_string(data_start_line) + ")",
                         lineno);
    return r;
}

/// Header order: ncols, nrows, xllcorner, yllcorner, cellsize, NODATA_value.
/// Cell values are written with 6 significant digits, one row per line.
inline std::string write_ascii_grid(const RadianceRaster& r) {
    r.validate();
    using detail::format_double;
    std::string out;
    out.reserve(r.size() * 9 + 128);
    out += "ncols " + std::to_string(r.ncols) + "\n";
    out += "nrows " + std::to_string(r.nrows) + "\n";
    out += "xllcorner " + format_double(r.xll) + "\n";
    out += "yllcorner " + format_double(r.yll) + "\n";
    out += "cellsize " + format_double(r.cellsize) + "\n";
    out += "NODATA_value " + detail::format_general(r.nodata, 6) + "\n";
    for (std::size_t row = 0; row < r.nrows; ++row) {
        for (std::size_t col = 0; col < r.ncols; ++col) {
            if (col) out += ' ';
            const double v = r.at(row, col);
            out += detail::format_general(r.is_nodata(v) ? r.nodata : v, 6);
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Raw float64 grid with JSON header

inline nlohmann::json binary_grid_header(const RadianceRaster& r) {
    return {{"ncols", r.ncols},   {"nrows", r.nrows},       {"xllcorner", r.xll},      {"yllcorner", r.yll},
            {"cellsize", r.cellsize}, {"nodata", r.nodata}, {"byte_order", "little"}, {"type", "float64"}};
}

inline std::string write_binary_grid(const RadianceRaster& r) {
    r.validate();
    std::string out(r.size() * sizeof(double), '\0');
    for (std::size_t i = 0; i < r.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(r.values[i]);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        std::memcpy(out.data() + i * sizeof(double), &bits, sizeof(bits));
    }
    return out;
}

inline RadianceRaster read_binary_grid(std::string_view bytes, const nlohmann::json& header) {
    RadianceRaster r;
    try {
        r.ncols = header.at("ncols").get<std::size_t>();
        r.nrows = header.at("nrows").get<std::size_t>();
        r.xll = header.at("xllcorner").get<double>();
        r.yll = header.at("yllcorner").get<double>();
        r.cellsize = header.at("cellsize").get<double>();
        r.nodata = header.value("nodata", kDefaultNodata);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("binary grid header: ") + e.what(), 0);
    }
    if (bytes.size() != r.ncols * r.nrows * sizeof(double))
        throw ParseError("binary grid has " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(r.ncols * r.nrows * sizeof(double)),
                         0);
    r.values.resize(r.ncols * r.nrows);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, bytes.data() + i * sizeof(double), sizeof(bits));
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        r.values[i] = std::bit_cast<double>(bits);
    }
    r.validate();
    return r;
}

// ---------------------------------------------------------------------------
// Image sidecar: {band_lo_um, band_hi_um, image_id, flight_line, dn_scale, dn_offset}

inline void apply_sidecar(RadianceRaster& r, const nlohmann::json& sidecar) {
    try {
        if (sidecar.contains("band_lo_um") && sidecar.contains("band_hi_um"))
            r.band = WavelengthBand(sidecar["band_lo_um"].get<double>(), sidecar["band_hi_um"].get<double>());
        if (sidecar.contains("image_id")) {
            const auto& id = sidecar["image_id"];
            r.image_id = id.is_string() ? id.get<std::string>() : id.dump();
        }
        if (sidecar.contains("flight_line")) {
            const auto& fl = sidecar["flight_line"];
            r.flight_line = fl.is_string() ? fl.get<std::string>() : fl.dump();
        }
        const double scale = sidecar.value("dn_scale", 1.0);
        const double offset = sidecar.value("dn_offset", 0.0);
        if (scale != 1.0 || offset != 0.0)
            for (auto& v : r.values)
                if (!r.is_nodata(v)) v = v * scale + offset;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("raster sidecar: ") + e.what(), 0);
    }
}

inline nlohmann::json make_sidecar(const RadianceRaster& r) {
    nlohmann::json j = {{"image_id", r.image_id}, {"flight_line", r.flight_line}};
    if (r.band) {
        j["band_lo_um"] = r.band->lo();
        j["band_hi_um"] = r.band->hi();
    }
    return j;
}

/// Loads `path` (.asc, or .bin with a .hdr.json header) and its optional
/// `<stem>.json` sidecar. The image id defaults to the file stem.
inline RadianceRaster load_raster(const std::filesystem::path& path) {
    RadianceRaster r;
    if (path.extension() == ".bin") {
        auto header_path = path;
        header_path.replace_extension(".hdr.json");
        r = read_binary_grid(detail::read_file(path), nlohmann::json::parse(detail::read_file(header_path)));
    } else {
        try {
            r = read_ascii_grid(detail::read_file(path));
        } catch (const ParseError& e) {
            throw ParseError(path.filename().string() + ": " + e.what(), 0);
        }
    }
    r.image_id = path.stem().string();
    auto sidecar_path = path;
    sidecar_path.replace_extension(".json");
    if (std::filesystem::exists(sidecar_path)) {
        try {
            apply_sidecar(r, nlohmann::json::parse(detail::read_file(sidecar_path)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(sidecar_path.filename().string() + ": " + e.what(), 0);
        }
    }
    return r;
}

/// Writes `<dir>/<name>.asc` (or `.bin` + `.hdr.json`) plus the `.json` sidecar.
inline void save_raster(const RadianceRaster& r, const std::filesystem::path& dir, const std::string& name,
                        bool binary = false, const nlohmann::json& extra_sidecar = {}) {
    auto sidecar = make_sidecar(r);
    if (extra_sidecar.is_object()) sidecar.update(extra_sidecar);
    if (binary) {
        detail::write_file(dir / (name + ".bin"), write_binary_grid(r));
        detail::write_file(dir / (name + ".hdr.json"), binary_grid_header(r).dump(2) + "\n");
    } else {
        detail::write_file(dir / (name + ".asc"), write_ascii_grid(r));
    }
    detail::write_file(dir / (name + ".json"), sidecar.dump(2) + "\n");
}

/// Raster files in `dir` (.asc and .bin), sorted by file name.
inline std::vector<std::filesystem::path> list_rasters(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) throw ConfigError("raster directory not found: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".asc" || ext == ".bin")) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Sampling

/// window == 1: containing cell. window == k (odd): mean of the k x k
/// neighbourhood clipped to the grid, nodata cells ignored.
inline double sample(const RadianceRaster& r, double x, double y, int window = 1) {
    if (window < 1 || window % 2 == 0) throw DomainError("sampling window must be a positive odd integer");
    auto cell = r.locate(x, y);
    if (!cell)
        throw OutOfExtentError("point (" + detail::format_double(x) + ", " + detail::format_double(y) +
                               ") outside raster '" + r.image_id + "'");
    const auto half = static_cast<std::ptrdiff_t>(window / 2);
    const auto row0 = static_cast<std::ptrdiff_t>(cell->row), col0 = static_cast<std::ptrdiff_t>(cell->col);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::ptrdiff_t dr = -half; dr <= half; ++dr) {
        for (std::ptrdiff_t dc = -half; dc <= half; ++dc) {
            const auto rr = row0 + dr, cc = col0 + dc;
            if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(r.nrows) ||
                cc >= static_cast<std::ptrdiff_t>(r.ncols))
                continue;
            const double v = r.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
            if (r.is_nodata(v)) continue;
            sum += v;
            ++count;
        }
    }
    if (count == 0)
        throw NodataError("only nodata around (" + detail::format_double(x) + ", " + detail::format_double(y) + ")");
    return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Footprints

using Ring = std::vector<Point>;

struct Building {
    std::int64_t building_id = 0;
    std::string material;
    std::vector<Ring> rings; // outer rings and holes, combined by even-odd
};

struct FootprintSet {
    std::vector<Building> buildings;

    const Building* find(std::int64_t id) const {
        for (const auto& b : buildings)
            if (b.building_id == id) return &b;
        return nullptr;
    }
};

/// Cell -> building id; empty cells hold kNoBuilding.
struct BuildingMask {
    static constexpr std::int64_t kNoBuilding = std::numeric_limits<std::int64_t>::min();

    std::size_t ncols = 0;
    std::size_t nrows = 0;
    std::vector<std::int64_t> ids;

    std::int64_t at(std::size_t row, std::size_t col) const { return ids[row * ncols + col]; }
    bool empty_at(std::size_t row, std::size_t col) const { return at(row, col) == kNoBuilding; }
    std::size_t count() const {
        return static_cast<std::size_t>(std::count_if(ids.begin(), ids.end(), [](auto v) { return v != kNoBuilding; }));
    }
};

namespace detail {

inline Ring parse_ring(const nlohmann::json& coords) {
    Ring ring;
    for (const auto& p : coords) ring.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (ring.size() > 1 && ring.front().x == ring.back().x && ring.front().y == ring.back().y) ring.pop_back();
    return ring;
}

inline void check_ring(const Ring& ring, std::int64_t id) {
    if (ring.size() < 3)
        throw GeometryError("building " + std::to_string(id) + " has a ring with fewer than 3 vertices");
}

} // namespace detail

/// GeoJSON FeatureCollection of Polygon / MultiPolygon features with
/// properties {building_id, material}.
inline FootprintSet read_footprints_geojson(std::string_view text) {
    FootprintSet set;
    try {
        auto doc = nlohmann::json::parse(text);
        if (doc.value("type", "") != "FeatureCollection") throw ParseError("expected a GeoJSON FeatureCollection", 0);
        for (const auto& feature : doc.at("features")) {
            Building b;
            const auto& props = feature.at("properties");
            const auto& id = props.at("building_id");
            if (id.is_number_integer()) {
                b.building_id = id.get<std::int64_t>();
            } else if (id.is_string()) {
                auto v = detail::parse_int(id.get<std::string>());
                if (!v) throw ParseError("building_id must be an integer", 0);
                b.building_id = *v;
            } else {
                throw ParseError("building_id must be an integer", 0);
            }
            b.material = props.at("material").get<std::string>();
            const auto& geom = feature.at("geometry");
            const auto type = geom.at("type").get<std::string>();
            if (type == "Polygon") {
                for (const auto& ring : geom.at("coordinates")) b.rings.push_back(detail::parse_ring(ring));
            } else if (type == "MultiPolygon") {
                for (const auto& poly : geom.at("coordinates"))
                    for (const auto& ring : poly) b.rings.push_back(detail::parse_ring(ring));
            } else {
                throw ParseError("unsupported geometry type '" + type + "'", 0);
            }
            if (b.rings.empty()) throw GeometryError("building " + std::to_string(b.building_id) + " has no rings");
            for (const auto& ring : b.rings) detail::check_ring(ring, b.building_id);
            set.buildings.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("footprints: ") + e.what(), 0);
    }
    return set;
}

inline std::string footprints_geojson(const FootprintSet& set) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& b : set.buildings) {
        nlohmann::json rings = nlohmann::json::array();
        for (const auto& ring : b.rings) {
            nlohmann::json coords = nlohmann::json::array();
            for (const auto& p : ring) coords.push_back({p.x, p.y});
            if (!ring.empty()) coords.push_back({ring.front().x, ring.front().y});
            rings.push_back(coords);
        }
        features.push_back({{"type", "Feature"},
                            {"properties", {{"building_id", b.building_id}, {"material", b.material}}},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}}});
    }
    return nlohmann::json{{"type", "FeatureCollection"}, {"features", features}}.dump(1) + "\n";
}

/// Cell-centre, even-odd rasterization. Edge crossings use the half-open
/// convention (a centre on a left or bottom edge is inside, on a right or top
/// edge outside). Overlaps go to the lowest building id.
inline BuildingMask rasterize(const FootprintSet& footprints, const RadianceRaster& grid) {
    BuildingMask mask{grid.ncols, grid.nrows, std::vector<std::int64_t>(grid.size(), BuildingMask::kNoBuilding)};

    std::vector<const Building*> order;
    for (const auto& b : footprints.buildings) {
        for (const auto& ring : b.rings) detail::check_ring(ring, b.building_id);
        order.push_back(&b);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const Building* a, const Building* b) { return a->building_id < b->building_id; });

    std::vector<double> crossings;
    for (const Building* b : order) {
        double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
        for (const auto& ring : b->rings)
            for (const auto& p : ring) {
                ymin = std::min(ymin, p.y);
                ymax = std::max(ymax, p.y);
            }
        for (std::size_t row = 0; row < grid.nrows; ++row) {
            const double yc = grid.cell_center(row, 0).y;
            if (yc < ymin || yc >= ymax) continue;
            crossings.clear();
            for (const auto& ring : b->rings) {
                for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
                    const Point& a = ring[j];
                    const Point& c = ring[i];
                    if ((a.y > yc) == (c.y > yc)) continue;
                    crossings.push_back(a.x + (yc - a.y) * (c.x - a.x) / (c.y - a.y));
                }
            }
            std::sort(crossings.begin(), crossings.end());
            for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
                const double x0 = crossings[k], x1 = crossings[k + 1];
                const double first = std::floor((x0 - grid.xll) / grid.cellsize - 0.5);
                const double last = std::ceil((x1 - grid.xll) / grid.cellsize - 0.5);
                const auto c0 = static_cast<std::ptrdiff_t>(std::max(first, 0.0));
                const auto c1 = static_cast<std::ptrdiff_t>(std::min(last, static_cast<double>(grid.ncols) - 1.0));
                for (auto col = c0; col <= c1; ++col) {
                    const double xc = grid.cell_center(row, static_cast<std::size_t>(col)).x;
                    if (xc < x0 || xc >= x1) continue;
                    auto& cell = mask.ids[row * grid.ncols + static_cast<std::size_t>(col)];
                    if (cell == BuildingMask::kNoBuilding) cell = b->building_id;
                }
            }
        }
    }
    return mask;
}

} // namespace rooftherm
