// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

// rooftherm command-line driver.
//
//   rooftherm [--config run.json] [--threads N] [--seed N] [--out DIR]
//             [--some.key=value ...] <command>
//
// Exit status: 0 success, 1 input or configuration error, 2 too many pixels
// outside the Planck table.

#include <rooftherm/rooftherm.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rooftherm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;

/// Raised when the out-of-table pixel fraction exceeds the configured limit.
struct NumericLimitExceeded : Error {
    using Error::Error;
};

json default_config() {
    return {
        {"spectra_dir", "spectra"},
        {"rasters_dir", "sensor"},
        {"footprints", "footprints.geojson"},
        {"readings", "readings.csv"},
        {"calibration_session", "calibration_session.csv"},
        {"material_table", nullptr},
        {"output_dir", "out"},
        {"band", "8-9.2"},
        {"device_band", "8-14"},
        {"emissivity_bands", {"8-9.2", "8-14"}},
        {"t_ref_K", 300.0},
        {"planck", {{"t_min_K", kDefaultTableMin}, {"t_max_K", kDefaultTableMax}, {"t_step_K", kDefaultTableStep},
                    {"lambda_step_um", kDefaultLambdaStep}}},
        {"device_emissivity", kDeviceEmissivity},
        {"medium_emissivity", kWaterEmissivity},
        {"min_instrument_r_squared", 0.95},
        {"elc", {{"window", 3}, {"prune", "4/n"}, {"pervious", {"grass", "soil", "tree"}}}},
        {"max_invalid_fraction", 0.01},
        {"binary_rasters", false},
        {"threads", 1},
    };
}

/// `--a.b.c=value`: value parsed as JSON when possible, else taken as a string.
void apply_override(json& doc, const std::string& key, const std::string& value) {
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const auto part = key.substr(start, dot - start);
        if (part.empty()) throw ConfigError("bad override key '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = parsed;
            return;
        }
        if (!(*node).contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

struct Run {
    json cfg;
    fs::path base;        // relative config paths resolve here
    fs::path out;         // output directory
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;

    fs::path path(const std::string& key) const {
        if (!cfg.contains(key) || !cfg[key].is_string()) throw ConfigError("config key '" + key + "' must be a path");
        return resolve(cfg[key].get<std::string>());
    }

    fs::path path_or(const std::string& key, const fs::path& fallback) const {
        if (cfg.contains(key) && cfg[key].is_string()) return resolve(cfg[key].get<std::string>());
        return fallback;
    }

    fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : base / p; }

    template <class T>
    T get(const json& node, const std::string& key) const {
        try {
            return node.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key '" + key + "' is missing or has the wrong type");
        }
    }

    template <class T>
    T get(const std::string& key) const { return get<T>(cfg, key); }

    WavelengthBand band(const std::string& key) const {
        try {
            return WavelengthBand::parse(get<std::string>(key));
        } catch (const DomainError& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }

    PlanckTable planck_table(const WavelengthBand& b) const {
        const auto& p = cfg.at("planck");
        try {
            return build_planck_table(b, get<double>(p, "t_min_K"), get<double>(p, "t_max_K"), get<double>(p, "t_step_K"),
                                      get<double>(p, "lambda_step_um"), threads);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("planck table: ") + e.what());
        }
    }

    MaterialTable materials() const {
        if (cfg.contains("material_table") && cfg["material_table"].is_string())
            return read_material_table(detail::read_file(path("material_table")));
        return builtin_material_table();
    }

    fs::path output(const std::string& name) const { return out / name; }
};

std::string read_text(const fs::path& p) {
    try {
        return detail::read_file(p);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

/// Error text prefixed with the file it came from.
[[noreturn]] void rethrow_with_file(const fs::path& p, const Error& e) {
    throw ParseError(p.filename().string() + ": " + e.what(), 0);
}

std::map<std::string, InstrumentCalibration> load_calibrations(const Run& run) {
    const auto p = run.path_or("calibrations", run.output("calibrations.csv"));
    try {
        return read_calibrations_csv(read_text(p));
    } catch (const ParseError& e) {
        rethrow_with_file(p, e);
    }
}

std::vector<FieldReading> load_readings(const fs::path& p) {
    try {
        return read_readings_csv(read_text(p));
    } catch (const ParseError& e) {
        rethrow_with_file(p, e);
    }
}

void write_json(const fs::path& p, const json& j) { detail::write_file(p, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------

int cmd_emissivity(const Run& run) {
    const auto dir = run.path("spectra_dir");
    if (!fs::is_directory(dir)) throw ConfigError("spectra directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename().string().front() != '.') files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<WavelengthBand> bands;
    for (const auto& b : run.get<std::vector<std::string>>("emissivity_bands")) bands.push_back(WavelengthBand::parse(b));
    std::vector<SpectralCurve> curves;
    for (const auto& f : files) {
        try {
            curves.push_back(emissivity_curve(parse_spectral_curve(read_text(f), f.stem().string())));
        } catch (const ParseError& e) {
            rethrow_with_file(f, e);
        }
    }
    const auto table = material_table(curves, bands, run.get<double>("t_ref_K"));
    detail::write_file(run.output("material_table.csv"), material_table_csv(table));
    std::cout << "material_table.csv: " << table.size() << " materials x " << bands.size() << " bands\n";
    return kExitOk;
}

int cmd_calibrate(const Run& run) {
    const auto p = run.path("calibration_session");
    const auto text = read_text(p);
    const auto header = detail::CsvTable::parse(text);
    if (!header.has("control_temp_C")) throw ConfigError(p.filename().string() + ": missing control_temp_C column");
    const auto rows = load_readings(p);
    const auto device_table = run.planck_table(run.band("device_band"));
    const auto session =
        session_from_readings(rows, run.get<double>("device_emissivity"), run.get<double>("medium_emissivity"));
    const double min_r2 = run.get<double>("min_instrument_r_squared");

    const auto ids = session.instruments();
    std::vector<std::optional<InstrumentCalibration>> fits(ids.size());
    std::vector<std::string> errors(ids.size());
    detail::parallel_for(ids.size(), run.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                fits[i] = fit_instrument(session, ids[i], device_table);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        }
    });
    std::vector<InstrumentCalibration> ok;
    std::map<std::string, std::string> failed;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (fits[i]) {
            ok.push_back(*fits[i]);
            if (fits[i]->r_squared < min_r2)
                std::cerr << "warning: instrument '" << ids[i] << "' calibration R^2 = "
                          << detail::format_general(fits[i]->r_squared, 4) << " is below "
                          << detail::format_general(min_r2, 4) << "\n";
        } else {
            failed[ids[i]] = errors[i];
            std::cerr << "error: instrument '" << ids[i] << "': " << errors[i] << "\n";
        }
    }
    detail::write_file(run.output("calibrations.csv"), calibrations_csv(ok, failed));
    std::cout << "calibrations.csv: " << ok.size() << " fitted, " << failed.size() << " failed\n";
    return kExitOk;
}

std::vector<RadianceRaster> load_rasters(const fs::path& dir, const std::optional<WavelengthBand>& expected) {
    std::vector<RadianceRaster> out;
    for (const auto& f : list_rasters(dir)) {
        auto r = load_raster(f);
        if (expected && r.band && !(*r.band == *expected))
            throw ConfigError(f.filename().string() + ": band " + r.band->label() + " does not match configured band " +
                              expected->label());
        out.push_back(std::move(r));
    }
    return out;
}

int cmd_elc_fit(const Run& run) {
    const auto band = run.band("band");
    const auto device_table = run.planck_table(run.band("device_band"));
    const auto image_table = run.planck_table(band);
    const auto materials = run.materials();
    const auto cals = load_calibrations(run);
    const auto readings = load_readings(run.path("readings"));
    const auto targets = ground_targets(readings, cals, materials, run.get<double>("device_emissivity"), device_table);
    const auto rasters = load_rasters(run.path("rasters_dir"), band);
    if (rasters.empty()) throw ConfigError("no rasters in " + run.path("rasters_dir").string());

    const auto& elc = run.cfg.at("elc");
    const auto pervious_list = run.get<std::vector<std::string>>(elc, "pervious");
    const std::set<std::string> pervious(pervious_list.begin(), pervious_list.end());
    const auto pairs = prepare_pairs(targets, materials, rasters, image_table, run.get<int>(elc, "window"), pervious);
    detail::write_file(run.output("pairs.csv"), pairs_csv(pairs));

    const auto impervious = filter_impervious(pairs);
    if (impervious.size() < 3)
        throw ConfigError("ELC fit needs at least 3 impervious target pairs, found " + std::to_string(impervious.size()));
    auto fit = fit_elc(impervious);
    const auto rule = parse_prune_rule(run.get<std::string>(elc, "prune"));
    auto pruned = prune_and_refit(impervious, fit.diagnostics, rule);
    fit.model.band = band;
    pruned.fit.model.band = band;

    auto model = model_json(pruned.fit.model);
    model["r_squared_before_pruning"] = pruned.r_squared_before;
    model["r_squared_after_pruning"] = pruned.r_squared_after;
    model["prune_rule"] = prune_rule_label(rule);
    model["removed_target_ids"] = pruned.removed_ids;
    model["n_pairs"] = pairs.size();
    model["n_impervious"] = impervious.size();
    write_json(run.output("elc_model.json"), model);
    write_json(run.output("elc_diagnostics.json"),
               {{"before_pruning", diagnostics_json(impervious, fit)},
                {"after_pruning", diagnostics_json(pruned.retained, pruned.fit)},
                {"removed_target_ids", pruned.removed_ids}});

    std::cout << "ELC: ground = " << detail::format_general(pruned.fit.model.gain, 8) << " * sensor "
              << (pruned.fit.model.offset < 0 ? "- " : "+ ")
              << detail::format_general(std::abs(pruned.fit.model.offset), 8) << "\n"
              << "R^2 " << detail::format_general(pruned.r_squared_before, 4) << " -> "
              << detail::format_general(pruned.r_squared_after, 4) << " after removing " << pruned.removed_ids.size()
              << " of " << impervious.size() << " impervious pairs\n";
    return kExitOk;
}

int cmd_elc_apply(const Run& run) {
    const auto model_path = run.path_or("elc_model", run.output("elc_model.json"));
    ElcModel model;
    try {
        model = model_from_json(json::parse(read_text(model_path)));
    } catch (const json::exception& e) {
        throw ParseError(model_path.filename().string() + ": " + e.what(), 0);
    }
    const auto dir = run.path("rasters_dir");
    const auto ground_dir = run.output("ground");
    const bool binary = run.get<bool>("binary_rasters");
    json summary = json::object();
    for (const auto& f : list_rasters(dir)) {
        const auto sensor = load_raster(f);
        const auto corrected = correct_raster(sensor, model, run.threads);
        save_raster(corrected.raster, ground_dir, f.stem().string(), binary);
        summary[corrected.raster.image_id] = {{"invalid_pixels", corrected.invalid_pixels},
                                              {"pixels", corrected.raster.size()}};
    }
    write_json(run.output("elc_apply_summary.json"), {{"model", model_json(model)}, {"images", summary}});
    std::cout << "corrected " << summary.size() << " rasters into " << ground_dir.string() << "\n";
    return kExitOk;
}

int cmd_rooftemp(const Run& run) {
    const auto band = run.band("band");
    const auto table = run.planck_table(band);
    const auto materials = run.materials();
    const auto fp_path = run.path("footprints");
    FootprintSet footprints;
    try {
        footprints = read_footprints_geojson(read_text(fp_path));
    } catch (const ParseError& e) {
        rethrow_with_file(fp_path, e);
    }
    for (const auto& b : footprints.buildings)
        if (!materials.contains(b.material, band))
            throw ConfigError("building " + std::to_string(b.building_id) + ": material '" + b.material +
                              "' has no emissivity for band " + band.label());

    const auto ground_dir = run.path_or("ground_dir", run.output("ground"));
    const bool binary = run.get<bool>("binary_rasters");
    const double max_invalid = run.get<double>("max_invalid_fraction");
    std::vector<BuildingReport> reports;
    json images = json::object();
    std::vector<std::string> over_limit;
    std::optional<BuildingMask> mask;
    RadianceRaster mask_grid;
    for (const auto& f : list_rasters(ground_dir)) {
        const auto ground = load_raster(f);
        if (!mask || !mask_grid.same_grid(ground)) {
            mask = rasterize(footprints, ground);
            mask_grid = ground;
        }
        auto result = rooftop_temperatures(ground, *mask, footprints, materials, table, run.threads);
        save_raster(result.temperature, run.output("temperature"), f.stem().string(), binary, {{"units", "K"}});
        const double fraction = result.masked_pixels
                                    ? static_cast<double>(result.out_of_table_pixels) / static_cast<double>(result.masked_pixels)
                                    : 0.0;
        images[ground.image_id] = {{"masked_pixels", result.masked_pixels},
                                   {"out_of_table_pixels", result.out_of_table_pixels},
                                   {"out_of_table_fraction", fraction},
                                   {"buildings", result.reports.size()}};
        if (fraction > max_invalid) over_limit.push_back(ground.image_id);
        reports.insert(reports.end(), result.reports.begin(), result.reports.end());
    }
    detail::write_file(run.output("building_reports.csv"), building_reports_csv(reports));
    write_json(run.output("rooftemp_summary.json"),
               {{"band", band.label()},
                {"planck", run.cfg.at("planck")},
                {"max_invalid_fraction", max_invalid},
                {"images", images},
                {"note", "building means include every masked pixel, roof-edge pixels included"}});
    std::cout << "building_reports.csv: " << reports.size() << " building/image reports\n";
    if (!over_limit.empty()) {
        std::string ids;
        for (const auto& id : over_limit) ids += (ids.empty() ? "" : ", ") + id;
        throw NumericLimitExceeded("out-of-table pixel fraction exceeds " + detail::format_double(max_invalid) +
                                   " in: " + ids);
    }
    return kExitOk;
}

std::vector<BuildingReport> load_reports(const Run& run) {
    const auto p = run.path_or("building_reports", run.output("building_reports.csv"));
    try {
        return read_building_reports_csv(read_text(p));
    } catch (const ParseError& e) {
        rethrow_with_file(p, e);
    }
}

int cmd_validate(const Run& run) {
    const auto reports = load_reports(run);
    const auto device_table = run.planck_table(run.band("device_band"));
    const auto materials = run.materials();
    const auto readings = load_readings(run.path("readings"));
    const auto cals = load_calibrations(run);
    const auto field =
        roof_field_temperatures(readings, cals, materials, run.get<double>("device_emissivity"), device_table);
    const auto records = validation_records(reports, field);
    const auto stats = rmse_by_material(records);
    detail::write_file(run.output("validation.csv"), validation_csv(records));
    detail::write_file(run.output("rmse.csv"), rmse_csv(stats));
    for (const auto& [m, s] : stats)
        std::cout << m << ": n=" << s.n << " RMSE " << detail::format_general(s.rmse, 4) << " K, mean error "
                  << detail::format_general(s.mean_error, 4) << " K\n";
    if (stats.empty()) std::cout << "no roof readings matched a building report\n";
    return kExitOk;
}

int cmd_overlap(const Run& run) {
    const auto pairs = overlap_report(load_reports(run));
    detail::write_file(run.output("overlap.csv"), overlap_csv(pairs));
    std::cout << "overlap.csv: " << pairs.size() << " pairs\n";
    return kExitOk;
}

int cmd_simulate(const Run& run, const std::string& spec_arg) {
    fs::path spec_path;
    if (!spec_arg.empty()) spec_path = spec_arg;
    else if (run.cfg.contains("scene") && run.cfg["scene"].is_string()) spec_path = run.path("scene");
    else throw ConfigError("simulate needs a scene spec (argument or config key 'scene')");

    json doc;
    try {
        doc = json::parse(read_text(spec_path));
    } catch (const json::exception& e) {
        throw ConfigError(spec_path.filename().string() + ": " + e.what());
    }
    if (run.seed) doc["seed"] = *run.seed;
    const auto spec = scene_spec_from_json(doc);
    const bool binary = doc.value("binary_rasters", run.get<bool>("binary_rasters"));

    const auto device_table = run.planck_table(spec.device_band);
    const auto ds = simulate_dataset(spec, device_table, run.threads);

    for (const auto& s : ds.sensors) save_raster(s, run.output("sensor"), s.image_id, binary);
    save_raster(ds.scene.temperature, run.output("truth"), "temperature", binary, {{"units", "K"}});
    save_raster(ds.scene.emissivity, run.output("truth"), "emissivity", binary);
    for (const auto& g : ds.ground) save_raster(g, run.output("truth"), "ground_" + g.image_id, binary);
    detail::write_file(run.output("footprints.geojson"), footprints_geojson(ds.scene.footprints));
    detail::write_file(run.output("readings.csv"), readings_csv(ds.scene.readings));
    detail::write_file(run.output("calibration_session.csv"), readings_csv(ds.scene.calibration_session));
    detail::write_file(run.output("material_table.csv"), material_table_csv(spec.materials));

    json targets = json::array();
    for (const auto& t : ds.scene.targets)
        targets.push_back({{"target_id", t.target_id}, {"material", t.material}, {"temperature_K", t.temperature},
                           {"x", t.x}, {"y", t.y}});
    json buildings = json::array();
    for (const auto& b : ds.scene.footprints.buildings)
        buildings.push_back({{"building_id", b.building_id}, {"material", b.material}});
    write_json(run.output("truth/scene.json"), {{"seed", spec.atmosphere.seed},
                                                {"noise_sigma", ds.noise_sigma},
                                                {"atmosphere", {{"gain", spec.atmosphere.gain},
                                                                {"offset", spec.atmosphere.offset}}},
                                                {"targets", targets},
                                                {"buildings", buildings}});

    // A run configuration that processes this dataset in place.
    auto config = default_config();
    config["rasters_dir"] = "sensor";
    config["footprints"] = "footprints.geojson";
    config["readings"] = "readings.csv";
    config["calibration_session"] = "calibration_session.csv";
    config["material_table"] = "material_table.csv";
    config["output_dir"] = "out";
    config["band"] = spec.band.label();
    config["device_band"] = spec.device_band.label();
    config["device_emissivity"] = spec.device_emissivity;
    config["medium_emissivity"] = spec.medium_emissivity;
    config["planck"] = run.cfg.at("planck");
    config["binary_rasters"] = binary;
    config.erase("spectra_dir");
    config.erase("threads");
    write_json(run.output("config.json"), config);
    std::cout << "simulated " << ds.sensors.size() << " image(s), " << ds.scene.footprints.buildings.size()
              << " buildings, " << ds.scene.targets.size() << " targets into " << run.out.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    // Pull `--key=value` config overrides out before CLI11 sees the arguments.
    static const std::set<std::string> kGlobal = {"--config", "--threads", "--seed", "--out", "--help"};
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<char*> args = {argv[0]};
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        const auto eq = a.find('=');
        if (a.rfind("--", 0) == 0 && eq != std::string::npos && !kGlobal.count(a.substr(0, eq))) {
            overrides.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
            continue;
        }
        args.push_back(argv[i]);
    }

    CLI::App app{"rooftherm: rooftop kinetic temperatures from airborne thermal imagery"};
    app.require_subcommand(1);
    std::string config_path, out_dir, spec_arg;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "Run configuration (JSON)");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Random seed (simulate)");
    app.add_option("--out", out_dir, "Output directory");
    app.footer("Any config key may be overridden with --key=value or --section.key=value.");

    auto* emissivity = app.add_subcommand("emissivity", "Band emissivities from reflectance spectra");
    auto* calibrate = app.add_subcommand("calibrate-instruments", "Fit per-instrument normalization");
    auto* elc = app.add_subcommand("elc", "Empirical line calibration");
    elc->require_subcommand(1);
    auto* elc_fit = elc->add_subcommand("fit", "Fit the ELC model on field targets");
    auto* elc_apply = elc->add_subcommand("apply", "Correct at-sensor rasters");
    auto* rooftemp = app.add_subcommand("rooftemp", "Rooftop kinetic temperatures and building reports");
    auto* validate = app.add_subcommand("validate", "Compare building reports with roof readings");
    auto* overlap = app.add_subcommand("overlap", "Temperature differences between overlapping images");
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a scene spec");
    simulate->add_option("spec", spec_arg, "Scene spec (JSON)");

    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        Run run;
        run.cfg = default_config();
        run.base = fs::current_path();
        if (!config_path.empty()) {
            const fs::path p = config_path;
            json doc;
            try {
                doc = json::parse(read_text(p));
            } catch (const json::exception& e) {
                throw ConfigError(p.filename().string() + ": " + e.what());
            }
            if (!doc.is_object()) throw ConfigError(p.filename().string() + ": expected a JSON object");
            run.cfg.merge_patch(doc);
            run.base = fs::absolute(p).parent_path();
        }
        for (const auto& [k, v] : overrides) apply_override(run.cfg, k, v);
        run.threads = threads ? *threads : run.get<unsigned>("threads");
        if (run.threads == 0) run.threads = 1;
        run.seed = seed;
        if (!out_dir.empty()) run.out = fs::absolute(out_dir);
        else run.out = run.path("output_dir");

        if (emissivity->parsed()) return cmd_emissivity(run);
        if (calibrate->parsed()) return cmd_calibrate(run);
        if (elc_fit->parsed()) return cmd_elc_fit(run);
        if (elc_apply->parsed()) return cmd_elc_apply(run);
        if (rooftemp->parsed()) return cmd_rooftemp(run);
        if (validate->parsed()) return cmd_validate(run);
        if (overlap->parsed()) return cmd_overlap(run);
        if (simulate->parsed()) return cmd_simulate(run, spec_arg);
    } catch (const NumericLimitExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
