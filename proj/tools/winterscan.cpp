// winterscan: offline winter road measurement pipeline.
//
// Exit codes: 0 success, 1 data error (bad file contents, mismatched grids,
// detection failures), 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "winterscan/analysis.hpp"
#include "winterscan/dem.hpp"
#include "winterscan/lidarimg.hpp"
#include "winterscan/parallel.hpp"
#include "winterscan/pointcloud.hpp"
#include "winterscan/report.hpp"
#include "winterscan/roadspec.hpp"
#include "winterscan/store.hpp"
#include "winterscan/synthgen.hpp"

namespace ws = winterscan;

namespace {

ws::PointCloud load_cloud_auto(const std::string& path) {
    return ws::load_point_cloud(path, ws::detect_cloud_format(path));
}

ws::CloudFormat format_for(const std::string& path) {
    const std::string ext = std::filesystem::path(path).extension().string();
    return ext == ".xyz" ? ws::CloudFormat::XyzAscii : ws::CloudFormat::PointrecBinary;
}

std::string mm3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct WidthRun {
    std::string winter_path;
    std::string reference_path;
    std::string design;
    std::string transects_path;
    double spacing = 0.05;
    double min_depth = 0.05;
    std::string segment = "segment";
    std::string epoch_reference = "reference";
    std::string epoch_winter = "winter";
};

// Profiles both DEMs along every transect and measures effective widths.
// Transects are independent; the loop is parallel with output order fixed
// by input order.
std::vector<ws::WidthMeasurement> run_widths(const WidthRun& run) {
    const ws::DemGrid winter = ws::load_dem(run.winter_path);
    const ws::DemGrid reference = ws::load_dem(run.reference_path);
    const ws::DesignCrossSection design = ws::parse_cross_section(run.design);
    const std::vector<ws::Transect> transects = ws::load_transects_csv(run.transects_path);

    std::vector<ws::WidthMeasurement> widths(transects.size());
    ws::parallel_for(0, transects.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const ws::SurfaceProfile pw = ws::extract_profile(winter, transects[i], run.spacing);
            const ws::SurfaceProfile pr = ws::extract_profile(reference, transects[i], run.spacing);
            widths[i] = ws::effective_width(pw, pr, design, run.min_depth);
        }
    });
    return widths;
}

void cmd_ingest_snapshot(const std::string& live, const std::string& archive) {
    const ws::DatasetStore store{live, archive};
    for (const auto& path : ws::snapshot(store)) {
        std::cout << path.string() << "\n";
    }
}

void cmd_ingest_scan(const std::string& archive, std::int64_t from, std::int64_t to,
                     const std::vector<std::string>& sensors) {
    ws::ScanFilter filter;
    if (from != std::numeric_limits<std::int64_t>::min() ||
        to != std::numeric_limits<std::int64_t>::max()) {
        filter.time_range = {from, to};
    }
    filter.sensors = sensors;
    for (const auto& entry : ws::scan_dataset(archive, filter)) {
        std::cout << entry.timestamp_ns << " " << entry.sensor_id << " " << entry.path.string()
                  << "\n";
    }
}

void cmd_dem_build(const std::string& in, double cell, const std::string& agg, int fill,
                   const std::string& out) {
    ws::Aggregator aggregator = ws::Aggregator::Mean;
    if (agg == "max") {
        aggregator = ws::Aggregator::Max;
    } else if (agg == "min") {
        aggregator = ws::Aggregator::Min;
    }
    ws::DemGrid grid = ws::rasterize(load_cloud_auto(in), cell, aggregator);
    if (fill > 0) {
        grid = ws::fill_holes(grid, fill);
    }
    ws::save_dem(out, grid);
    std::cout << out << " " << grid.n_rows << "x" << grid.n_cols << " cell " << grid.cell_size_m
              << "\n";
}

void cmd_dem_diff(const std::string& winter, const std::string& reference, const std::string& out) {
    const ws::DemGrid d = ws::diff(ws::load_dem(winter), ws::load_dem(reference));
    ws::save_dem(out, d);
    std::cout << out << " " << d.n_rows << "x" << d.n_cols << "\n";
}

void cmd_dem_profile(const std::string& dem, const std::string& transects_path, double spacing,
                     const std::string& out_dir) {
    const ws::DemGrid grid = ws::load_dem(dem);
    const auto transects = ws::load_transects_csv(transects_path);
    std::filesystem::create_directories(out_dir);
    for (const auto& t : transects) {
        const ws::SurfaceProfile profile = ws::extract_profile(grid, t, spacing);
        const std::string path = (std::filesystem::path(out_dir) / (t.id + ".csv")).string();
        ws::write_profile_csv(path, profile);
        std::cout << path << "\n";
    }
}

void cmd_width(const WidthRun& run, const std::string& out_json, const std::string& out_csv) {
    const auto widths = run_widths(run);
    const std::string json =
        ws::widths_to_json(run.segment, run.epoch_reference, run.epoch_winter, widths);
    if (out_json.empty()) {
        std::cout << json;
    } else {
        std::ofstream f(out_json, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw ws::IoFailure("cannot open " + out_json + " for writing");
        }
        f << json;
        f.flush();
        if (!f) {
            throw ws::IoFailure("short write to " + out_json);
        }
    }
    if (!out_csv.empty()) {
        ws::write_widths_csv(out_csv, widths);
    }
}

void cmd_snowbanks(const std::string& cloud_path, const std::string& centerline_path, double step,
                   double bank_height, double cell, double half_width, const std::string& out_csv) {
    const ws::PointCloud cloud = load_cloud_auto(cloud_path);
    const ws::Polyline centerline = ws::load_centerline_csv(centerline_path);
    const auto stations = ws::snowbank_width(cloud, centerline, step, bank_height, cell, half_width);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_csv.empty()) {
        file.open(out_csv, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw ws::IoFailure("cannot open " + out_csv + " for writing");
        }
        out = &file;
    }
    *out << "station_m,width_m\n";
    for (const auto& s : stations) {
        *out << mm3(s.station_m) << "," << (s.width_m ? mm3(*s.width_m) : std::string()) << "\n";
    }
    out->flush();
    if (!*out) {
        throw ws::IoFailure("short write to " + out_csv);
    }
}

void cmd_intensity(const std::string& record_path, const std::string& out_pgm, double low,
                   double high, bool raw, double threshold) {
    ws::RawLidarFrame frame = ws::frame_from_record(ws::read_record_file(record_path));
    if (!raw) {
        frame = ws::destagger(frame);
    }
    const ws::NormalizeResult norm = ws::normalize(frame, low, high);
    if (norm.degenerate_range) {
        std::cerr << "warning: constant intensity frame, output is uniform 0.5\n";
    }
    ws::write_pgm(out_pgm, norm.image);
    std::cout << out_pgm << " " << norm.image.n_rows << "x" << norm.image.n_cols << "\n";
    if (threshold > 0) {
        const ws::MarkingResult markings = ws::detect_markings(norm.image, threshold);
        std::cout << "clusters " << markings.clusters.size() << "\n";
        for (const auto& c : markings.clusters) {
            std::cout << "cluster " << c.first_col << " " << c.last_col << "\n";
        }
    }
}

void cmd_synth(const std::string& spec_path, const std::string& epoch_name,
               const std::string& out_path) {
    const ws::SyntheticRoadSpec spec = ws::load_synth_spec(spec_path);
    ws::Epoch epoch;
    try {
        epoch = ws::epoch_from_name(epoch_name);
    } catch (const ws::Error& e) {
        // Unknown epoch is a usage problem, not a data problem.
        throw CLI::ValidationError("--epoch", e.what());
    }
    const ws::SyntheticCloud synth = ws::generate_cloud(spec, epoch);
    ws::save_point_cloud(out_path, synth.cloud, format_for(out_path));
    std::cout << out_path << " " << synth.cloud.size() << " points\n";
}

struct ReportRun {
    WidthRun width;
    double min_extent = 0.2;
    int fill = 2;
    double volume_min_depth = 0.0;
    std::string markings_reference;
    std::string markings_winter;
    double marking_threshold = 0.5;
    std::string out;
};

void cmd_report(const ReportRun& run) {
    ws::InspectionReport report;
    report.segment_name = run.width.segment;
    report.reference_epoch_label = run.width.epoch_reference;
    report.winter_epoch_label = run.width.epoch_winter;
    report.widths = run_widths(run.width);

    const ws::DemGrid winter = ws::load_dem(run.width.winter_path);
    const ws::DemGrid reference = ws::load_dem(run.width.reference_path);
    ws::DemGrid depth = ws::diff(winter, reference);
    if (run.fill > 0) {
        depth = ws::fill_holes(depth, run.fill);
    }
    report.snow_volume_m3 = ws::volume(depth, run.volume_min_depth);

    if (!run.markings_reference.empty()) {
        const auto m = ws::detect_markings(ws::read_pgm(run.markings_reference),
                                           run.marking_threshold);
        report.marking_clusters.emplace_back(run.width.epoch_reference,
                                             static_cast<std::int64_t>(m.clusters.size()));
    }
    if (!run.markings_winter.empty()) {
        const auto m = ws::detect_markings(ws::read_pgm(run.markings_winter), run.marking_threshold);
        report.marking_clusters.emplace_back(run.width.epoch_winter,
                                             static_cast<std::int64_t>(m.clusters.size()));
    }

    report.parameters = {
        {"profile_spacing_m", run.width.spacing},
        {"min_depth_m", run.width.min_depth},
        {"min_extent_m", run.min_extent},
        {"dem_cell_size_m", winter.cell_size_m},
        {"fill_radius_cells", static_cast<double>(run.fill)},
        {"volume_min_depth_m", run.volume_min_depth},
        {"design_roadway_width_m", ws::parse_cross_section(run.width.design).roadway_width_m()},
    };
    if (!run.markings_reference.empty() || !run.markings_winter.empty()) {
        report.parameters.emplace_back("marking_threshold", run.marking_threshold);
    }

    if (run.out.empty()) {
        std::cout << ws::report_to_json(report);
    } else {
        ws::save_report(run.out, report);
        std::cout << run.out << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"winterscan: snow heap, drivable width and marking analysis for winter roads"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "dataset store operations");
    ingest->require_subcommand(1);
    std::string live_dir;
    std::string archive_dir;
    auto* snapshot = ingest->add_subcommand("snapshot", "archive the current live records");
    snapshot->add_option("--live", live_dir, "live record directory")->required();
    snapshot->add_option("--archive", archive_dir, "archive directory")->required();
    snapshot->callback([&] { cmd_ingest_snapshot(live_dir, archive_dir); });

    std::string scan_archive;
    std::int64_t scan_from = std::numeric_limits<std::int64_t>::min();
    std::int64_t scan_to = std::numeric_limits<std::int64_t>::max();
    std::vector<std::string> scan_sensors;
    auto* scan = ingest->add_subcommand("scan", "list archived records in time order");
    scan->add_option("--archive", scan_archive, "archive directory")->required();
    scan->add_option("--from", scan_from, "inclusive lower timestamp bound (ns)");
    scan->add_option("--to", scan_to, "inclusive upper timestamp bound (ns)");
    scan->add_option("--sensor", scan_sensors, "sensor id filter (repeatable)");
    scan->callback([&] { cmd_ingest_scan(scan_archive, scan_from, scan_to, scan_sensors); });

    // dem
    auto* dem = app.add_subcommand("dem", "elevation model operations");
    dem->require_subcommand(1);
    std::string build_in;
    std::string build_out;
    std::string build_agg = "mean";
    double build_cell = 0.1;
    int build_fill = 0;
    auto* dem_build = dem->add_subcommand("build", "rasterize a point cloud");
    dem_build->add_option("--in", build_in, "input cloud (.xyz or pointrec)")->required();
    dem_build->add_option("--cell", build_cell, "cell size in meters")->required();
    dem_build->add_option("--out", build_out, "output DEM path")->required();
    dem_build->add_option("--agg", build_agg, "cell aggregator")
        ->check(CLI::IsMember({"mean", "max", "min"}));
    dem_build->add_option("--fill", build_fill, "hole-filling radius in cells");
    dem_build->callback([&] { cmd_dem_build(build_in, build_cell, build_agg, build_fill, build_out); });

    std::string diff_winter;
    std::string diff_reference;
    std::string diff_out;
    auto* dem_diff = dem->add_subcommand("diff", "subtract two DEMs (winter - reference)");
    dem_diff->add_option("--winter", diff_winter, "winter DEM")->required();
    dem_diff->add_option("--reference", diff_reference, "reference DEM")->required();
    dem_diff->add_option("--out", diff_out, "output DEM path")->required();
    dem_diff->callback([&] { cmd_dem_diff(diff_winter, diff_reference, diff_out); });

    std::string profile_dem;
    std::string profile_transects;
    std::string profile_out_dir = ".";
    double profile_spacing = 0.05;
    auto* dem_profile = dem->add_subcommand("profile", "extract transect profiles to CSV");
    dem_profile->add_option("--dem", profile_dem, "input DEM")->required();
    dem_profile->add_option("--transects", profile_transects, "transect CSV `id,x,y,dx,dy,length`")
        ->required();
    dem_profile->add_option("--spacing", profile_spacing, "station spacing in meters");
    dem_profile->add_option("--out-dir", profile_out_dir, "output directory for per-transect CSVs");
    dem_profile->callback(
        [&] { cmd_dem_profile(profile_dem, profile_transects, profile_spacing, profile_out_dir); });

    // width
    WidthRun width_run;
    std::string width_out;
    std::string width_csv;
    auto* width = app.add_subcommand("width", "effective drivable width per transect");
    width->add_option("--winter", width_run.winter_path, "winter DEM")->required();
    width->add_option("--reference", width_run.reference_path, "reference DEM")->required();
    width->add_option("--design", width_run.design, "cross-section notation, e.g. \"(8/7.5)\"")
        ->required();
    width->add_option("--transects", width_run.transects_path, "transect CSV `id,x,y,dx,dy,length`")
        ->required();
    width->add_option("--spacing", width_run.spacing, "profile station spacing in meters");
    width->add_option("--min-depth", width_run.min_depth, "drivability depth threshold in meters");
    width->add_option("--segment", width_run.segment, "segment name for the output");
    width->add_option("--epoch-reference", width_run.epoch_reference, "reference epoch label");
    width->add_option("--epoch-winter", width_run.epoch_winter, "winter epoch label");
    width->add_option("--out", width_out, "write JSON here instead of stdout");
    width->add_option("--csv", width_csv, "also write a CSV mirror");
    width->callback([&] { cmd_width(width_run, width_out, width_csv); });

    // snowbanks
    std::string banks_cloud;
    std::string banks_centerline;
    std::string banks_out;
    double banks_step = 5.0;
    double banks_height = 0.4;
    double banks_cell = 0.1;
    double banks_half_width = 12.0;
    auto* snowbanks = app.add_subcommand("snowbanks", "width between snow-banks along a centerline");
    snowbanks->add_option("--cloud", banks_cloud, "map point cloud")->required();
    snowbanks->add_option("--centerline", banks_centerline, "centerline CSV `x,y`")->required();
    snowbanks->add_option("--step", banks_step, "station step in meters");
    snowbanks->add_option("--bank-height", banks_height, "bank rise above road level in meters");
    snowbanks->add_option("--cell", banks_cell, "across-track bin size in meters");
    snowbanks->add_option("--half-width", banks_half_width, "search half width in meters");
    snowbanks->add_option("--out", banks_out, "write CSV here instead of stdout");
    snowbanks->callback([&] {
        cmd_snowbanks(banks_cloud, banks_centerline, banks_step, banks_height, banks_cell,
                      banks_half_width, banks_out);
    });

    // intensity
    std::string int_record;
    std::string int_out;
    double int_low = 1.0;
    double int_high = 99.0;
    double int_threshold = 0.0;
    bool int_raw = false;
    auto* intensity = app.add_subcommand("intensity", "build a panoramic intensity image");
    intensity->add_option("--record", int_record, "lidar frame record (.rec)")->required();
    intensity->add_option("--out", int_out, "output 16-bit PGM path")->required();
    intensity->add_option("--low", int_low, "low normalization percentile");
    intensity->add_option("--high", int_high, "high normalization percentile");
    intensity->add_flag("--raw", int_raw, "skip destaggering");
    intensity->add_option("--threshold", int_threshold,
                          "also report marking clusters above this normalized intensity");
    intensity->callback(
        [&] { cmd_intensity(int_record, int_out, int_low, int_high, int_raw, int_threshold); });

    // synth
    std::string synth_spec;
    std::string synth_epoch = "bare";
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic road cloud");
    synth->add_option("--spec", synth_spec, "road spec file")->required();
    synth->add_option("--epoch", synth_epoch, "bare or winter");
    synth->add_option("--out", synth_out, "output cloud (.xyz or pointrec)")->required();
    synth->callback([&] { cmd_synth(synth_spec, synth_epoch, synth_out); });

    // report
    ReportRun report_run;
    auto* report = app.add_subcommand("report", "aggregate an inspection report");
    report->add_option("--winter", report_run.width.winter_path, "winter DEM")->required();
    report->add_option("--reference", report_run.width.reference_path, "reference DEM")->required();
    report->add_option("--design", report_run.width.design, "cross-section notation")->required();
    report->add_option("--transects", report_run.width.transects_path, "transect CSV")->required();
    report->add_option("--segment", report_run.width.segment, "segment name")->required();
    report->add_option("--spacing", report_run.width.spacing, "profile station spacing in meters");
    report->add_option("--min-depth", report_run.width.min_depth,
                       "drivability depth threshold in meters");
    report->add_option("--min-extent", report_run.min_extent,
                       "snow feature extent threshold in meters");
    report->add_option("--fill", report_run.fill, "depth grid hole-filling radius in cells");
    report->add_option("--volume-min-depth", report_run.volume_min_depth,
                       "depth threshold for the volume sum in meters");
    report->add_option("--epoch-reference", report_run.width.epoch_reference,
                       "reference epoch label");
    report->add_option("--epoch-winter", report_run.width.epoch_winter, "winter epoch label");
    report->add_option("--markings-reference", report_run.markings_reference,
                       "reference epoch intensity PGM for marking counts");
    report->add_option("--markings-winter", report_run.markings_winter,
                       "winter epoch intensity PGM for marking counts");
    report->add_option("--marking-threshold", report_run.marking_threshold,
                       "marking detection threshold");
    report->add_option("--out", report_run.out, "write JSON here instead of stdout");
    report->callback([&] { cmd_report(report_run); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ws::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
