#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "winterscan/dem.hpp"
#include "winterscan/errors.hpp"
#include "winterscan/lidarimg.hpp"
#include "winterscan/pointcloud.hpp"
#include "winterscan/roadspec.hpp"

namespace winterscan {

class SeedOutsideCloud : public Error {
  public:
    using Error::Error;
};

class EmptyResult : public Error {
  public:
    using Error::Error;
};

class ProfileMismatch : public Error {
  public:
    using Error::Error;
};

class TransectTooShort : public Error {
  public:
    using Error::Error;
};

class EdgesNotFound : public Error {
  public:
    using Error::Error;
};

class EmptyCorridor : public Error {
  public:
    using Error::Error;
};

/// One over-threshold snow run on a profile.
struct SnowFeature {
    double start_station_m = 0;
    double end_station_m = 0;  // > start; degenerate single-station runs are dropped
    double max_depth_m = 0;
    double area_m2 = 0;  // trapezoid integral of depth over the span
};

struct WidthMeasurement {
    std::string transect_id;
    double effective_width_m = 0;
    double design_roadway_width_m = 0;
    double deficit_m = 0;  // design - effective, signed
    double clear_span_start_m = 0;
    double clear_span_end_m = 0;
    bool fully_blocked = false;
};

struct SegmentParams {
    double cell_m = 0.25;
    double max_step_m = 0.05;
    double max_slope = 0.15;  // rise over run between cell centers
    std::optional<std::pair<double, double>> intensity_band;
};

struct SegmentationResult {
    std::vector<std::size_t> member_indices;  // ascending
    double seed_x = 0;
    double seed_y = 0;
    double seed_z = 0;
    SegmentParams params;
};

/// Region growing over a square grid anchored at the seed (the seed sits at
/// the center of cell (0,0), which keeps results invariant under rigid
/// translation of cloud and seed together). A neighbor cell (8-connected)
/// joins when its median z is within max_step_m of the current cell, the
/// median slope between cell centers is at most max_slope and, if a band is
/// given, its median intensity lies inside the band.
SegmentationResult segment_road(const PointCloud& cloud, double seed_x, double seed_y, double seed_z,
                                const SegmentParams& params);

/// Contiguous runs of (profile - reference) > min_depth_m spanning at least
/// min_extent_m. Nodata on either profile breaks a run. Ordered by start.
std::vector<SnowFeature> detect_snow_features(const SurfaceProfile& profile,
                                              const SurfaceProfile& reference, double min_depth_m,
                                              double min_extent_m);

/// Longest run of stations inside [0, design roadway width] whose depth is
/// at most min_depth_m. Nodata stations block. Ties go to the leftmost run.
WidthMeasurement effective_width(const SurfaceProfile& profile, const SurfaceProfile& reference,
                                 const DesignCrossSection& design, double min_depth_m);

/// Walks outward from the profile center and returns the first station on
/// each side whose elevation falls drop_m below the roadway level (median
/// of the central third). Nodata stations are skipped while walking.
std::pair<double, double> detect_profile_edges(const SurfaceProfile& profile, double drop_m);

struct PolylinePoint {
    double x = 0;
    double y = 0;
};
using Polyline = std::vector<PolylinePoint>;

/// CSV rows `x,y`; an optional header row, `#` comments and blank lines are
/// skipped. At least two vertices required.
Polyline load_centerline_csv(const std::string& path);

struct BankStation {
    double station_m = 0;
    std::optional<double> width_m;  // empty when either side lacks a bank
};

/// At each station along the centerline, bins a perpendicular strip of the
/// map cloud by across-track offset, takes the median elevation per bin and
/// finds the innermost bin on each side rising bank_height_m above the
/// central road level. Width is the distance between those rises.
std::vector<BankStation> snowbank_width(const PointCloud& map_cloud, const Polyline& centerline,
                                        double station_step_m, double bank_height_m,
                                        double cell_m = 0.1, double half_width_m = 12.0);

struct ColumnCluster {
    std::size_t first_col = 0;
    std::size_t last_col = 0;  // inclusive
    std::size_t width() const { return last_col - first_col + 1; }
};

struct MarkingResult {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::uint8_t> mask;  // row-major, 1 where value > threshold
    std::vector<ColumnCluster> clusters;
};

/// Thresholds the image and reports maximal runs of columns whose
/// above-threshold count exceeds half the column height.
MarkingResult detect_markings(const IntensityImage& image, double threshold);

}  // namespace winterscan
