#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "winterscan/errors.hpp"
#include "winterscan/pointcloud.hpp"

namespace winterscan {

class EmptyCloud : public Error {
  public:
    using Error::Error;
};

class NonPositiveCell : public Error {
  public:
    using Error::Error;
};

class GridMismatch : public Error {
  public:
    using Error::Error;
};

class NonPositiveSpacing : public Error {
  public:
    using Error::Error;
};

class MalformedDemFile : public Error {
  public:
    using Error::Error;
};

/// Regular elevation raster. Row 0 is the southernmost row; origin is the
/// lower-left corner of cell (0,0). Nodata is carried as quiet NaN so that
/// any arithmetic with nodata stays nodata.
struct DemGrid {
    double origin_x = 0;
    double origin_y = 0;
    double cell_size_m = 0;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> elevations;  // row-major, n_rows * n_cols
    std::string crs_label;

    static constexpr double nodata() { return std::numeric_limits<double>::quiet_NaN(); }
    static bool is_nodata(double v) { return !std::isfinite(v); }

    double at(std::size_t row, std::size_t col) const { return elevations[row * n_cols + col]; }
    double& at(std::size_t row, std::size_t col) { return elevations[row * n_cols + col]; }
    double center_x(std::size_t col) const { return origin_x + (static_cast<double>(col) + 0.5) * cell_size_m; }
    double center_y(std::size_t row) const { return origin_y + (static_cast<double>(row) + 0.5) * cell_size_m; }

    bool same_geometry(const DemGrid& other) const {
        return origin_x == other.origin_x && origin_y == other.origin_y &&
               cell_size_m == other.cell_size_m && n_rows == other.n_rows &&
               n_cols == other.n_cols;
    }
};

/// Straight sampling line across the road.
struct Transect {
    double start_x = 0;
    double start_y = 0;
    double dir_x = 1;
    double dir_y = 0;
    double length_m = 0;
    std::string id;
};

/// Builds a transect from an unnormalized direction; throws on a zero
/// vector or non-positive length.
Transect make_transect(std::string id, double x, double y, double dx, double dy, double length_m);

/// CSV rows `id,x,y,dx,dy,length`; an optional header row, `#` comments and
/// blank lines are skipped. Directions are normalized on load.
std::vector<Transect> load_transects_csv(const std::string& path);

/// Elevation samples at uniform stations 0, s, 2s, ... along a transect.
struct SurfaceProfile {
    std::string transect_id;
    double spacing_m = 0;
    std::vector<double> elevations;  // NaN = nodata

    std::size_t size() const { return elevations.size(); }
    double station(std::size_t i) const { return static_cast<double>(i) * spacing_m; }
    double length() const { return elevations.empty() ? 0.0 : station(elevations.size() - 1); }
};

enum class Aggregator { Mean, Max, Min };

/// Grids a cloud: bounds snapped outward to cell multiples, each cell the
/// aggregate of member elevations, empty cells nodata. Output is identical
/// for any input point order and any worker count.
DemGrid rasterize(const PointCloud& cloud, double cell_size_m,
                  Aggregator aggregator = Aggregator::Mean);

/// Fills nodata cells that have at least one valid cell whose center lies
/// within max_radius_cells (Euclidean, cell units) using inverse-distance
/// weighting over the original grid. Valid cells pass through unchanged.
DemGrid fill_holes(const DemGrid& grid, int max_radius_cells);

/// Bilinear interpolation over the four surrounding cell centers. Returns
/// nodata when any center with nonzero weight is nodata or off-grid, so
/// queries exactly on a center only need that one cell.
double sample_bilinear(const DemGrid& grid, double x, double y);

/// Profile along a transect at the given spacing; floor(length/spacing)+1
/// samples via sample_bilinear.
SurfaceProfile extract_profile(const DemGrid& grid, const Transect& transect, double spacing_m);

/// Cellwise winter minus reference. Grids must share origin, cell size and
/// dimensions exactly; resampling is deliberately not offered.
DemGrid diff(const DemGrid& winter, const DemGrid& reference);

/// Sum of depth x cell area over valid cells deeper than min_depth_m.
double volume(const DemGrid& depth_grid, double min_depth_m);

/// DEM container: "DEM1" magic, little-endian header, row-major float32
/// samples with NaN as nodata.
void save_dem(const std::string& path, const DemGrid& grid);
DemGrid load_dem(const std::string& path);

/// CSV export `station_m,elevation_m`, empty elevation field for nodata.
void write_profile_csv(const std::string& path, const SurfaceProfile& profile);

}  // namespace winterscan
