#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "winterscan/errors.hpp"

namespace winterscan {

class MalformedCloudFile : public Error {
  public:
    using Error::Error;
};

class UnknownFormat : public Error {
  public:
    using Error::Error;
};

/// Georeferenced point cloud in one projected planar CRS (easting, northing,
/// elevation in meters). Optional channels are either empty or full length.
struct PointCloud {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;
    std::vector<float> intensity;    // normalized [0, 1]
    std::vector<std::int32_t> beam;
    std::vector<std::int64_t> t_ns;
    std::string crs_label;

    std::size_t size() const { return x.size(); }
    bool empty() const { return x.empty(); }
    bool has_intensity() const { return !intensity.empty(); }
    bool has_beam() const { return !beam.empty(); }
    bool has_time() const { return !t_ns.empty(); }
};

struct CloudBounds {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

/// Axis-aligned xy bounds; cloud must be non-empty.
CloudBounds cloud_bounds(const PointCloud& cloud);

enum class CloudFormat { XyzAscii, PointrecBinary };

/// Sniffs the on-disk format: "PTR1" magic or an xyz header line.
CloudFormat detect_cloud_format(const std::string& path);

/// xyz_ascii: header `# crs=<label> imax=<number>`, then whitespace-separated
/// `x y z [i [beam [t_ns]]]` rows with a consistent column count; intensity
/// is divided by the declared maximum. pointrec_binary: "PTR1" magic,
/// little-endian header (crs label, point count, field mask), packed f64
/// coordinates with optional f32 intensity / i32 beam / i64 timestamp.
PointCloud load_point_cloud(const std::string& path, CloudFormat format);

void save_point_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format);

}  // namespace winterscan
