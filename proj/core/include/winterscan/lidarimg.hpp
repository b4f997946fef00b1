#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "winterscan/errors.hpp"
#include "winterscan/record.hpp"

namespace winterscan {

class ShiftOutOfRange : public Error {
  public:
    using Error::Error;
};

class MalformedImageFile : public Error {
  public:
    using Error::Error;
};

/// Raw multi-beam frame: one row per beam, one column per azimuth bin.
/// pixel_shift holds each beam's signed column offset; positive shift moves
/// that row's pixels toward lower column indices when destaggered.
struct RawLidarFrame {
    std::size_t n_beams = 0;
    std::size_t n_cols = 0;
    std::vector<double> intensities;      // row-major raw counts, n_beams * n_cols
    std::vector<std::int32_t> pixel_shift;  // one per beam, |shift| < n_cols
};

struct IntensityImage {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major, all in [0,1]

    double at(std::size_t row, std::size_t col) const { return values[row * n_cols + col]; }
};

/// Throws on inconsistent field sizes or |shift| >= n_cols.
void validate_frame(const RawLidarFrame& frame);

/// Rotates each row left by its pixel_shift with wraparound; the result
/// carries all-zero shifts. Pixel values are only moved, never changed.
RawLidarFrame destagger(const RawLidarFrame& frame);

/// Inverse of destagger: rotates each row of an aligned frame right by the
/// given shift and stamps that shift vector onto the result.
RawLidarFrame restagger(const RawLidarFrame& frame, const std::vector<std::int32_t>& shifts);

struct NormalizeResult {
    IntensityImage image;
    bool degenerate_range = false;  // all raw values equal; image is uniform 0.5
};

/// Maps the low/high percentiles (linearly interpolated over the sorted
/// values) to 0 and 1, clamping outside. Defaults 1/99 keep retroreflective
/// outliers from crushing the contrast.
NormalizeResult normalize(const RawLidarFrame& frame, double low_pct = 1.0, double high_pct = 99.0);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples),
/// value = round(v * 65535).
void write_pgm(const std::string& path, const IntensityImage& image);
IntensityImage read_pgm(const std::string& path);

/// Frame <-> record envelope bridge. Channels: "intensity" (row-major
/// array), "shape" (array [n_beams, n_cols]), "pixel_shift" (array).
RawLidarFrame frame_from_record(const SensorRecord& record);
SensorRecord frame_to_record(const RawLidarFrame& frame, std::int64_t timestamp_ns,
                             const std::string& sensor_id);

}  // namespace winterscan
