#include "winterscan/dem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>

#include "winterscan/parallel.hpp"

namespace winterscan {

namespace {

static_assert(sizeof(float) == 4 && sizeof(double) == 8, "IEEE-754 layout expected");

constexpr std::size_t kMaxCells = std::size_t{1} << 28;

void append_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) { append_bytes(out, &v, 4); }
void append_f64(std::vector<std::uint8_t>& out, double v) { append_bytes(out, &v, 8); }

class ByteCursor {
  public:
    ByteCursor(const std::uint8_t* data, std::size_t size, const std::string& path)
        : data_(data), size_(size), path_(path) {}

    void take(void* dst, std::size_t n) {
        if (size_ - pos_ < n) {
            throw MalformedDemFile(path_ + ": truncated DEM file");
        }
        std::memcpy(dst, data_ + pos_, n);
        pos_ += n;
    }

    std::uint32_t u32() {
        std::uint32_t v;
        take(&v, 4);
        return v;
    }

    double f64() {
        double v;
        take(&v, 8);
        return v;
    }

    std::size_t remaining() const { return size_ - pos_; }

  private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::string path_;
};

}  // namespace

Transect make_transect(std::string id, double x, double y, double dx, double dy,
                       double length_m) {
    const double norm = std::hypot(dx, dy);
    if (!std::isfinite(norm) || norm <= 0 || !std::isfinite(x) || !std::isfinite(y)) {
        throw Error("transect " + id + ": direction must be a finite nonzero vector");
    }
    if (!std::isfinite(length_m) || length_m <= 0) {
        throw Error("transect " + id + ": length must be positive");
    }
    Transect t;
    t.id = std::move(id);
    t.start_x = x;
    t.start_y = y;
    t.dir_x = dx / norm;
    t.dir_y = dy / norm;
    t.length_m = length_m;
    return t;
}

std::vector<Transect> load_transects_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open " + path);
    }
    std::vector<Transect> transects;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }

        const std::string at = path + ":" + std::to_string(line_no);
        if (std::count(line.begin(), line.end(), ',') != 5) {
            throw Error(at + ": expected 6 fields `id,x,y,dx,dy,length`");
        }
        std::array<std::string, 6> fields;
        std::size_t pos = 0;
        for (std::size_t k = 0; k < 6; ++k) {
            const std::size_t comma = line.find(',', pos);
            fields[k] = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            const auto lo = fields[k].find_first_not_of(" \t");
            const auto hi = fields[k].find_last_not_of(" \t");
            fields[k] = lo == std::string::npos ? "" : fields[k].substr(lo, hi - lo + 1);
            pos = comma + 1;
        }

        double nums[5];
        bool numeric = true;
        for (int k = 0; k < 5; ++k) {
            const std::string& f = fields[k + 1];
            char* end = nullptr;
            nums[k] = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0') {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (transects.empty() && line_no <= 2) {
                continue;  // header row
            }
            throw Error(at + ": non-numeric coordinate field");
        }
        try {
            transects.push_back(
                make_transect(fields[0], nums[0], nums[1], nums[2], nums[3], nums[4]));
        } catch (const Error& e) {
            throw Error(at + ": " + e.what());
        }
    }
    if (transects.empty()) {
        throw Error(path + ": no transects found");
    }
    return transects;
}

DemGrid rasterize(const PointCloud& cloud, double cell_size_m, Aggregator aggregator) {
    if (cloud.empty()) {
        throw EmptyCloud("cannot rasterize an empty cloud");
    }
    if (!std::isfinite(cell_size_m) || cell_size_m <= 0) {
        throw NonPositiveCell("cell size must be positive");
    }

    const CloudBounds b = cloud_bounds(cloud);
    const double inv = 1.0 / cell_size_m;

    DemGrid grid;
    grid.cell_size_m = cell_size_m;
    grid.crs_label = cloud.crs_label;
    grid.origin_x = std::floor(b.min_x * inv) * cell_size_m;
    grid.origin_y = std::floor(b.min_y * inv) * cell_size_m;
    const double top_x = std::ceil(b.max_x * inv) * cell_size_m;
    const double top_y = std::ceil(b.max_y * inv) * cell_size_m;
    grid.n_cols = static_cast<std::size_t>(std::max<long long>(1, std::llround((top_x - grid.origin_x) * inv)));
    grid.n_rows = static_cast<std::size_t>(std::max<long long>(1, std::llround((top_y - grid.origin_y) * inv)));
    if (grid.n_rows > kMaxCells / grid.n_cols) {
        throw Error("raster would exceed the cell budget; use a larger cell size");
    }
    const std::size_t cells = grid.n_rows * grid.n_cols;

    // Bucket points by cell with a counting sort so that each cell can be
    // aggregated from a sorted value list. Sorting before summation makes
    // the result independent of input point order.
    const std::size_t n = cloud.size();
    std::vector<std::size_t> cell_of(n);
    std::vector<std::size_t> counts(cells, 0);
    for (std::size_t k = 0; k < n; ++k) {
        long long j = static_cast<long long>(std::floor((cloud.x[k] - grid.origin_x) * inv));
        long long i = static_cast<long long>(std::floor((cloud.y[k] - grid.origin_y) * inv));
        j = std::clamp<long long>(j, 0, static_cast<long long>(grid.n_cols) - 1);
        i = std::clamp<long long>(i, 0, static_cast<long long>(grid.n_rows) - 1);
        const std::size_t c = static_cast<std::size_t>(i) * grid.n_cols + static_cast<std::size_t>(j);
        cell_of[k] = c;
        ++counts[c];
    }
    std::vector<std::size_t> offsets(cells + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), offsets.begin() + 1);
    std::vector<double> bucket(n);
    {
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        for (std::size_t k = 0; k < n; ++k) {
            bucket[cursor[cell_of[k]]++] = cloud.z[k];
        }
    }

    grid.elevations.assign(cells, DemGrid::nodata());
    parallel_for(0, cells, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            const std::size_t first = offsets[c];
            const std::size_t last = offsets[c + 1];
            if (first == last) {
                continue;
            }
            std::sort(bucket.begin() + static_cast<std::ptrdiff_t>(first),
                      bucket.begin() + static_cast<std::ptrdiff_t>(last));
            switch (aggregator) {
                case Aggregator::Min:
                    grid.elevations[c] = bucket[first];
                    break;
                case Aggregator::Max:
                    grid.elevations[c] = bucket[last - 1];
                    break;
                case Aggregator::Mean: {
                    double sum = 0;
                    for (std::size_t k = first; k < last; ++k) {
                        sum += bucket[k];
                    }
                    grid.elevations[c] = sum / static_cast<double>(last - first);
                    break;
                }
            }
        }
    });
    return grid;
}

DemGrid fill_holes(const DemGrid& grid, int max_radius_cells) {
    if (max_radius_cells < 0) {
        throw Error("fill radius must be non-negative");
    }
    DemGrid out = grid;
    if (max_radius_cells == 0 || grid.n_rows == 0 || grid.n_cols == 0) {
        return out;
    }

    // Neighbourhood offsets in a fixed row-major order so the weighted sum
    // is accumulated identically on every run.
    struct Offset {
        int di;
        int dj;
        double weight;
    };
    std::vector<Offset> ring;
    const long long r2 = static_cast<long long>(max_radius_cells) * max_radius_cells;
    for (int di = -max_radius_cells; di <= max_radius_cells; ++di) {
        for (int dj = -max_radius_cells; dj <= max_radius_cells; ++dj) {
            if (di == 0 && dj == 0) {
                continue;
            }
            const long long d2 = static_cast<long long>(di) * di + static_cast<long long>(dj) * dj;
            if (d2 > r2) {
                continue;
            }
            ring.push_back({di, dj, 1.0 / std::sqrt(static_cast<double>(d2))});
        }
    }

    const long long rows = static_cast<long long>(grid.n_rows);
    const long long cols = static_cast<long long>(grid.n_cols);
    parallel_for(0, grid.n_rows, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = 0; j < grid.n_cols; ++j) {
                if (!DemGrid::is_nodata(grid.at(i, j))) {
                    continue;
                }
                double wsum = 0;
                double vsum = 0;
                for (const Offset& o : ring) {
                    const long long ni = static_cast<long long>(i) + o.di;
                    const long long nj = static_cast<long long>(j) + o.dj;
                    if (ni < 0 || nj < 0 || ni >= rows || nj >= cols) {
                        continue;
                    }
                    const double v = grid.at(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj));
                    if (DemGrid::is_nodata(v)) {
                        continue;
                    }
                    wsum += o.weight;
                    vsum += o.weight * v;
                }
                if (wsum > 0) {
                    out.at(i, j) = vsum / wsum;
                }
            }
        }
    });
    return out;
}

double sample_bilinear(const DemGrid& grid, double x, double y) {
    if (grid.n_rows == 0 || grid.n_cols == 0 || grid.cell_size_m <= 0) {
        return DemGrid::nodata();
    }
    const double gx = (x - grid.origin_x) / grid.cell_size_m - 0.5;
    const double gy = (y - grid.origin_y) / grid.cell_size_m - 0.5;
    if (!std::isfinite(gx) || !std::isfinite(gy) || std::abs(gx) > 1e15 || std::abs(gy) > 1e15) {
        return DemGrid::nodata();
    }
    const double fj = std::floor(gx);
    const double fi = std::floor(gy);
    const double tx = gx - fj;
    const double ty = gy - fi;
    const long long i0 = static_cast<long long>(fi);
    const long long j0 = static_cast<long long>(fj);

    const double weights[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    const long long rows_idx[4] = {i0, i0, i0 + 1, i0 + 1};
    const long long cols_idx[4] = {j0, j0 + 1, j0, j0 + 1};

    // Corners with an exactly zero weight are ignored, so a query on a cell
    // center depends on that cell alone even at the grid border.
    double acc = 0;
    for (int k = 0; k < 4; ++k) {
        if (weights[k] == 0) {
            continue;
        }
        if (rows_idx[k] < 0 || cols_idx[k] < 0 || rows_idx[k] >= static_cast<long long>(grid.n_rows) ||
            cols_idx[k] >= static_cast<long long>(grid.n_cols)) {
            return DemGrid::nodata();
        }
        const double v = grid.at(static_cast<std::size_t>(rows_idx[k]), static_cast<std::size_t>(cols_idx[k]));
        if (DemGrid::is_nodata(v)) {
            return DemGrid::nodata();
        }
        acc += weights[k] * v;
    }
    return acc;
}

SurfaceProfile extract_profile(const DemGrid& grid, const Transect& transect, double spacing_m) {
    if (!std::isfinite(spacing_m) || spacing_m <= 0) {
        throw NonPositiveSpacing("profile spacing must be positive");
    }
    if (!std::isfinite(transect.length_m) || transect.length_m < 0) {
        throw Error("transect " + transect.id + ": length must be non-negative");
    }
    const double norm = std::hypot(transect.dir_x, transect.dir_y);
    if (!std::isfinite(norm) || norm <= 0) {
        throw Error("transect " + transect.id + ": direction must be a finite nonzero vector");
    }
    const double ux = transect.dir_x / norm;
    const double uy = transect.dir_y / norm;

    // A hair of slack absorbs quotients like 0.15/0.05 landing just below
    // the integer so the final station is not dropped.
    const std::size_t count =
        static_cast<std::size_t>(std::floor(transect.length_m / spacing_m + 1e-9)) + 1;

    SurfaceProfile profile;
    profile.transect_id = transect.id;
    profile.spacing_m = spacing_m;
    profile.elevations.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = static_cast<double>(i) * spacing_m;
        profile.elevations[i] = sample_bilinear(grid, transect.start_x + s * ux, transect.start_y + s * uy);
    }
    return profile;
}

DemGrid diff(const DemGrid& winter, const DemGrid& reference) {
    if (!winter.same_geometry(reference)) {
        char detail[160];
        std::snprintf(detail, sizeof(detail),
                      "grid mismatch: %zux%zu cell %g origin (%g, %g) vs %zux%zu cell %g origin (%g, %g)",
                      winter.n_rows, winter.n_cols, winter.cell_size_m, winter.origin_x, winter.origin_y,
                      reference.n_rows, reference.n_cols, reference.cell_size_m, reference.origin_x,
                      reference.origin_y);
        throw GridMismatch(detail);
    }
    if (!winter.crs_label.empty() && !reference.crs_label.empty() &&
        winter.crs_label != reference.crs_label) {
        throw GridMismatch("grid mismatch: CRS '" + winter.crs_label + "' vs '" +
                           reference.crs_label + "'");
    }
    DemGrid out = winter;
    out.crs_label = winter.crs_label.empty() ? reference.crs_label : winter.crs_label;
    for (std::size_t k = 0; k < out.elevations.size(); ++k) {
        out.elevations[k] = winter.elevations[k] - reference.elevations[k];
    }
    return out;
}

double volume(const DemGrid& depth_grid, double min_depth_m) {
    if (depth_grid.cell_size_m <= 0) {
        throw NonPositiveCell("cell size must be positive");
    }
    if (!(min_depth_m >= 0)) {
        throw Error("volume threshold must be non-negative");
    }
    const double area = depth_grid.cell_size_m * depth_grid.cell_size_m;
    double total = 0;
    for (double v : depth_grid.elevations) {
        if (v > min_depth_m) {  // NaN compares false, so nodata never contributes
            total += v * area;
        }
    }
    return total;
}

void save_dem(const std::string& path, const DemGrid& grid) {
    if (grid.elevations.size() != grid.n_rows * grid.n_cols) {
        throw Error("DEM sample count does not match its dimensions");
    }
    std::vector<std::uint8_t> buf;
    buf.reserve(40 + grid.crs_label.size() + grid.elevations.size() * 4);
    append_bytes(buf, "DEM1", 4);
    append_f64(buf, grid.origin_x);
    append_f64(buf, grid.origin_y);
    append_f64(buf, grid.cell_size_m);
    append_u32(buf, static_cast<std::uint32_t>(grid.n_rows));
    append_u32(buf, static_cast<std::uint32_t>(grid.n_cols));
    append_u32(buf, static_cast<std::uint32_t>(grid.crs_label.size()));
    append_bytes(buf, grid.crs_label.data(), grid.crs_label.size());
    for (double v : grid.elevations) {
        const float f = DemGrid::is_nodata(v) ? std::numeric_limits<float>::quiet_NaN()
                                              : static_cast<float>(v);
        append_bytes(buf, &f, 4);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) {
        throw IoFailure("short write to " + path);
    }
}

DemGrid load_dem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open " + path);
    }
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoFailure("read error on " + path);
    }

    ByteCursor cur(buf.data(), buf.size(), path);
    char magic[4];
    cur.take(magic, 4);
    if (std::memcmp(magic, "DEM1", 4) != 0) {
        throw MalformedDemFile(path + ": not a DEM1 file");
    }
    DemGrid grid;
    grid.origin_x = cur.f64();
    grid.origin_y = cur.f64();
    grid.cell_size_m = cur.f64();
    if (!std::isfinite(grid.cell_size_m) || grid.cell_size_m <= 0 ||
        !std::isfinite(grid.origin_x) || !std::isfinite(grid.origin_y)) {
        throw MalformedDemFile(path + ": invalid grid geometry");
    }
    grid.n_rows = cur.u32();
    grid.n_cols = cur.u32();
    const std::uint32_t crs_len = cur.u32();
    if (crs_len > cur.remaining()) {
        throw MalformedDemFile(path + ": truncated DEM file");
    }
    grid.crs_label.resize(crs_len);
    if (crs_len > 0) {
        cur.take(grid.crs_label.data(), crs_len);
    }
    if (grid.n_rows == 0 || grid.n_cols == 0 ||
        grid.n_rows > kMaxCells / std::max<std::size_t>(1, grid.n_cols)) {
        throw MalformedDemFile(path + ": implausible grid dimensions");
    }
    const std::size_t cells = grid.n_rows * grid.n_cols;
    if (cur.remaining() != cells * 4) {
        throw MalformedDemFile(path + ": sample block size does not match dimensions");
    }
    grid.elevations.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        float f;
        cur.take(&f, 4);
        grid.elevations[k] = std::isfinite(f) ? static_cast<double>(f) : DemGrid::nodata();
    }
    return grid;
}

void write_profile_csv(const std::string& path, const SurfaceProfile& profile) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out << "station_m,elevation_m\n";
    char line[96];
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double v = profile.elevations[i];
        if (DemGrid::is_nodata(v)) {
            std::snprintf(line, sizeof(line), "%.3f,\n", profile.station(i));
        } else {
            std::snprintf(line, sizeof(line), "%.3f,%.3f\n", profile.station(i), v);
        }
        out << line;
    }
    out.flush();
    if (!out) {
        throw IoFailure("short write to " + path);
    }
}

}  // namespace winterscan
