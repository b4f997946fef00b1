#include "winterscan/pointcloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace winterscan {

static_assert(std::endian::native == std::endian::little,
              "pointrec and DEM containers assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'T', 'R', '1'};
constexpr std::uint32_t kMaskIntensity = 1u << 0;
constexpr std::uint32_t kMaskBeam = 1u << 1;
constexpr std::uint32_t kMaskTime = 1u << 2;

template <typename T>
T take(const std::vector<std::uint8_t>& buf, std::size_t& pos, const std::string& path) {
    if (buf.size() - pos < sizeof(T)) {
        throw MalformedCloudFile(path + ": truncated pointrec file");
    }
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

template <typename T>
void put(std::string& out, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    out.append(raw, sizeof(T));
}

void check_channel_sizes(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (cloud.y.size() != n || cloud.z.size() != n ||
        (cloud.has_intensity() && cloud.intensity.size() != n) ||
        (cloud.has_beam() && cloud.beam.size() != n) ||
        (cloud.has_time() && cloud.t_ns.size() != n)) {
        throw MalformedCloudFile("inconsistent channel lengths in point cloud");
    }
}

PointCloud load_xyz_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path);

    std::string line;
    int line_no = 0;
    // Header: "# crs=<label> imax=<number>"
    std::string crs;
    double imax = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream hs(line);
        std::string hash, tok;
        hs >> hash;
        if (hash != "#") {
            throw MalformedCloudFile(path + ":" + std::to_string(line_no) +
                                     ": missing '# crs=... imax=...' header");
        }
        while (hs >> tok) {
            if (tok.starts_with("crs=")) {
                crs = tok.substr(4);
            } else if (tok.starts_with("imax=")) {
                imax = std::strtod(tok.c_str() + 5, nullptr);
            }
        }
        if (!(imax > 0) || !std::isfinite(imax)) {
            throw MalformedCloudFile(path + ":" + std::to_string(line_no) +
                                     ": header must declare imax > 0");
        }
        have_header = true;
        break;
    }
    if (!have_header) throw MalformedCloudFile(path + ": empty file");

    PointCloud cloud;
    cloud.crs_label = crs;
    int columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double v[6];
        int got = 0;
        while (got < 6 && ls >> v[got]) ++got;
        std::string extra;
        const bool parse_failed = ls.fail() && !ls.eof();
        if (parse_failed || (ls >> extra)) {
            throw MalformedCloudFile(path + ":" + std::to_string(line_no) + ": bad row");
        }
        if (got < 3) {
            throw MalformedCloudFile(path + ":" + std::to_string(line_no) +
                                     ": row needs at least x y z");
        }
        if (columns == 0) columns = got;
        if (got != columns) {
            throw MalformedCloudFile(path + ":" + std::to_string(line_no) +
                                     ": inconsistent column count");
        }
        for (int i = 0; i < got; ++i) {
            if (!std::isfinite(v[i])) {
                throw MalformedCloudFile(path + ":" + std::to_string(line_no) +
                                         ": non-finite value");
            }
        }
        cloud.x.push_back(v[0]);
        cloud.y.push_back(v[1]);
        cloud.z.push_back(v[2]);
        if (columns >= 4) {
            const double norm = v[3] / imax;
            if (norm < 0.0 || norm > 1.0) {
                throw MalformedCloudFile(path + ":" + std::to_string(line_no) +
                                         ": intensity outside [0, imax]");
            }
            cloud.intensity.push_back(static_cast<float>(norm));
        }
        if (columns >= 5) cloud.beam.push_back(static_cast<std::int32_t>(v[4]));
        if (columns >= 6) cloud.t_ns.push_back(static_cast<std::int64_t>(v[5]));
    }
    return cloud;
}

PointCloud load_pointrec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw MalformedCloudFile(path + ": missing PTR1 magic");
    }
    pos = 4;
    const auto crs_len = take<std::uint32_t>(buf, pos, path);
    if (buf.size() - pos < crs_len) throw MalformedCloudFile(path + ": truncated CRS label");
    std::string crs(reinterpret_cast<const char*>(buf.data() + pos), crs_len);
    pos += crs_len;
    const auto count = take<std::uint64_t>(buf, pos, path);
    const auto mask = take<std::uint32_t>(buf, pos, path);
    if (mask & ~(kMaskIntensity | kMaskBeam | kMaskTime)) {
        throw MalformedCloudFile(path + ": unknown field mask bits");
    }

    std::size_t stride = 3 * sizeof(double);
    if (mask & kMaskIntensity) stride += sizeof(float);
    if (mask & kMaskBeam) stride += sizeof(std::int32_t);
    if (mask & kMaskTime) stride += sizeof(std::int64_t);
    if ((buf.size() - pos) != count * stride) {
        throw MalformedCloudFile(path + ": point payload size mismatch");
    }

    PointCloud cloud;
    cloud.crs_label = std::move(crs);
    cloud.x.reserve(count);
    cloud.y.reserve(count);
    cloud.z.reserve(count);
    if (mask & kMaskIntensity) cloud.intensity.reserve(count);
    if (mask & kMaskBeam) cloud.beam.reserve(count);
    if (mask & kMaskTime) cloud.t_ns.reserve(count);

    for (std::uint64_t i = 0; i < count; ++i) {
        const double px = take<double>(buf, pos, path);
        const double py = take<double>(buf, pos, path);
        const double pz = take<double>(buf, pos, path);
        if (!std::isfinite(px) || !std::isfinite(py) || !std::isfinite(pz)) {
            throw MalformedCloudFile(path + ": non-finite coordinate");
        }
        cloud.x.push_back(px);
        cloud.y.push_back(py);
        cloud.z.push_back(pz);
        if (mask & kMaskIntensity) {
            const float v = take<float>(buf, pos, path);
            if (!(v >= 0.0f && v <= 1.0f)) {
                throw MalformedCloudFile(path + ": intensity outside [0, 1]");
            }
            cloud.intensity.push_back(v);
        }
        if (mask & kMaskBeam) cloud.beam.push_back(take<std::int32_t>(buf, pos, path));
        if (mask & kMaskTime) cloud.t_ns.push_back(take<std::int64_t>(buf, pos, path));
    }
    return cloud;
}

void save_xyz_ascii(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot create " + path);
    out << "# crs=" << cloud.crs_label << " imax=1\n";
    char line[256];
    const int columns = cloud.has_time() ? 6 : cloud.has_beam() ? 5 : cloud.has_intensity() ? 4 : 3;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        int n = std::snprintf(line, sizeof(line), "%.17g %.17g %.17g", cloud.x[i], cloud.y[i],
                              cloud.z[i]);
        if (columns >= 4) {
            n += std::snprintf(line + n, sizeof(line) - n, " %.9g",
                               cloud.has_intensity() ? cloud.intensity[i] : 0.0f);
        }
        if (columns >= 5) {
            n += std::snprintf(line + n, sizeof(line) - n, " %d",
                               cloud.has_beam() ? cloud.beam[i] : 0);
        }
        if (columns >= 6) {
            n += std::snprintf(line + n, sizeof(line) - n, " %lld",
                               static_cast<long long>(cloud.t_ns[i]));
        }
        line[n++] = '\n';
        out.write(line, n);
    }
    if (!out) throw IoFailure("write failed on " + path);
}

void save_pointrec(const std::string& path, const PointCloud& cloud) {
    std::string out;
    out.reserve(48 + cloud.size() * 32);
    out.append(kMagic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(cloud.crs_label.size()));
    out.append(cloud.crs_label);
    put<std::uint64_t>(out, cloud.size());
    std::uint32_t mask = 0;
    if (cloud.has_intensity()) mask |= kMaskIntensity;
    if (cloud.has_beam()) mask |= kMaskBeam;
    if (cloud.has_time()) mask |= kMaskTime;
    put<std::uint32_t>(out, mask);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        put<double>(out, cloud.x[i]);
        put<double>(out, cloud.y[i]);
        put<double>(out, cloud.z[i]);
        if (mask & kMaskIntensity) put<float>(out, cloud.intensity[i]);
        if (mask & kMaskBeam) put<std::int32_t>(out, cloud.beam[i]);
        if (mask & kMaskTime) put<std::int64_t>(out, cloud.t_ns[i]);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot create " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoFailure("write failed on " + path);
}

}  // namespace

CloudBounds cloud_bounds(const PointCloud& cloud) {
    if (cloud.empty()) throw MalformedCloudFile("empty cloud has no bounds");
    CloudBounds b;
    b.min_x = *std::min_element(cloud.x.begin(), cloud.x.end());
    b.max_x = *std::max_element(cloud.x.begin(), cloud.x.end());
    b.min_y = *std::min_element(cloud.y.begin(), cloud.y.end());
    b.max_y = *std::max_element(cloud.y.begin(), cloud.y.end());
    return b;
}

CloudFormat detect_cloud_format(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    char head[4] = {};
    in.read(head, 4);
    if (in.gcount() == 4 && std::memcmp(head, kMagic, 4) == 0) {
        return CloudFormat::PointrecBinary;
    }
    in.seekg(0);
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#' && line.find("crs=") != std::string::npos) {
            return CloudFormat::XyzAscii;
        }
        break;
    }
    throw UnknownFormat(path + ": neither pointrec binary nor xyz ascii");
}

PointCloud load_point_cloud(const std::string& path, CloudFormat format) {
    PointCloud cloud = format == CloudFormat::XyzAscii ? load_xyz_ascii(path)
                                                       : load_pointrec(path);
    check_channel_sizes(cloud);
    return cloud;
}

void save_point_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format) {
    check_channel_sizes(cloud);
    if (format == CloudFormat::XyzAscii) {
        save_xyz_ascii(path, cloud);
    } else {
        save_pointrec(path, cloud);
    }
}

}  // namespace winterscan
