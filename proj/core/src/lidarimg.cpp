#include "winterscan/lidarimg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace winterscan {

namespace {

// Euclidean remainder; works for negative shifts.
std::size_t wrap(std::ptrdiff_t c, std::size_t n) {
    std::ptrdiff_t m = c % static_cast<std::ptrdiff_t>(n);
    if (m < 0) {
        m += static_cast<std::ptrdiff_t>(n);
    }
    return static_cast<std::size_t>(m);
}

double percentile(const std::vector<double>& sorted, double pct) {
    const double rank = (static_cast<double>(sorted.size()) - 1) * pct / 100.0;
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

void validate_frame(const RawLidarFrame& frame) {
    if (frame.n_beams == 0 || frame.n_cols == 0) {
        throw Error("frame must have at least one beam and one column");
    }
    if (frame.intensities.size() != frame.n_beams * frame.n_cols) {
        throw Error("frame intensity count does not match its shape");
    }
    if (frame.pixel_shift.size() != frame.n_beams) {
        throw Error("pixel_shift must hold one entry per beam");
    }
    for (std::int32_t s : frame.pixel_shift) {
        if (static_cast<std::size_t>(s < 0 ? -static_cast<std::int64_t>(s) : s) >= frame.n_cols) {
            throw ShiftOutOfRange("pixel shift " + std::to_string(s) + " out of range for " +
                                  std::to_string(frame.n_cols) + " columns");
        }
    }
    for (double v : frame.intensities) {
        if (!std::isfinite(v)) {
            throw Error("frame intensities must be finite");
        }
    }
}

RawLidarFrame destagger(const RawLidarFrame& frame) {
    validate_frame(frame);
    RawLidarFrame out;
    out.n_beams = frame.n_beams;
    out.n_cols = frame.n_cols;
    out.intensities.resize(frame.intensities.size());
    out.pixel_shift.assign(frame.n_beams, 0);
    for (std::size_t r = 0; r < frame.n_beams; ++r) {
        const std::size_t base = r * frame.n_cols;
        const std::ptrdiff_t shift = frame.pixel_shift[r];
        for (std::size_t c = 0; c < frame.n_cols; ++c) {
            out.intensities[base + c] =
                frame.intensities[base + wrap(static_cast<std::ptrdiff_t>(c) + shift, frame.n_cols)];
        }
    }
    return out;
}

RawLidarFrame restagger(const RawLidarFrame& frame, const std::vector<std::int32_t>& shifts) {
    RawLidarFrame out;
    out.n_beams = frame.n_beams;
    out.n_cols = frame.n_cols;
    out.intensities.resize(frame.intensities.size());
    out.pixel_shift = shifts;
    validate_frame(out);
    if (frame.intensities.size() != frame.n_beams * frame.n_cols) {
        throw Error("frame intensity count does not match its shape");
    }
    for (std::size_t r = 0; r < frame.n_beams; ++r) {
        const std::size_t base = r * frame.n_cols;
        const std::ptrdiff_t shift = shifts[r];
        for (std::size_t c = 0; c < frame.n_cols; ++c) {
            out.intensities[base + wrap(static_cast<std::ptrdiff_t>(c) + shift, frame.n_cols)] =
                frame.intensities[base + c];
        }
    }
    return out;
}

NormalizeResult normalize(const RawLidarFrame& frame, double low_pct, double high_pct) {
    validate_frame(frame);
    if (!(low_pct >= 0 && low_pct < high_pct && high_pct <= 100)) {
        throw Error("percentiles must satisfy 0 <= low < high <= 100");
    }

    std::vector<double> sorted = frame.intensities;
    std::sort(sorted.begin(), sorted.end());
    const double lo = percentile(sorted, low_pct);
    const double hi = percentile(sorted, high_pct);

    NormalizeResult result;
    result.image.n_rows = frame.n_beams;
    result.image.n_cols = frame.n_cols;
    result.image.values.resize(frame.intensities.size());
    if (!(hi > lo)) {
        result.degenerate_range = true;
        std::fill(result.image.values.begin(), result.image.values.end(), 0.5);
        return result;
    }
    const double scale = 1.0 / (hi - lo);
    for (std::size_t k = 0; k < frame.intensities.size(); ++k) {
        result.image.values[k] = std::clamp((frame.intensities[k] - lo) * scale, 0.0, 1.0);
    }
    return result;
}

void write_pgm(const std::string& path, const IntensityImage& image) {
    if (image.n_rows == 0 || image.n_cols == 0 ||
        image.values.size() != image.n_rows * image.n_cols) {
        throw Error("image dimensions do not match its sample count");
    }
    for (double v : image.values) {
        if (!(v >= 0 && v <= 1)) {
            throw Error("image values must lie in [0,1]");
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out << "P5\n" << image.n_cols << " " << image.n_rows << "\n65535\n";
    std::vector<std::uint8_t> row(image.n_cols * 2);
    for (std::size_t r = 0; r < image.n_rows; ++r) {
        for (std::size_t c = 0; c < image.n_cols; ++c) {
            const auto s = static_cast<std::uint16_t>(std::lround(image.at(r, c) * 65535.0));
            row[c * 2] = static_cast<std::uint8_t>(s >> 8);
            row[c * 2 + 1] = static_cast<std::uint8_t>(s & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    out.flush();
    if (!out) {
        throw IoFailure("short write to " + path);
    }
}

namespace {

// Reads one whitespace-delimited header token, skipping `#` comment lines.
std::string pgm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int ch = in.get();
    while (ch != EOF && (std::isspace(ch) != 0 || ch == '#')) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') {
                ch = in.get();
            }
        }
        ch = in.get();
    }
    while (ch != EOF && std::isspace(ch) == 0) {
        tok.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    if (tok.empty()) {
        throw MalformedImageFile(path + ": truncated PGM header");
    }
    return tok;
}

std::size_t pgm_number(std::istream& in, const std::string& path) {
    const std::string tok = pgm_token(in, path);
    std::size_t value = 0;
    for (char c : tok) {
        if (c < '0' || c > '9' || value > 100000000) {
            throw MalformedImageFile(path + ": bad PGM header field '" + tok + "'");
        }
        value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    return value;
}

}  // namespace

IntensityImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open " + path);
    }
    if (pgm_token(in, path) != "P5") {
        throw MalformedImageFile(path + ": not a binary PGM (P5) file");
    }
    IntensityImage image;
    image.n_cols = pgm_number(in, path);
    image.n_rows = pgm_number(in, path);
    const std::size_t maxval = pgm_number(in, path);
    if (image.n_cols == 0 || image.n_rows == 0) {
        throw MalformedImageFile(path + ": empty image");
    }
    if (maxval != 65535) {
        throw MalformedImageFile(path + ": expected 16-bit PGM (maxval 65535), got " +
                                 std::to_string(maxval));
    }
    // The single whitespace byte after maxval was already consumed by the
    // token reader; samples start here.
    const std::size_t count = image.n_rows * image.n_cols;
    std::vector<std::uint8_t> raw(count * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw MalformedImageFile(path + ": truncated PGM sample block");
    }
    image.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint16_t s = static_cast<std::uint16_t>((raw[k * 2] << 8) | raw[k * 2 + 1]);
        image.values[k] = static_cast<double>(s) / 65535.0;
    }
    return image;
}

RawLidarFrame frame_from_record(const SensorRecord& record) {
    auto need = [&](const char* name) -> const std::vector<double>& {
        const auto it = record.payload.find(name);
        if (it == record.payload.end()) {
            throw Error("record lacks channel '" + std::string(name) + "'");
        }
        const auto* arr = std::get_if<std::vector<double>>(&it->second);
        if (arr == nullptr) {
            throw Error("channel '" + std::string(name) + "' must be an array");
        }
        return *arr;
    };

    const std::vector<double>& shape = need("shape");
    if (shape.size() != 2 || shape[0] != std::floor(shape[0]) || shape[1] != std::floor(shape[1]) ||
        shape[0] < 1 || shape[1] < 1 || shape[0] > 1e6 || shape[1] > 1e6) {
        throw Error("channel 'shape' must hold two positive integers");
    }

    RawLidarFrame frame;
    frame.n_beams = static_cast<std::size_t>(shape[0]);
    frame.n_cols = static_cast<std::size_t>(shape[1]);
    frame.intensities = need("intensity");
    const std::vector<double>& shifts = need("pixel_shift");
    frame.pixel_shift.reserve(shifts.size());
    for (double s : shifts) {
        if (s != std::floor(s) || std::abs(s) > 2e9) {
            throw Error("channel 'pixel_shift' must hold integers");
        }
        frame.pixel_shift.push_back(static_cast<std::int32_t>(s));
    }
    validate_frame(frame);
    return frame;
}

SensorRecord frame_to_record(const RawLidarFrame& frame, std::int64_t timestamp_ns,
                             const std::string& sensor_id) {
    validate_frame(frame);
    SensorRecord record;
    record.timestamp_ns = timestamp_ns;
    record.sensor_id = sensor_id;
    record.payload["intensity"] = frame.intensities;
    record.payload["shape"] = std::vector<double>{static_cast<double>(frame.n_beams),
                                                  static_cast<double>(frame.n_cols)};
    std::vector<double> shifts(frame.pixel_shift.begin(), frame.pixel_shift.end());
    record.payload["pixel_shift"] = std::move(shifts);
    return record;
}

}  // namespace winterscan
