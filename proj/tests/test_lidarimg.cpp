#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "winterscan/lidarimg.hpp"
#include "winterscan/record.hpp"

namespace ws = winterscan;

namespace {

ws::RawLidarFrame random_frame(std::size_t beams, std::size_t cols, std::uint64_t seed,
                               bool with_shifts = true) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> value(0.0, 4096.0);
    ws::RawLidarFrame frame;
    frame.n_beams = beams;
    frame.n_cols = cols;
    frame.intensities.resize(beams * cols);
    for (double& v : frame.intensities) {
        v = value(eng);
    }
    frame.pixel_shift.assign(beams, 0);
    if (with_shifts) {
        std::uniform_int_distribution<std::int32_t> shift(
            -static_cast<std::int32_t>(cols) + 1, static_cast<std::int32_t>(cols) - 1);
        for (std::int32_t& s : frame.pixel_shift) {
            s = shift(eng);
        }
    }
    return frame;
}

std::size_t euclid_mod(std::ptrdiff_t v, std::size_t n) {
    std::ptrdiff_t m = v % static_cast<std::ptrdiff_t>(n);
    if (m < 0) {
        m += static_cast<std::ptrdiff_t>(n);
    }
    return static_cast<std::size_t>(m);
}

}  // namespace

TEST_SUITE("lidarimg") {

TEST_CASE("destagger is a no-op for zero shifts") {
    const ws::RawLidarFrame frame = random_frame(16, 64, 1, false);
    const ws::RawLidarFrame out = ws::destagger(frame);
    CHECK(out.intensities == frame.intensities);
    CHECK(out.pixel_shift == std::vector<std::int32_t>(16, 0));
}

TEST_CASE("destagger rotates each row by its shift") {
    const std::size_t beams = 128;
    const std::size_t cols = 1024;
    const ws::RawLidarFrame frame = random_frame(beams, cols, 2);
    const ws::RawLidarFrame out = ws::destagger(frame);

    REQUIRE(out.intensities.size() == frame.intensities.size());
    for (std::size_t r = 0; r < beams; ++r) {
        const std::size_t base = r * cols;
        const std::ptrdiff_t s = frame.pixel_shift[r];
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t src = euclid_mod(static_cast<std::ptrdiff_t>(c) + s, cols);
            REQUIRE(out.intensities[base + c] == frame.intensities[base + src]);
        }
    }
    for (std::int32_t s : out.pixel_shift) {
        CHECK(s == 0);
    }
}

TEST_CASE("destagger and restagger are inverse bijections") {
    const ws::RawLidarFrame frame = random_frame(32, 257, 3);

    // Pixels are only moved, never changed: rows stay equal as multisets.
    const ws::RawLidarFrame aligned = ws::destagger(frame);
    for (std::size_t r = 0; r < frame.n_beams; ++r) {
        std::vector<double> a(frame.intensities.begin() + static_cast<std::ptrdiff_t>(r * 257),
                              frame.intensities.begin() + static_cast<std::ptrdiff_t>((r + 1) * 257));
        std::vector<double> b(aligned.intensities.begin() + static_cast<std::ptrdiff_t>(r * 257),
                              aligned.intensities.begin() + static_cast<std::ptrdiff_t>((r + 1) * 257));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        REQUIRE(a == b);
    }

    const ws::RawLidarFrame staggered = ws::restagger(aligned, frame.pixel_shift);
    CHECK(staggered.intensities == frame.intensities);
    CHECK(staggered.pixel_shift == frame.pixel_shift);

    const ws::RawLidarFrame realigned = ws::destagger(staggered);
    CHECK(realigned.intensities == aligned.intensities);
}

TEST_CASE("frame validation rejects inconsistent shapes and shifts") {
    ws::RawLidarFrame frame = random_frame(4, 8, 4, false);
    CHECK_NOTHROW(ws::validate_frame(frame));

    frame.pixel_shift[2] = 8;
    CHECK_THROWS_AS(ws::validate_frame(frame), ws::ShiftOutOfRange);
    frame.pixel_shift[2] = -8;
    CHECK_THROWS_AS(ws::validate_frame(frame), ws::ShiftOutOfRange);
    frame.pixel_shift[2] = 7;
    CHECK_NOTHROW(ws::validate_frame(frame));
    frame.pixel_shift[2] = -7;
    CHECK_NOTHROW(ws::validate_frame(frame));

    ws::RawLidarFrame short_shifts = random_frame(4, 8, 5, false);
    short_shifts.pixel_shift.pop_back();
    CHECK_THROWS_AS(ws::validate_frame(short_shifts), ws::Error);

    ws::RawLidarFrame ragged = random_frame(4, 8, 6, false);
    ragged.intensities.pop_back();
    CHECK_THROWS_AS(ws::validate_frame(ragged), ws::Error);

    ws::RawLidarFrame empty;
    CHECK_THROWS_AS(ws::validate_frame(empty), ws::Error);

    ws::RawLidarFrame inf = random_frame(4, 8, 7, false);
    inf.intensities[5] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ws::validate_frame(inf), ws::Error);

    // Restagger validates the shift vector it stamps.
    const ws::RawLidarFrame ok = random_frame(4, 8, 8, false);
    CHECK_THROWS_AS(ws::restagger(ok, std::vector<std::int32_t>{0, 0, 0}), ws::Error);
    CHECK_THROWS_AS(ws::restagger(ok, std::vector<std::int32_t>{0, 0, 0, 9}),
                    ws::ShiftOutOfRange);
}

TEST_CASE("normalize flags a constant frame as degenerate") {
    ws::RawLidarFrame frame = random_frame(6, 10, 9, false);
    std::fill(frame.intensities.begin(), frame.intensities.end(), 7.0);
    const ws::NormalizeResult result = ws::normalize(frame);
    CHECK(result.degenerate_range);
    for (double v : result.image.values) {
        CHECK(v == 0.5);
    }
    CHECK(result.image.n_rows == 6);
    CHECK(result.image.n_cols == 10);
}

TEST_CASE("normalize maps the percentile window onto the unit interval") {
    // 0..999 plus one hot retroreflector. With n-1 = 1000 the 1st and 99th
    // percentile ranks are whole numbers, so the window is exactly [10, 990].
    ws::RawLidarFrame frame;
    frame.n_beams = 7;
    frame.n_cols = 143;
    frame.intensities.resize(1001);
    for (std::size_t k = 0; k < 1000; ++k) {
        frame.intensities[k] = static_cast<double>(k);
    }
    frame.intensities[1000] = 1e6;
    frame.pixel_shift.assign(7, 0);

    const ws::NormalizeResult robust = ws::normalize(frame);
    CHECK_FALSE(robust.degenerate_range);
    CHECK(robust.image.values[500] == doctest::Approx((500.0 - 10.0) / 980.0).epsilon(1e-12));
    CHECK(robust.image.values[1000] == 1.0);  // outlier clamps instead of crushing
    CHECK(robust.image.values[0] == 0.0);
    CHECK(robust.image.values[10] == 0.0);
    CHECK(robust.image.values[990] == 1.0);

    std::size_t zeros = 0;
    std::size_t ones = 0;
    for (double v : robust.image.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        zeros += v == 0.0 ? 1 : 0;
        ones += v == 1.0 ? 1 : 0;
    }
    CHECK(zeros == 11);  // raw 0..10
    CHECK(ones == 11);   // raw 990..999 and the outlier

    // The full-range window lets the outlier crush the contrast.
    const ws::NormalizeResult crushed = ws::normalize(frame, 0.0, 100.0);
    CHECK(crushed.image.values[500] == doctest::Approx(500.0 / 1e6).epsilon(1e-9));
    CHECK(crushed.image.values[999] < 0.01);
}

TEST_CASE("normalize preserves value order inside the window") {
    const ws::RawLidarFrame frame = random_frame(16, 128, 10, false);
    const ws::NormalizeResult result = ws::normalize(frame);
    for (std::size_t a = 0; a < frame.intensities.size(); a += 97) {
        for (std::size_t b = 0; b < frame.intensities.size(); b += 131) {
            if (frame.intensities[a] < frame.intensities[b]) {
                CHECK(result.image.values[a] <= result.image.values[b]);
            }
        }
    }
}

TEST_CASE("normalize validates its percentiles") {
    const ws::RawLidarFrame frame = random_frame(4, 8, 11, false);
    CHECK_THROWS_AS(ws::normalize(frame, 50.0, 50.0), ws::Error);
    CHECK_THROWS_AS(ws::normalize(frame, -1.0, 99.0), ws::Error);
    CHECK_THROWS_AS(ws::normalize(frame, 1.0, 101.0), ws::Error);
    CHECK_THROWS_AS(ws::normalize(frame, 99.0, 1.0), ws::Error);
    CHECK_NOTHROW(ws::normalize(frame, 0.0, 100.0));
}

TEST_CASE("write_pgm emits the documented 16-bit big-endian layout") {
    testutil::TempDir dir("lidarimg");
    const std::string path = dir.file("one.pgm");

    ws::IntensityImage image;
    image.n_rows = 1;
    image.n_cols = 2;
    image.values = {1.0, 0.0};
    ws::write_pgm(path, image);

    const std::string bytes = testutil::read_text(path);
    REQUIRE(bytes.size() == 17);  // 13 header bytes plus two big-endian samples
    CHECK(bytes.substr(0, 13) == "P5\n2 1\n65535\n");
    CHECK(static_cast<unsigned char>(bytes[13]) == 0xff);
    CHECK(static_cast<unsigned char>(bytes[14]) == 0xff);
    CHECK(static_cast<unsigned char>(bytes[15]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[16]) == 0x00);
}

TEST_CASE("pgm round trip quantizes to half a sample step") {
    testutil::TempDir dir("lidarimg");
    const std::string path = dir.file("round.pgm");

    std::mt19937_64 eng(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ws::IntensityImage image;
    image.n_rows = 33;
    image.n_cols = 47;
    image.values.resize(33 * 47);
    for (double& v : image.values) {
        v = unit(eng);
    }

    ws::write_pgm(path, image);
    const ws::IntensityImage back = ws::read_pgm(path);
    REQUIRE(back.n_rows == 33);
    REQUIRE(back.n_cols == 47);
    REQUIRE(back.values.size() == image.values.size());
    for (std::size_t k = 0; k < image.values.size(); ++k) {
        CHECK(std::abs(back.values[k] - image.values[k]) <= 0.5 / 65535.0 + 1e-12);
    }

    // A second round trip is exact: quantized values re-quantize to
    // themselves.
    ws::write_pgm(path, back);
    const ws::IntensityImage again = ws::read_pgm(path);
    CHECK(again.values == back.values);
}

TEST_CASE("read_pgm skips comments and rejects foreign PGMs") {
    testutil::TempDir dir("lidarimg");

    const std::string commented = dir.file("commented.pgm");
    testutil::write_text(commented, std::string("P5\n# sensor dump\n1 1\n# depth\n65535\n") +
                                        std::string("\x12\x34", 2));
    const ws::IntensityImage image = ws::read_pgm(commented);
    REQUIRE(image.values.size() == 1);
    CHECK(image.values[0] == doctest::Approx(static_cast<double>(0x1234) / 65535.0).epsilon(1e-12));

    const std::string eight_bit = dir.file("eight.pgm");
    testutil::write_text(eight_bit, std::string("P5\n1 1\n255\n\x7f", 12));
    CHECK_THROWS_AS(ws::read_pgm(eight_bit), ws::MalformedImageFile);

    const std::string ascii = dir.file("ascii.pgm");
    testutil::write_text(ascii, "P2\n1 1\n65535\n1234\n");
    CHECK_THROWS_AS(ws::read_pgm(ascii), ws::MalformedImageFile);

    const std::string truncated = dir.file("trunc.pgm");
    testutil::write_text(truncated, std::string("P5\n2 2\n65535\n\x01\x02\x03", 16));
    CHECK_THROWS_AS(ws::read_pgm(truncated), ws::MalformedImageFile);

    const std::string headerless = dir.file("empty.pgm");
    testutil::write_text(headerless, "");
    CHECK_THROWS_AS(ws::read_pgm(headerless), ws::MalformedImageFile);

    const std::string zero_dim = dir.file("zero.pgm");
    testutil::write_text(zero_dim, "P5\n0 1\n65535\n");
    CHECK_THROWS_AS(ws::read_pgm(zero_dim), ws::MalformedImageFile);

    CHECK_THROWS_AS(ws::read_pgm(dir.file("absent.pgm")), ws::IoFailure);
}

TEST_CASE("write_pgm rejects out-of-range values and bad shapes") {
    testutil::TempDir dir("lidarimg");
    const std::string path = dir.file("bad.pgm");

    ws::IntensityImage image;
    image.n_rows = 1;
    image.n_cols = 1;
    image.values = {1.5};
    CHECK_THROWS_AS(ws::write_pgm(path, image), ws::Error);
    image.values = {-0.25};
    CHECK_THROWS_AS(ws::write_pgm(path, image), ws::Error);
    image.values = {std::nan("")};
    CHECK_THROWS_AS(ws::write_pgm(path, image), ws::Error);

    image.values = {0.5, 0.5};
    CHECK_THROWS_AS(ws::write_pgm(path, image), ws::Error);
    CHECK_THROWS_AS(ws::write_pgm(path, ws::IntensityImage{}), ws::Error);
}

TEST_CASE("frames survive the record envelope round trip") {
    const ws::RawLidarFrame frame = random_frame(8, 32, 13);

    const ws::SensorRecord record = ws::frame_to_record(frame, 1234567890, "ouster-os0.128");
    CHECK(record.timestamp_ns == 1234567890);
    CHECK(record.sensor_id == "ouster-os0.128");

    // Through the canonical byte envelope and back.
    const std::vector<std::uint8_t> bytes = ws::encode_record(record);
    const ws::SensorRecord decoded = ws::decode_record(bytes);
    const ws::RawLidarFrame back = ws::frame_from_record(decoded);

    CHECK(back.n_beams == frame.n_beams);
    CHECK(back.n_cols == frame.n_cols);
    CHECK(back.intensities == frame.intensities);
    CHECK(back.pixel_shift == frame.pixel_shift);
}

TEST_CASE("frame_from_record rejects malformed payloads") {
    const ws::RawLidarFrame frame = random_frame(4, 16, 14);
    const ws::SensorRecord good = ws::frame_to_record(frame, 1, "lidar");

    ws::SensorRecord missing = good;
    missing.payload.erase("pixel_shift");
    CHECK_THROWS_AS(ws::frame_from_record(missing), ws::Error);

    ws::SensorRecord scalar_shape = good;
    scalar_shape.payload["shape"] = 2.0;
    CHECK_THROWS_AS(ws::frame_from_record(scalar_shape), ws::Error);

    ws::SensorRecord bad_shape = good;
    bad_shape.payload["shape"] = std::vector<double>{4.0, 16.5};
    CHECK_THROWS_AS(ws::frame_from_record(bad_shape), ws::Error);
    bad_shape.payload["shape"] = std::vector<double>{4.0, 0.0};
    CHECK_THROWS_AS(ws::frame_from_record(bad_shape), ws::Error);
    bad_shape.payload["shape"] = std::vector<double>{4.0, 16.0, 1.0};
    CHECK_THROWS_AS(ws::frame_from_record(bad_shape), ws::Error);

    ws::SensorRecord frac_shift = good;
    frac_shift.payload["pixel_shift"] = std::vector<double>{0.0, 1.5, 0.0, 0.0};
    CHECK_THROWS_AS(ws::frame_from_record(frac_shift), ws::Error);

    // Shape/intensity disagreement surfaces through frame validation.
    ws::SensorRecord ragged = good;
    ragged.payload["shape"] = std::vector<double>{4.0, 15.0};
    CHECK_THROWS_AS(ws::frame_from_record(ragged), ws::Error);
}

}  // TEST_SUITE("lidarimg")
