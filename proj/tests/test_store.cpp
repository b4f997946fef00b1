#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "test_util.hpp"
#include "winterscan/store.hpp"

namespace ws = winterscan;
namespace fs = std::filesystem;

namespace {

ws::SensorRecord make_record(std::int64_t t, const std::string& id, double value) {
    ws::SensorRecord rec;
    rec.timestamp_ns = t;
    rec.sensor_id = id;
    rec.payload["v"] = value;
    return rec;
}

ws::DatasetStore make_store(const testutil::TempDir& dir) {
    ws::DatasetStore store{dir.path() / "live", dir.path() / "archive"};
    fs::create_directories(store.live_dir);
    fs::create_directories(store.archive_dir);
    return store;
}

std::size_t count_files(const fs::path& dir) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        (void)e;
        ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("archive filename is zero padded to 19 digits") {
    CHECK(ws::archive_filename(5, "lidar") == "0000000000000000005_lidar.rec");
    CHECK(ws::archive_filename(1700000000123456789, "gnss") == "1700000000123456789_gnss.rec");
}

TEST_CASE("live writes overwrite per sensor") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);

    ws::write_live(store, make_record(10, "lidar", 1.0));
    ws::write_live(store, make_record(20, "lidar", 2.0));
    ws::write_live(store, make_record(15, "gnss", 3.0));

    CHECK(count_files(store.live_dir) == 2);
    const auto lidar = ws::read_live(store, "lidar");
    REQUIRE(lidar.has_value());
    CHECK(lidar->timestamp_ns == 20);
    CHECK(std::get<double>(lidar->payload.at("v")) == 2.0);
    CHECK(ws::read_live(store, "gnss").has_value());
    CHECK(!ws::read_live(store, "radar").has_value());
}

TEST_CASE("missing store root is unavailable") {
    testutil::TempDir dir("store");
    ws::DatasetStore store{dir.path() / "nope" / "live", dir.path() / "nope" / "archive"};
    CHECK_THROWS_AS(ws::write_live(store, make_record(1, "imu", 0.5)), ws::StoreUnavailable);
    CHECK_THROWS_AS(ws::snapshot(store), ws::StoreUnavailable);
}

TEST_CASE("snapshot copies live records under timestamped names") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);
    ws::write_live(store, make_record(5, "lidar", 1.0));
    ws::write_live(store, make_record(7, "gnss", 2.0));

    const auto paths = ws::snapshot(store);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].filename().string() == "0000000000000000005_lidar.rec");
    CHECK(paths[1].filename().string() == "0000000000000000007_gnss.rec");
    CHECK(std::is_sorted(paths.begin(), paths.end()));
    // Live files stay in place.
    CHECK(count_files(store.live_dir) == 2);
    CHECK(ws::read_live(store, "lidar").has_value());
    // Archived payloads decode to the original records.
    CHECK(ws::read_record_file(paths[0]) == make_record(5, "lidar", 1.0));
    CHECK(ws::read_record_file(paths[1]) == make_record(7, "gnss", 2.0));
}

TEST_CASE("snapshot of an empty live area is empty") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);
    CHECK(ws::snapshot(store).empty());
}

TEST_CASE("re-snapshot of unchanged data is byte identical") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);
    ws::write_live(store, make_record(42, "lidar", 1.25));

    const auto first = ws::snapshot(store);
    REQUIRE(first.size() == 1);
    const auto bytes_before = testutil::read_text(first[0].string());
    const auto second = ws::snapshot(store);
    REQUIRE(second == first);
    CHECK(testutil::read_text(second[0].string()) == bytes_before);
    CHECK(count_files(store.archive_dir) == 1);
}

TEST_CASE("scan orders by timestamp then sensor id") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);

    ws::write_record_file(store.archive_dir / ws::archive_filename(3, "b"), make_record(3, "b", 0));
    ws::write_record_file(store.archive_dir / ws::archive_filename(3, "a"), make_record(3, "a", 0));
    ws::write_record_file(store.archive_dir / ws::archive_filename(1, "z"), make_record(1, "z", 0));

    const auto entries = ws::scan_dataset(store.archive_dir);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].timestamp_ns == 1);
    CHECK(entries[0].sensor_id == "z");
    CHECK(entries[1].sensor_id == "a");
    CHECK(entries[2].sensor_id == "b");
}

TEST_CASE("scan filters by time range and sensors") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);
    for (std::int64_t t = 1; t <= 6; ++t) {
        const std::string id = (t % 2 == 0) ? "even" : "odd";
        ws::write_record_file(store.archive_dir / ws::archive_filename(t, id),
                              make_record(t, id, 0));
    }

    ws::ScanFilter range_only;
    range_only.time_range = {{2, 4}};
    const auto ranged = ws::scan_dataset(store.archive_dir, range_only);
    REQUIRE(ranged.size() == 3);  // inclusive on both ends
    CHECK(ranged.front().timestamp_ns == 2);
    CHECK(ranged.back().timestamp_ns == 4);

    ws::ScanFilter sensor_only;
    sensor_only.sensors = {"even"};
    CHECK(ws::scan_dataset(store.archive_dir, sensor_only).size() == 3);

    ws::ScanFilter both;
    both.time_range = {{2, 4}};
    both.sensors = {"even"};
    const auto joint = ws::scan_dataset(store.archive_dir, both);
    REQUIRE(joint.size() == 2);
    CHECK(joint[0].timestamp_ns == 2);
    CHECK(joint[1].timestamp_ns == 4);
}

TEST_CASE("scan ignores files outside the naming rule") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);
    ws::write_record_file(store.archive_dir / ws::archive_filename(9, "ok"), make_record(9, "ok", 0));
    testutil::write_text((store.archive_dir / "junk.rec").string(), "not a record");
    testutil::write_text((store.archive_dir / "123_bad id.rec").string(), "seven");
    testutil::write_text((store.archive_dir / "0000000000000000009_ok.txt").string(), "x");

    const auto entries = ws::scan_dataset(store.archive_dir);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].sensor_id == "ok");
}

TEST_CASE("scan order matches an independent sort on random timestamps") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);

    std::mt19937_64 eng(4242);
    std::uniform_int_distribution<std::int64_t> ts_dist(1, 4'000'000'000'000'000'000);
    std::vector<std::pair<std::int64_t, std::string>> expected;
    const std::vector<std::string> sensors = {"a", "b", "lidar-0"};
    for (int i = 0; i < 1000; ++i) {
        const auto t = ts_dist(eng);
        const auto& id = sensors[static_cast<std::size_t>(i) % sensors.size()];
        if (std::find(expected.begin(), expected.end(), std::make_pair(t, id)) !=
            expected.end())
            continue;
        ws::write_record_file(store.archive_dir / ws::archive_filename(t, id),
                              make_record(t, id, 0));
        expected.emplace_back(t, id);
    }
    std::sort(expected.begin(), expected.end());

    const auto entries = ws::scan_dataset(store.archive_dir);
    REQUIRE(entries.size() == expected.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        CAPTURE(i);
        CHECK(entries[i].timestamp_ns == expected[i].first);
        CHECK(entries[i].sensor_id == expected[i].second);
    }
}

TEST_CASE("concurrent writers land the last record per sensor") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);

    constexpr int kWrites = 200;
    const std::vector<std::string> sensors = {"s0", "s1"};
    std::vector<std::thread> threads;
    threads.reserve(sensors.size());
    for (const auto& id : sensors) {
        threads.emplace_back([&store, id]() {
            for (int i = 1; i <= kWrites; ++i) {
                ws::write_live(store, make_record(i, id, static_cast<double>(i)));
            }
        });
    }
    for (auto& t : threads) t.join();

    CHECK(count_files(store.live_dir) == sensors.size());
    for (const auto& id : sensors) {
        const auto rec = ws::read_live(store, id);
        REQUIRE(rec.has_value());
        CHECK(rec->timestamp_ns == kWrites);
    }
}

TEST_CASE("snapshots during writes never observe torn records") {
    testutil::TempDir dir("store");
    const auto store = make_store(dir);
    ws::write_live(store, make_record(1, "cam", 0.0));

    std::atomic<bool> stop{false};
    std::thread writer([&]() {
        std::int64_t t = 2;
        while (!stop.load()) {
            ws::write_live(store, make_record(t++, "cam", 1.0));
        }
    });

    for (int i = 0; i < 50; ++i) {
        for (const auto& path : ws::snapshot(store)) {
            CHECK_NOTHROW(ws::read_record_file(path));
        }
    }
    stop.store(true);
    writer.join();
}

}  // TEST_SUITE("store")
