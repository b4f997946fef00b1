#include "winterscan/store.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>

namespace winterscan {

namespace fs = std::filesystem;

namespace {

std::string unique_temp_name(const std::string& stem) {
    static std::atomic<std::uint64_t> counter{0};
    static const std::uint64_t nonce = std::random_device{}();
    char buf[64];
    std::snprintf(buf, sizeof(buf), ".tmp-%016llx-%llu",
                  static_cast<unsigned long long>(nonce),
                  static_cast<unsigned long long>(counter.fetch_add(1)));
    return stem + buf;
}

std::vector<std::uint8_t> read_all_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad()) throw IoFailure("read failed on " + path.string());
    return data;
}

void write_atomic(const fs::path& dir, const std::string& filename,
                  std::span<const std::uint8_t> bytes) {
    const fs::path tmp = dir / unique_temp_name(filename);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreUnavailable("cannot create " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoFailure("write failed on " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, dir / filename, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoFailure("rename failed in " + dir.string() + ": " + ec.message());
    }
}

void require_dir(const fs::path& dir, const char* what) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw StoreUnavailable(std::string(what) + " directory missing: " + dir.string());
    }
}

}  // namespace

std::string archive_filename(std::int64_t timestamp_ns, const std::string& sensor_id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%019lld", static_cast<long long>(timestamp_ns));
    return std::string(buf) + "_" + sensor_id + ".rec";
}

std::filesystem::path write_live(const DatasetStore& store, const SensorRecord& record) {
    require_dir(store.live_dir, "live");
    const auto bytes = encode_record(record);
    const std::string name = record.sensor_id + ".rec";
    write_atomic(store.live_dir, name, bytes);
    return store.live_dir / name;
}

std::optional<SensorRecord> read_live(const DatasetStore& store, const std::string& sensor_id) {
    require_dir(store.live_dir, "live");
    const fs::path p = store.live_dir / (sensor_id + ".rec");
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    return read_record_file(p);
}

std::vector<std::filesystem::path> snapshot(const DatasetStore& store) {
    require_dir(store.live_dir, "live");
    require_dir(store.archive_dir, "archive");

    std::vector<fs::path> live_files;
    for (const auto& entry : fs::directory_iterator(store.live_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.starts_with(".")) continue;  // in-flight temp files
        if (!name.ends_with(".rec")) continue;
        live_files.push_back(entry.path());
    }

    std::vector<fs::path> archived;
    archived.reserve(live_files.size());
    for (const auto& p : live_files) {
        // The open file keeps its inode, so a concurrent rename by a writer
        // cannot tear this read.
        const auto bytes = read_all_bytes(p);
        const SensorRecord rec = decode_record(bytes);
        const std::string name = archive_filename(rec.timestamp_ns, rec.sensor_id);
        write_atomic(store.archive_dir, name, bytes);
        archived.push_back(store.archive_dir / name);
    }
    std::sort(archived.begin(), archived.end());
    return archived;
}

std::vector<ScanEntry> scan_dataset(const std::filesystem::path& archive_dir,
                                    const ScanFilter& filter) {
    require_dir(archive_dir, "archive");

    std::vector<ScanEntry> out;
    for (const auto& entry : fs::directory_iterator(archive_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() < 19 + 1 + 1 + 4 || !name.ends_with(".rec")) continue;
        if (name[19] != '_') continue;
        std::int64_t ts = 0;
        const auto [ptr, ec] = std::from_chars(name.data(), name.data() + 19, ts);
        if (ec != std::errc() || ptr != name.data() + 19) continue;
        const std::string sensor = name.substr(20, name.size() - 20 - 4);
        if (!valid_sensor_id(sensor)) continue;

        if (filter.time_range &&
            (ts < filter.time_range->first || ts > filter.time_range->second)) {
            continue;
        }
        if (!filter.sensors.empty() &&
            std::find(filter.sensors.begin(), filter.sensors.end(), sensor) ==
                filter.sensors.end()) {
            continue;
        }
        out.push_back(ScanEntry{ts, sensor, entry.path()});
    }
    std::sort(out.begin(), out.end(), [](const ScanEntry& a, const ScanEntry& b) {
        if (a.timestamp_ns != b.timestamp_ns) return a.timestamp_ns < b.timestamp_ns;
        return a.sensor_id < b.sensor_id;
    });
    return out;
}

SensorRecord read_record_file(const std::filesystem::path& path) {
    return decode_record(read_all_bytes(path));
}

void write_record_file(const std::filesystem::path& path, const SensorRecord& record) {
    const auto bytes = encode_record(record);
    write_atomic(path.parent_path(), path.filename().string(), bytes);
}

}  // namespace winterscan
