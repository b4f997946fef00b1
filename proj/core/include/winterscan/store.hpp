#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "winterscan/errors.hpp"
#include "winterscan/record.hpp"

namespace winterscan {

class StoreUnavailable : public Error {
  public:
    using Error::Error;
};

/// Two-directory dataset layout: a live area holding the latest record per
/// sensor (overwritten in place) and an immutable archive of timestamped
/// copies named so that lexicographic order equals timestamp order.
struct DatasetStore {
    std::filesystem::path live_dir;
    std::filesystem::path archive_dir;
};

/// Archive filename for a record: 19-digit zero-padded nanosecond timestamp,
/// '_', sensor id, ".rec". Zero padding keeps lexicographic order numeric
/// through year 2262.
std::string archive_filename(std::int64_t timestamp_ns, const std::string& sensor_id);

/// Replaces the live record for record.sensor_id. Write-to-temp-then-rename,
/// so concurrent readers and snapshots never observe a partial file.
std::filesystem::path write_live(const DatasetStore& store, const SensorRecord& record);

/// Latest live record for a sensor, or nullopt if none exists.
std::optional<SensorRecord> read_live(const DatasetStore& store, const std::string& sensor_id);

/// Copies every live record into the archive under its timestamped name.
/// Live files stay untouched; re-running on unchanged data overwrites the
/// same archive names with identical bytes. Returns the archived paths in
/// filename order.
std::vector<std::filesystem::path> snapshot(const DatasetStore& store);

struct ScanEntry {
    std::int64_t timestamp_ns = 0;
    std::string sensor_id;
    std::filesystem::path path;
};

struct ScanFilter {
    std::optional<std::pair<std::int64_t, std::int64_t>> time_range;  // inclusive [t0, t1]
    std::vector<std::string> sensors;                                 // empty = all
};

/// Lists archive records ordered by (timestamp, sensor id). Filters apply
/// conjunctively. Files not matching the archive naming rule are ignored.
std::vector<ScanEntry> scan_dataset(const std::filesystem::path& archive_dir,
                                    const ScanFilter& filter = {});

/// Reads and decodes one record file.
SensorRecord read_record_file(const std::filesystem::path& path);

/// Encodes and writes one record file via temp-and-rename.
void write_record_file(const std::filesystem::path& path, const SensorRecord& record);

}  // namespace winterscan
