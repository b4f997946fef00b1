#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "winterscan/errors.hpp"

namespace winterscan {

class UnencodablePayload : public Error {
  public:
    using Error::Error;
};

class MalformedEnvelope : public Error {
  public:
    using Error::Error;
};

/// One channel of a sensor payload: an SI-unit scalar, a numeric array, or
/// an opaque binary blob.
using ChannelValue = std::variant<double, std::vector<double>, std::vector<std::uint8_t>>;

/// Timestamped sensor measurement as carried by the live store and archives.
struct SensorRecord {
    std::int64_t timestamp_ns = 0;
    std::string sensor_id;
    std::map<std::string, ChannelValue> payload;

    bool operator==(const SensorRecord&) const = default;
};

/// Sensor ids become filename fragments: alphanumerics, '-' and '.' only
/// (in particular no underscores, which delimit archive filenames).
bool valid_sensor_id(std::string_view id);

/// CBOR envelope {"t": unsigned, "id": text, "ch": map} with canonical map
/// ordering and float64 numerics, so equal records encode to equal bytes.
std::vector<std::uint8_t> encode_record(const SensorRecord& record);

/// Inverse of encode_record. Rejects truncated input, trailing bytes, and
/// envelopes missing the timestamp or sensor id.
SensorRecord decode_record(std::span<const std::uint8_t> data);

}  // namespace winterscan
