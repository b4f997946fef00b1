#include "winterscan/record.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "winterscan/cbor.hpp"

namespace winterscan {

bool valid_sensor_id(std::string_view id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.';
    });
}

namespace {

void check_encodable(const SensorRecord& record) {
    if (record.timestamp_ns <= 0) {
        throw UnencodablePayload("record timestamp must be positive");
    }
    if (!valid_sensor_id(record.sensor_id)) {
        throw UnencodablePayload("invalid sensor id \"" + record.sensor_id + "\"");
    }
    for (const auto& [name, value] : record.payload) {
        if (name.empty()) throw UnencodablePayload("empty channel name");
        if (const double* s = std::get_if<double>(&value)) {
            if (!std::isfinite(*s)) {
                throw UnencodablePayload("non-finite scalar in channel " + name);
            }
        } else if (const auto* a = std::get_if<std::vector<double>>(&value)) {
            for (double v : *a) {
                if (!std::isfinite(v)) {
                    throw UnencodablePayload("non-finite array element in channel " + name);
                }
            }
        }
    }
}

void encode_channel(cbor::Writer& w, const ChannelValue& value) {
    if (const double* s = std::get_if<double>(&value)) {
        w.float64(*s);
    } else if (const auto* a = std::get_if<std::vector<double>>(&value)) {
        w.array_header(a->size());
        for (double v : *a) w.float64(v);
    } else {
        w.bytes(std::get<std::vector<std::uint8_t>>(value));
    }
}

}  // namespace

std::vector<std::uint8_t> encode_record(const SensorRecord& record) {
    check_encodable(record);

    // Canonical order of the encoded keys "t", "ch", "id": shorter first,
    // then bytewise.
    cbor::Writer w;
    w.map_header(3);
    w.text("t");
    w.unsigned_int(static_cast<std::uint64_t>(record.timestamp_ns));
    w.text("ch");
    w.map_header(record.payload.size());
    std::vector<std::pair<std::vector<std::uint8_t>, const ChannelValue*>> entries;
    entries.reserve(record.payload.size());
    for (const auto& [name, value] : record.payload) {
        entries.emplace_back(cbor::encode_text_key(name), &value);
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, value] : entries) {
        w.raw(key);
        encode_channel(w, *value);
    }
    w.text("id");
    w.text(record.sensor_id);
    return w.take();
}

SensorRecord decode_record(std::span<const std::uint8_t> data) {
    try {
        cbor::Reader r(data);
        const std::uint64_t n = r.read_map_header();
        if (n != 3) throw MalformedEnvelope("envelope must be a 3-entry map");
        SensorRecord rec;
        bool has_t = false, has_id = false, has_ch = false;
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::string key = r.read_text();
            if (key == "t") {
                if (has_t) throw MalformedEnvelope("duplicate timestamp entry");
                const std::uint64_t t = r.read_unsigned();
                if (t == 0 || t > static_cast<std::uint64_t>(
                                      std::numeric_limits<std::int64_t>::max())) {
                    throw MalformedEnvelope("timestamp out of range");
                }
                rec.timestamp_ns = static_cast<std::int64_t>(t);
                has_t = true;
            } else if (key == "id") {
                if (has_id) throw MalformedEnvelope("duplicate sensor id entry");
                rec.sensor_id = r.read_text();
                if (!valid_sensor_id(rec.sensor_id)) {
                    throw MalformedEnvelope("invalid sensor id \"" + rec.sensor_id + "\"");
                }
                has_id = true;
            } else if (key == "ch") {
                if (has_ch) throw MalformedEnvelope("duplicate channel map");
                const std::uint64_t m = r.read_map_header();
                for (std::uint64_t j = 0; j < m; ++j) {
                    const std::string name = r.read_text();
                    ChannelValue value;
                    switch (r.peek_major()) {
                        case cbor::Major::Bytes:
                            value = r.read_bytes();
                            break;
                        case cbor::Major::Array: {
                            const std::uint64_t len = r.read_array_header();
                            std::vector<double> a;
                            a.reserve(len);
                            for (std::uint64_t k = 0; k < len; ++k) a.push_back(r.read_double());
                            value = std::move(a);
                            break;
                        }
                        default:
                            value = r.read_double();
                            break;
                    }
                    if (!rec.payload.emplace(name, std::move(value)).second) {
                        throw MalformedEnvelope("duplicate channel " + name);
                    }
                }
                has_ch = true;
            } else {
                throw MalformedEnvelope("unknown envelope key \"" + key + "\"");
            }
        }
        if (!has_t) throw MalformedEnvelope("envelope missing timestamp");
        if (!has_id) throw MalformedEnvelope("envelope missing sensor id");
        if (!has_ch) throw MalformedEnvelope("envelope missing channel map");
        if (!r.done()) throw MalformedEnvelope("trailing bytes after envelope");
        return rec;
    } catch (const cbor::DecodeError& e) {
        throw MalformedEnvelope(e.what());
    }
}

}  // namespace winterscan
