#include "winterscan/cbor.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace winterscan::cbor {

namespace {

constexpr std::uint8_t kMajorShift = 5;
constexpr std::uint8_t kInfoMask = 0x1f;

}  // namespace

void Writer::head(std::uint8_t major, std::uint64_t argument) {
    const std::uint8_t base = static_cast<std::uint8_t>(major << kMajorShift);
    if (argument < 24) {
        buf_.push_back(static_cast<std::uint8_t>(base | argument));
    } else if (argument <= 0xff) {
        buf_.push_back(base | 24);
        buf_.push_back(static_cast<std::uint8_t>(argument));
    } else if (argument <= 0xffff) {
        buf_.push_back(base | 25);
        for (int i = 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(argument >> (8 * i)));
    } else if (argument <= 0xffffffffull) {
        buf_.push_back(base | 26);
        for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(argument >> (8 * i)));
    } else {
        buf_.push_back(base | 27);
        for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(argument >> (8 * i)));
    }
}

void Writer::unsigned_int(std::uint64_t v) { head(0, v); }

void Writer::text(std::string_view s) {
    head(3, s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
}

void Writer::bytes(std::span<const std::uint8_t> b) {
    head(2, b.size());
    buf_.insert(buf_.end(), b.begin(), b.end());
}

void Writer::array_header(std::uint64_t count) { head(4, count); }

void Writer::map_header(std::uint64_t count) { head(5, count); }

void Writer::float64(double v) {
    buf_.push_back(0xfb);
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void Writer::raw(std::span<const std::uint8_t> encoded) {
    buf_.insert(buf_.end(), encoded.begin(), encoded.end());
}

std::vector<std::uint8_t> encode_text_key(std::string_view key) {
    Writer w;
    w.text(key);
    return w.take();
}

Major Reader::peek_major() const {
    if (done()) throw DecodeError("truncated CBOR: expected an item head");
    return static_cast<Major>(data_[pos_] >> kMajorShift);
}

std::uint8_t Reader::take_byte() {
    if (done()) throw DecodeError("truncated CBOR item");
    return data_[pos_++];
}

std::uint64_t Reader::read_argument(std::uint8_t info) {
    if (info < 24) return info;
    int n = 0;
    switch (info) {
        case 24: n = 1; break;
        case 25: n = 2; break;
        case 26: n = 4; break;
        case 27: n = 8; break;
        default: throw DecodeError("indefinite or reserved CBOR length");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | take_byte();
    return v;
}

std::uint64_t Reader::expect_head(Major major) {
    const std::uint8_t b = take_byte();
    if (static_cast<Major>(b >> kMajorShift) != major) {
        throw DecodeError("unexpected CBOR major type");
    }
    return read_argument(b & kInfoMask);
}

std::uint64_t Reader::read_unsigned() { return expect_head(Major::Unsigned); }

std::string Reader::read_text() {
    const std::uint64_t len = expect_head(Major::Text);
    if (len > data_.size() - pos_) throw DecodeError("truncated CBOR text string");
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
    pos_ += len;
    return s;
}

std::vector<std::uint8_t> Reader::read_bytes() {
    const std::uint64_t len = expect_head(Major::Bytes);
    if (len > data_.size() - pos_) throw DecodeError("truncated CBOR byte string");
    std::vector<std::uint8_t> b(data_.begin() + pos_, data_.begin() + pos_ + len);
    pos_ += len;
    return b;
}

std::uint64_t Reader::read_array_header() { return expect_head(Major::Array); }

std::uint64_t Reader::read_map_header() { return expect_head(Major::Map); }

namespace {

double half_to_double(std::uint16_t h) {
    const int exp = (h >> 10) & 0x1f;
    const int mant = h & 0x3ff;
    double v;
    if (exp == 0) {
        v = std::ldexp(mant, -24);
    } else if (exp != 31) {
        v = std::ldexp(mant + 1024, exp - 25);
    } else {
        v = mant == 0 ? INFINITY : NAN;
    }
    return (h & 0x8000) ? -v : v;
}

}  // namespace

double Reader::read_double() {
    const std::uint8_t b = take_byte();
    const Major major = static_cast<Major>(b >> kMajorShift);
    const std::uint8_t info = b & kInfoMask;
    if (major == Major::Unsigned) {
        --pos_;
        return static_cast<double>(read_unsigned());
    }
    if (major == Major::Negative) {
        const std::uint64_t a = read_argument(info);
        return -1.0 - static_cast<double>(a);
    }
    if (major != Major::Simple) throw DecodeError("expected a CBOR number");
    if (info == 25) {
        std::uint16_t bits = 0;
        for (int i = 0; i < 2; ++i) bits = static_cast<std::uint16_t>((bits << 8) | take_byte());
        return half_to_double(bits);
    }
    if (info == 26) {
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i) bits = (bits << 8) | take_byte();
        return static_cast<double>(std::bit_cast<float>(bits));
    }
    if (info == 27) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits = (bits << 8) | take_byte();
        return std::bit_cast<double>(bits);
    }
    throw DecodeError("expected a CBOR float");
}

}  // namespace winterscan::cbor
