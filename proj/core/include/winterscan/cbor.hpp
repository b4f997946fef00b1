#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "winterscan/errors.hpp"

namespace winterscan::cbor {

class DecodeError : public Error {
  public:
    using Error::Error;
};

/// Deterministic CBOR writer (RFC 8949): definite lengths and shortest-form
/// heads only. Map entries must be appended by the caller in canonical order
/// (bytewise order of the encoded keys); encode_text_key helps with that.
class Writer {
  public:
    void unsigned_int(std::uint64_t v);
    void text(std::string_view s);
    void bytes(std::span<const std::uint8_t> b);
    void array_header(std::uint64_t count);
    void map_header(std::uint64_t count);
    void float64(double v);
    /// Appends an already-encoded item verbatim.
    void raw(std::span<const std::uint8_t> encoded);

    const std::vector<std::uint8_t>& buffer() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

  private:
    void head(std::uint8_t major, std::uint64_t argument);
    std::vector<std::uint8_t> buf_;
};

/// A text key as it would appear on the wire, for canonical map ordering.
std::vector<std::uint8_t> encode_text_key(std::string_view key);

enum class Major : std::uint8_t {
    Unsigned = 0,
    Negative = 1,
    Bytes = 2,
    Text = 3,
    Array = 4,
    Map = 5,
    Tag = 6,
    Simple = 7,
};

/// Cursor-style reader over one CBOR item stream. Throws DecodeError on
/// truncation, indefinite lengths, or type mismatches.
class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    bool done() const { return pos_ >= data_.size(); }
    Major peek_major() const;

    std::uint64_t read_unsigned();
    std::string read_text();
    std::vector<std::uint8_t> read_bytes();
    std::uint64_t read_array_header();
    std::uint64_t read_map_header();
    /// Accepts float64/float32/float16 and integer items.
    double read_double();

  private:
    std::uint8_t take_byte();
    std::uint64_t read_argument(std::uint8_t info);
    std::uint64_t expect_head(Major major);

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace winterscan::cbor
