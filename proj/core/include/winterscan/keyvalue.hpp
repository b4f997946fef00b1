#pragma once

#include <optional>
#include <string>
#include <vector>

#include "winterscan/errors.hpp"

namespace winterscan {

/// Line-oriented `[section]` / `key = value` document with `#` comments.
/// Shared carrier for the road registry and synthetic road specs.
struct KeyValueEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct KeyValueSection {
    std::string name;
    int line = 0;
    std::vector<KeyValueEntry> entries;

    const KeyValueEntry* find(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    std::vector<std::string> get_all(const std::string& key) const;
};

struct KeyValueDocument {
    std::vector<KeyValueSection> sections;
};

class MalformedDocument : public Error {
  public:
    using Error::Error;
};

/// Parses document text. Entries before any `[section]` header are rejected.
KeyValueDocument parse_key_value(const std::string& text);

/// Loads and parses a document file.
KeyValueDocument load_key_value(const std::string& path);

}  // namespace winterscan
