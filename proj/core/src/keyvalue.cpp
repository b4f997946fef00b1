#include "winterscan/keyvalue.hpp"

#include <fstream>
#include <sstream>

namespace winterscan {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

const KeyValueEntry* KeyValueSection::find(const std::string& key) const {
    for (const auto& e : entries) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

std::optional<std::string> KeyValueSection::get(const std::string& key) const {
    const auto* e = find(key);
    if (e == nullptr) return std::nullopt;
    return e->value;
}

std::vector<std::string> KeyValueSection::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (e.key == key) out.push_back(e.value);
    }
    return out;
}

KeyValueDocument parse_key_value(const std::string& text) {
    KeyValueDocument doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw MalformedDocument("line " + std::to_string(line_no) +
                                        ": unterminated section header");
            }
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) {
                throw MalformedDocument("line " + std::to_string(line_no) +
                                        ": empty section name");
            }
            doc.sections.push_back(KeyValueSection{name, line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw MalformedDocument("line " + std::to_string(line_no) +
                                    ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw MalformedDocument("line " + std::to_string(line_no) + ": empty key");
        }
        if (doc.sections.empty()) {
            throw MalformedDocument("line " + std::to_string(line_no) +
                                    ": entry before any [section] header");
        }
        doc.sections.back().entries.push_back(KeyValueEntry{key, value, line_no});
    }
    return doc;
}

KeyValueDocument load_key_value(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_key_value(buf.str());
}

}  // namespace winterscan
