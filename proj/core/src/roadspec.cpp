#include "winterscan/roadspec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace winterscan {

namespace {

std::string strip_spaces(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    }
    return out;
}

/// Cursor over the whitespace-stripped notation string.
struct Cursor {
    const std::string& s;
    std::size_t pos = 0;

    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }
    bool eat(char c) {
        if (peek() != c) return false;
        ++pos;
        return true;
    }
    bool eat(const char* lit) {
        const std::size_t n = std::char_traits<char>::length(lit);
        if (s.compare(pos, n, lit) != 0) return false;
        pos += n;
        return true;
    }
};

[[noreturn]] void fail(const std::string& text, const std::string& why) {
    throw MalformedNotation("malformed cross-section notation \"" + text + "\": " + why);
}

/// Decimal width with at most two fraction digits, as centimeters.
std::int64_t parse_width_cm(Cursor& c, const std::string& text, const char* what) {
    std::size_t start = c.pos;
    while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) ++c.pos;
    if (c.pos == start) fail(text, std::string("expected numeric ") + what);
    std::int64_t whole = 0;
    std::from_chars(c.s.data() + start, c.s.data() + c.pos, whole);
    if (c.pos - start > 6) fail(text, std::string(what) + " out of range");
    std::int64_t frac = 0;
    if (c.eat('.')) {
        const std::size_t fstart = c.pos;
        while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) ++c.pos;
        const std::size_t ndig = c.pos - fstart;
        if (ndig == 0) fail(text, std::string(what) + " has a dangling decimal point");
        if (ndig > 2) fail(text, std::string(what) + " finer than centimeter resolution");
        std::from_chars(c.s.data() + fstart, c.s.data() + c.pos, frac);
        if (ndig == 1) frac *= 10;
    }
    return whole * 100 + frac;
}

std::string format_width(std::int64_t cm) {
    std::string out = std::to_string(cm / 100);
    const std::int64_t frac = cm % 100;
    if (frac == 0) return out;
    out.push_back('.');
    if (frac % 10 == 0) {
        out.push_back(static_cast<char>('0' + frac / 10));
    } else {
        out.push_back(static_cast<char>('0' + frac / 10));
        out.push_back(static_cast<char>('0' + frac % 10));
    }
    return out;
}

std::int64_t parse_int_field(const KeyValueSection& sec, const std::string& key,
                             bool required, std::int64_t fallback) {
    const auto v = sec.get(key);
    if (!v) {
        if (required) {
            throw MalformedRegistry("segment [" + sec.name + "]: missing key " + key);
        }
        return fallback;
    }
    std::int64_t out = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size()) {
        throw MalformedRegistry("segment [" + sec.name + "] line " +
                                std::to_string(sec.find(key)->line) + ": " + key +
                                " is not an integer: " + *v);
    }
    return out;
}

}  // namespace

const char* separator_code(Separator s) {
    switch (s) {
        case Separator::CentralArea: return "KA";
        case Separator::SteelGuardrail: return "TK";
        case Separator::ConcreteRailing: return "BK";
        case Separator::None: break;
    }
    return "";
}

const char* separator_name(Separator s) {
    switch (s) {
        case Separator::CentralArea: return "central_area";
        case Separator::SteelGuardrail: return "steel_guardrail";
        case Separator::ConcreteRailing: return "concrete_railing";
        case Separator::None: break;
    }
    return "none";
}

void validate_cross_section(const DesignCrossSection& spec) {
    if (spec.carriageways != 1 && spec.carriageways != 2) {
        throw MalformedNotation("carriageway count must be 1 or 2");
    }
    if (spec.lanes_width_cm <= 0) {
        throw MalformedNotation("travel-lane width must be positive");
    }
    if (spec.roadway_width_cm < spec.lanes_width_cm) {
        throw MalformedNotation("roadway width smaller than travel-lane width");
    }
    if (spec.separator == Separator::CentralArea && spec.carriageways != 2) {
        throw MalformedNotation("central area (KA) requires two carriageways");
    }
    if (spec.lane_count < 1) {
        throw MalformedNotation("lane count must be at least 1");
    }
    if (spec.roundabout) {
        if (spec.roundabout->apron_width_cm <= 0 || spec.roundabout->diameter_cm <= 0) {
            throw MalformedNotation("roundabout apron width and diameter must be positive");
        }
    }
}

DesignCrossSection parse_cross_section(const std::string& text) {
    const std::string s = strip_spaces(text);
    if (s.empty()) throw MalformedNotation("empty notation string");
    Cursor c{s};

    DesignCrossSection spec;
    spec.carriageways = 1;
    if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
        std::size_t start = c.pos;
        while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) ++c.pos;
        int n = 0;
        std::from_chars(s.data() + start, s.data() + c.pos, n);
        if (!c.eat('x')) fail(text, "expected 'x' after carriageway count");
        spec.carriageways = n;
    }
    if (!c.eat('(')) fail(text, "expected '(' before widths");
    spec.roadway_width_cm = parse_width_cm(c, text, "roadway width");
    if (!c.eat('/')) fail(text, "expected '/' between widths");
    spec.lanes_width_cm = parse_width_cm(c, text, "travel-lane width");
    if (!c.eat(')')) fail(text, "expected ')' after widths");

    while (c.eat('+')) {
        if (c.eat("KA")) {
            spec.separator = Separator::CentralArea;
        } else if (c.eat("TK")) {
            spec.separator = Separator::SteelGuardrail;
        } else if (c.eat("BK")) {
            spec.separator = Separator::ConcreteRailing;
        } else if (c.eat("R(")) {
            if (spec.roundabout) fail(text, "duplicate roundabout suffix");
            RoundaboutSpec rb;
            rb.apron_width_cm = parse_width_cm(c, text, "apron width");
            if (!c.eat(',')) fail(text, "expected ',' in roundabout suffix");
            rb.diameter_cm = parse_width_cm(c, text, "roundabout diameter");
            if (!c.eat(')')) fail(text, "expected ')' after roundabout suffix");
            spec.roundabout = rb;
        } else {
            fail(text, "unknown separator code at \"" + s.substr(c.pos) + "\"");
        }
    }
    if (!c.done()) fail(text, "trailing characters \"" + s.substr(c.pos) + "\"");

    spec.lane_count = 2 * spec.carriageways;
    validate_cross_section(spec);
    return spec;
}

std::string format_cross_section(const DesignCrossSection& spec) {
    validate_cross_section(spec);
    std::string out;
    if (spec.carriageways != 1) {
        out += std::to_string(spec.carriageways);
        out += " x ";
    }
    out += "(";
    out += format_width(spec.roadway_width_cm);
    out += "/";
    out += format_width(spec.lanes_width_cm);
    out += ")";
    if (spec.separator != Separator::None) {
        out += " + ";
        out += separator_code(spec.separator);
    }
    if (spec.roundabout) {
        out += " + R(";
        out += format_width(spec.roundabout->apron_width_cm);
        out += ",";
        out += format_width(spec.roundabout->diameter_cm);
        out += ")";
    }
    return out;
}

double design_roadway_width(const DesignCrossSection& spec) {
    validate_cross_section(spec);
    return spec.roadway_width_m();
}

std::vector<RoadSegmentRecord> load_road_registry(const KeyValueDocument& doc) {
    std::vector<RoadSegmentRecord> out;
    out.reserve(doc.sections.size());
    for (const auto& sec : doc.sections) {
        RoadSegmentRecord rec;
        rec.name = sec.name;

        const auto notation = sec.get("cross_section");
        if (!notation) {
            throw MalformedRegistry("segment [" + sec.name + "]: missing key cross_section");
        }
        try {
            rec.cross_section = parse_cross_section(*notation);
        } catch (const MalformedNotation& e) {
            throw MalformedRegistry("segment [" + sec.name + "] line " +
                                    std::to_string(sec.find("cross_section")->line) + ": " +
                                    e.what());
        }

        rec.design_speed_kmh =
            static_cast<int>(parse_int_field(sec, "design_speed_kmh", true, 0));
        if (rec.design_speed_kmh <= 0) {
            throw MalformedRegistry("segment [" + sec.name + "]: design_speed_kmh must be positive");
        }
        rec.aadt = parse_int_field(sec, "aadt", true, 0);
        rec.heavy_aadt = parse_int_field(sec, "heavy_aadt", false, 0);
        if (rec.aadt < 0 || rec.heavy_aadt < 0 || rec.heavy_aadt > rec.aadt) {
            throw MalformedRegistry("segment [" + sec.name +
                                    "]: heavy_aadt must lie in [0, aadt]");
        }

        const auto cls = sec.get("class");
        if (!cls) throw MalformedRegistry("segment [" + sec.name + "]: missing key class");
        if (*cls == "state") {
            rec.road_class = RoadClass::StateRoad;
        } else if (*cls == "municipal") {
            rec.road_class = RoadClass::MunicipalRoad;
        } else {
            throw MalformedRegistry("segment [" + sec.name + "] line " +
                                    std::to_string(sec.find("class")->line) +
                                    ": class must be state or municipal, got " + *cls);
        }

        rec.lane_count = static_cast<int>(
            parse_int_field(sec, "lanes", false, rec.cross_section.lane_count));
        if (rec.lane_count < 1) {
            throw MalformedRegistry("segment [" + sec.name + "]: lanes must be at least 1");
        }
        rec.cross_section.lane_count = rec.lane_count;

        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<RoadSegmentRecord> load_road_registry_file(const std::string& path) {
    try {
        return load_road_registry(load_key_value(path));
    } catch (const MalformedDocument& e) {
        throw MalformedRegistry(path + ": " + e.what());
    }
}

}  // namespace winterscan
