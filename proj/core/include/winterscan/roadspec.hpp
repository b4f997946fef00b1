#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "winterscan/errors.hpp"
#include "winterscan/keyvalue.hpp"

namespace winterscan {

class MalformedNotation : public Error {
  public:
    using Error::Error;
};

class MalformedRegistry : public Error {
  public:
    using Error::Error;
};

/// Carriageway separator code in cross-section notation.
enum class Separator { None, CentralArea, SteelGuardrail, ConcreteRailing };

const char* separator_code(Separator s);  // "KA", "TK", "BK", "" for None
const char* separator_name(Separator s);  // lower_snake label for reports

/// Roundabout extras: mountable truck apron width and outer diameter.
struct RoundaboutSpec {
    std::int64_t apron_width_cm = 0;
    std::int64_t diameter_cm = 0;

    bool operator==(const RoundaboutSpec&) const = default;
};

/// Parsed cross-section design notation.
///
/// Widths are exact centimeter integers so formatting round-trips without
/// float drift. The pre-slash figure is the roadway of one carriageway
/// (travel lanes plus shoulders); the post-slash figure is the combined
/// travel-lane width.
struct DesignCrossSection {
    int carriageways = 1;  // 1 or 2
    std::int64_t roadway_width_cm = 0;
    std::int64_t lanes_width_cm = 0;
    Separator separator = Separator::None;
    int lane_count = 2;  // not encoded in the notation; registry may override
    std::optional<RoundaboutSpec> roundabout;

    double roadway_width_m() const { return static_cast<double>(roadway_width_cm) / 100.0; }
    double lanes_width_m() const { return static_cast<double>(lanes_width_cm) / 100.0; }

    bool operator==(const DesignCrossSection&) const = default;
};

enum class RoadClass { StateRoad, MunicipalRoad };

/// One road segment of the registry: design notation plus traffic metadata.
struct RoadSegmentRecord {
    std::string name;
    DesignCrossSection cross_section;
    int design_speed_kmh = 0;
    std::int64_t aadt = 0;
    std::int64_t heavy_aadt = 0;
    RoadClass road_class = RoadClass::StateRoad;
    int lane_count = 0;
};

/// Parses cross-section notation, e.g. "2 x (11.75/7.5) + KA".
///
/// Grammar: [<int> " x "] "(" <decimal> "/" <decimal> ")" [" + " ("KA"|"TK"|"BK")]
/// with optional roundabout suffix " + R(" <decimal> "," <decimal> ")".
/// Whitespace-insensitive; widths carry at most two decimals (centimeter
/// resolution). The lane count is not part of the notation and defaults to
/// two per carriageway.
DesignCrossSection parse_cross_section(const std::string& text);

/// Canonical notation string; parse(format(s)) == s for valid specs with the
/// default lane count.
std::string format_cross_section(const DesignCrossSection& spec);

/// Roadway width of one carriageway in meters (the pre-slash figure).
double design_roadway_width(const DesignCrossSection& spec);

/// Validates invariants, throws MalformedNotation describing the violation.
void validate_cross_section(const DesignCrossSection& spec);

/// Loads a road registry document. One section per road, named by the
/// segment (`[Pohjantie]`), with keys cross_section, design_speed_kmh,
/// aadt, heavy_aadt (optional, 0), class = state|municipal and lanes
/// (optional, two per carriageway).
std::vector<RoadSegmentRecord> load_road_registry(const KeyValueDocument& doc);
std::vector<RoadSegmentRecord> load_road_registry_file(const std::string& path);

}  // namespace winterscan
