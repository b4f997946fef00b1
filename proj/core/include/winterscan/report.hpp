#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "winterscan/analysis.hpp"

namespace winterscan {

/// Aggregated inspection output. Serialization is byte-deterministic: keys
/// appear in a fixed order and every number is printed with exactly three
/// decimals (millimeter precision), so identical runs produce identical
/// bytes.
struct InspectionReport {
    std::string segment_name;
    std::string reference_epoch_label;
    std::string winter_epoch_label;
    std::vector<WidthMeasurement> widths;
    double snow_volume_m3 = 0;
    // Marking cluster count per epoch label, in insertion order.
    std::vector<std::pair<std::string, std::int64_t>> marking_clusters;
    // Every numeric parameter used anywhere in the run, in insertion order;
    // rerunning with these values reproduces the report.
    std::vector<std::pair<std::string, double>> parameters;
};

std::string report_to_json(const InspectionReport& report);
void save_report(const std::string& path, const InspectionReport& report);

/// JSON array of width measurements (fields exactly as typed, plus segment
/// and epoch labels in a wrapper object) and a plot-ready CSV mirror.
std::string widths_to_json(const std::string& segment_name,
                           const std::string& reference_epoch_label,
                           const std::string& winter_epoch_label,
                           const std::vector<WidthMeasurement>& widths);
void write_widths_csv(const std::string& path, const std::vector<WidthMeasurement>& widths);

}  // namespace winterscan
