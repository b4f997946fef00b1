#include "winterscan/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace winterscan {

namespace {

// Millimeter-precision fixed formatting; the one number style in reports.
std::string mm(double v) {
    if (!std::isfinite(v)) {
        return "null";
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    // "-0.000" and "0.000" are the same measurement.
    if (buf[0] == '-' && std::strtod(buf, nullptr) == 0) {
        return buf + 1;
    }
    return buf;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"':
                out += "\\\"";
                break;
            case '\\':
                out += "\\\\";
                break;
            case '\n':
                out += "\\n";
                break;
            case '\r':
                out += "\\r";
                break;
            case '\t':
                out += "\\t";
                break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char esc[8];
                    std::snprintf(esc, sizeof(esc), "\\u%04x", c);
                    out += esc;
                } else {
                    out += c;
                }
        }
    }
    out += "\"";
    return out;
}

void append_width(std::string& out, const WidthMeasurement& w, const std::string& indent) {
    out += indent + "{\n";
    out += indent + "  \"transect_id\": " + quoted(w.transect_id) + ",\n";
    out += indent + "  \"effective_width_m\": " + mm(w.effective_width_m) + ",\n";
    out += indent + "  \"design_roadway_width_m\": " + mm(w.design_roadway_width_m) + ",\n";
    out += indent + "  \"deficit_m\": " + mm(w.deficit_m) + ",\n";
    out += indent + "  \"clear_span\": [" + mm(w.clear_span_start_m) + ", " + mm(w.clear_span_end_m) +
           "],\n";
    out += indent + "  \"fully_blocked\": " + (w.fully_blocked ? "true" : "false") + "\n";
    out += indent + "}";
}

}  // namespace

std::string report_to_json(const InspectionReport& report) {
    std::string out = "{\n";
    out += "  \"segment\": " + quoted(report.segment_name) + ",\n";
    out += "  \"epochs\": {\n";
    out += "    \"reference\": " + quoted(report.reference_epoch_label) + ",\n";
    out += "    \"winter\": " + quoted(report.winter_epoch_label) + "\n";
    out += "  },\n";
    out += "  \"widths\": [";
    for (std::size_t i = 0; i < report.widths.size(); ++i) {
        out += i == 0 ? "\n" : ",\n";
        append_width(out, report.widths[i], "    ");
    }
    out += report.widths.empty() ? "],\n" : "\n  ],\n";
    out += "  \"snow_volume_m3\": " + mm(report.snow_volume_m3) + ",\n";
    out += "  \"marking_clusters\": {";
    for (std::size_t i = 0; i < report.marking_clusters.size(); ++i) {
        out += i == 0 ? "\n" : ",\n";
        out += "    " + quoted(report.marking_clusters[i].first) + ": " +
               std::to_string(report.marking_clusters[i].second);
    }
    out += report.marking_clusters.empty() ? "},\n" : "\n  },\n";
    out += "  \"parameters\": {";
    for (std::size_t i = 0; i < report.parameters.size(); ++i) {
        out += i == 0 ? "\n" : ",\n";
        out += "    " + quoted(report.parameters[i].first) + ": " + mm(report.parameters[i].second);
    }
    out += report.parameters.empty() ? "}\n" : "\n  }\n";
    out += "}\n";
    return out;
}

void save_report(const std::string& path, const InspectionReport& report) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out << report_to_json(report);
    out.flush();
    if (!out) {
        throw IoFailure("short write to " + path);
    }
}

std::string widths_to_json(const std::string& segment_name,
                           const std::string& reference_epoch_label,
                           const std::string& winter_epoch_label,
                           const std::vector<WidthMeasurement>& widths) {
    std::string out = "{\n";
    out += "  \"segment\": " + quoted(segment_name) + ",\n";
    out += "  \"epochs\": {\n";
    out += "    \"reference\": " + quoted(reference_epoch_label) + ",\n";
    out += "    \"winter\": " + quoted(winter_epoch_label) + "\n";
    out += "  },\n";
    out += "  \"widths\": [";
    for (std::size_t i = 0; i < widths.size(); ++i) {
        out += i == 0 ? "\n" : ",\n";
        append_width(out, widths[i], "    ");
    }
    out += widths.empty() ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
}

void write_widths_csv(const std::string& path, const std::vector<WidthMeasurement>& widths) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out << "transect_id,effective_width_m,design_roadway_width_m,deficit_m,"
           "clear_span_start_m,clear_span_end_m,fully_blocked\n";
    for (const WidthMeasurement& w : widths) {
        out << w.transect_id << ',' << mm(w.effective_width_m) << ',' << mm(w.design_roadway_width_m)
            << ',' << mm(w.deficit_m) << ',' << mm(w.clear_span_start_m) << ','
            << mm(w.clear_span_end_m) << ',' << (w.fully_blocked ? "true" : "false") << '\n';
    }
    out.flush();
    if (!out) {
        throw IoFailure("short write to " + path);
    }
}

}  // namespace winterscan
