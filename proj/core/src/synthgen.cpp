#include "winterscan/synthgen.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <random>

#include "winterscan/keyvalue.hpp"

namespace winterscan {

namespace {

double gauss(double delta, double sigma) {
    const double t = delta / sigma;
    return std::exp(-0.5 * t * t);
}

bool inside_box(const BoxObstacle& box, double along_m, double cross_m) {
    return along_m >= box.along_min_m && along_m <= box.along_max_m &&
           cross_m >= box.cross_min_m && cross_m <= box.cross_max_m;
}

std::string spot(const std::string& path, int line) {
    return path + ":" + std::to_string(line);
}

const KeyValueEntry& require_one(const KeyValueSection& section, const std::string& key,
                                 const std::string& path) {
    const KeyValueEntry* found = nullptr;
    for (const KeyValueEntry& e : section.entries) {
        if (e.key != key) {
            continue;
        }
        if (found != nullptr) {
            throw MalformedSynthSpec(spot(path, e.line) + ": duplicate key '" + key + "'");
        }
        found = &e;
    }
    if (found == nullptr) {
        throw MalformedSynthSpec(spot(path, section.line) + ": section [" + section.name +
                                 "] is missing key '" + key + "'");
    }
    return *found;
}

double number_value(const KeyValueEntry& entry, const std::string& path) {
    const char* s = entry.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
        throw MalformedSynthSpec(spot(path, entry.line) + ": '" + entry.key +
                                 "' must be a finite number, got '" + entry.value + "'");
    }
    return v;
}

double required_number(const KeyValueSection& section, const std::string& key,
                       const std::string& path) {
    return number_value(require_one(section, key, path), path);
}

}  // namespace

const char* epoch_name(Epoch epoch) {
    return epoch == Epoch::Bare ? "bare" : "winter";
}

Epoch epoch_from_name(const std::string& name) {
    if (name == "bare") {
        return Epoch::Bare;
    }
    if (name == "winter") {
        return Epoch::Winter;
    }
    throw Error("unknown epoch '" + name + "' (expected bare or winter)");
}

void validate_spec(const SyntheticRoadSpec& spec) {
    auto fail = [](const std::string& msg) { throw InvalidRoadSpec("invalid road spec: " + msg); };
    auto pos = [&](double v, const char* what) {
        if (!std::isfinite(v) || v <= 0) {
            fail(std::string(what) + " must be positive");
        }
    };
    auto non_neg = [&](double v, const char* what) {
        if (!std::isfinite(v) || v < 0) {
            fail(std::string(what) + " must be non-negative");
        }
    };
    pos(spec.roadway_width_m, "roadway_width_m");
    pos(spec.length_m, "length_m");
    pos(spec.point_density, "point_density");
    non_neg(spec.crown_slope, "crown_slope");
    non_neg(spec.fore_slope_drop_m, "fore_slope_drop_m");
    non_neg(spec.margin_m, "margin_m");
    non_neg(spec.noise_m, "noise_m");
    non_neg(spec.curvature, "curvature");
    if (spec.curvature > 0) {
        const double radius = 1.0 / spec.curvature;
        if (radius <= spec.roadway_width_m / 2 + spec.margin_m) {
            fail("curvature radius must exceed half the sampled band");
        }
        if (spec.length_m * spec.curvature > 3.141592653589793) {
            fail("arc length must not exceed half a turn");
        }
    }
    for (const SnowHeapSpec& h : spec.snow_features) {
        pos(h.peak_m, "heap peak_m");
        pos(h.sigma_m, "heap sigma_m");
        if (!std::isfinite(h.center_station_m) || !std::isfinite(h.along_extent_m)) {
            fail("heap position must be finite");
        }
    }
    if (spec.banks) {
        pos(spec.banks->gap_m, "bank gap_m");
        pos(spec.banks->sigma_m, "bank sigma_m");
        pos(spec.banks->ref_height_m, "bank ref_height_m");
        if (!std::isfinite(spec.banks->peak_m) || spec.banks->peak_m <= spec.banks->ref_height_m) {
            fail("bank peak_m must exceed ref_height_m");
        }
    }
    for (const BoxObstacle& b : spec.obstacles) {
        pos(b.height_m, "obstacle height_m");
        if (!(b.along_max_m > b.along_min_m) || !(b.cross_max_m > b.cross_min_m)) {
            fail("obstacle extents must be non-empty");
        }
    }
    const double points = spec.point_density * spec.length_m *
                          (spec.roadway_width_m + 2 * spec.margin_m);
    if (points > 2e8) {
        fail("point budget exceeded; lower the density or shrink the road");
    }
}

double bank_center_offset(const BankSpec& banks) {
    return banks.gap_m / 2 + banks.sigma_m * std::sqrt(2.0 * std::log(banks.peak_m / banks.ref_height_m));
}

double bare_elevation(const SyntheticRoadSpec& spec, double /*along_m*/, double cross_m) {
    const double half = spec.roadway_width_m / 2;
    if (cross_m >= 0 && cross_m <= spec.roadway_width_m) {
        return spec.crown_slope * (half - std::abs(cross_m - half));
    }
    const double beyond = cross_m < 0 ? -cross_m : cross_m - spec.roadway_width_m;
    return -std::min(beyond * kForeSlopeGrade, spec.fore_slope_drop_m);
}

double snow_depth(const SyntheticRoadSpec& spec, double along_m, double cross_m) {
    double depth = 0;
    for (const SnowHeapSpec& h : spec.snow_features) {
        const double da = along_m - h.along_extent_m;
        const double dc = cross_m - h.center_station_m;
        depth += h.peak_m * std::exp(-(da * da + dc * dc) / (2 * h.sigma_m * h.sigma_m));
    }
    if (spec.banks) {
        const double center = spec.roadway_width_m / 2;
        const double offset = bank_center_offset(*spec.banks);
        depth += spec.banks->peak_m * gauss(cross_m - (center - offset), spec.banks->sigma_m);
        depth += spec.banks->peak_m * gauss(cross_m - (center + offset), spec.banks->sigma_m);
    }
    return depth;
}

double surface_elevation(const SyntheticRoadSpec& spec, Epoch epoch, double along_m, double cross_m) {
    double z = bare_elevation(spec, along_m, cross_m);
    if (epoch == Epoch::Winter) {
        z += snow_depth(spec, along_m, cross_m);
    }
    return z;
}

void road_to_world(const SyntheticRoadSpec& spec, double along_m, double cross_m, double* x, double* y) {
    if (spec.curvature == 0) {
        *x = along_m;
        *y = cross_m;
        return;
    }
    const double radius = 1.0 / spec.curvature;
    const double center = spec.roadway_width_m / 2;
    const double theta = spec.curvature * along_m;
    const double rho = radius - (cross_m - center);
    *x = rho * std::sin(theta);
    *y = (center + radius) - rho * std::cos(theta);
}

void world_to_road(const SyntheticRoadSpec& spec, double x, double y, double* along_m, double* cross_m) {
    if (spec.curvature == 0) {
        *along_m = x;
        *cross_m = y;
        return;
    }
    const double radius = 1.0 / spec.curvature;
    const double center = spec.roadway_width_m / 2;
    const double dx = x;
    const double dy = y - (center + radius);
    const double rho = std::hypot(dx, dy);
    *along_m = std::atan2(dx, -dy) / spec.curvature;
    *cross_m = center + radius - rho;
}

SyntheticCloud generate_cloud(const SyntheticRoadSpec& spec, Epoch epoch) {
    validate_spec(spec);

    const double width = spec.roadway_width_m;
    const double band = width + 2 * spec.margin_m;
    const std::size_t count =
        static_cast<std::size_t>(std::llround(spec.point_density * spec.length_m * band));

    SyntheticCloud out;
    out.cloud.crs_label = spec.crs_label;
    out.cloud.x.reserve(count);
    out.cloud.y.reserve(count);
    out.cloud.z.reserve(count);
    out.cloud.intensity.reserve(count);
    out.labels.reserve(count);

    // Raw engine words mapped to [0,1) directly; distribution classes are
    // not pinned across standard library versions.
    std::mt19937_64 eng(spec.seed);
    auto u01 = [&eng]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };

    for (std::size_t k = 0; k < count; ++k) {
        const double along = u01() * spec.length_m;
        const double cross = -spec.margin_m + u01() * band;
        const double jitter = (2 * u01() - 1) * spec.noise_m;

        const BoxObstacle* box = nullptr;
        for (const BoxObstacle& b : spec.obstacles) {
            if (inside_box(b, along, cross)) {
                box = &b;
                break;
            }
        }

        double z;
        GroundTruthLabel label;
        if (box != nullptr) {
            z = bare_elevation(spec, along, cross) + box->height_m + jitter;
            label = GroundTruthLabel::OffRoad;
        } else {
            const double depth = epoch == Epoch::Winter ? snow_depth(spec, along, cross) : 0.0;
            z = bare_elevation(spec, along, cross) + depth + jitter;
            if (epoch == Epoch::Winter && depth > kSnowLabelMinDepth) {
                label = GroundTruthLabel::Snow;
            } else if (cross >= 0 && cross <= width) {
                label = GroundTruthLabel::Road;
            } else {
                label = GroundTruthLabel::OffRoad;
            }
        }

        double wx;
        double wy;
        road_to_world(spec, along, cross, &wx, &wy);
        out.cloud.x.push_back(wx);
        out.cloud.y.push_back(wy);
        out.cloud.z.push_back(z);
        switch (label) {
            case GroundTruthLabel::Road:
                out.cloud.intensity.push_back(kRoadIntensity);
                break;
            case GroundTruthLabel::Snow:
                out.cloud.intensity.push_back(kSnowIntensity);
                break;
            case GroundTruthLabel::OffRoad:
                out.cloud.intensity.push_back(kOffRoadIntensity);
                break;
        }
        out.labels.push_back(label);
    }
    return out;
}

SurfaceProfile analytic_profile(const SyntheticRoadSpec& spec, Epoch epoch, const Transect& transect,
                                double spacing_m) {
    if (!std::isfinite(spacing_m) || spacing_m <= 0) {
        throw NonPositiveSpacing("profile spacing must be positive");
    }
    const double norm = std::hypot(transect.dir_x, transect.dir_y);
    if (!std::isfinite(norm) || norm <= 0) {
        throw Error("transect " + transect.id + ": direction must be a finite nonzero vector");
    }
    const double ux = transect.dir_x / norm;
    const double uy = transect.dir_y / norm;
    const std::size_t count =
        static_cast<std::size_t>(std::floor(transect.length_m / spacing_m + 1e-9)) + 1;

    SurfaceProfile profile;
    profile.transect_id = transect.id;
    profile.spacing_m = spacing_m;
    profile.elevations.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = static_cast<double>(i) * spacing_m;
        double along;
        double cross;
        world_to_road(spec, transect.start_x + s * ux, transect.start_y + s * uy, &along, &cross);
        profile.elevations[i] = surface_elevation(spec, epoch, along, cross);
    }
    return profile;
}

SyntheticRoadSpec load_synth_spec(const std::string& path) {
    const KeyValueDocument doc = load_key_value(path);

    SyntheticRoadSpec spec;
    bool saw_road = false;
    for (const KeyValueSection& section : doc.sections) {
        if (section.name == "road") {
            if (saw_road) {
                throw MalformedSynthSpec(spot(path, section.line) + ": duplicate [road] section");
            }
            saw_road = true;
            for (const KeyValueEntry& e : section.entries) {
                if (e.key == "roadway_width_m") {
                    spec.roadway_width_m = number_value(e, path);
                } else if (e.key == "crown_slope") {
                    spec.crown_slope = number_value(e, path);
                } else if (e.key == "fore_slope_drop_m") {
                    spec.fore_slope_drop_m = number_value(e, path);
                } else if (e.key == "length_m") {
                    spec.length_m = number_value(e, path);
                } else if (e.key == "margin_m") {
                    spec.margin_m = number_value(e, path);
                } else if (e.key == "curvature") {
                    spec.curvature = number_value(e, path);
                } else if (e.key == "point_density") {
                    spec.point_density = number_value(e, path);
                } else if (e.key == "noise_m") {
                    spec.noise_m = number_value(e, path);
                } else if (e.key == "seed") {
                    const double v = number_value(e, path);
                    if (v < 0 || v != std::floor(v) || v > 1.8e19) {
                        throw MalformedSynthSpec(spot(path, e.line) +
                                                 ": 'seed' must be a non-negative integer");
                    }
                    spec.seed = static_cast<std::uint64_t>(v);
                } else if (e.key == "crs") {
                    spec.crs_label = e.value;
                } else {
                    throw MalformedSynthSpec(spot(path, e.line) + ": unknown key '" + e.key +
                                             "' in [road]");
                }
            }
            if (section.find("roadway_width_m") == nullptr || section.find("length_m") == nullptr) {
                throw MalformedSynthSpec(spot(path, section.line) +
                                         ": [road] needs roadway_width_m and length_m");
            }
        } else if (section.name == "heap") {
            SnowHeapSpec h;
            h.center_station_m = required_number(section, "center_station_m", path);
            h.peak_m = required_number(section, "peak_m", path);
            h.sigma_m = required_number(section, "sigma_m", path);
            h.along_extent_m = required_number(section, "along_extent_m", path);
            spec.snow_features.push_back(h);
        } else if (section.name == "banks") {
            if (spec.banks) {
                throw MalformedSynthSpec(spot(path, section.line) + ": duplicate [banks] section");
            }
            BankSpec b;
            b.gap_m = required_number(section, "gap_m", path);
            if (section.find("peak_m") != nullptr) {
                b.peak_m = required_number(section, "peak_m", path);
            }
            if (section.find("sigma_m") != nullptr) {
                b.sigma_m = required_number(section, "sigma_m", path);
            }
            if (section.find("ref_height_m") != nullptr) {
                b.ref_height_m = required_number(section, "ref_height_m", path);
            }
            spec.banks = b;
        } else if (section.name == "obstacle") {
            BoxObstacle b;
            b.along_min_m = required_number(section, "along_min_m", path);
            b.along_max_m = required_number(section, "along_max_m", path);
            b.cross_min_m = required_number(section, "cross_min_m", path);
            b.cross_max_m = required_number(section, "cross_max_m", path);
            b.height_m = required_number(section, "height_m", path);
            spec.obstacles.push_back(b);
        } else {
            throw MalformedSynthSpec(spot(path, section.line) + ": unknown section [" +
                                     section.name + "]");
        }
    }
    if (!saw_road) {
        throw MalformedSynthSpec(path + ": missing [road] section");
    }
    try {
        validate_spec(spec);
    } catch (const InvalidRoadSpec& e) {
        throw MalformedSynthSpec(path + ": " + e.what());
    }
    return spec;
}

}  // namespace winterscan
