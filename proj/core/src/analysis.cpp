#include "winterscan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "winterscan/parallel.hpp"

namespace winterscan {

namespace {

double median_of_sorted(const std::vector<double>& v) {
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return median_of_sorted(v);
}

// Packs a signed cell coordinate pair into a hash key.
std::uint64_t cell_key(std::int32_t i, std::int32_t j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
}

void require_matching(const SurfaceProfile& profile, const SurfaceProfile& reference) {
    if (profile.elevations.size() != reference.elevations.size() ||
        profile.spacing_m != reference.spacing_m) {
        throw ProfileMismatch("profiles do not share stations (" +
                              std::to_string(profile.elevations.size()) + " @ " +
                              std::to_string(profile.spacing_m) + " vs " +
                              std::to_string(reference.elevations.size()) + " @ " +
                              std::to_string(reference.spacing_m) + ")");
    }
}

}  // namespace

SegmentationResult segment_road(const PointCloud& cloud, double seed_x, double seed_y, double seed_z,
                                const SegmentParams& params) {
    if (cloud.empty()) {
        throw EmptyCloud("cannot segment an empty cloud");
    }
    if (!std::isfinite(params.cell_m) || params.cell_m <= 0) {
        throw NonPositiveCell("segmentation cell size must be positive");
    }
    if (params.intensity_band && !cloud.has_intensity()) {
        throw Error("intensity band given but the cloud has no intensity channel");
    }
    const CloudBounds b = cloud_bounds(cloud);
    if (seed_x < b.min_x || seed_x > b.max_x || seed_y < b.min_y || seed_y > b.max_y) {
        throw SeedOutsideCloud("seed lies outside the cloud bounds");
    }

    // Cells are indexed relative to the seed, which sits at the center of
    // cell (0,0); translating cloud and seed together leaves indices alone.
    const double inv = 1.0 / params.cell_m;
    auto cell_i = [&](double y) {
        return static_cast<std::int32_t>(std::floor((y - seed_y) * inv + 0.5));
    };
    auto cell_j = [&](double x) {
        return static_cast<std::int32_t>(std::floor((x - seed_x) * inv + 0.5));
    };

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    buckets.reserve(cloud.size() / 4 + 16);
    for (std::size_t k = 0; k < cloud.size(); ++k) {
        buckets[cell_key(cell_i(cloud.y[k]), cell_j(cloud.x[k]))].push_back(k);
    }

    struct CellStats {
        double median_z;
        double median_intensity;
    };
    std::unordered_map<std::uint64_t, CellStats> stats;
    stats.reserve(buckets.size());
    // Returned by value: inserting into `stats` can rehash and would
    // invalidate a reference held across neighbor visits.
    auto stats_of = [&](std::uint64_t key, const std::vector<std::size_t>& members) -> CellStats {
        auto it = stats.find(key);
        if (it != stats.end()) {
            return it->second;
        }
        std::vector<double> zs;
        zs.reserve(members.size());
        for (std::size_t k : members) {
            zs.push_back(cloud.z[k]);
        }
        CellStats s{median(std::move(zs)), 0.0};
        if (params.intensity_band) {
            std::vector<double> is;
            is.reserve(members.size());
            for (std::size_t k : members) {
                is.push_back(cloud.intensity[k]);
            }
            s.median_intensity = median(std::move(is));
        }
        return stats.emplace(key, s).first->second;
    };

    const auto seed_it = buckets.find(cell_key(0, 0));
    if (seed_it == buckets.end()) {
        throw EmptyResult("seed cell holds no points");
    }

    SegmentationResult result;
    result.seed_x = seed_x;
    result.seed_y = seed_y;
    result.seed_z = seed_z;
    result.params = params;

    std::unordered_set<std::uint64_t> visited;
    std::deque<std::pair<std::int32_t, std::int32_t>> frontier;
    visited.insert(cell_key(0, 0));
    frontier.emplace_back(0, 0);

    while (!frontier.empty()) {
        const auto [ci, cj] = frontier.front();
        frontier.pop_front();
        const std::uint64_t key = cell_key(ci, cj);
        const std::vector<std::size_t>& members = buckets.at(key);
        const CellStats here = stats_of(key, members);
        result.member_indices.insert(result.member_indices.end(), members.begin(), members.end());

        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) {
                    continue;
                }
                const std::int32_t ni = ci + di;
                const std::int32_t nj = cj + dj;
                const std::uint64_t nkey = cell_key(ni, nj);
                if (visited.count(nkey) != 0) {
                    continue;
                }
                const auto nit = buckets.find(nkey);
                if (nit == buckets.end()) {
                    continue;
                }
                const CellStats there = stats_of(nkey, nit->second);
                const double step = std::abs(there.median_z - here.median_z);
                if (step > params.max_step_m) {
                    continue;
                }
                const double dist = params.cell_m * std::hypot(di, dj);
                if (step / dist > params.max_slope) {
                    continue;
                }
                if (params.intensity_band &&
                    (there.median_intensity < params.intensity_band->first ||
                     there.median_intensity > params.intensity_band->second)) {
                    continue;
                }
                visited.insert(nkey);
                frontier.emplace_back(ni, nj);
            }
        }
    }

    std::sort(result.member_indices.begin(), result.member_indices.end());
    return result;
}

std::vector<SnowFeature> detect_snow_features(const SurfaceProfile& profile,
                                              const SurfaceProfile& reference, double min_depth_m,
                                              double min_extent_m) {
    require_matching(profile, reference);
    if (!std::isfinite(min_depth_m) || min_depth_m <= 0) {
        throw Error("snow detection depth threshold must be positive");
    }
    if (!std::isfinite(min_extent_m) || min_extent_m < 0) {
        throw Error("snow detection extent threshold must be non-negative");
    }

    const std::size_t n = profile.size();
    std::vector<SnowFeature> features;
    std::size_t run_start = 0;
    bool in_run = false;

    auto close_run = [&](std::size_t run_end) {
        // A feature needs two consecutive over-threshold stations so its
        // span is non-degenerate.
        if (run_end == run_start) {
            return;
        }
        const double extent = static_cast<double>(run_end - run_start) * profile.spacing_m;
        if (extent < min_extent_m) {
            return;
        }
        SnowFeature f;
        f.start_station_m = profile.station(run_start);
        f.end_station_m = profile.station(run_end);
        for (std::size_t k = run_start; k <= run_end; ++k) {
            const double depth = profile.elevations[k] - reference.elevations[k];
            f.max_depth_m = std::max(f.max_depth_m, depth);
            if (k > run_start) {
                const double prev = profile.elevations[k - 1] - reference.elevations[k - 1];
                f.area_m2 += (prev + depth) / 2 * profile.spacing_m;
            }
        }
        features.push_back(f);
    };

    for (std::size_t i = 0; i < n; ++i) {
        const double pv = profile.elevations[i];
        const double rv = reference.elevations[i];
        const bool over = std::isfinite(pv) && std::isfinite(rv) && (pv - rv) > min_depth_m;
        if (over && !in_run) {
            run_start = i;
            in_run = true;
        } else if (!over && in_run) {
            close_run(i - 1);
            in_run = false;
        }
    }
    if (in_run) {
        close_run(n - 1);
    }
    return features;
}

WidthMeasurement effective_width(const SurfaceProfile& profile, const SurfaceProfile& reference,
                                 const DesignCrossSection& design, double min_depth_m) {
    require_matching(profile, reference);
    if (!std::isfinite(min_depth_m) || min_depth_m < 0) {
        throw Error("drivability depth threshold must be non-negative");
    }

    const double width = design.roadway_width_m();
    const std::size_t last =
        static_cast<std::size_t>(std::floor(width / profile.spacing_m + 1e-9));
    if (last >= profile.size()) {
        throw TransectTooShort("profile covers " + std::to_string(profile.length()) +
                               " m but the designed roadway needs " + std::to_string(width) + " m");
    }

    WidthMeasurement m;
    m.transect_id = profile.transect_id;
    m.design_roadway_width_m = width;

    // Longest run of clear stations; nodata blocks. Leftmost run wins ties.
    std::size_t best_start = 0;
    std::size_t best_end = 0;
    bool any_clear = false;
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= last; ++i) {
        const double pv = profile.elevations[i];
        const double rv = reference.elevations[i];
        const bool clear = std::isfinite(pv) && std::isfinite(rv) && (pv - rv) <= min_depth_m;
        if (clear) {
            if (!in_run) {
                run_start = i;
                in_run = true;
            }
            if (!any_clear || i - run_start > best_end - best_start) {
                best_start = run_start;
                best_end = i;
            }
            any_clear = true;
        } else {
            in_run = false;
        }
    }

    if (!any_clear) {
        m.fully_blocked = true;
        m.effective_width_m = 0;
        m.deficit_m = width;
        return m;
    }
    m.clear_span_start_m = profile.station(best_start);
    m.clear_span_end_m = profile.station(best_end);
    m.effective_width_m = m.clear_span_end_m - m.clear_span_start_m;
    m.deficit_m = width - m.effective_width_m;
    return m;
}

std::pair<double, double> detect_profile_edges(const SurfaceProfile& profile, double drop_m) {
    if (!std::isfinite(drop_m) || drop_m <= 0) {
        throw Error("edge drop threshold must be positive");
    }
    const std::size_t n = profile.size();
    std::size_t valid = 0;
    for (double v : profile.elevations) {
        if (std::isfinite(v)) {
            ++valid;
        }
    }
    if (valid < 3) {
        throw EdgesNotFound("profile has fewer than 3 valid samples");
    }

    std::vector<double> central;
    for (std::size_t i = n / 3; i < n - n / 3; ++i) {
        if (std::isfinite(profile.elevations[i])) {
            central.push_back(profile.elevations[i]);
        }
    }
    if (central.empty()) {
        throw EdgesNotFound("central third of the profile is all nodata");
    }
    const double level = median(std::move(central));
    const double floor_level = level - drop_m;

    const std::size_t center = n / 2;
    std::optional<std::size_t> left;
    for (std::size_t i = center + 1; i-- > 0;) {
        const double v = profile.elevations[i];
        if (std::isfinite(v) && v <= floor_level) {
            left = i;
            break;
        }
    }
    std::optional<std::size_t> right;
    for (std::size_t i = center; i < n; ++i) {
        const double v = profile.elevations[i];
        if (std::isfinite(v) && v <= floor_level) {
            right = i;
            break;
        }
    }
    if (!left || !right) {
        throw EdgesNotFound("no " + std::string(!left ? "left" : "right") +
                            " drop of " + std::to_string(drop_m) + " m below the roadway level");
    }
    return {profile.station(*left), profile.station(*right)};
}

Polyline load_centerline_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open " + path);
    }
    Polyline points;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const std::string at = path + ":" + std::to_string(line_no);
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw Error(at + ": expected 2 fields `x,y`");
        }
        const std::string fx = line.substr(0, comma);
        const std::string fy = line.substr(comma + 1);
        char* end = nullptr;
        const double x = std::strtod(fx.c_str(), &end);
        const bool x_ok = end != fx.c_str() && *end == '\0';
        const double y = std::strtod(fy.c_str(), &end);
        const bool y_ok = end != fy.c_str() && *end == '\0';
        if (!x_ok || !y_ok) {
            if (points.empty() && line_no <= 2) {
                continue;  // header row
            }
            throw Error(at + ": non-numeric coordinate field");
        }
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw Error(at + ": coordinates must be finite");
        }
        points.push_back({x, y});
    }
    if (points.size() < 2) {
        throw Error(path + ": centerline needs at least two vertices");
    }
    return points;
}

std::vector<BankStation> snowbank_width(const PointCloud& map_cloud, const Polyline& centerline,
                                        double station_step_m, double bank_height_m, double cell_m,
                                        double half_width_m) {
    if (map_cloud.empty()) {
        throw EmptyCloud("cannot measure banks on an empty cloud");
    }
    if (centerline.size() < 2) {
        throw Error("centerline needs at least two vertices");
    }
    if (!std::isfinite(station_step_m) || station_step_m <= 0) {
        throw NonPositiveSpacing("station step must be positive");
    }
    if (!std::isfinite(bank_height_m) || bank_height_m <= 0) {
        throw Error("bank height must be positive");
    }
    if (!std::isfinite(cell_m) || cell_m <= 0) {
        throw NonPositiveCell("bank binning cell must be positive");
    }
    if (!std::isfinite(half_width_m) || half_width_m < 2 * cell_m) {
        throw Error("search half width must cover at least two cells");
    }

    struct SegmentSpan {
        double x;
        double y;
        double tx;
        double ty;
        double start;  // cumulative arc length at the segment start
        double length;
    };
    std::vector<SegmentSpan> segments;
    double total = 0;
    for (std::size_t k = 0; k + 1 < centerline.size(); ++k) {
        const double dx = centerline[k + 1].x - centerline[k].x;
        const double dy = centerline[k + 1].y - centerline[k].y;
        const double len = std::hypot(dx, dy);
        if (!std::isfinite(len)) {
            throw Error("centerline coordinates must be finite");
        }
        if (len == 0) {
            continue;  // duplicate vertex
        }
        segments.push_back({centerline[k].x, centerline[k].y, dx / len, dy / len, total, len});
        total += len;
    }
    if (segments.empty()) {
        throw Error("centerline has zero length");
    }

    // Snap the half width to a whole number of cells so the bin boundaries
    // are symmetric around the centerline.
    const std::size_t half_bins = static_cast<std::size_t>(std::ceil(half_width_m / cell_m));
    const double half = static_cast<double>(half_bins) * cell_m;
    const std::size_t n_bins = 2 * half_bins;

    const std::size_t n_stations =
        static_cast<std::size_t>(std::floor(total / station_step_m + 1e-9)) + 1;
    std::vector<BankStation> out(n_stations);
    std::vector<std::uint8_t> empty_station(n_stations, 0);

    parallel_for(0, n_stations, [&](std::size_t lo, std::size_t hi) {
        std::vector<std::vector<double>> bins(n_bins);
        for (std::size_t s = lo; s < hi; ++s) {
            const double station = static_cast<double>(s) * station_step_m;
            std::size_t seg = segments.size() - 1;
            for (std::size_t k = 0; k < segments.size(); ++k) {
                if (station <= segments[k].start + segments[k].length + 1e-9) {
                    seg = k;
                    break;
                }
            }
            const SegmentSpan& sp = segments[seg];
            const double along0 = station - sp.start;
            const double px = sp.x + along0 * sp.tx;
            const double py = sp.y + along0 * sp.ty;
            const double nx = -sp.ty;
            const double ny = sp.tx;

            for (auto& b : bins) {
                b.clear();
            }
            std::size_t hits = 0;
            for (std::size_t k = 0; k < map_cloud.size(); ++k) {
                const double rx = map_cloud.x[k] - px;
                const double ry = map_cloud.y[k] - py;
                const double along = rx * sp.tx + ry * sp.ty;
                if (std::abs(along) > station_step_m / 2) {
                    continue;
                }
                const double across = rx * nx + ry * ny;
                if (across < -half || across >= half) {
                    continue;
                }
                const std::size_t bin = static_cast<std::size_t>(std::floor((across + half) / cell_m));
                if (bin >= n_bins) {
                    continue;
                }
                bins[bin].push_back(map_cloud.z[k]);
                ++hits;
            }
            out[s].station_m = station;
            if (hits == 0) {
                empty_station[s] = 1;
                continue;
            }

            std::vector<double> bin_median(n_bins, DemGrid::nodata());
            for (std::size_t b = 0; b < n_bins; ++b) {
                if (!bins[b].empty()) {
                    std::sort(bins[b].begin(), bins[b].end());
                    bin_median[b] = median_of_sorted(bins[b]);
                }
            }

            // Road level from the central third of the strip.
            std::vector<double> central;
            const std::size_t third = std::max<std::size_t>(1, half_bins / 3);
            for (std::size_t b = half_bins - third; b < half_bins + third; ++b) {
                if (std::isfinite(bin_median[b])) {
                    central.push_back(bin_median[b]);
                }
            }
            if (central.empty()) {
                continue;
            }
            const double level = median(std::move(central));
            const double rise = level + bank_height_m;

            std::optional<double> right_across;
            for (std::size_t b = half_bins; b < n_bins; ++b) {
                if (std::isfinite(bin_median[b]) && bin_median[b] >= rise) {
                    right_across = -half + (static_cast<double>(b) + 0.5) * cell_m;
                    break;
                }
            }
            std::optional<double> left_across;
            for (std::size_t b = half_bins; b-- > 0;) {
                if (std::isfinite(bin_median[b]) && bin_median[b] >= rise) {
                    left_across = -half + (static_cast<double>(b) + 0.5) * cell_m;
                    break;
                }
            }
            if (right_across && left_across) {
                out[s].width_m = *right_across - *left_across;
            }
        }
    });

    bool all_empty = true;
    for (std::uint8_t e : empty_station) {
        if (e == 0) {
            all_empty = false;
            break;
        }
    }
    if (all_empty) {
        throw EmptyCorridor("no map points near any centerline station");
    }
    return out;
}

MarkingResult detect_markings(const IntensityImage& image, double threshold) {
    if (!(threshold > 0 && threshold < 1)) {
        throw Error("marking threshold must lie strictly between 0 and 1");
    }
    if (image.n_rows == 0 || image.n_cols == 0 ||
        image.values.size() != image.n_rows * image.n_cols) {
        throw Error("image dimensions do not match its sample count");
    }

    MarkingResult result;
    result.n_rows = image.n_rows;
    result.n_cols = image.n_cols;
    result.mask.assign(image.values.size(), 0);
    std::vector<std::size_t> column_hits(image.n_cols, 0);
    for (std::size_t r = 0; r < image.n_rows; ++r) {
        for (std::size_t c = 0; c < image.n_cols; ++c) {
            if (image.values[r * image.n_cols + c] > threshold) {
                result.mask[r * image.n_cols + c] = 1;
                ++column_hits[c];
            }
        }
    }

    bool in_run = false;
    std::size_t run_start = 0;
    for (std::size_t c = 0; c <= image.n_cols; ++c) {
        const bool hot = c < image.n_cols && 2 * column_hits[c] > image.n_rows;
        if (hot && !in_run) {
            run_start = c;
            in_run = true;
        } else if (!hot && in_run) {
            result.clusters.push_back({run_start, c - 1});
            in_run = false;
        }
    }
    return result;
}

}  // namespace winterscan
