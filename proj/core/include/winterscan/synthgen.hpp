#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "winterscan/dem.hpp"
#include "winterscan/errors.hpp"
#include "winterscan/pointcloud.hpp"

namespace winterscan {

class InvalidRoadSpec : public Error {
  public:
    using Error::Error;
};

class MalformedSynthSpec : public Error {
  public:
    using Error::Error;
};

enum class Epoch { Bare, Winter };

const char* epoch_name(Epoch epoch);
Epoch epoch_from_name(const std::string& name);

enum class GroundTruthLabel : std::uint8_t { Road, Snow, OffRoad };

/// Isotropic Gaussian snow heap in road coordinates. along_extent_m is the
/// along-road station of the heap center; center_station_m is its
/// across-road station measured from the left roadway edge.
struct SnowHeapSpec {
    double center_station_m = 0;
    double peak_m = 0;
    double sigma_m = 0;
    double along_extent_m = 0;
};

/// Two Gaussian ridges flanking the roadway. Ridge centers sit at
/// gap_m/2 + sigma*sqrt(2*ln(peak/ref_height)) from the road center so the
/// depth crosses ref_height_m exactly at the inner toes gap_m apart.
struct BankSpec {
    double gap_m = 0;
    double peak_m = 0.8;
    double sigma_m = 0.5;
    double ref_height_m = 0.05;
};

/// Axis-aligned box in road coordinates. Sample points inside the footprint
/// land on the box top (bare surface + height); boxes shed snow.
struct BoxObstacle {
    double along_min_m = 0;
    double along_max_m = 0;
    double cross_min_m = 0;
    double cross_max_m = 0;
    double height_m = 0;
};

/// Fore slopes descend this steeply (m of drop per m across) beyond the
/// roadway edge until fore_slope_drop_m is reached, then stay flat.
constexpr double kForeSlopeGrade = 5.0;

/// Winter points deeper than this are labeled snow.
constexpr double kSnowLabelMinDepth = 1e-3;

constexpr float kRoadIntensity = 0.35f;
constexpr float kSnowIntensity = 0.75f;
constexpr float kOffRoadIntensity = 0.15f;

struct SyntheticRoadSpec {
    double roadway_width_m = 8.0;
    double crown_slope = 0.02;       // m/m; tent crown, crest at the road center
    double fore_slope_drop_m = 0.5;  // vertical drop of the embankment beyond each edge
    double length_m = 50.0;
    double margin_m = 0.0;     // sampled strip beyond each roadway edge
    double curvature = 0.0;    // 1/m, 0 = straight; positive bends left
    double point_density = 100.0;  // points per square meter
    double noise_m = 0.005;        // uniform vertical jitter amplitude
    std::uint64_t seed = 1;
    std::string crs_label = "local-synth";
    std::vector<SnowHeapSpec> snow_features;
    std::optional<BankSpec> banks;
    std::vector<BoxObstacle> obstacles;
};

struct SyntheticCloud {
    PointCloud cloud;
    std::vector<GroundTruthLabel> labels;
};

void validate_spec(const SyntheticRoadSpec& spec);

/// Distance from the road center to each bank ridge center.
double bank_center_offset(const BankSpec& banks);

/// Closed-form surfaces in road coordinates (along, cross). cross runs from
/// the left roadway edge at 0 to roadway_width_m at the right edge.
/// Obstacles are excluded; they exist only in sampled clouds.
double bare_elevation(const SyntheticRoadSpec& spec, double along_m, double cross_m);
double snow_depth(const SyntheticRoadSpec& spec, double along_m, double cross_m);
double surface_elevation(const SyntheticRoadSpec& spec, Epoch epoch, double along_m, double cross_m);

/// Road <-> world mapping. Straight roads map (along, cross) to (x, y)
/// directly; curved roads bend the along axis onto an arc of radius
/// 1/curvature around the road center line.
void road_to_world(const SyntheticRoadSpec& spec, double along_m, double cross_m, double* x, double* y);
void world_to_road(const SyntheticRoadSpec& spec, double x, double y, double* along_m, double* cross_m);

/// Samples round(density * length * (width + 2*margin)) points uniformly
/// over the road strip. Identical (spec, epoch) inputs give byte-identical
/// clouds regardless of thread count; bare and winter share point positions
/// and jitter so their per-point difference is exactly the snow field.
SyntheticCloud generate_cloud(const SyntheticRoadSpec& spec, Epoch epoch);

/// Noise-free surface evaluation along a world-frame transect with the same
/// station layout as extract_profile.
SurfaceProfile analytic_profile(const SyntheticRoadSpec& spec, Epoch epoch, const Transect& transect,
                                double spacing_m);

/// Key/value spec file, same format family as the road registry. Sections:
/// one [road], any number of [heap] and [obstacle], at most one [banks].
SyntheticRoadSpec load_synth_spec(const std::string& path);

}  // namespace winterscan
