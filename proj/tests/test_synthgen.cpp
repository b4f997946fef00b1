#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "test_util.hpp"
#include "winterscan/analysis.hpp"
#include "winterscan/dem.hpp"
#include "winterscan/synthgen.hpp"

namespace ws = winterscan;

namespace {

ws::SyntheticRoadSpec flat_spec() {
    ws::SyntheticRoadSpec spec;
    spec.roadway_width_m = 8.0;
    spec.length_m = 50.0;
    spec.crown_slope = 0.0;
    spec.fore_slope_drop_m = 0.0;
    spec.margin_m = 0.0;
    spec.noise_m = 0.0;
    spec.point_density = 100.0;
    spec.seed = 11;
    return spec;
}

}  // namespace

TEST_SUITE("synthgen") {

TEST_CASE("point count is density times sampled area") {
    const auto spec = flat_spec();  // 100 / m^2 over 50 m x 8 m
    const auto bare = ws::generate_cloud(spec, ws::Epoch::Bare);
    CHECK(bare.cloud.size() == 40000);
    CHECK(bare.labels.size() == 40000);
    CHECK(bare.cloud.has_intensity());
    CHECK(bare.cloud.crs_label == "local-synth");

    auto wide = spec;
    wide.margin_m = 2.0;  // band 12 m
    CHECK(ws::generate_cloud(wide, ws::Epoch::Bare).cloud.size() == 60000);
}

TEST_CASE("bare epoch has no snow labels") {
    auto spec = flat_spec();
    spec.snow_features.push_back({4.0, 0.4, 0.5, 25.0});
    const auto bare = ws::generate_cloud(spec, ws::Epoch::Bare);
    for (auto label : bare.labels) CHECK(label != ws::GroundTruthLabel::Snow);
}

TEST_CASE("generation is deterministic") {
    auto spec = flat_spec();
    spec.noise_m = 0.01;
    spec.snow_features.push_back({4.0, 0.3, 0.6, 10.0});
    const auto a = ws::generate_cloud(spec, ws::Epoch::Winter);
    const auto b = ws::generate_cloud(spec, ws::Epoch::Winter);
    CHECK(a.cloud.x == b.cloud.x);
    CHECK(a.cloud.y == b.cloud.y);
    CHECK(a.cloud.z == b.cloud.z);
    CHECK(a.cloud.intensity == b.cloud.intensity);
    CHECK(a.labels == b.labels);
}

TEST_CASE("winter minus bare equals the snow field per point") {
    auto spec = flat_spec();
    spec.crown_slope = 0.02;
    spec.fore_slope_drop_m = 0.5;
    spec.margin_m = 1.5;
    spec.noise_m = 0.005;
    spec.snow_features.push_back({4.0, 0.4, 0.5, 25.0});
    spec.snow_features.push_back({1.0, 0.2, 0.8, 10.0});
    spec.banks = ws::BankSpec{5.6, 0.8, 0.5, 0.05};

    const auto bare = ws::generate_cloud(spec, ws::Epoch::Bare);
    const auto winter = ws::generate_cloud(spec, ws::Epoch::Winter);
    REQUIRE(bare.cloud.size() == winter.cloud.size());
    // Epochs share positions and jitter draws.
    CHECK(bare.cloud.x == winter.cloud.x);
    CHECK(bare.cloud.y == winter.cloud.y);
    for (std::size_t i = 0; i < bare.cloud.size(); ++i) {
        double along, cross;
        ws::world_to_road(spec, bare.cloud.x[i], bare.cloud.y[i], &along, &cross);
        if (bare.labels[i] == ws::GroundTruthLabel::OffRoad &&
            winter.cloud.z[i] == bare.cloud.z[i]) {
            continue;  // obstacle points shed snow in both epochs
        }
        const double expected = ws::snow_depth(spec, along, cross);
        CHECK(winter.cloud.z[i] - bare.cloud.z[i] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("labels map to the fixed intensity classes") {
    auto spec = flat_spec();
    spec.margin_m = 2.0;
    spec.snow_features.push_back({4.0, 0.5, 0.7, 25.0});
    spec.obstacles.push_back({40.0, 42.0, 3.0, 5.0, 0.6});
    const auto winter = ws::generate_cloud(spec, ws::Epoch::Winter);

    std::size_t roads = 0, snows = 0, offs = 0;
    for (std::size_t i = 0; i < winter.cloud.size(); ++i) {
        switch (winter.labels[i]) {
            case ws::GroundTruthLabel::Road:
                ++roads;
                CHECK(winter.cloud.intensity[i] == ws::kRoadIntensity);
                break;
            case ws::GroundTruthLabel::Snow:
                ++snows;
                CHECK(winter.cloud.intensity[i] == ws::kSnowIntensity);
                break;
            case ws::GroundTruthLabel::OffRoad:
                ++offs;
                CHECK(winter.cloud.intensity[i] == ws::kOffRoadIntensity);
                break;
        }
    }
    // All three classes occur: margin and obstacle points are off-road,
    // the heap is snow, the rest of the roadway is road.
    CHECK(roads > 0);
    CHECK(snows > 0);
    CHECK(offs > 0);
}

TEST_CASE("obstacle points sit on the box top and shed snow") {
    auto spec = flat_spec();
    const ws::BoxObstacle box{20.0, 22.0, 3.0, 5.0, 0.5};
    spec.obstacles.push_back(box);
    spec.snow_features.push_back({4.0, 0.4, 0.5, 21.0});  // heap overlapping the box

    const auto winter = ws::generate_cloud(spec, ws::Epoch::Winter);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < winter.cloud.size(); ++i) {
        const double along = winter.cloud.x[i];
        const double cross = winter.cloud.y[i];
        if (along < box.along_min_m || along > box.along_max_m) continue;
        if (cross < box.cross_min_m || cross > box.cross_max_m) continue;
        ++hits;
        CHECK(winter.labels[i] == ws::GroundTruthLabel::OffRoad);
        // noise_m is zero, so box points land exactly on the box top.
        CHECK(winter.cloud.z[i] == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(hits > 100);
}

TEST_CASE("analytic profile of a flat road is zero") {
    const auto spec = flat_spec();
    const auto t = ws::make_transect("flat", 10.0, 0.0, 0.0, 1.0, 8.0);
    const auto profile = ws::analytic_profile(spec, ws::Epoch::Bare, t, 0.05);
    REQUIRE(profile.size() == 161);
    for (double v : profile.elevations) CHECK(v == 0.0);
}

TEST_CASE("crowned road peaks at the centerline") {
    auto spec = flat_spec();
    spec.crown_slope = 0.02;
    const auto t = ws::make_transect("crown", 10.0, 0.0, 0.0, 1.0, 8.0);
    const auto profile = ws::analytic_profile(spec, ws::Epoch::Bare, t, 0.05);
    std::size_t best = 0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.elevations[i] > profile.elevations[best]) best = i;
    }
    CHECK(profile.station(best) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(profile.elevations[best] == doctest::Approx(0.08).epsilon(1e-12));
    // Tent flanks are symmetric.
    CHECK(profile.elevations.front() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(profile.elevations.back() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fore slopes descend at the fixed grade then flatten") {
    auto spec = flat_spec();
    spec.fore_slope_drop_m = 0.5;
    // 0.05 m beyond the edge: dropped 0.25 m. 0.2 m beyond: clamped at 0.5.
    CHECK(ws::bare_elevation(spec, 0.0, -0.05) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(ws::bare_elevation(spec, 0.0, 8.05) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(ws::bare_elevation(spec, 0.0, -0.2) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ws::bare_elevation(spec, 0.0, 9.0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ws::bare_elevation(spec, 0.0, 4.0) == 0.0);
}

TEST_CASE("winter analytic profile adds the snow field exactly") {
    auto spec = flat_spec();
    spec.crown_slope = 0.02;
    spec.snow_features.push_back({3.0, 0.4, 0.5, 25.0});
    spec.banks = ws::BankSpec{5.6, 0.8, 0.5, 0.05};
    const auto t = ws::make_transect("w", 25.0, 0.0, 0.0, 1.0, 8.0);
    const auto bare = ws::analytic_profile(spec, ws::Epoch::Bare, t, 0.1);
    const auto winter = ws::analytic_profile(spec, ws::Epoch::Winter, t, 0.1);
    REQUIRE(bare.size() == winter.size());
    for (std::size_t i = 0; i < bare.size(); ++i) {
        const double cross = t.start_y + bare.station(i);
        const double depth = ws::snow_depth(spec, 25.0, cross);
        CHECK(winter.elevations[i] - bare.elevations[i] ==
              doctest::Approx(depth).epsilon(1e-12));
    }
}

TEST_CASE("bank toes cross the reference height exactly gap_m apart") {
    const ws::BankSpec banks{5.6, 0.8, 0.5, 0.05};
    const double offset = ws::bank_center_offset(banks);
    CHECK(offset == doctest::Approx(2.8 + 0.5 * std::sqrt(2.0 * std::log(16.0))).epsilon(1e-12));

    auto spec = flat_spec();
    spec.banks = banks;
    // Toes sit gap_m apart, centered on the road axis (cross = 4).
    const double left_toe = 4.0 - 2.8;
    const double right_toe = 4.0 + 2.8;
    CHECK(ws::snow_depth(spec, 0.0, left_toe) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(ws::snow_depth(spec, 0.0, right_toe) == doctest::Approx(0.05).epsilon(1e-6));
    // The road center is effectively clear.
    CHECK(ws::snow_depth(spec, 0.0, 4.0) < 1e-10);
}

TEST_CASE("curved road mapping round trips") {
    auto spec = flat_spec();
    spec.curvature = 0.02;  // 50 m radius
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> along(0.0, spec.length_m);
    std::uniform_real_distribution<double> cross(-2.0, 10.0);
    for (int i = 0; i < 500; ++i) {
        const double u = along(eng);
        const double v = cross(eng);
        double x, y, u2, v2;
        ws::road_to_world(spec, u, v, &x, &y);
        ws::world_to_road(spec, x, y, &u2, &v2);
        CHECK(u2 == doctest::Approx(u).epsilon(1e-9));
        CHECK(v2 == doctest::Approx(v).epsilon(1e-9));
    }
    // Straight mapping is the identity.
    double x, y;
    ws::road_to_world(flat_spec(), 12.5, 3.0, &x, &y);
    CHECK(x == 12.5);
    CHECK(y == 3.0);
}

TEST_CASE("spec validation rejects impossible geometry") {
    auto spec = flat_spec();
    spec.curvature = 0.3;  // radius ~3.3 m < half band
    CHECK_THROWS_AS(ws::validate_spec(spec), ws::InvalidRoadSpec);

    spec = flat_spec();
    spec.curvature = 0.08;
    spec.length_m = 50.0;  // arc 4 rad > pi
    CHECK_THROWS_AS(ws::validate_spec(spec), ws::InvalidRoadSpec);

    spec = flat_spec();
    spec.obstacles.push_back({5.0, 5.0, 0.0, 1.0, 0.5});  // empty along extent
    CHECK_THROWS_AS(ws::validate_spec(spec), ws::InvalidRoadSpec);

    spec = flat_spec();
    spec.banks = ws::BankSpec{5.6, 0.04, 0.5, 0.05};  // peak below ref height
    CHECK_THROWS_AS(ws::validate_spec(spec), ws::InvalidRoadSpec);

    spec = flat_spec();
    spec.snow_features.push_back({4.0, 0.4, -0.5, 10.0});
    CHECK_THROWS_AS(ws::validate_spec(spec), ws::InvalidRoadSpec);

    spec = flat_spec();
    spec.point_density = -1.0;
    CHECK_THROWS_AS(ws::validate_spec(spec), ws::InvalidRoadSpec);
}

TEST_CASE("rasterized winter cloud converges to the analytic surface") {
    auto spec = flat_spec();
    spec.crown_slope = 0.02;
    // 9 points per 0.1 m cell: empty cells are ~1e-4 rare, so bilinear
    // stations (which need all four neighbor cells) stay valid.
    spec.point_density = 900.0;
    spec.noise_m = 0.005;
    spec.length_m = 50.0;
    spec.snow_features.push_back({4.0, 0.4, 0.5, 25.0});

    const auto winter = ws::generate_cloud(spec, ws::Epoch::Winter);
    const double cell = 0.1;
    const auto grid = ws::rasterize(winter.cloud, cell);

    // Inner transect through the heap; steepest slope on it is the heap
    // flank (peak/sigma * exp(-1/2) ~ 0.49), so the closure bound
    // 2 * cell * max_slope ~ 0.1 covers discretization. The pinned 0.05
    // also absorbs sampling scatter within a cell.
    const auto t = ws::make_transect("conv", 25.0, 1.0, 0.0, 1.0, 6.0);
    const auto dem_profile = ws::extract_profile(grid, t, 0.05);
    const auto truth = ws::analytic_profile(spec, ws::Epoch::Winter, t, 0.05);
    REQUIRE(dem_profile.size() == truth.size());
    std::size_t compared = 0;
    for (std::size_t i = 0; i < dem_profile.size(); ++i) {
        if (ws::DemGrid::is_nodata(dem_profile.elevations[i])) continue;
        ++compared;
        CAPTURE(i);
        CHECK(std::abs(dem_profile.elevations[i] - truth.elevations[i]) <= 0.05);
    }
    CHECK(compared >= dem_profile.size() - 2);
}

TEST_CASE("spec file loads every section") {
    testutil::TempDir dir("synth");
    testutil::write_text(dir.file("road.spec"),
                         "# synthetic winter road\n"
                         "[road]\n"
                         "roadway_width_m = 8\n"
                         "length_m = 60\n"
                         "crown_slope = 0.02\n"
                         "fore_slope_drop_m = 0.5\n"
                         "margin_m = 2\n"
                         "curvature = 0.002\n"
                         "point_density = 150\n"
                         "noise_m = 0.004\n"
                         "seed = 7\n"
                         "crs = EPSG:3067\n"
                         "\n"
                         "[heap]\n"
                         "center_station_m = 4\n"
                         "peak_m = 0.4\n"
                         "sigma_m = 0.5\n"
                         "along_extent_m = 30\n"
                         "\n"
                         "[banks]\n"
                         "gap_m = 5.6\n"
                         "peak_m = 0.8\n"
                         "sigma_m = 0.5\n"
                         "ref_height_m = 0.05\n"
                         "\n"
                         "[obstacle]\n"
                         "along_min_m = 10\n"
                         "along_max_m = 12\n"
                         "cross_min_m = 3\n"
                         "cross_max_m = 5\n"
                         "height_m = 0.5\n");
    const auto spec = ws::load_synth_spec(dir.file("road.spec"));
    CHECK(spec.roadway_width_m == 8.0);
    CHECK(spec.length_m == 60.0);
    CHECK(spec.crown_slope == 0.02);
    CHECK(spec.fore_slope_drop_m == 0.5);
    CHECK(spec.margin_m == 2.0);
    CHECK(spec.curvature == 0.002);
    CHECK(spec.point_density == 150.0);
    CHECK(spec.noise_m == 0.004);
    CHECK(spec.seed == 7);
    CHECK(spec.crs_label == "EPSG:3067");
    REQUIRE(spec.snow_features.size() == 1);
    CHECK(spec.snow_features[0].along_extent_m == 30.0);
    REQUIRE(spec.banks.has_value());
    CHECK(spec.banks->gap_m == 5.6);
    REQUIRE(spec.obstacles.size() == 1);
    CHECK(spec.obstacles[0].height_m == 0.5);
}

TEST_CASE("spec file errors carry the offending line") {
    testutil::TempDir dir("synth");

    testutil::write_text(dir.file("noroad.spec"), "[heap]\ncenter_station_m = 1\npeak_m = 1\n"
                                                  "sigma_m = 1\nalong_extent_m = 1\n");
    CHECK_THROWS_AS(ws::load_synth_spec(dir.file("noroad.spec")), ws::MalformedSynthSpec);

    testutil::write_text(dir.file("unknown.spec"),
                         "[road]\nroadway_width_m = 8\nlength_m = 50\nbogus_key = 1\n");
    try {
        ws::load_synth_spec(dir.file("unknown.spec"));
        FAIL("expected MalformedSynthSpec");
    } catch (const ws::MalformedSynthSpec& e) {
        CHECK(std::string(e.what()).find(":4") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }

    testutil::write_text(dir.file("dupbanks.spec"),
                         "[road]\nroadway_width_m = 8\nlength_m = 50\n"
                         "[banks]\ngap_m = 5\n[banks]\ngap_m = 6\n");
    CHECK_THROWS_AS(ws::load_synth_spec(dir.file("dupbanks.spec")), ws::MalformedSynthSpec);

    testutil::write_text(dir.file("missing.spec"),
                         "[road]\nroadway_width_m = 8\nlength_m = 50\n[heap]\npeak_m = 1\n");
    CHECK_THROWS_AS(ws::load_synth_spec(dir.file("missing.spec")), ws::MalformedSynthSpec);

    testutil::write_text(dir.file("badnum.spec"),
                         "[road]\nroadway_width_m = eight\nlength_m = 50\n");
    CHECK_THROWS_AS(ws::load_synth_spec(dir.file("badnum.spec")), ws::MalformedSynthSpec);

    testutil::write_text(dir.file("badsec.spec"),
                         "[road]\nroadway_width_m = 8\nlength_m = 50\n[mystery]\nk = 1\n");
    CHECK_THROWS_AS(ws::load_synth_spec(dir.file("badsec.spec")), ws::MalformedSynthSpec);

    testutil::write_text(dir.file("dupkey.spec"),
                         "[road]\nroadway_width_m = 8\nlength_m = 50\n"
                         "[heap]\ncenter_station_m = 1\ncenter_station_m = 2\npeak_m = 1\n"
                         "sigma_m = 1\nalong_extent_m = 1\n");
    CHECK_THROWS_AS(ws::load_synth_spec(dir.file("dupkey.spec")), ws::MalformedSynthSpec);

    // Structurally sound but physically invalid values surface as
    // MalformedSynthSpec too.
    testutil::write_text(dir.file("negsigma.spec"),
                         "[road]\nroadway_width_m = 8\nlength_m = 50\n"
                         "[heap]\ncenter_station_m = 1\npeak_m = 1\nsigma_m = -1\n"
                         "along_extent_m = 1\n");
    CHECK_THROWS_AS(ws::load_synth_spec(dir.file("negsigma.spec")), ws::MalformedSynthSpec);

    testutil::write_text(dir.file("epoch.spec"), "");
    CHECK(ws::epoch_from_name("bare") == ws::Epoch::Bare);
    CHECK(ws::epoch_from_name("winter") == ws::Epoch::Winter);
    CHECK_THROWS_AS(ws::epoch_from_name("spring"), ws::Error);
    CHECK(std::string(ws::epoch_name(ws::Epoch::Bare)) == "bare");
    CHECK(std::string(ws::epoch_name(ws::Epoch::Winter)) == "winter");
}

}  // TEST_SUITE("synthgen")
