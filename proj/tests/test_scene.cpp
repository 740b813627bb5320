#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "dca/dataset.hpp"
#include "dca/scene.hpp"

using dca::Frame;
using dca::GenConfig;
using dca::SceneSpec;

TEST_CASE("illumination_set is the fixed 11-variant table") {
    const auto& set = dca::illumination_set();
    REQUIRE(set.size() == 11);
    std::set<std::string> ids;
    for (const auto& v : set) ids.insert(v.id);
    CHECK(ids.size() == 11);
    for (const char* combo : {"M+I", "Nn+I", "Nt+I", "M+I+E", "Nn+I+E", "Nt+I+E"})
        CHECK(ids.count(combo) == 1);

    const auto& nt = dca::illumination_by_id("Nt");
    CHECK(nt.sun.has_value());
    CHECK(nt.indoor.empty());
    CHECK_FALSE(nt.environment.has_value());

    const auto& full = dca::illumination_by_id("Nn+I+E");
    CHECK(full.sun.has_value());
    CHECK_FALSE(full.indoor.empty());
    CHECK(full.environment.has_value());

    CHECK_THROWS_AS(dca::illumination_by_id("bogus"), dca::ConfigError);
}

TEST_CASE("generate_scene is deterministic and seed-sensitive") {
    GenConfig cfg;
    cfg.viewpoints = 3;
    SceneSpec a = dca::generate_scene(7, cfg);
    SceneSpec b = dca::generate_scene(7, cfg);
    CHECK(a.serialize() == b.serialize());

    SceneSpec c = dca::generate_scene(8, cfg);
    CHECK(a.serialize() != c.serialize());

    CHECK(a.primitives.size() >= 3);
    CHECK(a.primitives.size() <= 8);
    CHECK(a.viewpoints.size() == 3);
}

TEST_CASE("every pixel of every viewpoint has full-coverage depth in range") {
    GenConfig cfg;
    cfg.viewpoints = 2;
    for (uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        SceneSpec scene = dca::generate_scene(seed, cfg);
        for (int64_t v = 0; v < cfg.viewpoints; ++v) {
            Frame frame = dca::render_frame(scene, v, dca::illumination_by_id("E"), 64, 64);
            for (float d : frame.depth) {
                CHECK(d > 1e-3f);
                CHECK(d <= 10.0f);
            }
        }
    }
}

TEST_CASE("frontal wall gives exact planar depth") {
    // camera centered in a 10-wide room looking straight down +Z at the wall
    // 5 m away; planar depth of every wall pixel is exactly 5
    SceneSpec scene;
    scene.room_size = {10.0, 8.0, 8.0};
    dca::CameraPose pose;
    pose.position = {5.0, 4.0, 3.0};
    pose.yaw = 0.0;
    pose.pitch = 0.0;
    pose.fov_deg = 40.0;  // narrow enough that every ray exits through the +Z wall
    scene.viewpoints.push_back(pose);

    Frame frame = dca::render_frame(scene, 0, dca::illumination_by_id("E"), 64, 64);
    for (float d : frame.depth) CHECK(d == 5.0f);
}

TEST_CASE("depth is bit-identical across illumination variants, rgb differs") {
    GenConfig cfg;
    SceneSpec scene = dca::generate_scene(3, cfg);
    Frame a = dca::render_frame(scene, 0, dca::illumination_by_id("M"), 64, 96);
    Frame b = dca::render_frame(scene, 0, dca::illumination_by_id("Nn+I+E"), 64, 96);
    CHECK(a.depth == b.depth);
    CHECK(a.rgb != b.rgb);
}

TEST_CASE("render_frame is byte-deterministic") {
    GenConfig cfg;
    SceneSpec scene = dca::generate_scene(4, cfg);
    Frame a = dca::render_frame(scene, 0, dca::illumination_by_id("M+I"), 64, 96);
    Frame b = dca::render_frame(scene, 0, dca::illumination_by_id("M+I"), 64, 96);
    CHECK(a.rgb == b.rgb);
    CHECK(a.depth == b.depth);
}

TEST_CASE("ambient-only shading is uniform per surface") {
    // empty room, frontal wall fills the image -> every pixel shares one
    // albedo and one ambient term, so all bytes are identical
    SceneSpec scene;
    scene.room_size = {10.0, 8.0, 8.0};
    dca::CameraPose pose;
    pose.position = {5.0, 4.0, 3.0};
    pose.fov_deg = 40.0;
    scene.viewpoints.push_back(pose);

    Frame frame = dca::render_frame(scene, 0, dca::illumination_by_id("E"), 64, 64);
    for (int64_t i = 3; i < static_cast<int64_t>(frame.rgb.size()); ++i)
        CHECK(frame.rgb[i] == frame.rgb[i % 3]);
}

TEST_CASE("sphere and plane primitives intersect correctly") {
    SceneSpec scene;
    scene.room_size = {10.0, 8.0, 10.0};
    dca::CameraPose pose;
    pose.position = {5.0, 4.0, 1.0};
    pose.fov_deg = 50.0;
    scene.viewpoints.push_back(pose);

    dca::Primitive sphere;
    sphere.kind = dca::PrimitiveKind::sphere;
    sphere.position = {5.0, 4.0, 5.0};
    sphere.size = {1.0, 1.0, 1.0};
    scene.primitives.push_back(sphere);

    Frame frame = dca::render_frame(scene, 0, dca::illumination_by_id("E"), 64, 64);
    // center pixel ray is nearly axial: depth ~ 3 (sphere front), corner hits the wall
    const float center = frame.depth[32 * 64 + 32];
    CHECK(center == doctest::Approx(3.0f).epsilon(0.01));
    CHECK(frame.depth[0] > 5.0f);

    // a frontal plane through z=6 behind the sphere
    dca::Primitive plane;
    plane.kind = dca::PrimitiveKind::plane;
    plane.position = {5.0, 4.0, 6.0};
    plane.size = {0.0, 0.0, 1.0};
    scene.primitives.push_back(plane);
    Frame frame2 = dca::render_frame(scene, 0, dca::illumination_by_id("E"), 64, 64);
    CHECK(frame2.depth[0] == doctest::Approx(5.0f));   // plane planar depth is exactly 5
    CHECK(frame2.depth[32 * 64 + 32] == center);       // sphere still in front
}

TEST_CASE("render_frame input validation") {
    GenConfig cfg;
    SceneSpec scene = dca::generate_scene(5, cfg);
    CHECK_THROWS_AS(dca::render_frame(scene, 99, dca::illumination_by_id("E"), 64, 64),
                    dca::ConfigError);
    CHECK_THROWS_AS(dca::render_frame(scene, 0, dca::illumination_by_id("E"), 50, 64),
                    dca::ConfigError);
    SceneSpec outside = scene;
    outside.viewpoints[0].position = {-1.0, 1.0, 1.0};
    CHECK_THROWS_AS(dca::render_frame(outside, 0, dca::illumination_by_id("E"), 64, 64),
                    dca::ConfigError);
}

TEST_CASE("augment determinism and geometry handling") {
    GenConfig cfg;
    SceneSpec scene = dca::generate_scene(6, cfg);
    Frame frame = dca::render_frame(scene, 0, dca::illumination_by_id("M+I+E"), 96, 128);
    dca::AugmentConfig acf;

    SUBCASE("same seed, same output") {
        Frame a = dca::augment(frame, 42, acf);
        Frame b = dca::augment(frame, 42, acf);
        CHECK(a.rgb == b.rgb);
        CHECK(a.depth == b.depth);
        CHECK(a.height == acf.crop_h);
        CHECK(a.width == acf.crop_w);
    }

    SUBCASE("photometric jitter leaves depth untouched") {
        auto draw = dca::AugmentDraw::from_seed(7, frame, acf);
        auto draw_neutral = draw;
        draw_neutral.gamma = 1.0;
        draw_neutral.brightness = 1.0;
        draw_neutral.contrast = 1.0;
        Frame jittered = dca::augment_with(frame, draw, acf);
        Frame neutral = dca::augment_with(frame, draw_neutral, acf);
        CHECK(jittered.depth == neutral.depth);
        CHECK(jittered.rgb != neutral.rgb);
    }

    SUBCASE("flip mirrors the depth of the unflipped augmentation") {
        auto draw = dca::AugmentDraw::from_seed(8, frame, acf);
        draw.flip = true;
        auto draw_noflip = draw;
        draw_noflip.flip = false;
        Frame flipped = dca::augment_with(frame, draw, acf);
        Frame plain = dca::augment_with(frame, draw_noflip, acf);
        for (int64_t y = 0; y < acf.crop_h; ++y)
            for (int64_t x = 0; x < acf.crop_w; ++x)
                CHECK(flipped.depth[y * acf.crop_w + x] ==
                      plain.depth[y * acf.crop_w + (acf.crop_w - 1 - x)]);
    }

    SUBCASE("depth values are never interpolated") {
        Frame out = dca::augment(frame, 9, acf);
        std::set<float> source(frame.depth.begin(), frame.depth.end());
        for (float d : out.depth) CHECK(source.count(d) == 1);
    }

    SUBCASE("oversized crop rejected") {
        dca::AugmentConfig big;
        big.crop_h = 128;
        big.crop_w = 160;
        CHECK_THROWS_AS(dca::augment(frame, 1, big), dca::ConfigError);
    }
}

TEST_CASE("generate_dataset writes a loadable manifest with a scene-disjoint split") {
    const std::string dir = "/tmp/dca_dataset_test";
    std::filesystem::remove_all(dir);
    GenConfig cfg;
    cfg.scenes = 2;
    cfg.viewpoints = 1;
    cfg.height = 64;
    cfg.width = 64;
    cfg.split_ratio = 0.5;
    auto manifest = dca::generate_dataset(cfg, dir);
    CHECK(manifest.records.size() == 2 * 1 * 11);

    auto loaded = dca::Manifest::load(dir + "/manifest.csv");
    REQUIRE(loaded.records.size() == manifest.records.size());

    std::set<int64_t> train_scenes, test_scenes;
    for (const auto& rec : loaded.records)
        (rec.split == "train" ? train_scenes : test_scenes).insert(rec.scene_id);
    for (int64_t sid : train_scenes) CHECK(test_scenes.count(sid) == 0);
    CHECK(train_scenes.size() == 1);
    CHECK(test_scenes.size() == 1);

    Frame frame = dca::load_frame(loaded.records.front(), loaded.base_dir);
    CHECK(frame.height == 64);
    CHECK(frame.width == 64);
    CHECK(frame.depth.size() == 64 * 64);

    // depth identical across the 11 illumination variants of one viewpoint
    std::vector<float> reference;
    for (const auto& rec : loaded.records) {
        if (rec.scene_id != 0 || rec.viewpoint_id != 0) continue;
        Frame f = dca::load_frame(rec, loaded.base_dir);
        if (reference.empty())
            reference = f.depth;
        else
            CHECK(f.depth == reference);
    }
}

TEST_CASE("gen config parsing") {
    GenConfig cfg = dca::parse_gen_config("scenes = 3\nviewpoints = 4\nheight = 64\nwidth = 96\n"
                                          "seed = 11\nsplit_ratio = 0.66\n");
    CHECK(cfg.scenes == 3);
    CHECK(cfg.viewpoints == 4);
    CHECK(cfg.height == 64);
    CHECK(cfg.width == 96);
    CHECK(cfg.seed == 11);
    CHECK(cfg.split_ratio == doctest::Approx(0.66));
    CHECK_THROWS_AS(dca::parse_gen_config("height = 50\n"), dca::ConfigError);
    CHECK_THROWS_AS(dca::parse_gen_config("unknown = 1\n"), dca::ConfigError);

    GenConfig round = dca::parse_gen_config(dca::gen_config_to_string(cfg));
    CHECK(round.scenes == cfg.scenes);
    CHECK(round.split_ratio == doctest::Approx(cfg.split_ratio));
}
