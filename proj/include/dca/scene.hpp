#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dca/common.hpp"
#include "dca/config.hpp"

namespace dca {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator*(const Vec3& o) const { return {x * o.x, y * o.y, z * o.z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(const Vec3& v);
Vec3 normalize(const Vec3& v);

struct Material {
    Vec3 albedo{0.7, 0.7, 0.7};
    double specular = 0.0;   // Blinn-Phong strength
    double shininess = 32.0;
};

enum class PrimitiveKind { sphere, box, plane };

// size: sphere radius in size.x; box half-extents; plane unit normal.
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::sphere;
    Vec3 position;
    Vec3 size;
    Material material;
};

struct CameraPose {
    Vec3 position;
    double yaw = 0.0;    // radians around +Y; yaw 0 looks along +Z
    double pitch = 0.0;  // radians; positive looks up
    double fov_deg = 55.0;  // vertical field of view
};

// A closed room box [0, room_size] per axis with clutter primitives inside.
// The room shell guarantees every primary ray terminates.
struct SceneSpec {
    uint64_t seed = 0;
    Vec3 room_size{5, 3, 5};
    Material floor_material, ceiling_material, wall_material;
    std::vector<Primitive> primitives;
    std::vector<CameraPose> viewpoints;

    std::string serialize() const;
};

struct DirectionalLight {
    Vec3 direction;  // pointing from the light toward the scene
    Vec3 color;
};

// Point light placed in room-fraction coordinates so a variant stays
// geometry-independent.
struct PointLightSpec {
    Vec3 position_frac;
    Vec3 color;
    double intensity = 1.0;  // quadratic falloff
};

struct IlluminationVariant {
    std::string id;
    std::optional<DirectionalLight> sun;
    std::vector<PointLightSpec> indoor;
    std::optional<Vec3> environment;  // ambient
};

// The fixed 11 variants: singles M, Nn, Nt, I, E plus the six grid
// combinations M+I, Nn+I, Nt+I, M+I+E, Nn+I+E, Nt+I+E.
const std::vector<IlluminationVariant>& illumination_set();
const IlluminationVariant& illumination_by_id(const std::string& id);

struct Frame {
    int64_t height = 0;
    int64_t width = 0;
    std::vector<uint8_t> rgb;   // H*W*3
    std::vector<float> depth;   // H*W planar z-depth in meters
    int64_t scene_id = 0;
    int64_t viewpoint_id = 0;
    std::string illumination_id;
};

struct GenConfig {
    int64_t scenes = 2;
    int64_t viewpoints = 2;
    int64_t height = 96;
    int64_t width = 128;
    uint64_t seed = 1;
    double split_ratio = 0.5;  // fraction of scenes assigned to the train split
};

GenConfig parse_gen_config(const std::string& text);
GenConfig load_gen_config(const std::string& path);
std::string gen_config_to_string(const GenConfig& cfg);

// Deterministic in seed; 3..8 clutter primitives placed near the room center
// so they sit in front of every ring viewpoint, keeping all depths along each
// view axis inside (min_depth, max_depth].
SceneSpec generate_scene(uint64_t seed, const GenConfig& cfg);

// One primary ray per pixel, nearest hit, Lambert + Blinn-Phong with hard
// shadows from the clutter primitives (the room shell does not occlude
// lights). Depth is the unshaded planar z-distance and is bit-identical
// across illumination variants.
Frame render_frame(const SceneSpec& scene, int64_t viewpoint_id, const IlluminationVariant& illum,
                   int64_t height, int64_t width);

struct AugmentConfig {
    int64_t crop_h = 64;
    int64_t crop_w = 96;
};

// One set of sampled augmentation parameters; deterministic in seed.
struct AugmentDraw {
    double theta_deg = 0.0;       // rotation, U(-2.5, 2.5)
    int64_t offset_y = 0, offset_x = 0;  // crop origin
    bool flip = false;            // p = 0.5
    double gamma = 1.0;           // U(0.9, 1.1)
    double brightness = 1.0;      // U(0.75, 1.25)
    double contrast = 1.0;        // U(0.9, 1.1)

    static AugmentDraw from_seed(uint64_t seed, const Frame& frame, const AugmentConfig& cfg);
};

// In order: rotation (RGB bilinear, depth nearest), crop, horizontal flip,
// photometric jitter on RGB only.
Frame augment_with(const Frame& frame, const AugmentDraw& draw, const AugmentConfig& cfg);
Frame augment(const Frame& frame, uint64_t seed, const AugmentConfig& cfg);

}  // namespace dca
