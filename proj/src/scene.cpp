#include "dca/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace dca {

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 normalize(const Vec3& v) {
    const double n = norm(v);
    DCA_CHECK(n > 0, NumericalError, "normalize: zero vector");
    return v * (1.0 / n);
}

namespace {

constexpr double kRayEps = 1e-9;
constexpr double kShadowEps = 1e-6;

struct CameraBasis {
    Vec3 origin, forward, right, up;
    double tan_x = 0, tan_y = 0;
};

CameraBasis camera_basis(const CameraPose& pose, int64_t height, int64_t width) {
    CameraBasis b;
    b.origin = pose.position;
    const double cp = std::cos(pose.pitch), sp = std::sin(pose.pitch);
    const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
    b.forward = {cp * sy, sp, cp * cy};
    b.right = normalize(cross(b.forward, Vec3{0, 1, 0}));
    b.up = cross(b.right, b.forward);
    b.tan_y = std::tan(pose.fov_deg * M_PI / 180.0 / 2.0);
    b.tan_x = b.tan_y * static_cast<double>(width) / static_cast<double>(height);
    return b;
}

// Ray direction is deliberately not normalized: its forward component is
// exactly 1, so the hit parameter t equals the planar z-depth.
Vec3 pixel_ray(const CameraBasis& b, int64_t px, int64_t py, int64_t height, int64_t width) {
    const double u = (2.0 * (static_cast<double>(px) + 0.5) / static_cast<double>(width)) - 1.0;
    const double v = 1.0 - (2.0 * (static_cast<double>(py) + 0.5) / static_cast<double>(height));
    return b.forward + b.right * (u * b.tan_x) + b.up * (v * b.tan_y);
}

struct Hit {
    double t = -1.0;
    Vec3 normal;
    const Material* material = nullptr;
    bool valid() const { return t > 0; }
};

bool sphere_hit(const Vec3& o, const Vec3& d, const Primitive& p, double t_max, Hit& hit) {
    const Vec3 oc = o - p.position;
    const double r = p.size.x;
    const double a = dot(d, d);
    const double b = 2.0 * dot(d, oc);
    const double c = dot(oc, oc) - r * r;
    const double disc = b * b - 4 * a * c;
    if (disc < 0) return false;
    const double sq = std::sqrt(disc);
    double t = (-b - sq) / (2 * a);
    if (t <= kRayEps) t = (-b + sq) / (2 * a);
    if (t <= kRayEps || t >= t_max) return false;
    hit.t = t;
    hit.normal = normalize(o + d * t - p.position);
    hit.material = &p.material;
    return true;
}

bool box_hit(const Vec3& o, const Vec3& d, const Primitive& p, double t_max, Hit& hit) {
    const Vec3 lo = p.position - p.size;
    const Vec3 hi = p.position + p.size;
    double t_near = -1e30, t_far = 1e30;
    int near_axis = -1;
    double near_sign = 0;
    const double ov[3] = {o.x, o.y, o.z};
    const double dv[3] = {d.x, d.y, d.z};
    const double lov[3] = {lo.x, lo.y, lo.z};
    const double hiv[3] = {hi.x, hi.y, hi.z};
    for (int axis = 0; axis < 3; ++axis) {
        if (dv[axis] == 0.0) {
            if (ov[axis] < lov[axis] || ov[axis] > hiv[axis]) return false;
            continue;
        }
        double t0 = (lov[axis] - ov[axis]) / dv[axis];
        double t1 = (hiv[axis] - ov[axis]) / dv[axis];
        double sign = -1.0;
        if (t0 > t1) {
            std::swap(t0, t1);
            sign = 1.0;
        }
        if (t0 > t_near) {
            t_near = t0;
            near_axis = axis;
            near_sign = sign;
        }
        t_far = std::min(t_far, t1);
        if (t_near > t_far) return false;
    }
    if (t_near <= kRayEps || t_near >= t_max || near_axis < 0) return false;
    hit.t = t_near;
    hit.normal = Vec3{near_axis == 0 ? near_sign : 0.0, near_axis == 1 ? near_sign : 0.0,
                      near_axis == 2 ? near_sign : 0.0};
    hit.material = &p.material;
    return true;
}

bool plane_hit(const Vec3& o, const Vec3& d, const Primitive& p, double t_max, Hit& hit) {
    const double denom = dot(d, p.size);
    if (denom == 0.0) return false;
    const double t = dot(p.position - o, p.size) / denom;
    if (t <= kRayEps || t >= t_max) return false;
    hit.t = t;
    hit.normal = denom < 0 ? p.size : p.size * -1.0;
    hit.material = &p.material;
    return true;
}

bool primitive_hit(const Vec3& o, const Vec3& d, const Primitive& p, double t_max, Hit& hit) {
    switch (p.kind) {
        case PrimitiveKind::sphere: return sphere_hit(o, d, p, t_max, hit);
        case PrimitiveKind::box: return box_hit(o, d, p, t_max, hit);
        case PrimitiveKind::plane: return plane_hit(o, d, p, t_max, hit);
    }
    return false;
}

// Exit of a ray that starts inside the room box; returns the wall hit.
bool room_exit_hit(const Vec3& o, const Vec3& d, const SceneSpec& scene, Hit& hit) {
    const double ov[3] = {o.x, o.y, o.z};
    const double dv[3] = {d.x, d.y, d.z};
    const double hiv[3] = {scene.room_size.x, scene.room_size.y, scene.room_size.z};
    double t_exit = 1e30;
    int exit_axis = -1;
    double exit_sign = 0;
    for (int axis = 0; axis < 3; ++axis) {
        if (dv[axis] == 0.0) continue;
        const double bound = dv[axis] > 0 ? hiv[axis] : 0.0;
        const double t = (bound - ov[axis]) / dv[axis];
        if (t < t_exit) {
            t_exit = t;
            exit_axis = axis;
            exit_sign = dv[axis] > 0 ? -1.0 : 1.0;  // inward normal
        }
    }
    if (exit_axis < 0 || t_exit <= kRayEps) return false;
    hit.t = t_exit;
    hit.normal = Vec3{exit_axis == 0 ? exit_sign : 0.0, exit_axis == 1 ? exit_sign : 0.0,
                      exit_axis == 2 ? exit_sign : 0.0};
    if (exit_axis == 1)
        hit.material = exit_sign > 0 ? &scene.ceiling_material : &scene.floor_material;
    else
        hit.material = &scene.wall_material;
    return true;
}

Hit trace_nearest(const Vec3& o, const Vec3& d, const SceneSpec& scene) {
    Hit best;
    if (!room_exit_hit(o, d, scene, best)) return best;
    for (const auto& p : scene.primitives) {
        Hit h;
        if (primitive_hit(o, d, p, best.t, h)) best = h;
    }
    return best;
}

// Occlusion by clutter only; the room shell is transparent to lights so the
// sun presets reach the interior.
bool shadowed(const Vec3& point, const Vec3& to_light, double max_t, const SceneSpec& scene) {
    for (const auto& p : scene.primitives) {
        Hit h;
        if (primitive_hit(point, to_light, p, max_t, h) && h.t > kShadowEps) return true;
    }
    return false;
}

uint8_t tone_map_channel(double v) {
    const double mapped = v / (1.0 + v);
    const double gamma = std::pow(std::max(0.0, mapped), 1.0 / 2.2);
    const double scaled = std::round(gamma * 255.0);
    return static_cast<uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

Vec3 shade(const Vec3& point, const Vec3& view_dir, const Hit& hit, const SceneSpec& scene,
           const IlluminationVariant& illum) {
    const Material& m = *hit.material;
    Vec3 color{0, 0, 0};
    if (illum.environment) color = color + m.albedo * (*illum.environment);

    auto add_light = [&](const Vec3& to_light_unit, const Vec3& light_color, double attenuation) {
        const double ndotl = dot(hit.normal, to_light_unit);
        if (ndotl <= 0) return;
        Vec3 contribution = m.albedo * light_color * (ndotl * attenuation);
        if (m.specular > 0) {
            const Vec3 half = normalize(to_light_unit - view_dir);
            const double ndoth = dot(hit.normal, half);
            if (ndoth > 0)
                contribution =
                    contribution +
                    light_color * (m.specular * std::pow(ndoth, m.shininess) * attenuation);
        }
        color = color + contribution;
    };

    if (illum.sun) {
        const Vec3 to_sun = normalize(illum.sun->direction * -1.0);
        if (!shadowed(point + hit.normal * kShadowEps, to_sun, 1e30, scene))
            add_light(to_sun, illum.sun->color, 1.0);
    }
    for (const auto& pl : illum.indoor) {
        const Vec3 pos = pl.position_frac * scene.room_size;
        const Vec3 delta = pos - point;
        const double dist = norm(delta);
        if (dist <= kShadowEps) continue;
        const Vec3 dir = delta * (1.0 / dist);
        if (!shadowed(point + hit.normal * kShadowEps, dir, dist - kShadowEps, scene))
            add_light(dir, pl.color, pl.intensity / (dist * dist));
    }
    return color;
}

}  // namespace

const std::vector<IlluminationVariant>& illumination_set() {
    static const std::vector<IlluminationVariant> variants = [] {
        const DirectionalLight sun_morning{normalize({0.8, -0.35, 0.45}), {1.05, 0.82, 0.55}};
        const DirectionalLight sun_noon{normalize({0.15, -1.0, 0.2}), {1.6, 1.55, 1.45}};
        const DirectionalLight sun_night{normalize({-0.6, -0.3, -0.5}), {0.28, 0.34, 0.55}};
        const std::vector<PointLightSpec> indoor = {
            {{0.35, 0.88, 0.40}, {1.0, 0.90, 0.72}, 6.0},
            {{0.70, 0.86, 0.72}, {1.0, 0.92, 0.75}, 5.0},
        };
        const Vec3 environment{0.22, 0.24, 0.28};

        auto make = [&](const std::string& id, const std::optional<DirectionalLight>& sun,
                        bool with_indoor, bool with_env) {
            IlluminationVariant v;
            v.id = id;
            v.sun = sun;
            if (with_indoor) v.indoor = indoor;
            if (with_env) v.environment = environment;
            return v;
        };

        std::vector<IlluminationVariant> set;
        set.push_back(make("M", sun_morning, false, false));
        set.push_back(make("Nn", sun_noon, false, false));
        set.push_back(make("Nt", sun_night, false, false));
        set.push_back(make("I", std::nullopt, true, false));
        set.push_back(make("E", std::nullopt, false, true));
        set.push_back(make("M+I", sun_morning, true, false));
        set.push_back(make("Nn+I", sun_noon, true, false));
        set.push_back(make("Nt+I", sun_night, true, false));
        set.push_back(make("M+I+E", sun_morning, true, true));
        set.push_back(make("Nn+I+E", sun_noon, true, true));
        set.push_back(make("Nt+I+E", sun_night, true, true));
        return set;
    }();
    return variants;
}

const IlluminationVariant& illumination_by_id(const std::string& id) {
    for (const auto& v : illumination_set())
        if (v.id == id) return v;
    throw ConfigError("unknown illumination id: " + id);
}

namespace {

const std::set<std::string> kGenKeys = {"scenes", "viewpoints", "height",
                                        "width",  "seed",       "split_ratio"};

}  // namespace

GenConfig parse_gen_config(const std::string& text) {
    auto kv = parse_kv_text(text, kGenKeys);
    GenConfig cfg;
    cfg.scenes = kv_int(kv, "scenes", cfg.scenes);
    cfg.viewpoints = kv_int(kv, "viewpoints", cfg.viewpoints);
    cfg.height = kv_int(kv, "height", cfg.height);
    cfg.width = kv_int(kv, "width", cfg.width);
    cfg.seed = static_cast<uint64_t>(kv_int(kv, "seed", static_cast<int64_t>(cfg.seed)));
    cfg.split_ratio = kv_double(kv, "split_ratio", cfg.split_ratio);
    DCA_CHECK(cfg.scenes >= 1 && cfg.viewpoints >= 1, ConfigError,
              "gen config: scenes and viewpoints must be positive");
    DCA_CHECK(cfg.height % 32 == 0 && cfg.width % 32 == 0 && cfg.height > 0 && cfg.width > 0,
              ConfigError, "gen config: height and width must be positive multiples of 32");
    DCA_CHECK(cfg.split_ratio >= 0.0 && cfg.split_ratio <= 1.0, ConfigError,
              "gen config: split_ratio must be in [0,1]");
    return cfg;
}

GenConfig load_gen_config(const std::string& path) {
    return parse_gen_config(read_text_file(path));
}

std::string gen_config_to_string(const GenConfig& cfg) {
    std::ostringstream out;
    out << "scenes = " << cfg.scenes << "\n";
    out << "viewpoints = " << cfg.viewpoints << "\n";
    out << "height = " << cfg.height << "\n";
    out << "width = " << cfg.width << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "split_ratio = " << cfg.split_ratio << "\n";
    return out.str();
}

std::string SceneSpec::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "seed " << seed << "\n";
    out << "room " << room_size.x << " " << room_size.y << " " << room_size.z << "\n";
    auto put_material = [&out](const char* tag, const Material& m) {
        out << tag << " " << m.albedo.x << " " << m.albedo.y << " " << m.albedo.z << " "
            << m.specular << " " << m.shininess << "\n";
    };
    put_material("floor", floor_material);
    put_material("ceiling", ceiling_material);
    put_material("wall", wall_material);
    for (const auto& p : primitives) {
        out << "prim " << static_cast<int>(p.kind) << " " << p.position.x << " " << p.position.y
            << " " << p.position.z << " " << p.size.x << " " << p.size.y << " " << p.size.z;
        out << " " << p.material.albedo.x << " " << p.material.albedo.y << " "
            << p.material.albedo.z << " " << p.material.specular << " " << p.material.shininess
            << "\n";
    }
    for (const auto& v : viewpoints) {
        out << "view " << v.position.x << " " << v.position.y << " " << v.position.z << " "
            << v.yaw << " " << v.pitch << " " << v.fov_deg << "\n";
    }
    return out.str();
}

SceneSpec generate_scene(uint64_t seed, const GenConfig& cfg) {
    std::mt19937_64 rng(seed ^ (cfg.seed * 0x9e3779b97f4a7c15ULL));
    auto uniform = [&rng](double lo, double hi) {
        std::uniform_real_distribution<double> dist(lo, hi);
        return dist(rng);
    };

    SceneSpec scene;
    scene.seed = seed;
    // Keep the room diagonal under max_depth so every planar depth stays in range.
    scene.room_size = {uniform(4.0, 5.2), uniform(2.4, 3.0), uniform(4.0, 5.2)};
    scene.floor_material = {{uniform(0.30, 0.45), uniform(0.25, 0.4), uniform(0.2, 0.35)}, 0.08, 16};
    scene.ceiling_material = {{0.85, 0.85, 0.88}, 0.0, 16};
    scene.wall_material = {{uniform(0.5, 0.75), uniform(0.5, 0.75), uniform(0.5, 0.75)}, 0.05, 24};

    const Vec3 center{scene.room_size.x / 2, 0, scene.room_size.z / 2};
    const double ring_scale = std::min(scene.room_size.x, scene.room_size.z);

    // Viewpoints sit on a ring around the room center looking inward, so the
    // central clutter region is in front of every camera.
    for (int64_t v = 0; v < cfg.viewpoints; ++v) {
        CameraPose pose;
        const double angle = uniform(0, 2 * M_PI);
        const double radius = uniform(0.34, 0.44) * ring_scale;
        pose.position = {center.x + radius * std::sin(angle), uniform(1.2, 1.8),
                         center.z + radius * std::cos(angle)};
        const double to_center = std::atan2(center.x - pose.position.x,
                                            center.z - pose.position.z);
        pose.yaw = to_center + uniform(-0.18, 0.18);
        pose.pitch = uniform(-0.14, 0.02);
        pose.fov_deg = uniform(50, 60);
        scene.viewpoints.push_back(pose);
    }

    const int64_t prim_count = 3 + static_cast<int64_t>(rng() % 6);
    for (int64_t i = 0; i < prim_count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            Primitive p;
            p.kind = (rng() % 2 == 0) ? PrimitiveKind::sphere : PrimitiveKind::box;
            double bound_radius = 0;
            if (p.kind == PrimitiveKind::sphere) {
                const double r = uniform(0.15, 0.45);
                p.size = {r, r, r};
                bound_radius = r;
            } else {
                p.size = {uniform(0.12, 0.45), uniform(0.12, 0.45), uniform(0.12, 0.45)};
                bound_radius = norm(p.size);
            }
            const double spread = 0.22 * ring_scale;
            p.position = {center.x + uniform(-spread, spread),
                          uniform(bound_radius + 0.05, scene.room_size.y * 0.65),
                          center.z + uniform(-spread, spread)};
            p.material.albedo = {uniform(0.15, 0.9), uniform(0.15, 0.9), uniform(0.15, 0.9)};
            p.material.specular = uniform(0.0, 0.6);
            p.material.shininess = uniform(16, 96);

            bool ok = true;
            for (const auto& vp : scene.viewpoints) {
                CameraBasis basis = camera_basis(vp, 2, 2);
                const Vec3 delta = p.position - vp.position;
                if (norm(delta) < bound_radius + 1.0 ||
                    dot(delta, basis.forward) < bound_radius + 0.6) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                scene.primitives.push_back(p);
                placed = true;
            }
        }
        DCA_CHECK(placed, NumericalError,
                  "generate_scene: could not place a primitive within the retry budget");
    }
    return scene;
}

Frame render_frame(const SceneSpec& scene, int64_t viewpoint_id, const IlluminationVariant& illum,
                   int64_t height, int64_t width) {
    DCA_CHECK(height >= 32 && width >= 32 && height % 32 == 0 && width % 32 == 0, ConfigError,
              "render_frame: resolution must be a positive multiple of 32");
    DCA_CHECK(viewpoint_id >= 0 &&
                  viewpoint_id < static_cast<int64_t>(scene.viewpoints.size()),
              ConfigError, "render_frame: viewpoint index out of range");
    const CameraPose& pose = scene.viewpoints[static_cast<size_t>(viewpoint_id)];
    const Vec3& o = pose.position;
    DCA_CHECK(o.x > 0 && o.x < scene.room_size.x && o.y > 0 && o.y < scene.room_size.y &&
                  o.z > 0 && o.z < scene.room_size.z,
              ConfigError, "render_frame: viewpoint outside the room");

    const CameraBasis basis = camera_basis(pose, height, width);
    Frame frame;
    frame.height = height;
    frame.width = width;
    frame.viewpoint_id = viewpoint_id;
    frame.illumination_id = illum.id;
    frame.rgb.resize(static_cast<size_t>(height * width * 3));
    frame.depth.resize(static_cast<size_t>(height * width));

    bool escaped = false;
#pragma omp parallel for schedule(static) reduction(||:escaped)
    for (int64_t py = 0; py < height; ++py) {
        for (int64_t px = 0; px < width; ++px) {
            const Vec3 d = pixel_ray(basis, px, py, height, width);
            const Hit hit = trace_nearest(o, d, scene);
            if (!hit.valid()) {
                escaped = true;
                continue;
            }
            frame.depth[static_cast<size_t>(py * width + px)] = static_cast<float>(hit.t);
            const Vec3 point = o + d * hit.t;
            const Vec3 color = shade(point, normalize(d), hit, scene, illum);
            const size_t base = static_cast<size_t>((py * width + px) * 3);
            frame.rgb[base + 0] = tone_map_channel(color.x);
            frame.rgb[base + 1] = tone_map_channel(color.y);
            frame.rgb[base + 2] = tone_map_channel(color.z);
        }
    }
    DCA_CHECK(!escaped, NumericalError, "render_frame: a ray escaped the room");
    return frame;
}

namespace {

uint8_t sample_bilinear_clamped(const std::vector<uint8_t>& img, int64_t h, int64_t w, int64_t c,
                                double sy, double sx, int64_t channel) {
    const double fy = std::floor(sy), fx = std::floor(sx);
    const double wy = sy - fy, wx = sx - fx;
    auto at = [&](int64_t y, int64_t x) {
        y = std::clamp<int64_t>(y, 0, h - 1);
        x = std::clamp<int64_t>(x, 0, w - 1);
        return static_cast<double>(img[static_cast<size_t>((y * w + x) * c + channel)]);
    };
    const int64_t y0 = static_cast<int64_t>(fy), x0 = static_cast<int64_t>(fx);
    const double v = (1 - wy) * ((1 - wx) * at(y0, x0) + wx * at(y0, x0 + 1)) +
                     wy * ((1 - wx) * at(y0 + 1, x0) + wx * at(y0 + 1, x0 + 1));
    return static_cast<uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

}  // namespace

AugmentDraw AugmentDraw::from_seed(uint64_t seed, const Frame& frame, const AugmentConfig& cfg) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        std::uniform_real_distribution<double> dist(lo, hi);
        return dist(rng);
    };
    AugmentDraw draw;
    draw.theta_deg = uniform(-2.5, 2.5);
    const int64_t max_oy = frame.height - cfg.crop_h;
    const int64_t max_ox = frame.width - cfg.crop_w;
    draw.offset_y = max_oy > 0 ? static_cast<int64_t>(rng() % (max_oy + 1)) : 0;
    draw.offset_x = max_ox > 0 ? static_cast<int64_t>(rng() % (max_ox + 1)) : 0;
    draw.flip = (rng() % 2) == 1;
    draw.gamma = uniform(0.9, 1.1);
    draw.brightness = uniform(0.75, 1.25);
    draw.contrast = uniform(0.9, 1.1);
    return draw;
}

Frame augment_with(const Frame& frame, const AugmentDraw& draw, const AugmentConfig& cfg) {
    DCA_CHECK(cfg.crop_h <= frame.height && cfg.crop_w <= frame.width, ConfigError,
              "augment: crop larger than the frame");
    DCA_CHECK(cfg.crop_h % 32 == 0 && cfg.crop_w % 32 == 0 && cfg.crop_h > 0 && cfg.crop_w > 0,
              ConfigError, "augment: crop dims must be positive multiples of 32");

    const double theta = draw.theta_deg * M_PI / 180.0;
    const int64_t oy = draw.offset_y;
    const int64_t ox = draw.offset_x;
    const bool flip = draw.flip;
    const double gamma = draw.gamma;
    const double brightness = draw.brightness;
    const double contrast = draw.contrast;

    const int64_t h = frame.height, w = frame.width;
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;
    const double ct = std::cos(theta), st = std::sin(theta);

    Frame out;
    out.height = cfg.crop_h;
    out.width = cfg.crop_w;
    out.scene_id = frame.scene_id;
    out.viewpoint_id = frame.viewpoint_id;
    out.illumination_id = frame.illumination_id;
    out.rgb.resize(static_cast<size_t>(cfg.crop_h * cfg.crop_w * 3));
    out.depth.resize(static_cast<size_t>(cfg.crop_h * cfg.crop_w));

    for (int64_t y = 0; y < cfg.crop_h; ++y) {
        for (int64_t x = 0; x < cfg.crop_w; ++x) {
            int64_t dst_x = x;
            if (flip) dst_x = cfg.crop_w - 1 - x;
            // source coordinates in the uncropped frame, inverse-rotated
            const double fy = static_cast<double>(y + oy) - cy;
            const double fx = static_cast<double>(x + ox) - cx;
            const double sy = -st * fx + ct * fy + cy;
            const double sx = ct * fx + st * fy + cx;

            const size_t dst = static_cast<size_t>(y * cfg.crop_w + dst_x);
            for (int64_t channel = 0; channel < 3; ++channel)
                out.rgb[dst * 3 + channel] =
                    sample_bilinear_clamped(frame.rgb, h, w, 3, sy, sx, channel);
            const int64_t ny = std::clamp<int64_t>(static_cast<int64_t>(std::lround(sy)), 0, h - 1);
            const int64_t nx = std::clamp<int64_t>(static_cast<int64_t>(std::lround(sx)), 0, w - 1);
            out.depth[dst] = frame.depth[static_cast<size_t>(ny * w + nx)];
        }
    }

    for (size_t i = 0; i < out.rgb.size(); ++i) {
        const double unit = static_cast<double>(out.rgb[i]) / 255.0;
        const double graded =
            (std::pow(unit, gamma) * brightness - 0.5) * contrast + 0.5;
        out.rgb[i] = static_cast<uint8_t>(std::clamp(std::round(graded * 255.0), 0.0, 255.0));
    }
    return out;
}

Frame augment(const Frame& frame, uint64_t seed, const AugmentConfig& cfg) {
    return augment_with(frame, AugmentDraw::from_seed(seed, frame, cfg), cfg);
}

}  // namespace dca
