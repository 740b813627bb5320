#pragma once

#include <string>
#include <vector>

#include "dca/scene.hpp"

namespace dca {

struct FrameRecord {
    int64_t scene_id = 0;
    int64_t viewpoint_id = 0;
    std::string illumination_id;
    std::string rgb_path;    // relative to the manifest directory
    std::string depth_path;
    std::string split;       // "train" | "test"
};

// CSV with a fixed header; one record per rendered frame.
struct Manifest {
    static constexpr const char* kCsvHeader =
        "scene_id,viewpoint_id,illumination_id,rgb_path,depth_path,split";

    std::vector<FrameRecord> records;
    std::string base_dir;  // directory the paths are relative to

    static Manifest load(const std::string& path);
    void save(const std::string& path) const;

    std::vector<FrameRecord> split_records(const std::string& split) const;
};

// Renders scenes x viewpoints x 11 illuminations to out_dir and writes
// out_dir/manifest.csv. The split is by scene id (no scene appears in both
// splits); the first ceil(scenes*split_ratio) scenes are "train".
Manifest generate_dataset(const GenConfig& cfg, const std::string& out_dir);

Frame load_frame(const FrameRecord& record, const std::string& base_dir);

}  // namespace dca
