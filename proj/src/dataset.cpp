#include "dca/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dca/image_io.hpp"

namespace fs = std::filesystem;

namespace dca {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path);
    DCA_CHECK(in.good(), IoError, "cannot open manifest: " + path);
    Manifest manifest;
    manifest.base_dir = fs::path(path).parent_path().string();
    std::string line;
    DCA_CHECK_FMT(static_cast<bool>(std::getline(in, line)), FormatErrorCode::bad_header,
                  "manifest: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    DCA_CHECK_FMT(line == kCsvHeader, FormatErrorCode::bad_header,
                  "manifest: unexpected header '" + line + "'");
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        DCA_CHECK_FMT(fields.size() == 6, FormatErrorCode::bad_header,
                      "manifest line " + std::to_string(line_no) + ": expected 6 fields");
        FrameRecord rec;
        try {
            rec.scene_id = std::stoll(fields[0]);
            rec.viewpoint_id = std::stoll(fields[1]);
        } catch (const std::exception&) {
            throw FormatError(FormatErrorCode::bad_header,
                              "manifest line " + std::to_string(line_no) + ": bad ids");
        }
        rec.illumination_id = fields[2];
        rec.rgb_path = fields[3];
        rec.depth_path = fields[4];
        rec.split = fields[5];
        DCA_CHECK_FMT(rec.split == "train" || rec.split == "test", FormatErrorCode::bad_header,
                      "manifest line " + std::to_string(line_no) + ": bad split '" + rec.split +
                          "'");
        manifest.records.push_back(std::move(rec));
    }
    return manifest;
}

void Manifest::save(const std::string& path) const {
    std::ofstream out(path);
    DCA_CHECK(out.good(), IoError, "cannot write manifest: " + path);
    out << kCsvHeader << "\n";
    for (const auto& rec : records)
        out << rec.scene_id << "," << rec.viewpoint_id << "," << rec.illumination_id << ","
            << rec.rgb_path << "," << rec.depth_path << "," << rec.split << "\n";
    DCA_CHECK(out.good(), IoError, "short write: " + path);
}

std::vector<FrameRecord> Manifest::split_records(const std::string& split) const {
    std::vector<FrameRecord> out;
    for (const auto& rec : records)
        if (rec.split == split) out.push_back(rec);
    return out;
}

Manifest generate_dataset(const GenConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const int64_t train_scenes =
        std::min<int64_t>(cfg.scenes,
                          static_cast<int64_t>(std::ceil(cfg.split_ratio *
                                                         static_cast<double>(cfg.scenes))));
    Manifest manifest;
    manifest.base_dir = out_dir;
    for (int64_t sid = 0; sid < cfg.scenes; ++sid) {
        const SceneSpec scene = generate_scene(static_cast<uint64_t>(sid), cfg);
        const std::string split = sid < train_scenes ? "train" : "test";
        for (int64_t vid = 0; vid < cfg.viewpoints; ++vid) {
            for (const auto& illum : illumination_set()) {
                Frame frame = render_frame(scene, vid, illum, cfg.height, cfg.width);
                frame.scene_id = sid;
                char stem[64];
                std::snprintf(stem, sizeof(stem), "s%03lld_v%02lld_%s",
                              static_cast<long long>(sid), static_cast<long long>(vid),
                              illum.id.c_str());
                FrameRecord rec;
                rec.scene_id = sid;
                rec.viewpoint_id = vid;
                rec.illumination_id = illum.id;
                rec.rgb_path = std::string(stem) + ".ppm";
                rec.depth_path = std::string(stem) + ".pfm";
                rec.split = split;
                write_ppm((fs::path(out_dir) / rec.rgb_path).string(), frame.rgb, frame.height,
                          frame.width);
                write_pfm((fs::path(out_dir) / rec.depth_path).string(), frame.depth,
                          frame.height, frame.width);
                manifest.records.push_back(std::move(rec));
            }
        }
    }
    manifest.save((fs::path(out_dir) / "manifest.csv").string());
    return manifest;
}

Frame load_frame(const FrameRecord& record, const std::string& base_dir) {
    Frame frame;
    const PpmImage rgb = read_ppm((fs::path(base_dir) / record.rgb_path).string());
    const PfmImage depth = read_pfm((fs::path(base_dir) / record.depth_path).string());
    DCA_CHECK_FMT(rgb.height == depth.height && rgb.width == depth.width,
                  FormatErrorCode::shape_mismatch,
                  "frame rgb/depth dimensions disagree for " + record.rgb_path);
    frame.height = rgb.height;
    frame.width = rgb.width;
    frame.rgb = rgb.rgb;
    frame.depth = depth.data;
    frame.scene_id = record.scene_id;
    frame.viewpoint_id = record.viewpoint_id;
    frame.illumination_id = record.illumination_id;
    return frame;
}

}  // namespace dca
