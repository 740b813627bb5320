#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dca/common.hpp"

namespace dca {

// Single-channel PFM. On disk: "Pf\n{W} {H}\n-1.0\n" followed by
// little-endian 32-bit floats, bottom row first. In memory rows are
// top-down. Positive scale (big-endian payload) is rejected.
struct PfmImage {
    int64_t height = 0;
    int64_t width = 0;
    std::vector<float> data;  // H*W, top-down
};

std::vector<uint8_t> encode_pfm(const std::vector<float>& data, int64_t height, int64_t width);
PfmImage decode_pfm(std::span<const uint8_t> bytes);
void write_pfm(const std::string& path, const std::vector<float>& data, int64_t height,
               int64_t width);
PfmImage read_pfm(const std::string& path);

// Binary PPM ("P6"), maxval 255, rows top-down.
struct PpmImage {
    int64_t height = 0;
    int64_t width = 0;
    std::vector<uint8_t> rgb;  // H*W*3
};

std::vector<uint8_t> encode_ppm(const std::vector<uint8_t>& rgb, int64_t height, int64_t width);
PpmImage decode_ppm(std::span<const uint8_t> bytes);
void write_ppm(const std::string& path, const std::vector<uint8_t>& rgb, int64_t height,
               int64_t width);
PpmImage read_ppm(const std::string& path);

std::vector<uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::span<const uint8_t> bytes);

// Jet-style visualization of a depth map scaled by max_depth.
std::vector<uint8_t> depth_colormap(const std::vector<float>& depth, double max_depth);

}  // namespace dca
