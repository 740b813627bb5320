#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace dca {

// Shared plain-text config format: one `key = value` per line, `#` comments.
// Unknown keys are rejected so typos fail loudly.
std::map<std::string, std::string> parse_kv_text(const std::string& text,
                                                 const std::set<std::string>& allowed_keys);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

int64_t kv_int(const std::map<std::string, std::string>& kv, const std::string& key,
               int64_t fallback);
double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback);
bool kv_bool(const std::map<std::string, std::string>& kv, const std::string& key, bool fallback);
std::string kv_string(const std::map<std::string, std::string>& kv, const std::string& key,
                      const std::string& fallback);
std::vector<int64_t> kv_int_list(const std::map<std::string, std::string>& kv,
                                 const std::string& key, const std::vector<int64_t>& fallback);

// Network hyperparameters. Encoder channels are per stride 2,4,8,16,32;
// decoder channels start at the bottleneck width (must equal the deepest
// encoder width) and shrink toward full resolution.
struct ModelConfig {
    int64_t input_h = 96;
    int64_t input_w = 128;
    std::array<int64_t, 5> enc_channels = {16, 24, 32, 48, 64};
    std::array<int64_t, 5> dec_channels = {64, 48, 32, 24, 16};
    int64_t refine_channels = 8;
    double max_depth = 10.0;
    bool dca_enabled = true;
    uint64_t seed = 1;
};

ModelConfig parse_model_config(const std::string& text);
ModelConfig load_model_config(const std::string& path);
std::string model_config_to_string(const ModelConfig& cfg);
void validate_model_config(const ModelConfig& cfg);

}  // namespace dca
