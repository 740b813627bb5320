#include "dca/config.hpp"

#include <fstream>
#include <sstream>

#include "dca/common.hpp"

namespace dca {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text,
                                                 const std::set<std::string>& allowed_keys) {
    std::map<std::string, std::string> kv;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        DCA_CHECK(eq != std::string::npos, ConfigError,
                  "config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        DCA_CHECK(!key.empty(), ConfigError,
                  "config line " + std::to_string(line_no) + ": empty key");
        DCA_CHECK(allowed_keys.count(key) > 0, ConfigError, "unknown config key: " + key);
        DCA_CHECK(kv.find(key) == kv.end(), ConfigError, "duplicate config key: " + key);
        kv[key] = value;
    }
    return kv;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    DCA_CHECK(in.good(), IoError, "cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    DCA_CHECK(out.good(), IoError, "cannot write file: " + path);
    out << text;
}

int64_t kv_int(const std::map<std::string, std::string>& kv, const std::string& key,
               int64_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + it->second + "'");
    }
}

double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected number, got '" + it->second + "'");
    }
}

bool kv_bool(const std::map<std::string, std::string>& kv, const std::string& key, bool fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::string kv_string(const std::map<std::string, std::string>& kv, const std::string& key,
                      const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::vector<int64_t> kv_int_list(const std::map<std::string, std::string>& kv,
                                 const std::string& key, const std::vector<int64_t>& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::vector<int64_t> out;
    std::istringstream stream(it->second);
    std::string token;
    while (std::getline(stream, token, ',')) {
        try {
            out.push_back(std::stoll(token));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected comma-separated integers");
        }
    }
    DCA_CHECK(!out.empty(), ConfigError, "config key '" + key + "': empty list");
    return out;
}

namespace {

const std::set<std::string> kModelKeys = {"input_h",        "input_w",  "enc_channels",
                                          "dec_channels",   "refine_channels",
                                          "max_depth",      "dca_enabled",
                                          "seed"};

}  // namespace

ModelConfig parse_model_config(const std::string& text) {
    auto kv = parse_kv_text(text, kModelKeys);
    ModelConfig cfg;
    cfg.input_h = kv_int(kv, "input_h", cfg.input_h);
    cfg.input_w = kv_int(kv, "input_w", cfg.input_w);
    auto enc = kv_int_list(kv, "enc_channels",
                           {cfg.enc_channels.begin(), cfg.enc_channels.end()});
    auto dec = kv_int_list(kv, "dec_channels",
                           {cfg.dec_channels.begin(), cfg.dec_channels.end()});
    DCA_CHECK(enc.size() == 5, ConfigError, "enc_channels must list 5 values");
    DCA_CHECK(dec.size() == 5, ConfigError, "dec_channels must list 5 values");
    std::copy(enc.begin(), enc.end(), cfg.enc_channels.begin());
    std::copy(dec.begin(), dec.end(), cfg.dec_channels.begin());
    cfg.refine_channels = kv_int(kv, "refine_channels", cfg.refine_channels);
    cfg.max_depth = kv_double(kv, "max_depth", cfg.max_depth);
    cfg.dca_enabled = kv_bool(kv, "dca_enabled", cfg.dca_enabled);
    cfg.seed = static_cast<uint64_t>(kv_int(kv, "seed", static_cast<int64_t>(cfg.seed)));
    validate_model_config(cfg);
    return cfg;
}

ModelConfig load_model_config(const std::string& path) {
    return parse_model_config(read_text_file(path));
}

std::string model_config_to_string(const ModelConfig& cfg) {
    std::ostringstream out;
    out << "input_h = " << cfg.input_h << "\n";
    out << "input_w = " << cfg.input_w << "\n";
    out << "enc_channels = ";
    for (size_t i = 0; i < cfg.enc_channels.size(); ++i)
        out << (i ? "," : "") << cfg.enc_channels[i];
    out << "\n";
    out << "dec_channels = ";
    for (size_t i = 0; i < cfg.dec_channels.size(); ++i)
        out << (i ? "," : "") << cfg.dec_channels[i];
    out << "\n";
    out << "refine_channels = " << cfg.refine_channels << "\n";
    out << "max_depth = " << cfg.max_depth << "\n";
    out << "dca_enabled = " << (cfg.dca_enabled ? "true" : "false") << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

void validate_model_config(const ModelConfig& cfg) {
    DCA_CHECK(cfg.input_h >= 32 && cfg.input_h % 32 == 0, ConfigError,
              "input_h must be a positive multiple of 32");
    DCA_CHECK(cfg.input_w >= 32 && cfg.input_w % 32 == 0, ConfigError,
              "input_w must be a positive multiple of 32");
    for (int64_t c : cfg.enc_channels)
        DCA_CHECK(c >= 1, ConfigError, "enc_channels must be positive");
    for (int64_t c : cfg.dec_channels)
        DCA_CHECK(c >= 1, ConfigError, "dec_channels must be positive");
    DCA_CHECK(cfg.dec_channels[0] == cfg.enc_channels[4], ConfigError,
              "dec_channels[0] must equal enc_channels[4] (the bottleneck width)");
    DCA_CHECK(cfg.refine_channels >= 1, ConfigError, "refine_channels must be positive");
    DCA_CHECK(cfg.max_depth > 0.0, ConfigError, "max_depth must be positive");
}

}  // namespace dca
