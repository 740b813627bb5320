#include "dca/image_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace dca {

std::vector<uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    DCA_CHECK(in.good(), IoError, "cannot open file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

void write_binary_file(const std::string& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    DCA_CHECK(out.good(), IoError, "cannot write file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    DCA_CHECK(out.good(), IoError, "short write: " + path);
}

namespace {

void put_f32_le(std::vector<uint8_t>& out, float v) {
    const uint32_t bits = std::bit_cast<uint32_t>(v);
    out.push_back(static_cast<uint8_t>(bits & 0xff));
    out.push_back(static_cast<uint8_t>((bits >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((bits >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((bits >> 24) & 0xff));
}

float get_f32_le(const uint8_t* p) {
    const uint32_t bits = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                          (static_cast<uint32_t>(p[2]) << 16) |
                          (static_cast<uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

// Whitespace-token scanner over a header region; PPM additionally allows
// '#' comments, PFM does not.
struct TokenScanner {
    std::span<const uint8_t> bytes;
    size_t pos = 0;
    bool allow_comments = false;

    bool is_space(uint8_t c) const { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

    std::string next_token() {
        while (pos < bytes.size()) {
            if (allow_comments && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            if (!is_space(bytes[pos])) break;
            ++pos;
        }
        const size_t start = pos;
        while (pos < bytes.size() && !is_space(bytes[pos])) ++pos;
        return std::string(bytes.begin() + start, bytes.begin() + pos);
    }

    // Consumes exactly one whitespace byte separating the header from payload.
    void consume_payload_separator(const char* format) {
        DCA_CHECK_FMT(pos < bytes.size() && is_space(bytes[pos]), FormatErrorCode::bad_header,
                      std::string(format) + ": missing separator before payload");
        ++pos;
    }
};

int64_t parse_positive_int(const std::string& token, const char* what) {
    DCA_CHECK_FMT(!token.empty(), FormatErrorCode::bad_header,
              std::string("missing ") + what);
    int64_t value = 0;
    for (char c : token) {
        DCA_CHECK_FMT(c >= '0' && c <= '9', FormatErrorCode::bad_header,
                  std::string("malformed ") + what + ": '" + token + "'");
        value = value * 10 + (c - '0');
        DCA_CHECK_FMT(value < (1 << 30), FormatErrorCode::bad_header,
                  std::string(what) + " out of range");
    }
    DCA_CHECK_FMT(value >= 1, FormatErrorCode::bad_header,
              std::string(what) + " must be positive");
    return value;
}

}  // namespace

std::vector<uint8_t> encode_pfm(const std::vector<float>& data, int64_t height, int64_t width) {
    DCA_CHECK(height >= 1 && width >= 1 &&
                  static_cast<int64_t>(data.size()) == height * width,
              ShapeError, "encode_pfm: data size does not match dimensions");
    std::string header = "Pf\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1.0\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + data.size() * 4);
    for (int64_t y = height - 1; y >= 0; --y)
        for (int64_t x = 0; x < width; ++x) put_f32_le(out, data[y * width + x]);
    return out;
}

PfmImage decode_pfm(std::span<const uint8_t> bytes) {
    TokenScanner scan{bytes};
    const std::string magic = scan.next_token();
    DCA_CHECK_FMT(magic == "Pf", FormatErrorCode::bad_header,
              "pfm: expected grayscale magic 'Pf', got '" + magic + "'");
    PfmImage img;
    img.width = parse_positive_int(scan.next_token(), "pfm width");
    img.height = parse_positive_int(scan.next_token(), "pfm height");
    const std::string scale_token = scan.next_token();
    DCA_CHECK_FMT(!scale_token.empty(), FormatErrorCode::bad_header, "pfm: missing scale");
    double scale = 0.0;
    try {
        scale = std::stod(scale_token);
    } catch (const std::exception&) {
        throw FormatError(FormatErrorCode::bad_header, "pfm: malformed scale '" + scale_token + "'");
    }
    DCA_CHECK_FMT(scale != 0.0, FormatErrorCode::bad_header, "pfm: zero scale");
    DCA_CHECK_FMT(scale < 0.0, FormatErrorCode::unsupported_scale,
              "pfm: positive scale (big-endian payload) is unsupported");
    scan.consume_payload_separator("pfm");

    const size_t needed = static_cast<size_t>(img.width) * static_cast<size_t>(img.height) * 4;
    DCA_CHECK_FMT(bytes.size() - scan.pos >= needed, FormatErrorCode::truncated,
              "pfm: payload truncated");
    img.data.resize(static_cast<size_t>(img.width * img.height));
    const uint8_t* p = bytes.data() + scan.pos;
    for (int64_t y = img.height - 1; y >= 0; --y)
        for (int64_t x = 0; x < img.width; ++x, p += 4)
            img.data[static_cast<size_t>(y * img.width + x)] = get_f32_le(p);
    return img;
}

void write_pfm(const std::string& path, const std::vector<float>& data, int64_t height,
               int64_t width) {
    const auto bytes = encode_pfm(data, height, width);
    write_binary_file(path, bytes);
}

PfmImage read_pfm(const std::string& path) {
    const auto bytes = read_binary_file(path);
    return decode_pfm(bytes);
}

std::vector<uint8_t> encode_ppm(const std::vector<uint8_t>& rgb, int64_t height, int64_t width) {
    DCA_CHECK(height >= 1 && width >= 1 &&
                  static_cast<int64_t>(rgb.size()) == height * width * 3,
              ShapeError, "encode_ppm: data size does not match dimensions");
    std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), rgb.begin(), rgb.end());
    return out;
}

PpmImage decode_ppm(std::span<const uint8_t> bytes) {
    TokenScanner scan{bytes};
    scan.allow_comments = true;
    const std::string magic = scan.next_token();
    DCA_CHECK_FMT(magic == "P6", FormatErrorCode::bad_magic,
              "ppm: expected magic 'P6', got '" + magic + "'");
    PpmImage img;
    img.width = parse_positive_int(scan.next_token(), "ppm width");
    img.height = parse_positive_int(scan.next_token(), "ppm height");
    const int64_t maxval = parse_positive_int(scan.next_token(), "ppm maxval");
    DCA_CHECK_FMT(maxval == 255, FormatErrorCode::bad_maxval,
              "ppm: only maxval 255 is supported, got " + std::to_string(maxval));
    scan.consume_payload_separator("ppm");

    const size_t needed = static_cast<size_t>(img.width) * static_cast<size_t>(img.height) * 3;
    DCA_CHECK_FMT(bytes.size() - scan.pos >= needed, FormatErrorCode::truncated,
              "ppm: payload truncated");
    img.rgb.assign(bytes.begin() + scan.pos, bytes.begin() + scan.pos + needed);
    return img;
}

void write_ppm(const std::string& path, const std::vector<uint8_t>& rgb, int64_t height,
               int64_t width) {
    const auto bytes = encode_ppm(rgb, height, width);
    write_binary_file(path, bytes);
}

PpmImage read_ppm(const std::string& path) {
    const auto bytes = read_binary_file(path);
    return decode_ppm(bytes);
}

std::vector<uint8_t> depth_colormap(const std::vector<float>& depth, double max_depth) {
    std::vector<uint8_t> rgb(depth.size() * 3);
    auto channel = [](double v) {
        return static_cast<uint8_t>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    };
    for (size_t i = 0; i < depth.size(); ++i) {
        const double t = std::clamp(static_cast<double>(depth[i]) / max_depth, 0.0, 1.0);
        rgb[i * 3 + 0] = channel(1.5 - std::abs(4.0 * t - 3.0));
        rgb[i * 3 + 1] = channel(1.5 - std::abs(4.0 * t - 2.0));
        rgb[i * 3 + 2] = channel(1.5 - std::abs(4.0 * t - 1.0));
    }
    return rgb;
}

}  // namespace dca
