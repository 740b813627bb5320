#include "dca/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "dca/image_io.hpp"

namespace dca {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<uint8_t>& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }

struct Reader {
    std::span<const uint8_t> bytes;
    size_t pos = 0;

    void need(size_t n, const char* what) {
        DCA_CHECK_FMT(bytes.size() - pos >= n, FormatErrorCode::truncated,
                      std::string("checkpoint truncated while reading ") + what);
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    uint64_t u64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    std::string str(size_t n, const char* what) {
        need(n, what);
        std::string s(bytes.begin() + pos, bytes.begin() + pos + n);
        pos += n;
        return s;
    }
};

void put_tensor_record(std::vector<uint8_t>& out, const std::string& name, const Tensor& tensor) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<uint32_t>(tensor.rank()));
    for (int64_t i = 0; i < tensor.rank(); ++i)
        put_u32(out, static_cast<uint32_t>(tensor.dim(i)));
    for (float v : tensor.data()) put_f32(out, v);
}

struct TensorRecord {
    std::string name;
    Shape shape;
    std::vector<float> data;
};

TensorRecord read_tensor_record(Reader& reader) {
    TensorRecord rec;
    const uint32_t name_len = reader.u32("tensor name length");
    DCA_CHECK_FMT(name_len > 0 && name_len < 4096, FormatErrorCode::bad_header,
                  "checkpoint: implausible tensor name length");
    rec.name = reader.str(name_len, "tensor name");
    const uint32_t rank = reader.u32("tensor rank");
    DCA_CHECK_FMT(rank >= 1 && rank <= 4, FormatErrorCode::bad_header,
                  "checkpoint: bad rank for tensor '" + rec.name + "'");
    int64_t numel = 1;
    for (uint32_t i = 0; i < rank; ++i) {
        const uint32_t d = reader.u32("tensor dim");
        DCA_CHECK_FMT(d >= 1, FormatErrorCode::bad_header,
                      "checkpoint: zero dimension in tensor '" + rec.name + "'");
        rec.shape.push_back(static_cast<int64_t>(d));
        numel *= d;
    }
    reader.need(static_cast<size_t>(numel) * 4, "tensor payload");
    rec.data.resize(static_cast<size_t>(numel));
    for (int64_t i = 0; i < numel; ++i) rec.data[static_cast<size_t>(i)] = reader.f32("payload");
    return rec;
}

}  // namespace

void save_checkpoint(const std::string& path, const DepthModel& model, const AdamW* optimizer,
                     int64_t epoch) {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'D', 'C', 'A', 'C'});
    put_u32(out, kCheckpointVersion);

    const auto& entries = model.registry().entries();
    put_u32(out, static_cast<uint32_t>(entries.size()));
    for (const auto& entry : entries) put_tensor_record(out, entry.name, entry.tensor);

    out.push_back(optimizer ? 1 : 0);
    if (optimizer) {
        put_u64(out, static_cast<uint64_t>(optimizer->step_count()));
        put_u32(out, static_cast<uint32_t>(optimizer->slots().size() * 2));
        for (const auto& slot : optimizer->slots()) {
            put_tensor_record(out, "m." + slot.name, slot.m);
            put_tensor_record(out, "v." + slot.name, slot.v);
        }
    }

    put_u32(out, static_cast<uint32_t>(epoch));
    const std::string echo = model_config_to_string(model.config());
    put_u32(out, static_cast<uint32_t>(echo.size()));
    out.insert(out.end(), echo.begin(), echo.end());

    write_binary_file(path, out);
}

namespace {

void apply_record(const TensorRecord& rec, Tensor tensor, const std::string& context) {
    DCA_CHECK_FMT(rec.shape == tensor.shape(), FormatErrorCode::shape_mismatch,
                  "checkpoint: tensor '" + rec.name + "' has shape " + shape_str(rec.shape) +
                      " but the " + context + " expects " + shape_str(tensor.shape()));
    std::copy(rec.data.begin(), rec.data.end(), tensor.mutable_data().begin());
}

Reader open_checkpoint(const std::vector<uint8_t>& bytes) {
    Reader reader{bytes};
    reader.need(4, "magic");
    const std::string magic = reader.str(4, "magic");
    DCA_CHECK_FMT(magic == "DCAC", FormatErrorCode::bad_magic,
                  "checkpoint: bad magic '" + magic + "'");
    const uint32_t version = reader.u32("version");
    DCA_CHECK_FMT(version == kCheckpointVersion, FormatErrorCode::bad_version,
                  "checkpoint: unsupported version " + std::to_string(version));
    return reader;
}

}  // namespace

void load_checkpoint(const std::string& path, DepthModel& model, AdamW* optimizer,
                     int64_t* epoch) {
    const auto bytes = read_binary_file(path);
    Reader reader = open_checkpoint(bytes);

    const uint32_t tensor_count = reader.u32("tensor count");
    const auto& entries = model.registry().entries();
    DCA_CHECK_FMT(tensor_count == entries.size(), FormatErrorCode::missing_tensor,
                  "checkpoint: tensor table has " + std::to_string(tensor_count) +
                      " entries, model expects " + std::to_string(entries.size()));
    for (uint32_t i = 0; i < tensor_count; ++i) {
        TensorRecord rec = read_tensor_record(reader);
        DCA_CHECK_FMT(rec.name == entries[i].name, FormatErrorCode::missing_tensor,
                      "checkpoint: expected tensor '" + entries[i].name + "' at slot " +
                          std::to_string(i) + ", found '" + rec.name + "'");
        apply_record(rec, entries[i].tensor, "model");
    }

    reader.need(1, "optimizer flag");
    const bool has_opt = reader.bytes[reader.pos++] != 0;
    if (has_opt) {
        const uint64_t opt_step = reader.u64("optimizer step");
        const uint32_t opt_count = reader.u32("optimizer tensor count");
        if (optimizer) {
            DCA_CHECK_FMT(opt_count == optimizer->slots().size() * 2,
                          FormatErrorCode::missing_tensor,
                          "checkpoint: optimizer table size mismatch");
            optimizer->set_step_count(static_cast<int64_t>(opt_step));
            for (auto& slot : optimizer->slots()) {
                TensorRecord m = read_tensor_record(reader);
                DCA_CHECK_FMT(m.name == "m." + slot.name, FormatErrorCode::missing_tensor,
                              "checkpoint: expected optimizer tensor 'm." + slot.name + "'");
                apply_record(m, slot.m, "optimizer");
                TensorRecord v = read_tensor_record(reader);
                DCA_CHECK_FMT(v.name == "v." + slot.name, FormatErrorCode::missing_tensor,
                              "checkpoint: expected optimizer tensor 'v." + slot.name + "'");
                apply_record(v, slot.v, "optimizer");
            }
        } else {
            for (uint32_t i = 0; i < opt_count; ++i) read_tensor_record(reader);
        }
    } else {
        DCA_CHECK_FMT(optimizer == nullptr, FormatErrorCode::missing_tensor,
                      "checkpoint: file carries no optimizer state");
    }

    const uint32_t file_epoch = reader.u32("epoch");
    if (epoch) *epoch = static_cast<int64_t>(file_epoch);

    // The config echo is informational; shape agreement was already enforced
    // tensor by tensor against the registry.
    const uint32_t echo_len = reader.u32("config length");
    reader.str(echo_len, "config echo");
}

std::string read_checkpoint_config(const std::string& path) {
    const auto bytes = read_binary_file(path);
    Reader reader = open_checkpoint(bytes);
    const uint32_t tensor_count = reader.u32("tensor count");
    for (uint32_t i = 0; i < tensor_count; ++i) read_tensor_record(reader);
    reader.need(1, "optimizer flag");
    const bool has_opt = reader.bytes[reader.pos++] != 0;
    if (has_opt) {
        reader.u64("optimizer step");
        const uint32_t opt_count = reader.u32("optimizer tensor count");
        for (uint32_t i = 0; i < opt_count; ++i) read_tensor_record(reader);
    }
    reader.u32("epoch");
    const uint32_t echo_len = reader.u32("config length");
    return reader.str(echo_len, "config echo");
}

}  // namespace dca
