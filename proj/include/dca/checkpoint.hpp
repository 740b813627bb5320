#pragma once

#include <string>

#include "dca/model.hpp"
#include "dca/optimizer.hpp"

namespace dca {

// Binary snapshot: magic "DCAC", version u32, named tensor table (name length
// u32 + UTF-8 name + rank u32 + dims u32[] + little-endian f32 payload),
// optimizer state table, epoch counter, model-config echo. All multi-byte
// fields little-endian. save -> load -> save is byte-identical.
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const DepthModel& model, const AdamW* optimizer,
                     int64_t epoch);

// Validates magic, version, and that the tensor table matches the model's
// registry exactly (names and shapes). Restores optimizer state when both the
// file and `optimizer` carry it.
void load_checkpoint(const std::string& path, DepthModel& model, AdamW* optimizer,
                     int64_t* epoch = nullptr);

// Reads just the embedded model-config echo, so a model can be built before a
// full load.
std::string read_checkpoint_config(const std::string& path);

}  // namespace dca
