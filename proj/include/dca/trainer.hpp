#pragma once

#include <iosfwd>
#include <optional>

#include "dca/checkpoint.hpp"
#include "dca/dataset.hpp"
#include "dca/losses.hpp"

namespace dca {

struct TrainConfig {
    int64_t epochs = 25;
    int64_t batch_size = 6;
    double base_lr = 1e-4;
    double lr_decay = 0.97;
    double weight_decay = 0.01;
    std::string loss_profile = "vari";  // vari | nyu
    uint64_t seed = 1;
    std::string manifest_path;
    std::string model_config_path;  // empty = built-in defaults
    std::string out_dir = "runs/default";
    int64_t max_steps = 0;       // 0 = run all epochs
    int64_t validate_every = 1;  // epochs between test-split validations; 0 = never
    bool augment = true;
    int64_t crop_h = 64;
    int64_t crop_w = 96;
};

TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::string& path);
std::string train_config_to_string(const TrainConfig& cfg);
LossWeights loss_profile_weights(const std::string& profile);

struct EpochLog {
    int64_t epoch = 0;
    double loss = 0, l1 = 0, si = 0, grad = 0;
    double lr = 0;
    std::optional<MetricsReport> validation;
};

struct TrainResult {
    std::string final_checkpoint;
    std::vector<EpochLog> epochs;
    int64_t steps = 0;
    uint64_t data_order_hash = 0;  // FNV-1a over the consumed frame sequence
};

// Deterministic given the seeds: fixed shuffle per (seed, epoch), seeded
// per-frame augmentation. Writes one checkpoint per epoch under out_dir and
// logs line-oriented key=value records. A non-finite loss aborts with the
// step number.
TrainResult train(DepthModel& model, const TrainConfig& cfg, std::ostream* log = nullptr);

struct EvalOptions {
    std::string split = "test";
    bool inject_gt = false;      // score the ground truth against itself
    bool keep_consistency_maps = false;
};

struct EvalResult {
    MetricsReport aggregate;  // metrics averaged per frame, then over frames
    std::vector<MetricsReport> per_frame;
    double consistency = 0.0;  // averaged over (scene, viewpoint) groups
    int64_t consistency_groups = 0;
    int64_t skipped_groups = 0;  // groups with fewer than 2 illumination siblings
    std::vector<std::pair<std::string, ConsistencyReport>> consistency_reports;
};

// Flip-averaged inference over one split of a manifest.
EvalResult evaluate(DepthModel& model, const Manifest& manifest, const EvalOptions& opts,
                    std::ostream* log = nullptr);

struct AblationResult {
    EvalResult base;
    EvalResult dca;
    uint64_t base_data_hash = 0;
    uint64_t dca_data_hash = 0;
    std::string table;  // two data rows plus reference footnotes
};

// Trains both dca_enabled settings with the same seed and data order, then
// evaluates them side by side.
AblationResult run_ablation(const TrainConfig& cfg, const ModelConfig& mcfg,
                            std::ostream* log = nullptr);

// Helpers shared with the CLI.
std::pair<Tensor, Tensor> batch_from_frames(const std::vector<Frame>& frames);
Tensor rgb_tensor_from_frame(const Frame& frame);
Tensor depth_tensor_from_frame(const Frame& frame);

}  // namespace dca
