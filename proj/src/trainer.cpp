#include "dca/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace dca {

namespace {

const std::set<std::string> kTrainKeys = {
    "epochs",     "batch_size", "base_lr",        "lr_decay",  "weight_decay",
    "loss_profile", "seed",     "manifest",       "model_config", "out_dir",
    "max_steps",  "validate_every", "augment",    "crop_h",    "crop_w"};

uint64_t fnv1a(uint64_t hash, uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        hash ^= (value >> (8 * i)) & 0xff;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
    uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, a);
    h = fnv1a(h, b);
    h = fnv1a(h, c);
    return h;
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
    auto kv = parse_kv_text(text, kTrainKeys);
    TrainConfig cfg;
    cfg.epochs = kv_int(kv, "epochs", cfg.epochs);
    cfg.batch_size = kv_int(kv, "batch_size", cfg.batch_size);
    cfg.base_lr = kv_double(kv, "base_lr", cfg.base_lr);
    cfg.lr_decay = kv_double(kv, "lr_decay", cfg.lr_decay);
    cfg.weight_decay = kv_double(kv, "weight_decay", cfg.weight_decay);
    cfg.loss_profile = kv_string(kv, "loss_profile", cfg.loss_profile);
    cfg.seed = static_cast<uint64_t>(kv_int(kv, "seed", static_cast<int64_t>(cfg.seed)));
    cfg.manifest_path = kv_string(kv, "manifest", cfg.manifest_path);
    cfg.model_config_path = kv_string(kv, "model_config", cfg.model_config_path);
    cfg.out_dir = kv_string(kv, "out_dir", cfg.out_dir);
    cfg.max_steps = kv_int(kv, "max_steps", cfg.max_steps);
    cfg.validate_every = kv_int(kv, "validate_every", cfg.validate_every);
    cfg.augment = kv_bool(kv, "augment", cfg.augment);
    cfg.crop_h = kv_int(kv, "crop_h", cfg.crop_h);
    cfg.crop_w = kv_int(kv, "crop_w", cfg.crop_w);
    DCA_CHECK(cfg.epochs >= 1, ConfigError, "train config: epochs must be >= 1");
    DCA_CHECK(cfg.batch_size >= 1, ConfigError, "train config: batch_size must be >= 1");
    DCA_CHECK(cfg.lr_decay > 0 && cfg.lr_decay <= 1, ConfigError,
              "train config: lr_decay must be in (0,1]");
    DCA_CHECK(cfg.max_steps >= 0, ConfigError, "train config: max_steps must be >= 0");
    loss_profile_weights(cfg.loss_profile);
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    return parse_train_config(read_text_file(path));
}

std::string train_config_to_string(const TrainConfig& cfg) {
    std::ostringstream out;
    out << "epochs = " << cfg.epochs << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "base_lr = " << cfg.base_lr << "\n";
    out << "lr_decay = " << cfg.lr_decay << "\n";
    out << "weight_decay = " << cfg.weight_decay << "\n";
    out << "loss_profile = " << cfg.loss_profile << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "manifest = " << cfg.manifest_path << "\n";
    out << "model_config = " << cfg.model_config_path << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    out << "max_steps = " << cfg.max_steps << "\n";
    out << "validate_every = " << cfg.validate_every << "\n";
    out << "augment = " << (cfg.augment ? "true" : "false") << "\n";
    out << "crop_h = " << cfg.crop_h << "\n";
    out << "crop_w = " << cfg.crop_w << "\n";
    return out.str();
}

LossWeights loss_profile_weights(const std::string& profile) {
    if (profile == "vari") return LossWeights::vari();
    if (profile == "nyu") return LossWeights::nyu();
    throw ConfigError("unknown loss profile: " + profile);
}

Tensor rgb_tensor_from_frame(const Frame& frame) {
    std::vector<float> data(static_cast<size_t>(3 * frame.height * frame.width));
    const int64_t plane = frame.height * frame.width;
    for (int64_t i = 0; i < plane; ++i)
        for (int64_t c = 0; c < 3; ++c)
            data[static_cast<size_t>(c * plane + i)] =
                static_cast<float>(frame.rgb[static_cast<size_t>(i * 3 + c)]) / 255.0f;
    return Tensor::from_values({1, 3, frame.height, frame.width}, std::move(data));
}

Tensor depth_tensor_from_frame(const Frame& frame) {
    return Tensor::from_values({1, 1, frame.height, frame.width},
                               std::vector<float>(frame.depth.begin(), frame.depth.end()));
}

std::pair<Tensor, Tensor> batch_from_frames(const std::vector<Frame>& frames) {
    DCA_CHECK(!frames.empty(), ConfigError, "batch_from_frames: empty batch");
    const int64_t h = frames.front().height, w = frames.front().width;
    const int64_t b = static_cast<int64_t>(frames.size());
    const int64_t plane = h * w;
    std::vector<float> rgb(static_cast<size_t>(b * 3 * plane));
    std::vector<float> depth(static_cast<size_t>(b * plane));
    for (int64_t n = 0; n < b; ++n) {
        const Frame& f = frames[static_cast<size_t>(n)];
        DCA_CHECK(f.height == h && f.width == w, ShapeError,
                  "batch_from_frames: frames disagree on resolution");
        for (int64_t i = 0; i < plane; ++i) {
            for (int64_t c = 0; c < 3; ++c)
                rgb[static_cast<size_t>(((n * 3 + c) * plane) + i)] =
                    static_cast<float>(f.rgb[static_cast<size_t>(i * 3 + c)]) / 255.0f;
            depth[static_cast<size_t>(n * plane + i)] = f.depth[static_cast<size_t>(i)];
        }
    }
    return {Tensor::from_values({b, 3, h, w}, std::move(rgb)),
            Tensor::from_values({b, 1, h, w}, std::move(depth))};
}

TrainResult train(DepthModel& model, const TrainConfig& cfg, std::ostream* log) {
    const LossWeights weights = loss_profile_weights(cfg.loss_profile);
    Manifest manifest = Manifest::load(cfg.manifest_path);
    const auto records = manifest.split_records("train");
    DCA_CHECK(!records.empty(), ConfigError, "train: manifest has no train records");

    std::vector<Frame> cache;
    cache.reserve(records.size());
    for (const auto& rec : records) cache.push_back(load_frame(rec, manifest.base_dir));

    fs::create_directories(cfg.out_dir);
    AdamWConfig ocfg;
    ocfg.lr = cfg.base_lr;
    ocfg.weight_decay = cfg.weight_decay;
    AdamW optimizer(model.registry(), ocfg);

    AugmentConfig acfg;
    acfg.crop_h = cfg.crop_h;
    acfg.crop_w = cfg.crop_w;

    TrainResult result;
    result.data_order_hash = 0xcbf29ce484222325ULL;
    model.set_training(true);

    int64_t global_step = 0;
    bool stop = false;
    for (int64_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
        optimizer.set_lr(lr_at_epoch(epoch, cfg.base_lr, cfg.lr_decay));

        std::vector<size_t> order(cache.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, static_cast<uint64_t>(epoch), 0));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0, l1_sum = 0, si_sum = 0, grad_sum = 0;
        int64_t batches = 0;
        for (size_t start = 0; start < order.size() && !stop; start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            std::vector<Frame> batch;
            batch.reserve(end - start);
            for (size_t k = start; k < end; ++k) {
                const size_t idx = order[k];
                result.data_order_hash = fnv1a(result.data_order_hash, idx);
                if (cfg.augment) {
                    batch.push_back(augment(cache[idx],
                                            mix_seed(cfg.seed, static_cast<uint64_t>(epoch),
                                                     static_cast<uint64_t>(global_step * 1000 + k)),
                                            acfg));
                } else {
                    batch.push_back(cache[idx]);
                }
            }
            auto [rgb, gt] = batch_from_frames(batch);
            const ValidMask mask =
                ValidMask::from_gt(gt, kMinDepth, model.config().max_depth);
            DCA_CHECK(mask.count >= 1, NumericalError, "train: batch has no valid pixels");

            Tensor l1, si, gr, loss;
            try {
                Tensor pred = model_forward(rgb, model);
                l1 = l1_loss(pred, gt, mask);
                si = si_loss(pred, gt, mask, weights.alpha, weights.lambda_si);
                gr = grad_loss(pred, gt, mask);
                loss = add(add(scalar_mul(l1, static_cast<float>(weights.lambda1)),
                               scalar_mul(si, static_cast<float>(weights.lambda2))),
                           scalar_mul(gr, static_cast<float>(weights.lambda3)));
            } catch (const NumericalError& e) {
                throw NumericalError("train: aborted at step " + std::to_string(global_step) +
                                     ": " + e.what());
            }

            const double loss_value = static_cast<double>(loss.item());
            if (!std::isfinite(loss_value))
                throw NumericalError("train: non-finite loss at step " +
                                     std::to_string(global_step));

            optimizer.zero_grad();
            backward(loss);
            optimizer.step();

            loss_sum += loss_value;
            l1_sum += static_cast<double>(l1.item());
            si_sum += static_cast<double>(si.item());
            grad_sum += static_cast<double>(gr.item());
            ++batches;
            ++global_step;
            if (cfg.max_steps > 0 && global_step >= cfg.max_steps) stop = true;
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.loss = loss_sum / static_cast<double>(batches);
        entry.l1 = l1_sum / static_cast<double>(batches);
        entry.si = si_sum / static_cast<double>(batches);
        entry.grad = grad_sum / static_cast<double>(batches);
        entry.lr = optimizer.lr();

        const bool validate_now =
            cfg.validate_every > 0 && ((epoch + 1) % cfg.validate_every == 0 || stop ||
                                       epoch + 1 == cfg.epochs);
        const auto val_records = manifest.split_records("test");
        if (validate_now && !val_records.empty()) {
            EvalOptions vopts;
            vopts.split = "test";
            entry.validation = evaluate(model, manifest, vopts, nullptr).aggregate;
            model.set_training(true);
        }

        if (log) {
            (*log) << std::fixed << std::setprecision(6) << "event=epoch epoch=" << epoch
                   << " loss=" << entry.loss << " l1=" << entry.l1 << " si=" << entry.si
                   << " grad=" << entry.grad << " lambda1=" << weights.lambda1
                   << " lambda2=" << weights.lambda2 << " lambda3=" << weights.lambda3
                   << " lr=" << std::setprecision(8) << entry.lr;
            if (entry.validation)
                (*log) << std::setprecision(6) << " val_delta1=" << entry.validation->delta1
                       << " val_absrel=" << entry.validation->absrel;
            (*log) << "\n";
        }
        result.epochs.push_back(entry);

        const std::string path =
            (fs::path(cfg.out_dir) / ("checkpoint_epoch" + std::to_string(epoch) + ".dcac"))
                .string();
        save_checkpoint(path, model, &optimizer, epoch);
        result.final_checkpoint = path;
    }
    result.steps = global_step;
    model.set_training(false);
    return result;
}

EvalResult evaluate(DepthModel& model, const Manifest& manifest, const EvalOptions& opts,
                    std::ostream* log) {
    // empty split selects every record
    const auto records =
        opts.split.empty() ? manifest.records : manifest.split_records(opts.split);
    DCA_CHECK(!records.empty(), ConfigError,
              "evaluate: split '" + opts.split + "' has no records");
    model.set_training(false);

    EvalResult result;
    std::map<std::pair<int64_t, int64_t>, std::vector<Tensor>> groups;

    double d1 = 0, d2 = 0, d3 = 0, absrel = 0, rmse = 0, l10 = 0;
    int64_t valid = 0;
    for (const auto& rec : records) {
        const Frame frame = load_frame(rec, manifest.base_dir);
        const Tensor gt = depth_tensor_from_frame(frame);
        Tensor pred;
        if (opts.inject_gt) {
            pred = gt.detached_copy();
        } else {
            const Tensor rgb = rgb_tensor_from_frame(frame);
            pred = predict_flip_averaged(rgb, model);
        }
        const ValidMask mask = ValidMask::from_gt(gt, kMinDepth, model.config().max_depth);
        const MetricsReport report =
            compute_metrics(pred, gt, mask, model.config().max_depth);
        if (log)
            (*log) << "event=frame scene=" << rec.scene_id << " viewpoint=" << rec.viewpoint_id
                   << " illumination=" << rec.illumination_id << " " << MetricsReport::kCsvHeader
                   << "=" << report.csv_line() << "\n";
        d1 += report.delta1;
        d2 += report.delta2;
        d3 += report.delta3;
        absrel += report.absrel;
        rmse += report.rmse;
        l10 += report.log10;
        valid += report.valid_count;
        result.per_frame.push_back(report);
        groups[{rec.scene_id, rec.viewpoint_id}].push_back(pred);
    }

    const double n = static_cast<double>(result.per_frame.size());
    result.aggregate.delta1 = d1 / n;
    result.aggregate.delta2 = d2 / n;
    result.aggregate.delta3 = d3 / n;
    result.aggregate.absrel = absrel / n;
    result.aggregate.rmse = rmse / n;
    result.aggregate.log10 = l10 / n;
    result.aggregate.valid_count = valid;

    double consistency_sum = 0;
    for (const auto& [key, preds] : groups) {
        if (preds.size() < 2) {
            ++result.skipped_groups;
            if (log)
                (*log) << "event=warning scene=" << key.first << " viewpoint=" << key.second
                       << " msg=missing_illumination_siblings\n";
            continue;
        }
        ConsistencyReport report = consistency_score(preds);
        consistency_sum += report.score;
        ++result.consistency_groups;
        if (opts.keep_consistency_maps) {
            result.consistency_reports.emplace_back(
                "s" + std::to_string(key.first) + "_v" + std::to_string(key.second),
                std::move(report));
        }
    }
    if (result.consistency_groups > 0)
        result.consistency = consistency_sum / static_cast<double>(result.consistency_groups);

    if (log)
        (*log) << std::fixed << std::setprecision(6) << "event=aggregate frames="
               << result.per_frame.size() << " " << MetricsReport::kCsvHeader << "="
               << result.aggregate.csv_line() << " consistency=" << result.consistency
               << " consistency_groups=" << result.consistency_groups
               << " skipped_groups=" << result.skipped_groups << "\n";
    return result;
}

AblationResult run_ablation(const TrainConfig& cfg, const ModelConfig& mcfg, std::ostream* log) {
    AblationResult result;
    Manifest manifest = Manifest::load(cfg.manifest_path);
    const bool has_test = !manifest.split_records("test").empty();
    EvalOptions eopts;
    eopts.split = has_test ? "test" : "train";

    auto run_arm = [&](bool dca_enabled, EvalResult& eval_result, uint64_t& hash,
                       const char* arm) {
        ModelConfig arm_cfg = mcfg;
        arm_cfg.dca_enabled = dca_enabled;
        DepthModel model(arm_cfg);
        TrainConfig arm_train = cfg;
        arm_train.out_dir = (fs::path(cfg.out_dir) / arm).string();
        if (log) (*log) << "event=ablation_arm arm=" << arm << "\n";
        TrainResult tr = train(model, arm_train, log);
        hash = tr.data_order_hash;
        eval_result = evaluate(model, manifest, eopts, log);
    };

    run_arm(false, result.base, result.base_data_hash, "base");
    run_arm(true, result.dca, result.dca_data_hash, "dca");

    std::ostringstream table;
    table << "arm,delta1,delta2,delta3,absrel,rmse,log10,consistency\n";
    auto put_row = [&table](const char* arm, const EvalResult& r) {
        table << arm << "," << std::fixed << std::setprecision(6) << r.aggregate.delta1 << ","
              << r.aggregate.delta2 << "," << r.aggregate.delta3 << "," << r.aggregate.absrel
              << "," << r.aggregate.rmse << "," << r.aggregate.log10 << "," << r.consistency
              << "\n";
    };
    put_row("base", result.base);
    put_row("base+dca", result.dca);
    table << "# reference (full-scale Vari, not asserted): base delta1=0.777 absrel=0.174 "
             "rmse=0.387 log10=0.067\n";
    table << "# reference (full-scale Vari, not asserted): base+dca delta1=0.797 absrel=0.161 "
             "rmse=0.377 log10=0.063\n";
    result.table = table.str();
    if (log) (*log) << result.table;
    return result;
}

}  // namespace dca
