#ifndef MFF_TRAIN_HPP
#define MFF_TRAIN_HPP

#include <iosfwd>

#include "mff/model.hpp"

namespace mff {

struct TrainConfig {
    std::size_t batch_size = 16;
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double grad_clip = 0.0;  // 0 disables clipping
    std::uint64_t seed = 7;
};

struct AdamState {
    std::vector<std::vector<double>> m, v;  // moments mirror parameter shapes
    std::uint64_t t = 0;

    void init_like(std::vector<Tensor>& params);
    bool initialized() const { return !m.empty(); }
};

/// One Adam update with bias correction from the gradients currently held by
/// the parameters. The step counter increments even for zero gradients.
void adam_step(std::vector<Tensor>& params, AdamState& state, const TrainConfig& config);

struct EpochLog {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double train_acc = 0.0;
    long wall_ms = 0;
};

/// Seeded shuffled mini-batches, mean BCE per batch, backward, adam_step.
/// The per-epoch shuffle is derived from (seed, epoch), so resuming from a
/// checkpoint continues the uninterrupted trajectory exactly. Optional
/// `log_out` receives one JSON line per epoch.
std::vector<EpochLog> train(ModelParams& model, const Dataset& trainset,
                            const TrainConfig& config, AdamState& state,
                            std::size_t start_epoch = 0, std::ostream* log_out = nullptr);

/// Hash covering everything that pins the training trajectory (model config,
/// optimizer settings, seed); the epoch count is deliberately excluded so
/// resumed runs can extend it.
std::uint64_t run_hash(const ModelConfig& model_config, const TrainConfig& train_config);

void checkpoint_save(const std::string& path, ModelParams& model, const AdamState& state,
                     std::size_t epochs_done, std::uint64_t hash);

/// Restores into an already-initialized model of the same configuration.
/// Returns the number of completed epochs recorded in the file.
std::size_t checkpoint_load(const std::string& path, ModelParams& model, AdamState& state,
                            std::uint64_t expected_hash);

} // namespace mff

#endif
