#ifndef CMFL_TRAIN_HPP
#define CMFL_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cmfl/dataio.hpp"
#include "cmfl/loss.hpp"
#include "cmfl/model.hpp"
#include "cmfl/textlang.hpp"

namespace cmfl {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    AdamConfig adam;
    std::uint64_t seed = 42;
    LossConfig loss;
    HeadType head = HeadType::Cosine;
    std::size_t emb_dim = 32;
    FeatureConfig feature;
    double scale = 1.0;           // cosine logit scale
    double dropout = 0.0;         // on the embedding e, training only
    double pseudo_threshold = 0.0;
    bool continue_phase2 = false; // continue from phase-1 weights instead of retraining
};

// Adam moments mirror ModelParams. P rows are updated lazily: a row's moments
// decay only when it is touched, with a catch-up loop replaying the skipped
// zero-gradient steps so results match dense Adam.
struct AdamState {
    std::vector<double> mP, vP;
    std::vector<double> mW, vW;
    std::vector<double> mb, vb;
    std::vector<std::uint64_t> last_step;  // per P row
    std::uint64_t t = 0;

    static AdamState for_params(const ModelParams& p);
};

struct EpochStats {
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    double wall_seconds = 0.0;
};

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               const AdamConfig& adam);

// Replays pending zero-gradient steps on every stale P row so the parameters
// equal a dense Adam run at state.t. Call before reading or saving params.
void adam_catch_up_all(ModelParams& params, AdamState& state, double lr, const AdamConfig& adam);

struct TrainResult {
    ModelParams params;
    TrainHistory history;
    std::size_t final_train_size = 0;  // phase-2 set size for train_with_pseudo
};

TrainResult train(const std::vector<LabeledExample>& labeled, const TrainConfig& cfg,
                  const Dictionary& dict, TargetLanguage lang);

std::vector<LabeledExample> pseudo_label(const ModelParams& params,
                                         const std::vector<std::string>& unlabeled,
                                         double threshold);

TrainResult train_with_pseudo(const std::vector<LabeledExample>& labeled,
                              const std::vector<std::string>& unlabeled, const TrainConfig& cfg,
                              const Dictionary& dict, TargetLanguage lang);

// Line-oriented `key = value` config files; '#' comments. Throws DomainError
// on unknown keys or bad values.
void apply_config_entry(TrainConfig& cfg, const std::string& key, const std::string& value);
void load_config_file(TrainConfig& cfg, const std::string& path);

}  // namespace cmfl

#endif
