#ifndef CMFL_LOSS_HPP
#define CMFL_LOSS_HPP

#include <cstddef>
#include <vector>

#include "cmfl/cmi.hpp"
#include "cmfl/model.hpp"

namespace cmfl {

enum class LossKind { CE, Focal, CmiFL };
enum class CmiMode { PerBatch, PerSentence };

struct LossConfig {
    LossKind kind = LossKind::CmiFL;
    double alpha = 1.7;
    double gamma = 0.25;
    bool use_class_weights = true;
    CmiMode cmi_mode = CmiMode::PerBatch;
};

// Inverse-frequency weights, w_c = N / (C * N_c); sum_c (N_c/N) w_c = 1.
struct ClassWeights {
    std::vector<double> w;
    static ClassWeights uniform(std::size_t C) { return ClassWeights{std::vector<double>(C, 1.0)}; }
};

struct LossValue {
    double value = 0.0;
    std::vector<double> dlogits;
};

ClassWeights class_weights_from_counts(const std::vector<std::size_t>& counts);

LossValue weighted_ce(const std::vector<double>& probs, std::size_t y, const ClassWeights& w);

LossValue focal(const std::vector<double>& probs, std::size_t y, const ClassWeights& w,
                double gamma);

// alpha * ((1-cmi)^gamma + cmi^gamma); the factor the CMI loss applies to CE.
double cmi_multiplier(double cmi, double alpha, double gamma);

LossValue cmi_fl(const LossValue& ce, double cmi, double alpha, double gamma);

struct BatchLoss {
    double mean_value = 0.0;
    std::vector<std::vector<double>> dlogits;  // per example, already / batch size
};

BatchLoss batch_loss(const std::vector<ForwardTrace>& traces, const std::vector<std::size_t>& labels,
                     const LossConfig& cfg, const ClassWeights& w,
                     const std::vector<CmiScore>& cmis);

}  // namespace cmfl

#endif
