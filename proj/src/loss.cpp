#include "cmfl/loss.hpp"

#include <cmath>
#include <cstdio>

#include "cmfl/errors.hpp"

namespace cmfl {

ClassWeights class_weights_from_counts(const std::vector<std::size_t>& counts) {
    const std::size_t C = counts.size();
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        if (counts[c] == 0) throw ZeroCount(c);
        total += static_cast<double>(counts[c]);
    }
    ClassWeights cw;
    cw.w.resize(C);
    for (std::size_t c = 0; c < C; ++c)
        cw.w[c] = total / (static_cast<double>(C) * static_cast<double>(counts[c]));
    return cw;
}

LossValue weighted_ce(const std::vector<double>& probs, std::size_t y, const ClassWeights& w) {
    const double py = probs[y];
    if (!(py > 0.0)) throw NonFiniteProb();
    const double wy = w.w[y];
    LossValue out;
    out.value = -wy * std::log(py);
    out.dlogits.resize(probs.size());
    for (std::size_t j = 0; j < probs.size(); ++j)
        out.dlogits[j] = wy * (probs[j] - (j == y ? 1.0 : 0.0));
    return out;
}

LossValue focal(const std::vector<double>& probs, std::size_t y, const ClassWeights& w,
                double gamma) {
    const double py = probs[y];
    if (!(py > 0.0)) throw NonFiniteProb();
    const double wy = w.w[y];
    const double onem = 1.0 - py;

    LossValue out;
    out.value = wy * std::pow(onem, gamma) * (-std::log(py));
    // dL/dp_y; both terms vanish as p_y -> 1 for gamma > 0
    double ddp;
    if (onem <= 0.0) {
        ddp = (gamma == 0.0) ? -wy / py : 0.0;
    } else {
        ddp = wy * (gamma * std::pow(onem, gamma - 1.0) * std::log(py) - std::pow(onem, gamma) / py);
    }
    out.dlogits.resize(probs.size());
    for (std::size_t j = 0; j < probs.size(); ++j)
        out.dlogits[j] = ddp * py * ((j == y ? 1.0 : 0.0) - probs[j]);
    return out;
}

double cmi_multiplier(double cmi, double alpha, double gamma) {
    if (!(cmi >= 0.0 && cmi <= 1.0)) throw DomainError("cmi outside [0,1]");
    // std::pow(0,0) == 1, which matches the gamma = 0 convention here
    return alpha * (std::pow(1.0 - cmi, gamma) + std::pow(cmi, gamma));
}

LossValue cmi_fl(const LossValue& ce, double cmi, double alpha, double gamma) {
    const double m = cmi_multiplier(cmi, alpha, gamma);
    LossValue out;
    out.value = m * ce.value;
    out.dlogits.resize(ce.dlogits.size());
    for (std::size_t j = 0; j < ce.dlogits.size(); ++j) out.dlogits[j] = m * ce.dlogits[j];
    return out;
}

BatchLoss batch_loss(const std::vector<ForwardTrace>& traces, const std::vector<std::size_t>& labels,
                     const LossConfig& cfg, const ClassWeights& w,
                     const std::vector<CmiScore>& cmis) {
    const std::size_t n = traces.size();
    if (n == 0) throw EmptyBatch();
    if (labels.size() != n) throw LengthMismatch("labels vs traces");
    if (cfg.kind == LossKind::CmiFL && cmis.size() != n) throw LengthMismatch("cmis vs traces");

    static bool warned_gamma0 = false;
    if (cfg.kind == LossKind::CmiFL && cfg.gamma == 0.0 && !warned_gamma0) {
        warned_gamma0 = true;
        std::fprintf(stderr, "warning: cmi-fl with gamma = 0 reduces to a uniform 2*alpha*CE\n");
    }

    double mean_batch_cmi = 0.0;
    if (cfg.kind == LossKind::CmiFL && cfg.cmi_mode == CmiMode::PerBatch)
        mean_batch_cmi = batch_cmi(cmis);

    BatchLoss out;
    out.dlogits.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        LossValue lv;
        switch (cfg.kind) {
            case LossKind::CE:
                lv = weighted_ce(traces[i].probs, labels[i], w);
                break;
            case LossKind::Focal:
                lv = focal(traces[i].probs, labels[i], w, cfg.gamma);
                break;
            case LossKind::CmiFL: {
                const LossValue ce = weighted_ce(traces[i].probs, labels[i], w);
                const double c = cfg.cmi_mode == CmiMode::PerBatch ? mean_batch_cmi : cmis[i].value;
                lv = cmi_fl(ce, c, cfg.alpha, cfg.gamma);
                break;
            }
        }
        out.mean_value += lv.value;
        for (double& g : lv.dlogits) g *= inv_n;
        out.dlogits[i] = std::move(lv.dlogits);
    }
    out.mean_value *= inv_n;
    return out;
}

}  // namespace cmfl
