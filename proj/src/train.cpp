#include "cmfl/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "cmfl/errors.hpp"
#include "cmfl/rng.hpp"

namespace cmfl {

AdamState AdamState::for_params(const ModelParams& p) {
    AdamState s;
    s.mP.assign(p.P.size(), 0.0);
    s.vP.assign(p.P.size(), 0.0);
    s.mW.assign(p.W.size(), 0.0);
    s.vW.assign(p.W.size(), 0.0);
    s.mb.assign(p.bias.size(), 0.0);
    s.vb.assign(p.bias.size(), 0.0);
    s.last_step.assign(p.feature.feature_dim, 0);
    return s;
}

namespace {

inline void adam_update_elem(double& theta, double& m, double& v, double g, double lr,
                             const AdamConfig& a, double bc1, double bc2) {
    m = a.beta1 * m + (1.0 - a.beta1) * g;
    v = a.beta2 * v + (1.0 - a.beta2) * g * g;
    theta -= lr * (m / bc1) / (std::sqrt(v / bc2) + a.epsilon);
}

// Replays steps (from, to] on one P row with zero gradient.
void catch_up_row(ModelParams& params, AdamState& state, std::size_t row, std::uint64_t to,
                  double lr, const AdamConfig& a) {
    const std::uint64_t from = state.last_step[row];
    if (from >= to) return;
    const std::size_t d = params.emb_dim;
    double* theta = &params.P[row * d];
    double* m = &state.mP[row * d];
    double* v = &state.vP[row * d];

    bool all_zero = true;
    for (std::size_t j = 0; j < d; ++j)
        if (m[j] != 0.0 || v[j] != 0.0) { all_zero = false; break; }
    if (all_zero) {  // zero moments stay zero; every skipped update is exactly 0
        state.last_step[row] = to;
        return;
    }

    double p1 = std::pow(a.beta1, static_cast<double>(from + 1));
    double p2 = std::pow(a.beta2, static_cast<double>(from + 1));
    for (std::uint64_t s = from + 1; s <= to; ++s) {
        const double bc1 = 1.0 - p1;
        const double bc2 = 1.0 - p2;
        for (std::size_t j = 0; j < d; ++j) {
            m[j] *= a.beta1;
            v[j] *= a.beta2;
            theta[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + a.epsilon);
        }
        p1 *= a.beta1;
        p2 *= a.beta2;
    }
    state.last_step[row] = to;
}

}  // namespace

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               const AdamConfig& adam) {
    if (grads.dW.size() != params.W.size()) throw ShapeMismatch("dW");
    if (params.head_type == HeadType::Dot && grads.dbias.size() != params.bias.size())
        throw ShapeMismatch("dbias");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(state.t));

    for (std::size_t i = 0; i < params.W.size(); ++i)
        adam_update_elem(params.W[i], state.mW[i], state.vW[i], grads.dW[i], lr, adam, bc1, bc2);
    if (params.head_type == HeadType::Dot)
        for (std::size_t i = 0; i < params.bias.size(); ++i)
            adam_update_elem(params.bias[i], state.mb[i], state.vb[i], grads.dbias[i], lr, adam,
                             bc1, bc2);

    const std::size_t d = params.emb_dim;
    for (const auto& [row, grad] : grads.dP) {
        if (grad.size() != d) throw ShapeMismatch("dP row");
        if (row >= params.feature.feature_dim) throw IndexOutOfRange("P row " + std::to_string(row));
        catch_up_row(params, state, row, state.t - 1, lr, adam);
        double* theta = &params.P[static_cast<std::size_t>(row) * d];
        double* m = &state.mP[static_cast<std::size_t>(row) * d];
        double* v = &state.vP[static_cast<std::size_t>(row) * d];
        for (std::size_t j = 0; j < d; ++j)
            adam_update_elem(theta[j], m[j], v[j], grad[j], lr, adam, bc1, bc2);
        state.last_step[row] = state.t;
    }
}

void adam_catch_up_all(ModelParams& params, AdamState& state, double lr, const AdamConfig& adam) {
    for (std::size_t row = 0; row < params.feature.feature_dim; ++row)
        catch_up_row(params, state, row, state.t, lr, adam);
}

namespace {

ClassWeights weights_for_dataset(const std::vector<std::size_t>& labels, std::size_t C,
                                 bool use_class_weights) {
    if (!use_class_weights) return ClassWeights::uniform(C);
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t y : labels) ++counts[y];
    // Classes absent from the training set never enter the loss; weight them 1
    // and normalize over the observed classes only.
    std::vector<std::size_t> observed;
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c)
        if (counts[c] > 0) { observed.push_back(c); total += static_cast<double>(counts[c]); }
    ClassWeights cw = ClassWeights::uniform(C);
    for (std::size_t c : observed)
        cw.w[c] = total / (static_cast<double>(observed.size()) * static_cast<double>(counts[c]));
    return cw;
}

ModelParams init_params(const TrainConfig& cfg, const std::vector<std::string>& vocab,
                        SplitMix64& rng) {
    ModelParams p;
    p.feature = cfg.feature;
    p.emb_dim = cfg.emb_dim;
    p.head_type = cfg.head;
    p.scale = cfg.scale;
    p.label_vocab = vocab;
    const double h = 1.0 / std::sqrt(static_cast<double>(cfg.emb_dim));
    p.P.resize(cfg.feature.feature_dim * cfg.emb_dim);
    for (double& v : p.P) v = rng.next_symmetric(h);
    p.W.resize(vocab.size() * cfg.emb_dim);
    for (double& v : p.W) v = rng.next_symmetric(h);
    if (cfg.head == HeadType::Dot) p.bias.assign(vocab.size(), 0.0);
    return p;
}

TrainResult train_core(const std::vector<LabeledExample>& labeled, const TrainConfig& cfg,
                       const Dictionary& dict, TargetLanguage lang,
                       const ModelParams* initial) {
    if (labeled.empty()) throw EmptyDataset();
    if (!cfg.feature.valid()) throw DomainError("invalid feature config");
    if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate >= 0.0))
        throw DomainError("invalid training hyperparameters");

    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::string> vocab = default_label_vocab(lang);
    const std::size_t C = vocab.size();
    const std::size_t n = labeled.size();

    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = label_index(vocab, labeled[i].label);

    SplitMix64 rng(cfg.seed);
    TrainResult res;
    res.params = initial ? *initial : init_params(cfg, vocab, rng);
    if (initial) init_params(cfg, vocab, rng);  // keep the stream position identical either way

    std::vector<SparseVec> feats(n);
    std::vector<CmiScore> cmis(n);
    for (std::size_t i = 0; i < n; ++i) {
        feats[i] = featurize(labeled[i].text, cfg.feature);
        cmis[i] = sentence_cmi(tag_sentence(labeled[i].text, dict, lang));
    }
    const ClassWeights weights = weights_for_dataset(labels, C, cfg.loss.use_class_weights);

    AdamState adam = AdamState::for_params(res.params);
    const std::size_t d = cfg.emb_dim;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffled_indices(n, rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;

        for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
            const std::size_t bn = std::min(cfg.batch_size, n - b0);
            std::vector<ForwardTrace> traces(bn);
            std::vector<std::size_t> batch_labels(bn);
            std::vector<CmiScore> batch_cmis(bn);
            std::vector<std::vector<double>> masks;
            if (cfg.dropout > 0.0) masks.resize(bn);

            for (std::size_t i = 0; i < bn; ++i) {
                const std::size_t ex = order[b0 + i];
                std::vector<double> e = embed(res.params, feats[ex]);
                if (cfg.dropout > 0.0) {
                    masks[i].assign(d, 0.0);
                    const double keep = 1.0 - cfg.dropout;
                    for (std::size_t j = 0; j < d; ++j) {
                        if (rng.next_unit() < keep) masks[i][j] = 1.0 / keep;
                        e[j] *= masks[i][j];
                    }
                }
                traces[i] = head_forward(res.params, feats[ex], std::move(e));
                batch_labels[i] = labels[ex];
                batch_cmis[i] = cmis[ex];

                std::size_t argmax = 0;
                for (std::size_t c = 1; c < C; ++c)
                    if (traces[i].probs[c] > traces[i].probs[argmax]) argmax = c;
                if (argmax == labels[ex]) ++correct;
            }

            const BatchLoss bl =
                batch_loss(traces, batch_labels, cfg.loss, weights, batch_cmis);
            loss_sum += bl.mean_value * static_cast<double>(bn);

            ParamGrads acc;
            acc.dW.assign(C * d, 0.0);
            if (cfg.head == HeadType::Dot) acc.dbias.assign(C, 0.0);
            std::map<std::uint32_t, std::vector<double>> dP;  // sorted rows, fixed fold order
            for (std::size_t i = 0; i < bn; ++i) {
                ParamGrads g = backward(res.params, traces[i], bl.dlogits[i]);
                for (std::size_t j = 0; j < acc.dW.size(); ++j) acc.dW[j] += g.dW[j];
                if (cfg.head == HeadType::Dot)
                    for (std::size_t j = 0; j < C; ++j) acc.dbias[j] += g.dbias[j];
                for (auto& [row, grad] : g.dP) {
                    if (cfg.dropout > 0.0)
                        for (std::size_t j = 0; j < d; ++j) grad[j] *= masks[i][j];
                    auto [it, fresh] = dP.try_emplace(row, d, 0.0);
                    for (std::size_t j = 0; j < d; ++j) it->second[j] += grad[j];
                    (void)fresh;
                }
            }
            acc.dP.reserve(dP.size());
            for (auto& [row, grad] : dP) acc.dP.emplace_back(row, std::move(grad));

            adam_step(res.params, acc, adam, cfg.learning_rate, cfg.adam);
        }

        EpochStats st;
        st.mean_loss = loss_sum / static_cast<double>(n);
        st.accuracy = static_cast<double>(correct) / static_cast<double>(n);
        res.history.epochs.push_back(st);
    }

    adam_catch_up_all(res.params, adam, cfg.learning_rate, cfg.adam);
    res.final_train_size = n;
    res.history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

}  // namespace

TrainResult train(const std::vector<LabeledExample>& labeled, const TrainConfig& cfg,
                  const Dictionary& dict, TargetLanguage lang) {
    return train_core(labeled, cfg, dict, lang, nullptr);
}

std::vector<LabeledExample> pseudo_label(const ModelParams& params,
                                         const std::vector<std::string>& unlabeled,
                                         double threshold) {
    std::vector<LabeledExample> out;
    for (const std::string& text : unlabeled) {
        const SparseVec x = featurize(text, params.feature);
        auto [cls, probs] = predict(params, x);
        if (probs[cls] >= threshold)
            out.push_back(LabeledExample{text, params.label_vocab[cls]});
    }
    return out;
}

TrainResult train_with_pseudo(const std::vector<LabeledExample>& labeled,
                              const std::vector<std::string>& unlabeled, const TrainConfig& cfg,
                              const Dictionary& dict, TargetLanguage lang) {
    TrainResult phase1 = train(labeled, cfg, dict, lang);
    const std::vector<LabeledExample> pseudo =
        pseudo_label(phase1.params, unlabeled, cfg.pseudo_threshold);

    std::vector<LabeledExample> combined = labeled;
    combined.insert(combined.end(), pseudo.begin(), pseudo.end());

    TrainResult phase2 = cfg.continue_phase2
                             ? train_core(combined, cfg, dict, lang, &phase1.params)
                             : train_core(combined, cfg, dict, lang, nullptr);

    TrainHistory history = phase1.history;
    history.epochs.insert(history.epochs.end(), phase2.history.epochs.begin(),
                          phase2.history.epochs.end());
    history.wall_seconds = phase1.history.wall_seconds + phase2.history.wall_seconds;
    phase2.history = std::move(history);
    return phase2;
}

namespace {

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw DomainError("expected a boolean, got '" + v + "'");
}

}  // namespace

void apply_config_entry(TrainConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "epochs") cfg.epochs = std::stoul(value);
        else if (key == "batch_size") cfg.batch_size = std::stoul(value);
        else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "emb_dim") cfg.emb_dim = std::stoul(value);
        else if (key == "scale") cfg.scale = std::stod(value);
        else if (key == "dropout") cfg.dropout = std::stod(value);
        else if (key == "pseudo_threshold") cfg.pseudo_threshold = std::stod(value);
        else if (key == "continue") cfg.continue_phase2 = parse_bool(value);
        else if (key == "head") {
            if (value == "dot") cfg.head = HeadType::Dot;
            else if (value == "cosine") cfg.head = HeadType::Cosine;
            else throw DomainError("head must be dot or cosine");
        } else if (key == "loss.kind") {
            if (value == "ce") cfg.loss.kind = LossKind::CE;
            else if (value == "focal") cfg.loss.kind = LossKind::Focal;
            else if (value == "cmi-fl") cfg.loss.kind = LossKind::CmiFL;
            else throw DomainError("loss.kind must be ce, focal or cmi-fl");
        } else if (key == "loss.alpha") cfg.loss.alpha = std::stod(value);
        else if (key == "loss.gamma") cfg.loss.gamma = std::stod(value);
        else if (key == "loss.use_class_weights") cfg.loss.use_class_weights = parse_bool(value);
        else if (key == "loss.cmi_mode") {
            if (value == "per-batch") cfg.loss.cmi_mode = CmiMode::PerBatch;
            else if (value == "per-sentence") cfg.loss.cmi_mode = CmiMode::PerSentence;
            else throw DomainError("loss.cmi_mode must be per-batch or per-sentence");
        } else if (key == "feature.n_min") cfg.feature.n_min = std::stoul(value);
        else if (key == "feature.n_max") cfg.feature.n_max = std::stoul(value);
        else if (key == "feature.dim") cfg.feature.feature_dim = std::stoul(value);
        else if (key == "feature.lowercase") cfg.feature.lowercase = parse_bool(value);
        else if (key == "adam.beta1") cfg.adam.beta1 = std::stod(value);
        else if (key == "adam.beta2") cfg.adam.beta2 = std::stod(value);
        else if (key == "adam.epsilon") cfg.adam.epsilon = std::stod(value);
        else throw DomainError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
        throw DomainError("bad value '" + value + "' for config key '" + key + "'");
    } catch (const std::out_of_range&) {
        throw DomainError("bad value '" + value + "' for config key '" + key + "'");
    }
}

void load_config_file(TrainConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw MalformedLine(path, lineno);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

}  // namespace cmfl
