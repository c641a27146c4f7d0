#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmfl/cmi.hpp"
#include "cmfl/dataio.hpp"
#include "cmfl/errors.hpp"
#include "cmfl/eval.hpp"
#include "cmfl/loss.hpp"
#include "cmfl/model.hpp"
#include "cmfl/textlang.hpp"
#include "cmfl/train.hpp"

using nlohmann::json;

namespace {

// Prefer one of the per-language default vocabularies when it covers every
// observed label; otherwise fall back to first-appearance order.
std::vector<std::string> infer_vocab(const std::vector<std::string>& labels) {
    for (const auto lang : {cmfl::TargetLanguage::Tamil, cmfl::TargetLanguage::Malayalam,
                            cmfl::TargetLanguage::Kannada}) {
        const auto vocab = cmfl::default_label_vocab(lang);
        const bool covers = std::all_of(labels.begin(), labels.end(), [&](const std::string& l) {
            return std::find(vocab.begin(), vocab.end(), l) != vocab.end();
        });
        if (covers) return vocab;
    }
    std::vector<std::string> vocab;
    for (const auto& l : labels)
        if (std::find(vocab.begin(), vocab.end(), l) == vocab.end()) vocab.push_back(l);
    return vocab;
}

int cmd_cmi_stats(const std::string& data, const std::string& lang_code, const std::string& dict_path,
                  bool as_json) {
    const auto lang = cmfl::parse_language(lang_code);
    const auto dict = cmfl::Dictionary::load(dict_path);
    const auto lines = cmfl::load_text_lines(data);
    std::vector<cmfl::TaggedSentence> sentences;
    sentences.reserve(lines.size());
    for (const auto& l : lines) sentences.push_back(cmfl::tag_sentence(l, dict, lang));
    const auto profile = cmfl::corpus_profile(sentences);

    if (as_json) {
        json j;
        j["mean"] = profile.mean;
        j["histogram"] = profile.histogram;
        j["per_sentence"] = json::array();
        for (const auto& s : profile.per_sentence)
            j["per_sentence"].push_back({{"value", s.value},
                                         {"n_tokens", s.n_tokens},
                                         {"n_universal", s.n_universal},
                                         {"dominant_count", s.dominant_count}});
        std::cout << j.dump() << "\n";
    } else {
        std::printf("sentences: %zu\n", profile.per_sentence.size());
        std::printf("mean CMI:  %.6f\n", profile.mean);
        std::printf("histogram over [0,1], 10 bins:\n");
        for (std::size_t b = 0; b < 10; ++b)
            std::printf("  [%.1f,%.1f%s %zu\n", b / 10.0, (b + 1) / 10.0, b == 9 ? "]" : ")",
                        profile.histogram[b]);
    }
    return 0;
}

int cmd_train(const std::string& data, const std::string& lang_code, const std::string& dict_path,
              const std::string& config_path, const std::string& loss_kind,
              const std::string& head, const std::string& seed, const std::string& out) {
    cmfl::TrainConfig cfg;
    if (!config_path.empty()) cmfl::load_config_file(cfg, config_path);
    if (!loss_kind.empty()) cmfl::apply_config_entry(cfg, "loss.kind", loss_kind);
    if (!head.empty()) cmfl::apply_config_entry(cfg, "head", head);
    if (!seed.empty()) cmfl::apply_config_entry(cfg, "seed", seed);

    const auto lang = cmfl::parse_language(lang_code);
    const auto dict = cmfl::Dictionary::load(dict_path);
    const auto vocab = cmfl::default_label_vocab(lang);
    const auto labeled = cmfl::load_tsv(data, false, vocab);

    const auto result = cmfl::train(labeled, cfg, dict, lang);
    for (std::size_t e = 0; e < result.history.epochs.size(); ++e)
        std::printf("epoch %zu  loss %.6f  acc %.4f\n", e + 1,
                    result.history.epochs[e].mean_loss, result.history.epochs[e].accuracy);
    std::printf("trained %zu examples in %.2fs\n", labeled.size(), result.history.wall_seconds);
    cmfl::save_model(out, result.params);
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out) {
    const auto params = cmfl::load_model(model_path);
    const auto lines = cmfl::load_text_lines(data);
    std::vector<std::pair<std::string, double>> preds;
    preds.reserve(lines.size());
    for (const auto& text : lines) {
        const auto x = cmfl::featurize(text, params.feature);
        const auto [cls, probs] = cmfl::predict(params, x);
        preds.emplace_back(params.label_vocab[cls], probs[cls]);
    }
    cmfl::write_predictions(out, preds);
    return 0;
}

int cmd_pseudo_label(const std::string& model_path, const std::string& unlabeled_path,
                     double threshold, const std::string& out) {
    const auto params = cmfl::load_model(model_path);
    const auto lines = cmfl::load_text_lines(unlabeled_path);
    const auto pseudo = cmfl::pseudo_label(params, lines, threshold);
    cmfl::write_tsv(out, pseudo);
    std::fprintf(stderr, "kept %zu of %zu (threshold %.3f)\n", pseudo.size(), lines.size(),
                 threshold);
    return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& preds_path, bool classwise,
             bool as_json) {
    const auto preds = cmfl::read_predictions(preds_path);
    std::vector<std::string> gold_labels, pred_labels;
    {
        // gold is a TSV dataset; accept any labels, vocab inferred below
        std::ifstream in(gold_path, std::ios::binary);
        if (!in) throw cmfl::IoError(gold_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto tab = line.rfind('\t');
            if (tab == std::string::npos) throw cmfl::MalformedLine(gold_path, lineno);
            gold_labels.push_back(line.substr(tab + 1));
        }
    }
    for (const auto& [label, prob] : preds) pred_labels.push_back(label);
    if (gold_labels.size() != pred_labels.size())
        throw cmfl::LengthMismatch("gold has " + std::to_string(gold_labels.size()) +
                                   " rows, preds has " + std::to_string(pred_labels.size()));

    std::vector<std::string> all = gold_labels;
    all.insert(all.end(), pred_labels.begin(), pred_labels.end());
    const auto vocab = infer_vocab(all);
    std::vector<std::size_t> g(gold_labels.size()), p(pred_labels.size());
    for (std::size_t i = 0; i < gold_labels.size(); ++i) {
        g[i] = cmfl::label_index(vocab, gold_labels[i]);
        p[i] = cmfl::label_index(vocab, pred_labels[i]);
    }
    const auto cm = cmfl::confusion(g, p, vocab);
    const auto report = cmfl::metrics(cm);

    if (as_json) {
        json j;
        j["per_class"] = json::array();
        for (const auto& m : report.per_class)
            j["per_class"].push_back({{"label", m.label},
                                      {"precision", m.precision},
                                      {"recall", m.recall},
                                      {"f1", m.f1},
                                      {"support", m.support}});
        j["macro"] = {{"precision", report.macro_precision},
                      {"recall", report.macro_recall},
                      {"f1", report.macro_f1}};
        j["weighted"] = {{"precision", report.weighted_precision},
                         {"recall", report.weighted_recall},
                         {"f1", report.weighted_f1}};
        j["accuracy"] = report.accuracy;
        std::cout << j.dump() << "\n";
    } else {
        if (classwise) {
            std::printf("%-40s %9s %9s %9s %9s\n", "class", "precision", "recall", "f1", "support");
            for (const auto& m : report.per_class)
                std::printf("%-40s %9.4f %9.4f %9.4f %9zu\n", m.label.c_str(), m.precision,
                            m.recall, m.f1, m.support);
        }
        std::printf("macro     P %.4f  R %.4f  F1 %.4f\n", report.macro_precision,
                    report.macro_recall, report.macro_f1);
        std::printf("weighted  P %.4f  R %.4f  F1 %.4f\n", report.weighted_precision,
                    report.weighted_recall, report.weighted_f1);
        std::printf("accuracy  %.4f\n", report.accuracy);
    }
    return 0;
}

int cmd_significance(const std::string& path_a, const std::string& path_b) {
    const auto preds_a = cmfl::read_predictions(path_a);
    const auto preds_b = cmfl::read_predictions(path_b);
    if (preds_a.size() != preds_b.size())
        throw cmfl::LengthMismatch("prediction files have different lengths");

    std::vector<std::string> all;
    for (const auto& [l, p] : preds_a) all.push_back(l);
    for (const auto& [l, p] : preds_b) all.push_back(l);
    const auto vocab = infer_vocab(all);
    std::vector<std::size_t> a(preds_a.size()), b(preds_b.size());
    for (std::size_t i = 0; i < preds_a.size(); ++i) {
        a[i] = cmfl::label_index(vocab, preds_a[i].first);
        b[i] = cmfl::label_index(vocab, preds_b[i].first);
    }
    const auto result = cmfl::stuart_maxwell(cmfl::paired_table(a, b, vocab.size()));
    json j;
    j["chi2"] = result.chi2;
    j["df"] = result.df;
    j["p_value"] = result.p_value;
    std::cout << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Code-mixed offensive-language classifier: CMI-weighted focal loss, "
                 "cosine-normalized head, pseudo-labeling and evaluation tools"};
    app.require_subcommand(1);

    std::string data, lang, dict, config, loss_kind, head, seed, out, model, unlabeled;
    std::string gold, preds, preds_a, preds_b;
    double threshold = 0.0;
    bool as_json = false, classwise = false;

    auto* cmi_stats = app.add_subcommand("cmi-stats", "Corpus Code-Mixing Index profile");
    cmi_stats->add_option("--data", data)->required();
    cmi_stats->add_option("--lang", lang)->required();
    cmi_stats->add_option("--dict", dict)->required();
    cmi_stats->add_flag("--json", as_json);

    auto* train = app.add_subcommand("train", "Train a classifier");
    train->add_option("--data", data)->required();
    train->add_option("--lang", lang)->required();
    train->add_option("--dict", dict)->required();
    train->add_option("--config", config);
    train->add_option("--loss", loss_kind)->check(CLI::IsMember({"ce", "focal", "cmi-fl"}));
    train->add_option("--head", head)->check(CLI::IsMember({"dot", "cosine"}));
    train->add_option("--seed", seed);
    train->add_option("--out", out)->required();

    auto* predict = app.add_subcommand("predict", "Predict labels for a text file");
    predict->add_option("--model", model)->required();
    predict->add_option("--data", data)->required();
    predict->add_option("--out", out)->required();

    auto* pseudo = app.add_subcommand("pseudo-label", "Pseudo-label an unlabeled pool");
    pseudo->add_option("--model", model)->required();
    pseudo->add_option("--unlabeled", unlabeled)->required();
    pseudo->add_option("--threshold", threshold)->check(CLI::Range(0.0, 1.0));
    pseudo->add_option("--out", out)->required();

    auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
    eval->add_option("--gold", gold)->required();
    eval->add_option("--preds", preds)->required();
    eval->add_flag("--classwise", classwise);
    eval->add_flag("--json", as_json);

    auto* significance = app.add_subcommand("significance", "Stuart-Maxwell test on two systems");
    significance->add_option("--preds-a", preds_a)->required();
    significance->add_option("--preds-b", preds_b)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (cmi_stats->parsed()) return cmd_cmi_stats(data, lang, dict, as_json);
        if (train->parsed()) return cmd_train(data, lang, dict, config, loss_kind, head, seed, out);
        if (predict->parsed()) return cmd_predict(model, data, out);
        if (pseudo->parsed()) return cmd_pseudo_label(model, unlabeled, threshold, out);
        if (eval->parsed()) return cmd_eval(gold, preds, classwise, as_json);
        if (significance->parsed()) return cmd_significance(preds_a, preds_b);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
