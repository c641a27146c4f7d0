#ifndef CMFL_DATAIO_HPP
#define CMFL_DATAIO_HPP

#include <string>
#include <vector>

#include "cmfl/model.hpp"
#include "cmfl/textlang.hpp"

namespace cmfl {

struct LabeledExample {
    std::string text;
    std::string label;
};

// Fixed class order per language; class index = position. Malayalam has no
// Offensive_Targeted_Insult_Other row.
std::vector<std::string> default_label_vocab(TargetLanguage lang);

std::string language_name(TargetLanguage lang);
TargetLanguage parse_language(const std::string& code);  // "ta" | "ml" | "kn"

std::size_t label_index(const std::vector<std::string>& vocab, const std::string& label);

std::vector<LabeledExample> load_tsv(const std::string& path, bool has_header,
                                     const std::vector<std::string>& vocab);

// Lines of raw text; if a line contains a TAB, the text is everything before
// the final TAB (so labeled TSVs can be used as unlabeled pools).
std::vector<std::string> load_text_lines(const std::string& path);

void write_predictions(const std::string& path,
                       const std::vector<std::pair<std::string, double>>& preds);
std::vector<std::pair<std::string, double>> read_predictions(const std::string& path);

void save_model(const std::string& path, const ModelParams& params);
ModelParams load_model(const std::string& path);

void write_tsv(const std::string& path, const std::vector<LabeledExample>& examples);

}  // namespace cmfl

#endif
