#include "cmfl/cmi.hpp"

#include <algorithm>

#include "cmfl/errors.hpp"

namespace cmfl {

CmiScore sentence_cmi(const TaggedSentence& s) {
    CmiScore score;
    std::size_t native = 0, english = 0, universal = 0;
    for (const LangTag tag : s.tags) {
        switch (tag) {
            case LangTag::Native:
            case LangTag::RomanizedNative: ++native; break;
            case LangTag::English: ++english; break;
            case LangTag::Universal: ++universal; break;
        }
    }
    score.n_tokens = s.tags.size();
    score.n_universal = universal;
    score.dominant_count = std::max(native, english);
    if (score.n_tokens > universal) {
        // Single division so the result is the correctly rounded rational
        // (N - U - dominant) / (N - U).
        const std::size_t lang_total = score.n_tokens - universal;
        score.value = static_cast<double>(lang_total - score.dominant_count) /
                      static_cast<double>(lang_total);
    }
    return score;
}

double batch_cmi(const std::vector<CmiScore>& scores) {
    if (scores.empty()) throw EmptyBatch();
    double sum = 0.0;
    for (const CmiScore& s : scores) sum += s.value;
    return sum / static_cast<double>(scores.size());
}

CorpusCmiProfile corpus_profile(const std::vector<TaggedSentence>& sentences) {
    CorpusCmiProfile p;
    p.per_sentence.reserve(sentences.size());
    double sum = 0.0;
    for (const TaggedSentence& s : sentences) {
        const CmiScore score = sentence_cmi(s);
        sum += score.value;
        std::size_t bin = static_cast<std::size_t>(score.value * 10.0);
        if (bin > 9) bin = 9;  // value == 1.0 goes in the last bin
        ++p.histogram[bin];
        p.per_sentence.push_back(score);
    }
    if (!p.per_sentence.empty()) sum /= static_cast<double>(p.per_sentence.size());
    p.mean = p.per_sentence.empty() ? 0.0 : sum;
    return p;
}

}  // namespace cmfl
