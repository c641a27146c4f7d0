#ifndef CMFL_CMI_HPP
#define CMFL_CMI_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "cmfl/textlang.hpp"

namespace cmfl {

// Code-Mixing Index of one sentence: 1 - dominant/(N-U) when N > U, else 0.
struct CmiScore {
    double value = 0.0;            // in [0,1]
    std::size_t n_tokens = 0;      // N
    std::size_t n_universal = 0;   // U
    std::size_t dominant_count = 0;
};

struct CorpusCmiProfile {
    std::vector<CmiScore> per_sentence;
    double mean = 0.0;
    std::array<std::size_t, 10> histogram{};  // equal-width bins over [0,1]
};

CmiScore sentence_cmi(const TaggedSentence& s);

// Arithmetic mean of the scores; throws EmptyBatch on an empty list.
double batch_cmi(const std::vector<CmiScore>& scores);

CorpusCmiProfile corpus_profile(const std::vector<TaggedSentence>& sentences);

}  // namespace cmfl

#endif
