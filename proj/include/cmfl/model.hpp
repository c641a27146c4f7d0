#ifndef CMFL_MODEL_HPP
#define CMFL_MODEL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cmfl {

struct FeatureConfig {
    std::size_t n_min = 1;
    std::size_t n_max = 4;
    std::size_t feature_dim = 65536;  // power of two >= 256
    bool lowercase = true;

    bool valid() const {
        return n_min >= 1 && n_min <= n_max && n_max <= 8 &&
               feature_dim >= 256 && (feature_dim & (feature_dim - 1)) == 0;
    }
};

// Sparse L2-normalized feature vector; indices strictly increasing, no zeros.
struct SparseVec {
    std::vector<std::pair<std::uint32_t, double>> pairs;
    bool empty() const { return pairs.empty(); }
};

enum class HeadType : std::uint8_t { Dot = 0, Cosine = 1 };

struct ModelParams {
    FeatureConfig feature;
    std::size_t emb_dim = 32;
    HeadType head_type = HeadType::Cosine;
    double scale = 1.0;  // cosine logit scale, not learned

    std::vector<double> P;     // feature_dim x emb_dim, row-major
    std::vector<double> W;     // C x emb_dim, row-major
    std::vector<double> bias;  // C, dot head only
    std::vector<std::string> label_vocab;

    std::size_t num_classes() const { return label_vocab.size(); }
};

struct ForwardTrace {
    SparseVec x;
    std::vector<double> e;       // raw embedding
    std::vector<double> e_norm;  // squashed embedding (cosine head; equals e for dot)
    std::vector<double> logits;
    std::vector<double> probs;
};

// Gradients for one or more examples. dP is sparse over touched rows.
struct ParamGrads {
    std::vector<std::pair<std::uint32_t, std::vector<double>>> dP;  // (row, emb_dim vec)
    std::vector<double> dW;     // C x emb_dim
    std::vector<double> dbias;  // C, dot head only
};

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len);

SparseVec featurize(std::string_view text, const FeatureConfig& cfg);

// Capsule squash: v * ||v|| / (1 + ||v||^2). Direction preserved, norm < 1.
std::vector<double> squash(const std::vector<double>& e);

ForwardTrace forward(const ModelParams& params, const SparseVec& x);

ParamGrads backward(const ModelParams& params, const ForwardTrace& trace,
                    const std::vector<double>& dL_dlogits);

std::pair<std::size_t, std::vector<double>> predict(const ModelParams& params, const SparseVec& x);

std::vector<double> softmax(const std::vector<double>& logits);

// Forward split in two so the trainer can drop out embedding entries between
// the projection and the head.
std::vector<double> embed(const ModelParams& params, const SparseVec& x);
ForwardTrace head_forward(const ModelParams& params, SparseVec x, std::vector<double> e);

}  // namespace cmfl

#endif
