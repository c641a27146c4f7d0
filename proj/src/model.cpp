#include "cmfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cmfl/errors.hpp"

namespace cmfl {

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

namespace {

constexpr std::uint32_t kTokenStart = 0x0002;  // STX
constexpr std::uint32_t kTokenEnd = 0x0003;    // ETX

void encode_utf8(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::uint32_t decode_utf8_cp(std::string_view s, std::size_t& pos) {
    const unsigned char b0 = static_cast<unsigned char>(s[pos]);
    std::size_t len;
    std::uint32_t cp;
    if (b0 < 0x80) { len = 1; cp = b0; }
    else if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++pos; return 0xFFFD; }
    if (pos + len > s.size()) { ++pos; return 0xFFFD; }
    for (std::size_t i = 1; i < len; ++i) {
        const unsigned char b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) { ++pos; return 0xFFFD; }
        cp = (cp << 6) | (b & 0x3F);
    }
    pos += len;
    return cp;
}

}  // namespace

SparseVec featurize(std::string_view text, const FeatureConfig& cfg) {
    SparseVec out;
    if (text.empty()) return out;

    std::map<std::uint32_t, double> counts;  // ordered: fixed fold order
    const std::uint64_t mask = cfg.feature_dim - 1;

    std::vector<std::uint32_t> cps;
    std::string ngram_bytes;

    std::size_t i = 0;
    auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size()) break;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        const std::string_view word = text.substr(start, i - start);

        cps.clear();
        cps.push_back(kTokenStart);
        std::size_t pos = 0;
        while (pos < word.size()) {
            std::uint32_t cp = decode_utf8_cp(word, pos);
            if (cfg.lowercase && cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
            cps.push_back(cp);
        }
        cps.push_back(kTokenEnd);

        for (std::size_t n = cfg.n_min; n <= cfg.n_max; ++n) {
            if (cps.size() < n) break;
            for (std::size_t s = 0; s + n <= cps.size(); ++s) {
                ngram_bytes.clear();
                ngram_bytes.push_back(static_cast<char>(n));  // length prefix byte
                for (std::size_t k = 0; k < n; ++k) encode_utf8(cps[s + k], ngram_bytes);
                const std::uint64_t h = fnv1a64(
                    reinterpret_cast<const unsigned char*>(ngram_bytes.data()), ngram_bytes.size());
                counts[static_cast<std::uint32_t>(h & mask)] += 1.0;
            }
        }
    }

    double sq = 0.0;
    for (const auto& [idx, v] : counts) sq += v * v;
    if (sq == 0.0) return out;
    const double inv_norm = 1.0 / std::sqrt(sq);
    out.pairs.reserve(counts.size());
    for (const auto& [idx, v] : counts) out.pairs.emplace_back(idx, v * inv_norm);
    return out;
}

std::vector<double> squash(const std::vector<double>& e) {
    double sq = 0.0;
    for (double v : e) sq += v * v;
    std::vector<double> out(e.size(), 0.0);
    if (sq == 0.0) return out;
    const double r = std::sqrt(sq);
    const double scale = r / (1.0 + sq);  // = (r^2/(1+r^2)) / r
    for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i] * scale;
    return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - mx);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

std::vector<double> embed(const ModelParams& params, const SparseVec& x) {
    const std::size_t d = params.emb_dim;
    std::vector<double> e(d, 0.0);
    for (const auto& [idx, val] : x.pairs) {
        if (idx >= params.feature.feature_dim)
            throw IndexOutOfRange("feature index " + std::to_string(idx));
        const double* row = &params.P[static_cast<std::size_t>(idx) * d];
        for (std::size_t j = 0; j < d; ++j) e[j] += val * row[j];
    }
    return e;
}

ForwardTrace head_forward(const ModelParams& params, SparseVec x, std::vector<double> e) {
    const std::size_t d = params.emb_dim;
    const std::size_t C = params.num_classes();
    ForwardTrace t;
    t.x = std::move(x);
    t.e = std::move(e);
    t.logits.assign(C, 0.0);

    if (params.head_type == HeadType::Dot) {
        t.e_norm = t.e;
        for (std::size_t c = 0; c < C; ++c) {
            const double* w = &params.W[c * d];
            double dot = params.bias[c];
            for (std::size_t j = 0; j < d; ++j) dot += w[j] * t.e[j];
            t.logits[c] = dot;
        }
    } else {
        t.e_norm = squash(t.e);
        for (std::size_t c = 0; c < C; ++c) {
            const double* w = &params.W[c * d];
            double wn = 0.0, dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) wn += w[j] * w[j];
            wn = std::sqrt(wn);
            for (std::size_t j = 0; j < d; ++j) dot += w[j] * t.e_norm[j];
            t.logits[c] = params.scale * dot / wn;
        }
    }
    t.probs = softmax(t.logits);
    return t;
}

ForwardTrace forward(const ModelParams& params, const SparseVec& x) {
    return head_forward(params, x, embed(params, x));
}

ParamGrads backward(const ModelParams& params, const ForwardTrace& trace,
                    const std::vector<double>& dL_dlogits) {
    const std::size_t d = params.emb_dim;
    const std::size_t C = params.num_classes();
    if (dL_dlogits.size() != C) throw ShapeMismatch("dL_dlogits size");

    ParamGrads g;
    g.dW.assign(C * d, 0.0);
    std::vector<double> de(d, 0.0);

    if (params.head_type == HeadType::Dot) {
        g.dbias.assign(C, 0.0);
        for (std::size_t c = 0; c < C; ++c) {
            const double gl = dL_dlogits[c];
            g.dbias[c] = gl;
            const double* w = &params.W[c * d];
            for (std::size_t j = 0; j < d; ++j) {
                g.dW[c * d + j] = gl * trace.e[j];
                de[j] += gl * w[j];
            }
        }
    } else {
        std::vector<double> de_norm(d, 0.0);
        for (std::size_t c = 0; c < C; ++c) {
            const double gl = params.scale * dL_dlogits[c];
            const double* w = &params.W[c * d];
            double wn2 = 0.0, cosv = 0.0;
            for (std::size_t j = 0; j < d; ++j) wn2 += w[j] * w[j];
            const double wn = std::sqrt(wn2);
            for (std::size_t j = 0; j < d; ++j) cosv += w[j] * trace.e_norm[j];
            cosv /= wn;
            // d logit / d w = (e_norm - cos * u) / ||w||, with u the unit row
            for (std::size_t j = 0; j < d; ++j) {
                const double u = w[j] / wn;
                g.dW[c * d + j] = gl * (trace.e_norm[j] - cosv * u) / wn;
                de_norm[j] += gl * u;
            }
        }
        // Squash Jacobian: s(e) = f(r) e, f(r) = r/(1+r^2),
        // J = f(r) I + (f'(r)/r) e e^T, f'(r) = (1-r^2)/(1+r^2)^2.
        double sq = 0.0;
        for (double v : trace.e) sq += v * v;
        if (sq > 0.0) {
            const double r = std::sqrt(sq);
            const double f = r / (1.0 + sq);
            const double fp = (1.0 - sq) / ((1.0 + sq) * (1.0 + sq));
            double edot = 0.0;
            for (std::size_t j = 0; j < d; ++j) edot += trace.e[j] * de_norm[j];
            const double coef = fp / r * edot;
            for (std::size_t j = 0; j < d; ++j) de[j] = f * de_norm[j] + coef * trace.e[j];
        }
    }

    g.dP.reserve(trace.x.pairs.size());
    for (const auto& [idx, val] : trace.x.pairs) {
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = val * de[j];
        g.dP.emplace_back(idx, std::move(row));
    }
    return g;
}

std::pair<std::size_t, std::vector<double>> predict(const ModelParams& params, const SparseVec& x) {
    ForwardTrace t = forward(params, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < t.probs.size(); ++c)
        if (t.probs[c] > t.probs[best]) best = c;  // ties keep the lowest index
    return {best, std::move(t.probs)};
}

}  // namespace cmfl
