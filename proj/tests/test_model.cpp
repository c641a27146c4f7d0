#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "cmfl/errors.hpp"
#include "cmfl/model.hpp"
#include "cmfl/rng.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace cmfl;

TEST_CASE("fnv1a matches the independent oracle") {
    const std::string probes[] = {"", "a", "aa", "\x01\x02\x03", "ಕನ್ನಡ", "hello world"};
    for (const auto& p : probes)
        CHECK(fnv1a64(reinterpret_cast<const unsigned char*>(p.data()), p.size()) ==
              oracle::fnv1a64(p));
}

TEST_CASE("featurize") {
    FeatureConfig cfg;
    cfg.n_min = 1;
    cfg.n_max = 1;
    cfg.feature_dim = 65536;

    CHECK(featurize("", cfg).empty());

    // "aa" with unigrams: marker + a + a + marker -> counts {STX:1, a:2, ETX:1}
    std::map<std::uint32_t, double> expected;
    for (const std::string& g : {std::string("\x02"), std::string("a"), std::string("a"),
                                 std::string("\x03")}) {
        std::string keyed;
        keyed.push_back(1);  // n prefix byte
        keyed += g;
        expected[static_cast<std::uint32_t>(oracle::fnv1a64(keyed) & 0xFFFF)] += 1.0;
    }
    double sq = 0.0;
    for (auto& [i, v] : expected) sq += v * v;
    for (auto& [i, v] : expected) v /= std::sqrt(sq);

    const SparseVec got = featurize("aa", cfg);
    REQUIRE(got.pairs.size() == expected.size());
    for (const auto& [idx, val] : got.pairs) {
        REQUIRE(expected.count(idx) == 1);
        CHECK(val == doctest::Approx(expected[idx]).epsilon(1e-15));
    }

    // indices strictly increasing
    for (std::size_t i = 1; i < got.pairs.size(); ++i)
        CHECK(got.pairs[i].first > got.pairs[i - 1].first);
}

TEST_CASE("featurize is unit-norm and stable") {
    const FeatureConfig cfg;
    SplitMix64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        const std::size_t words = 1 + rng.next_below(8);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) text += ' ';
            const std::size_t len = 1 + rng.next_below(10);
            for (std::size_t c = 0; c < len; ++c)
                text += static_cast<char>('a' + rng.next_below(26));
        }
        const SparseVec a = featurize(text, cfg);
        double sq = 0.0;
        for (const auto& [i, v] : a.pairs) sq += v * v;
        CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-12));

        const SparseVec b = featurize(text, cfg);
        REQUIRE(a.pairs.size() == b.pairs.size());
        for (std::size_t i = 0; i < a.pairs.size(); ++i) {
            CHECK(a.pairs[i].first == b.pairs[i].first);
            CHECK(a.pairs[i].second == b.pairs[i].second);
        }
    }
    CHECK(featurize("AA", cfg).pairs == featurize("aa", cfg).pairs);  // lowercase default
}

TEST_CASE("squash") {
    CHECK(squash({0.0, 0.0}) == std::vector<double>{0.0, 0.0});

    const auto unit = squash({1.0, 0.0, 0.0});
    CHECK(unit[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(unit[1] == 0.0);

    const auto v34 = squash({3.0, 4.0});
    const double norm = std::sqrt(v34[0] * v34[0] + v34[1] * v34[1]);
    CHECK(norm == doctest::Approx(25.0 / 26.0).epsilon(1e-14));
    CHECK(v34[0] / norm == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(v34[1] / norm == doctest::Approx(0.8).epsilon(1e-14));

    // output norm r^2/(1+r^2): monotone increasing in r, bounded by 1
    double prev = -1.0;
    for (double r = 0.0; r <= 10.0; r += 0.25) {
        const auto s = squash({r, 0.0});
        const double out = std::fabs(s[0]);
        CHECK(out < 1.0);
        CHECK(out > prev);
        prev = out;
    }
}

namespace {

ModelParams tiny_cosine_params() {
    ModelParams p;
    p.feature.feature_dim = 256;
    p.emb_dim = 2;
    p.head_type = HeadType::Cosine;
    p.scale = 1.0;
    p.label_vocab = {"a", "b"};
    p.P.assign(256 * 2, 0.0);
    p.P[0] = 1.0;  // feature 0 -> e = (1, 0)
    p.W = {1.0, 0.0, 0.0, 1.0};
    return p;
}

}  // namespace

TEST_CASE("forward") {
    const ModelParams p = tiny_cosine_params();

    SUBCASE("empty input gives uniform probabilities") {
        const ForwardTrace t = forward(p, SparseVec{});
        CHECK(t.logits[0] == 0.0);
        CHECK(t.logits[1] == 0.0);
        CHECK(t.probs[0] == doctest::Approx(0.5).epsilon(1e-15));
    }

    SUBCASE("cosine logits from a worked example") {
        SparseVec x;
        x.pairs.emplace_back(0, 1.0);  // e = (1,0), squash -> (0.5, 0)
        const ForwardTrace t = forward(p, x);
        CHECK(t.e_norm[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(t.logits[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(t.logits[1] == doctest::Approx(0.0).epsilon(1e-14));
        const double sigma = 1.0 / (1.0 + std::exp(-0.5));
        CHECK(t.probs[0] == doctest::Approx(sigma).epsilon(1e-9));
        CHECK(t.probs[0] == doctest::Approx(0.62246).epsilon(1e-4));
    }

    SUBCASE("cosine logits bounded by the squashed norm") {
        SplitMix64 rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            auto inst = gradcheck::random_instance(rng, HeadType::Cosine);
            const ForwardTrace t = forward(inst.params, inst.x);
            for (double l : t.logits) {
                CHECK(l < 1.0);
                CHECK(l > -1.0);
            }
            double sum = 0.0;
            for (double pr : t.probs) sum += pr;
            CHECK(std::fabs(sum - 1.0) <= 1e-12);
        }
    }

    SUBCASE("feature index out of range") {
        SparseVec x;
        x.pairs.emplace_back(256, 1.0);
        CHECK_THROWS_AS(forward(p, x), IndexOutOfRange);
    }
}

TEST_CASE("cosine head is invariant to row rescaling") {
    SplitMix64 rng(9);
    auto inst = gradcheck::random_instance(rng, HeadType::Cosine);
    const ForwardTrace base = forward(inst.params, inst.x);
    for (std::size_t row = 0; row < inst.params.num_classes(); ++row) {
        ModelParams scaled = inst.params;
        for (std::size_t j = 0; j < scaled.emb_dim; ++j) scaled.W[row * scaled.emb_dim + j] *= 7.3;
        const ForwardTrace t = forward(scaled, inst.x);
        for (std::size_t c = 0; c < base.logits.size(); ++c)
            CHECK(std::fabs(t.logits[c] - base.logits[c]) <= 1e-12);
    }
}

TEST_CASE("backward") {
    SplitMix64 rng(17);

    SUBCASE("zero upstream gradient gives zero grads") {
        for (const HeadType head : {HeadType::Dot, HeadType::Cosine}) {
            auto inst = gradcheck::random_instance(rng, head);
            const ForwardTrace t = forward(inst.params, inst.x);
            const ParamGrads g = backward(inst.params, t, std::vector<double>(4, 0.0));
            for (double v : g.dW) CHECK(v == 0.0);
            for (const auto& [row, grad] : g.dP)
                for (double v : grad) CHECK(v == 0.0);
        }
    }

    SUBCASE("analytic gradients match finite differences") {
        LossConfig cfg;
        cfg.kind = LossKind::CmiFL;
        for (const HeadType head : {HeadType::Dot, HeadType::Cosine}) {
            for (int trial = 0; trial < 5; ++trial) {
                auto inst = gradcheck::random_instance(rng, head);
                CHECK(gradcheck::max_rel_error(inst, cfg) <= 1e-4);
            }
        }
    }

    SUBCASE("shape mismatch is rejected") {
        auto inst = gradcheck::random_instance(rng, HeadType::Cosine);
        const ForwardTrace t = forward(inst.params, inst.x);
        CHECK_THROWS_AS(backward(inst.params, t, std::vector<double>(3, 0.0)), ShapeMismatch);
    }
}

TEST_CASE("predict") {
    const ModelParams p = tiny_cosine_params();
    const auto [cls, probs] = predict(p, SparseVec{});  // uniform -> lowest index
    CHECK(cls == 0);

    SparseVec x;
    x.pairs.emplace_back(0, 1.0);
    const auto [cls2, probs2] = predict(p, x);
    CHECK(cls2 == 0);
    CHECK(probs2[0] > probs2[1]);

    // agreement with the argmax of logits
    SplitMix64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = gradcheck::random_instance(rng, HeadType::Cosine);
        const ForwardTrace t = forward(inst.params, inst.x);
        std::size_t larg = 0;
        for (std::size_t c = 1; c < t.logits.size(); ++c)
            if (t.logits[c] > t.logits[larg]) larg = c;
        CHECK(predict(inst.params, inst.x).first == larg);
    }
}
