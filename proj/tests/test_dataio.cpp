#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cmfl/dataio.hpp"
#include "cmfl/errors.hpp"
#include "cmfl/loss.hpp"
#include "cmfl/rng.hpp"

using namespace cmfl;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::vector<std::pair<std::string, std::size_t>> read_counts(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::vector<std::pair<std::string, std::size_t>> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        out.emplace_back(line.substr(0, tab), std::stoul(line.substr(tab + 1)));
    }
    return out;
}

}  // namespace

TEST_CASE("default label vocabularies") {
    const auto kn = default_label_vocab(TargetLanguage::Kannada);
    REQUIRE(kn.size() == 6);
    CHECK(kn[0] == "Not_offensive");
    CHECK(kn[1] == "not-Kannada");
    CHECK(kn[5] == "Offensive_Targeted_Insult_Other");

    const auto ml = default_label_vocab(TargetLanguage::Malayalam);
    CHECK(ml.size() == 5);  // no Offensive_Targeted_Insult_Other row
    CHECK(ml[1] == "not-Malayalam");

    CHECK(default_label_vocab(TargetLanguage::Tamil)[1] == "not-Tamil");
    CHECK(parse_language("ta") == TargetLanguage::Tamil);
    CHECK_THROWS_AS(parse_language("xx"), DomainError);
}

TEST_CASE("load_tsv") {
    const auto vocab = default_label_vocab(TargetLanguage::Kannada);
    TempFile f("cmfl_test_load.tsv");

    write_file(f.path, "");
    CHECK(load_tsv(f.path, false, vocab).empty());

    write_file(f.path, "hello\tNot_offensive\n");
    const auto one = load_tsv(f.path, false, vocab);
    REQUIRE(one.size() == 1);
    CHECK(one[0].text == "hello");
    CHECK(one[0].label == "Not_offensive");

    // header skipping, CRLF, BOM
    write_file(f.path, "\xEF\xBB\xBFtext\tlabel\r\nhello world\tOffensive_Untargeted\r\n");
    const auto hdr = load_tsv(f.path, true, vocab);
    REQUIRE(hdr.size() == 1);
    CHECK(hdr[0].text == "hello world");

    // embedded tab: only the final tab separates
    write_file(f.path, "a\tb\tNot_offensive\n");
    const auto tabbed = load_tsv(f.path, false, vocab);
    REQUIRE(tabbed.size() == 1);
    CHECK(tabbed[0].text == "a\tb");

    // bad label at a known line
    std::string ten;
    for (int i = 1; i <= 10; ++i)
        ten += "line " + std::to_string(i) + (i == 7 ? "\tBogus_label\n" : "\tNot_offensive\n");
    write_file(f.path, ten);
    try {
        load_tsv(f.path, false, vocab);
        FAIL("expected UnknownLabel");
    } catch (const UnknownLabel& e) {
        CHECK(e.line == 7);
        CHECK(e.label == "Bogus_label");
    }

    write_file(f.path, "no label here\n");
    CHECK_THROWS_AS(load_tsv(f.path, false, vocab), MalformedLine);
    CHECK_THROWS_AS(load_tsv("/nonexistent/file.tsv", false, vocab), IoError);
}

TEST_CASE("tsv round trip") {
    const auto vocab = default_label_vocab(TargetLanguage::Tamil);
    TempFile f("cmfl_test_rt.tsv");
    SplitMix64 rng(21);
    std::vector<LabeledExample> data;
    for (int i = 0; i < 50; ++i) {
        std::string text = "word";
        for (int w = 0; w < 5; ++w) text += " w" + std::to_string(rng.next_below(100));
        data.push_back({text, vocab[rng.next_below(vocab.size())]});
    }
    write_tsv(f.path, data);
    const auto back = load_tsv(f.path, false, vocab);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].text == data[i].text);
        CHECK(back[i].label == data[i].label);
    }
}

TEST_CASE("prediction files") {
    TempFile f("cmfl_test_preds.tsv");
    write_predictions(f.path, {});
    CHECK(read_predictions(f.path).empty());

    write_predictions(f.path, {{"Not_offensive", 0.9}});
    std::ifstream in(f.path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "Not_offensive\t0.900000\n");

    SplitMix64 rng(22);
    std::vector<std::pair<std::string, double>> preds;
    for (int i = 0; i < 40; ++i) preds.emplace_back("c" + std::to_string(i % 4), rng.next_unit());
    write_predictions(f.path, preds);
    const auto back = read_predictions(f.path);
    REQUIRE(back.size() == preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(back[i].first == preds[i].first);
        CHECK(std::fabs(back[i].second - preds[i].second) <= 1e-6);
    }
}

TEST_CASE("model file round trip") {
    TempFile f("cmfl_test_model.bin");
    SplitMix64 rng(23);
    ModelParams p;
    p.feature.feature_dim = 256;
    p.feature.n_min = 2;
    p.feature.n_max = 3;
    p.feature.lowercase = false;
    p.emb_dim = 4;
    p.head_type = HeadType::Cosine;
    p.scale = 2.5;
    p.label_vocab = {"x", "yy", "zzz"};
    p.P.resize(256 * 4);
    for (double& v : p.P) v = rng.next_symmetric(1.0);
    p.W.resize(3 * 4);
    for (double& v : p.W) v = rng.next_symmetric(1.0);

    save_model(f.path, p);
    const ModelParams q = load_model(f.path);
    CHECK(q.head_type == HeadType::Cosine);
    CHECK(q.feature.feature_dim == 256);
    CHECK(q.feature.n_min == 2);
    CHECK(q.feature.n_max == 3);
    CHECK(q.feature.lowercase == false);
    CHECK(q.scale == 2.5);
    CHECK(q.P == p.P);
    CHECK(q.W == p.W);
    CHECK(q.label_vocab == p.label_vocab);

    // save(load(save(p))) is byte-identical
    TempFile f2("cmfl_test_model2.bin");
    save_model(f2.path, q);
    std::ifstream a(f.path, std::ios::binary), b(f2.path, std::ios::binary);
    std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);

    // dot head stores bias
    p.head_type = HeadType::Dot;
    p.bias = {0.1, 0.2, 0.3};
    save_model(f.path, p);
    const ModelParams dot = load_model(f.path);
    CHECK(dot.bias == p.bias);
}

TEST_CASE("model file rejects corrupt input") {
    TempFile f("cmfl_test_bad.bin");
    write_file(f.path, "XXXXgarbage");
    CHECK_THROWS_AS(load_model(f.path), BadMagic);

    write_file(f.path, std::string("CMFL") + std::string(4, '\x07'));
    CHECK_THROWS_AS(load_model(f.path), UnsupportedVersion);

    ModelParams p;
    p.feature.feature_dim = 256;
    p.emb_dim = 2;
    p.head_type = HeadType::Cosine;
    p.label_vocab = {"a", "b"};
    p.P.assign(512, 0.0);
    p.W.assign(4, 1.0);
    save_model(f.path, p);
    std::ifstream in(f.path, std::ios::binary);
    std::string full((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    write_file(f.path, full.substr(0, 10));
    CHECK_THROWS_AS(load_model(f.path), Truncated);
}

TEST_CASE("Table 1 fixtures") {
    const std::string dir = CMFL_DATA_DIR;
    const auto kn = read_counts(dir + "/table1_kannada.tsv");
    const auto ml = read_counts(dir + "/table1_malayalam.tsv");
    const auto ta = read_counts(dir + "/table1_tamil.tsv");

    auto total = [](const auto& counts) {
        std::size_t t = 0;
        for (const auto& [label, c] : counts) t += c;
        return t;
    };
    CHECK(total(kn) == 5936);
    CHECK(total(ml) == 11695);
    CHECK(total(ta) == 34898);

    // fixture labels line up with the default vocabularies
    const auto kn_vocab = default_label_vocab(TargetLanguage::Kannada);
    REQUIRE(kn.size() == kn_vocab.size());
    for (std::size_t i = 0; i < kn.size(); ++i) CHECK(kn[i].first == kn_vocab[i]);
    const auto ml_vocab = default_label_vocab(TargetLanguage::Malayalam);
    REQUIRE(ml.size() == ml_vocab.size());

    // Kannada weights from the fixture satisfy the normalization invariant
    std::vector<std::size_t> counts;
    for (const auto& [label, c] : kn) counts.push_back(c);
    const auto w = class_weights_from_counts(counts);
    double dot = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c)
        dot += (static_cast<double>(counts[c]) / 5936.0) * w.w[c];
    CHECK(std::fabs(dot - 1.0) <= 1e-12);
}
