#include "cmfl/dataio.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "cmfl/errors.hpp"

namespace cmfl {

std::string language_name(TargetLanguage lang) {
    switch (lang) {
        case TargetLanguage::Tamil: return "Tamil";
        case TargetLanguage::Malayalam: return "Malayalam";
        case TargetLanguage::Kannada: return "Kannada";
    }
    return "";
}

TargetLanguage parse_language(const std::string& code) {
    if (code == "ta") return TargetLanguage::Tamil;
    if (code == "ml") return TargetLanguage::Malayalam;
    if (code == "kn") return TargetLanguage::Kannada;
    throw DomainError("unknown language code '" + code + "' (expected ta, ml or kn)");
}

std::vector<std::string> default_label_vocab(TargetLanguage lang) {
    std::vector<std::string> v = {
        "Not_offensive",
        "not-" + language_name(lang),
        "Offensive_Targeted_Insult_Individual",
        "Offensive_Targeted_Insult_Group",
        "Offensive_Untargeted",
        "Offensive_Targeted_Insult_Other",
    };
    if (lang == TargetLanguage::Malayalam) v.pop_back();
    return v;
}

std::size_t label_index(const std::vector<std::string>& vocab, const std::string& label) {
    const auto it = std::find(vocab.begin(), vocab.end(), label);
    if (it == vocab.end()) throw UnknownLabel(label);
    return static_cast<std::size_t>(it - vocab.begin());
}

std::vector<LabeledExample> load_tsv(const std::string& path, bool has_header,
                                     const std::vector<std::string>& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    std::vector<LabeledExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && has_header) continue;
        if (line.empty()) continue;
        const std::size_t tab = line.rfind('\t');
        if (tab == std::string::npos) throw MalformedLine(path, lineno);
        LabeledExample ex;
        ex.text = line.substr(0, tab);
        ex.label = line.substr(tab + 1);
        // trim the text, reject whitespace-only rows
        const auto first = ex.text.find_first_not_of(" \t");
        if (first == std::string::npos) throw MalformedLine(path, lineno);
        if (std::find(vocab.begin(), vocab.end(), ex.label) == vocab.end())
            throw UnknownLabel(ex.label, lineno);
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<std::string> load_text_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    std::vector<std::string> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.rfind('\t');
        out.push_back(tab == std::string::npos ? line : line.substr(0, tab));
    }
    return out;
}

void write_predictions(const std::string& path,
                       const std::vector<std::pair<std::string, double>>& preds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path);
    char buf[32];
    for (const auto& [label, prob] : preds) {
        std::snprintf(buf, sizeof(buf), "%.6f", prob);
        out << label << '\t' << buf << '\n';
    }
    if (!out) throw IoError(path);
}

std::vector<std::pair<std::string, double>> read_predictions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    std::vector<std::pair<std::string, double>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.rfind('\t');
        if (tab == std::string::npos) throw MalformedLine(path, lineno);
        out.emplace_back(line.substr(0, tab), std::stod(line.substr(tab + 1)));
    }
    return out;
}

void write_tsv(const std::string& path, const std::vector<LabeledExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path);
    for (const auto& ex : examples) out << ex.text << '\t' << ex.label << '\n';
    if (!out) throw IoError(path);
}

namespace {

// All multi-byte fields little-endian.
template <typename T>
void put(std::string& buf, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw Truncated();
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

void save_model(const std::string& path, const ModelParams& p) {
    std::string buf;
    buf.reserve(64 + p.P.size() * 8 + p.W.size() * 8);
    buf.append("CMFL", 4);
    put<std::uint32_t>(buf, 1);
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(p.head_type));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p.feature.feature_dim));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p.emb_dim));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p.num_classes()));
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(p.feature.n_min));
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(p.feature.n_max));
    put<std::uint8_t>(buf, p.feature.lowercase ? 1 : 0);
    put<double>(buf, p.scale);
    for (double v : p.P) put<double>(buf, v);
    for (double v : p.W) put<double>(buf, v);
    if (p.head_type == HeadType::Dot)
        for (double v : p.bias) put<double>(buf, v);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p.label_vocab.size()));
    for (const std::string& l : p.label_vocab) {
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(l.size()));
        buf.append(l);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError(path);
}

ModelParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (buf.size() < 4) throw Truncated();
    if (buf.compare(0, 4, "CMFL") != 0) throw BadMagic();
    pos = 4;
    const auto version = get<std::uint32_t>(buf, pos);
    if (version != 1) throw UnsupportedVersion(version);

    ModelParams p;
    const auto head = get<std::uint8_t>(buf, pos);
    p.head_type = head == 0 ? HeadType::Dot : HeadType::Cosine;
    p.feature.feature_dim = get<std::uint32_t>(buf, pos);
    p.emb_dim = get<std::uint32_t>(buf, pos);
    const auto C = get<std::uint32_t>(buf, pos);
    p.feature.n_min = get<std::uint8_t>(buf, pos);
    p.feature.n_max = get<std::uint8_t>(buf, pos);
    p.feature.lowercase = get<std::uint8_t>(buf, pos) != 0;
    p.scale = get<double>(buf, pos);
    p.P.resize(p.feature.feature_dim * p.emb_dim);
    for (double& v : p.P) v = get<double>(buf, pos);
    p.W.resize(static_cast<std::size_t>(C) * p.emb_dim);
    for (double& v : p.W) v = get<double>(buf, pos);
    if (p.head_type == HeadType::Dot) {
        p.bias.resize(C);
        for (double& v : p.bias) v = get<double>(buf, pos);
    }
    const auto nlabels = get<std::uint32_t>(buf, pos);
    if (nlabels != C) throw Truncated();
    p.label_vocab.resize(nlabels);
    for (auto& l : p.label_vocab) {
        const auto len = get<std::uint32_t>(buf, pos);
        if (pos + len > buf.size()) throw Truncated();
        l = buf.substr(pos, len);
        pos += len;
    }
    return p;
}

}  // namespace cmfl
