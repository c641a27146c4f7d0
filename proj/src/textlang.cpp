#include "cmfl/textlang.hpp"

#include <cctype>
#include <fstream>

#include "cmfl/errors.hpp"

namespace cmfl {

std::uint32_t decode_utf8(std::string_view s, std::size_t& pos) {
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

namespace {

bool is_latin_letter(std::uint32_t cp) {
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return true;
    // Latin-1 Supplement letters through Latin Extended-B
    if (cp >= 0x00C0 && cp <= 0x024F && cp != 0x00D7 && cp != 0x00F7) return true;
    return false;
}

bool is_native_letter(std::uint32_t cp) {
    return (cp >= 0x0B80 && cp <= 0x0BFF) ||   // Tamil
           (cp >= 0x0C80 && cp <= 0x0CFF) ||   // Kannada
           (cp >= 0x0D00 && cp <= 0x0D7F);     // Malayalam
}

// Letters from scripts we do not bucket: Greek, Cyrillic, Arabic, other Indic,
// CJK and so on. Symbols, punctuation and emoji are not letters.
bool is_other_letter(std::uint32_t cp) {
    if (is_latin_letter(cp) || is_native_letter(cp)) return false;
    if (cp >= 0x0370 && cp <= 0x1FFF) return true;
    if (cp >= 0x3040 && cp <= 0xD7FF) return true;
    return false;
}

bool is_letter(std::uint32_t cp) {
    return is_latin_letter(cp) || is_native_letter(cp) || is_other_letter(cp);
}

bool is_digit(std::uint32_t cp) { return cp >= '0' && cp <= '9'; }

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// Strips leading/trailing codepoints that are neither letters nor digits.
std::string_view strip_edge_punct(std::string_view s) {
    std::size_t begin = 0;
    std::size_t last_good_end = 0;
    std::size_t first_good = std::string_view::npos;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t start = pos;
        const std::uint32_t cp = decode_utf8(s, pos);
        if (is_letter(cp) || is_digit(cp)) {
            if (first_good == std::string_view::npos) first_good = start;
            last_good_end = pos;
        }
    }
    if (first_good == std::string_view::npos) return std::string_view{};
    begin = first_good;
    return s.substr(begin, last_good_end - begin);
}

}  // namespace

Dictionary Dictionary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    Dictionary d;
    d.source_path_ = path;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        d.entries_.insert(ascii_lower(line));
    }
    return d;
}

Dictionary Dictionary::from_words(const std::vector<std::string>& words) {
    Dictionary d;
    d.source_path_ = "<memory>";
    for (const auto& w : words) d.entries_.insert(ascii_lower(w));
    return d;
}

bool Dictionary::contains(std::string_view word) const {
    return entries_.count(ascii_lower(word)) > 0;
}

ScriptClass classify_script(std::string_view surface) {
    bool has_latin = false, has_native = false, has_other = false;
    std::size_t pos = 0;
    while (pos < surface.size()) {
        const std::uint32_t cp = decode_utf8(surface, pos);
        if (is_latin_letter(cp)) has_latin = true;
        else if (is_native_letter(cp)) has_native = true;
        else if (is_other_letter(cp)) has_other = true;
    }
    if (has_latin && has_native) return ScriptClass::Mixed;
    if (has_native) return ScriptClass::NativeDravidian;
    if (has_latin) return ScriptClass::Latin;
    (void)has_other;
    return ScriptClass::Other;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size()) break;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        std::string surface(text.substr(start, i - start));
        const ScriptClass script = classify_script(surface);
        tokens.push_back(Token{std::move(surface), script, tokens.size()});
    }
    return tokens;
}

LangTag tag_token(const Token& token, const Dictionary& dict) {
    std::string_view surface = token.surface;
    if (surface.size() >= 4) {
        const std::string head = ascii_lower(surface.substr(0, 4));
        if (head == "http") return LangTag::Universal;
    }
    if (!surface.empty() && surface.front() == '@') return LangTag::Universal;
    if (!surface.empty() && surface.front() == '#') surface.remove_prefix(1);

    const std::string_view body = strip_edge_punct(surface);
    if (body.empty()) return LangTag::Universal;

    // Digits-only bodies carry no language.
    bool any_letter = false;
    std::size_t pos = 0;
    while (pos < body.size()) {
        if (is_letter(decode_utf8(body, pos))) { any_letter = true; break; }
    }
    if (!any_letter) return LangTag::Universal;

    switch (classify_script(body)) {
        case ScriptClass::NativeDravidian:
        case ScriptClass::Mixed:
            return LangTag::Native;
        case ScriptClass::Latin:
            return dict.contains(body) ? LangTag::English : LangTag::RomanizedNative;
        case ScriptClass::Other:
            return LangTag::Universal;
    }
    return LangTag::Universal;
}

TaggedSentence tag_sentence(std::string_view text, const Dictionary& dict, TargetLanguage lang) {
    TaggedSentence s;
    s.target_language = lang;
    s.tokens = tokenize(text);
    s.tags.reserve(s.tokens.size());
    for (const Token& t : s.tokens) s.tags.push_back(tag_token(t, dict));
    return s;
}

}  // namespace cmfl
