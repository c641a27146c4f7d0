#ifndef CMFL_TEXTLANG_HPP
#define CMFL_TEXTLANG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cmfl {

enum class ScriptClass { Latin, NativeDravidian, Mixed, Other };

// Language tags for word-level identification. Native and RomanizedNative are
// the same language for CMI purposes; Universal tokens are language-independent.
enum class LangTag { English, Native, RomanizedNative, Universal };

enum class TargetLanguage { Tamil, Malayalam, Kannada };

struct Token {
    std::string surface;   // non-empty, no whitespace
    ScriptClass script;
    std::size_t index;     // 0-based position in the sentence
};

struct TaggedSentence {
    std::vector<Token> tokens;
    std::vector<LangTag> tags;   // same length as tokens
    TargetLanguage target_language;
};

// Case-insensitive wordlist; entries stored lowercased.
class Dictionary {
public:
    Dictionary() = default;

    // UTF-8, one word per line; '#'-prefixed lines are comments, blanks ignored.
    static Dictionary load(const std::string& path);
    static Dictionary from_words(const std::vector<std::string>& words);

    bool contains(std::string_view word) const;
    std::size_t size() const { return entries_.size(); }
    const std::string& source_path() const { return source_path_; }

private:
    std::unordered_set<std::string> entries_;
    std::string source_path_;
};

std::vector<Token> tokenize(std::string_view text);
ScriptClass classify_script(std::string_view surface);
LangTag tag_token(const Token& token, const Dictionary& dict);
TaggedSentence tag_sentence(std::string_view text, const Dictionary& dict, TargetLanguage lang);

// Decodes the next UTF-8 codepoint; malformed bytes decode as U+FFFD, one byte
// at a time. pos is advanced past the consumed bytes.
std::uint32_t decode_utf8(std::string_view s, std::size_t& pos);

}  // namespace cmfl

#endif
