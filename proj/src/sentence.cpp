#include "effparse/sentence.hpp"

#include <sstream>

namespace effparse {

Sentence parse_sentence(std::string_view line, bool allow_tags) {
    Sentence out;
    std::istringstream in{std::string(line)};
    for (std::string tok; in >> tok;) {
        Token t;
        auto cut = allow_tags ? tok.rfind('_') : std::string::npos;
        if (cut != std::string::npos && cut > 0 && cut + 1 < tok.size()) {
            t.word = tok.substr(0, cut);
            t.tag = tok.substr(cut + 1);
        } else {
            t.word = tok;
        }
        out.push_back(std::move(t));
    }
    return out;
}

Sentence sentence_from_tree(const Tree& tree, bool with_tags) {
    const auto words = tree.yield();
    const auto tags = tree.tags();
    Sentence out(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        out[i].word = words[i];
        if (with_tags) out[i].tag = tags[i];
    }
    return out;
}

std::vector<std::string> sentence_words(const Sentence& sentence) {
    std::vector<std::string> out;
    out.reserve(sentence.size());
    for (const Token& t : sentence) out.push_back(t.word);
    return out;
}

}  // namespace effparse
