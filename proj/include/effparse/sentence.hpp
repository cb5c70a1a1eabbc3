#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effparse/tree.hpp"

namespace effparse {

struct Token {
    std::string word;
    std::optional<std::string> tag;
};

using Sentence = std::vector<Token>;

/// Whitespace-separated tokens; `word_TAG` (split at the last '_') marks a
/// pre-tagged token when `allow_tags` is set.
Sentence parse_sentence(std::string_view line, bool allow_tags = true);

Sentence sentence_from_tree(const Tree& tree, bool with_tags = false);

std::vector<std::string> sentence_words(const Sentence& sentence);

}  // namespace effparse
