#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace effparse {

/// Labeled constituent tree. A node without children is a preterminal and
/// carries the word; every other node has at least one child.
struct Tree {
    std::string label;
    std::string word;
    std::vector<Tree> children;

    static Tree leaf(std::string pos, std::string word) {
        Tree t;
        t.label = std::move(pos);
        t.word = std::move(word);
        return t;
    }
    static Tree node(std::string label, std::vector<Tree> children) {
        Tree t;
        t.label = std::move(label);
        t.children = std::move(children);
        return t;
    }

    bool is_preterminal() const { return children.empty(); }

    std::vector<std::string> yield() const;
    std::vector<std::string> tags() const;
    std::size_t num_words() const;
    /// Internal non-preterminal nodes.
    std::size_t num_constituents() const;

    friend bool operator==(const Tree&, const Tree&) = default;
};

/// Reads Penn-style bracketed trees. One tree per top-level expression; a
/// label-less outer wrapper around a single tree is removed.
std::vector<Tree> read_bracketed(std::string_view text);
Tree read_one_bracketed(std::string_view text);

std::string print_bracketed(const Tree& tree);

}  // namespace effparse
