#include "effparse/tree.hpp"

#include <cctype>

#include "effparse/errors.hpp"

namespace effparse {

namespace {

void collect_yield(const Tree& t, std::vector<std::string>& words, std::vector<std::string>& tags) {
    if (t.is_preterminal()) {
        words.push_back(t.word);
        tags.push_back(t.label);
        return;
    }
    for (const Tree& c : t.children) collect_yield(c, words, tags);
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Rejects unbalanced input before any structural checks, so the reported
// offset always points at the bracket fault.
void check_balance(std::string_view text) {
    long depth = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '(') {
            ++depth;
        } else if (text[i] == ')') {
            if (depth == 0) throw ParseFormatError("unbalanced ')'", i);
            --depth;
        }
    }
    if (depth != 0) throw ParseFormatError("unbalanced '(': input ended inside a tree", text.size());
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::vector<Tree> read_all() {
        std::vector<Tree> out;
        skip_space();
        while (pos_ < text_.size()) {
            if (text_[pos_] != '(') throw ParseFormatError("expected '('", pos_);
            Tree t = read_node();
            // Label-less wrapper: "( (S ...) )".
            if (t.label.empty()) {
                if (t.children.size() != 1)
                    throw ParseFormatError("unlabeled wrapper must hold exactly one tree", wrapper_start_);
                t = std::move(t.children.front());
            }
            if (t.label.empty()) throw ParseFormatError("tree without a label", wrapper_start_);
            out.push_back(std::move(t));
            skip_space();
        }
        return out;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    std::string read_token() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')')
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    Tree read_node() {
        const std::size_t open = pos_;
        wrapper_start_ = open;
        ++pos_;  // '('
        skip_space();
        Tree t;
        if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') t.label = read_token();
        skip_space();
        bool has_word = false;
        while (pos_ < text_.size() && text_[pos_] != ')') {
            if (text_[pos_] == '(') {
                if (has_word) throw ParseFormatError("word mixed with subtrees", pos_);
                t.children.push_back(read_node());
            } else {
                if (has_word || !t.children.empty())
                    throw ParseFormatError("preterminal with more than one word", pos_);
                t.word = read_token();
                has_word = true;
            }
            skip_space();
        }
        if (pos_ >= text_.size()) throw ParseFormatError("unbalanced '('", pos_);
        if (!has_word && t.children.empty()) throw ParseFormatError("empty node", open);
        if (has_word && t.label.empty()) throw ParseFormatError("word without a POS label", open);
        ++pos_;  // ')'
        wrapper_start_ = open;
        return t;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t wrapper_start_ = 0;
};

void print_into(const Tree& t, std::string& out) {
    out += '(';
    out += t.label;
    if (t.is_preterminal()) {
        out += ' ';
        out += t.word;
    } else {
        for (const Tree& c : t.children) {
            out += ' ';
            print_into(c, out);
        }
    }
    out += ')';
}

}  // namespace

std::vector<std::string> Tree::yield() const {
    std::vector<std::string> words, pos;
    collect_yield(*this, words, pos);
    return words;
}

std::vector<std::string> Tree::tags() const {
    std::vector<std::string> words, pos;
    collect_yield(*this, words, pos);
    return pos;
}

std::size_t Tree::num_words() const {
    if (is_preterminal()) return 1;
    std::size_t n = 0;
    for (const Tree& c : children) n += c.num_words();
    return n;
}

std::size_t Tree::num_constituents() const {
    if (is_preterminal()) return 0;
    std::size_t n = 1;
    for (const Tree& c : children) n += c.num_constituents();
    return n;
}

std::vector<Tree> read_bracketed(std::string_view text) {
    check_balance(text);
    return Reader(text).read_all();
}

Tree read_one_bracketed(std::string_view text) {
    auto trees = read_bracketed(text);
    if (trees.size() != 1)
        throw ParseFormatError("expected exactly one tree, found " + std::to_string(trees.size()), 0);
    return std::move(trees.front());
}

std::string print_bracketed(const Tree& tree) {
    std::string out;
    print_into(tree, out);
    return out;
}

}  // namespace effparse
