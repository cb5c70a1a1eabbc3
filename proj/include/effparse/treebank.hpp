#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "effparse/tree.hpp"

namespace effparse {

/// Parent slot value for the root constituent (and its head context).
inline constexpr std::string_view kRootSentinel = "<ROOT>";
/// Left-sibling slot value for a first child.
inline constexpr std::string_view kNoSibling = "<none>";
/// Preceding-POS slot value at sentence start.
inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";

struct NormalizeOptions {
    bool strip_function_tags = true;
    bool remove_empty_elements = true;
    std::set<std::string> empty_labels = {"-NONE-"};
};

/// Strips function tags and deletes empty elements (and nodes left
/// childless by the deletion). Unary chains are kept.
/// Throws DegenerateTreeError if nothing of the yield survives.
Tree normalize(const Tree& tree, const NormalizeOptions& options = {});

std::string strip_function_tag(std::string_view label);

struct NormalizedCorpus {
    std::vector<Tree> trees;
    std::size_t skipped = 0;
};

NormalizedCorpus normalize_corpus(const std::vector<Tree>& trees, const NormalizeOptions& options = {});

struct CorpusSplit {
    std::vector<Tree> train;
    std::vector<Tree> heldout;
    std::vector<Tree> test;
    std::vector<std::size_t> train_index;
    std::vector<std::size_t> heldout_index;
    std::vector<std::size_t> test_index;
    std::uint64_t seed = 0;
};

/// Deterministic pseudo-random partition; each part keeps corpus order.
/// Throws SplitError when a requested part (or training) would be empty.
CorpusSplit split_corpus(const std::vector<Tree>& trees, double heldout_fraction, double test_fraction,
                         std::uint64_t seed);

struct Rule {
    std::string lhs;
    std::vector<std::string> rhs;

    std::string rhs_key() const;
    friend auto operator<=>(const Rule&, const Rule&) = default;
};

struct RuleEvent {
    Rule rule;
    std::string parent;
    std::string head_word;
    std::string head_pos;
};

/// Head-percolation table. Each entry is "LHS direction sym1 sym2 ...";
/// the first priority symbol found scanning in the given direction wins,
/// otherwise the first child in that direction. Unknown LHS: rightmost child.
class HeadFinder {
public:
    enum class Direction { Left, Right };
    struct Entry {
        Direction direction = Direction::Left;
        std::vector<std::string> priorities;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    HeadFinder() = default;
    static HeadFinder builtin();
    static HeadFinder parse(std::istream& in);
    static HeadFinder load(const std::string& path);

    void set(const std::string& lhs, Entry entry) { table_[lhs] = std::move(entry); }
    /// Writes the table in the same format parse() reads.
    void write(std::ostream& out) const;
    friend bool operator==(const HeadFinder& a, const HeadFinder& b) { return a.table_ == b.table_; }

    std::size_t find_head(std::string_view lhs, const std::vector<std::string>& rhs) const;
    std::size_t find_head(const Rule& rule) const { return find_head(rule.lhs, rule.rhs); }
    std::size_t find_head(const Tree& node) const;

private:
    std::map<std::string, Entry, std::less<>> table_;
};

/// One internal non-preterminal node, with the context the models condition on.
struct Constituent {
    const Tree* node = nullptr;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string parent;            // kRootSentinel at the root
    std::string parent_head_pos;   // kRootSentinel at the root
    std::string parent_head_word;  // kRootSentinel at the root
    std::string left_sibling;      // kNoSibling for a first child / the root
    std::string prev_pos;          // POS before `start`, or kSentenceStart
    std::string head_pos;
    std::string head_word;
    std::size_t head_child = 0;
};

/// Constituents in preorder (top-down, left to right).
std::vector<Constituent> constituents_topdown(const Tree& tree, const HeadFinder& heads);

std::vector<RuleEvent> extract_rule_events(const Tree& tree, const HeadFinder& heads);

/// Reads every tree from a file and normalizes it.
NormalizedCorpus load_treebank(const std::string& path, const NormalizeOptions& options = {});

}  // namespace effparse
