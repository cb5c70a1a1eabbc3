#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "effparse/errors.hpp"
#include "effparse/events.hpp"
#include "effparse/left_context_model.hpp"
#include "effparse/left_corner.hpp"
#include "effparse/sentence.hpp"
#include "effparse/tree.hpp"

namespace effparse {

struct BeamConfig {
    double base_beam_factor = 1e-11;
    std::size_t enough = 100;
    std::size_t max_pops = 1'000'000;
};

/// Raised by beam_threshold before the first success of a word.
class NoThreshold : public Error {
public:
    NoThreshold() : Error("no beam threshold before the first successful analysis") {}
};

/// Raised by advance_word when no analysis reaches the word.
class WordFailure : public Error {
public:
    explicit WordFailure(std::size_t position)
        : Error("no analysis reached word " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// log(k^3 * beta * p~). Throws NoThreshold for k = 0 and ModelDomainError
/// for beta outside (0, 1].
double beam_threshold(double beta, double p_tilde_log, std::size_t k);

/// One top-down choice: a grammar rule, or a POS emitting the next word.
struct DerivationStep {
    static constexpr std::size_t kWord = static_cast<std::size_t>(-1);
    std::size_t rule = kWord;
    SymbolId pos = 0;
    std::shared_ptr<const DerivationStep> prev;
};

struct StackEntry {
    SymbolId symbol = 0;
    SymbolId parent = 0;
    SymbolId left_sibling = kNoSymbol;
    friend bool operator==(const StackEntry&, const StackEntry&) = default;
};

struct PartialAnalysis {
    std::shared_ptr<const DerivationStep> derivation;  // most recent step
    std::vector<StackEntry> stack;                      // top = back()
    std::size_t consumed = 0;
    std::size_t steps = 0;
    SymbolId last_pos = kNoSymbol;
    double logprob = 0.0;
    double fom = 0.0;
};

/// Derivation steps oldest first.
std::vector<DerivationStep> derivation_steps(const PartialAnalysis& a);

/// Max-fom heap; ties go to the earlier insertion.
class AnalysisHeap {
public:
    void push(PartialAnalysis a);
    PartialAnalysis pop();
    const PartialAnalysis& top() const { return heap_.top().analysis; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Entry {
        PartialAnalysis analysis;
        std::uint64_t seq;
        bool operator<(const Entry& o) const {
            if (analysis.fom != o.analysis.fom) return analysis.fom < o.analysis.fom;
            return seq > o.seq;
        }
    };
    std::priority_queue<Entry> heap_;
    std::uint64_t next_seq_ = 0;
};

struct WordBeam {
    std::vector<PartialAnalysis> successes;
    double best_success_logprob = -std::numeric_limits<double>::infinity();
    std::size_t success_count = 0;
    std::size_t pops = 0;
};

struct BrResult {
    std::optional<Tree> tree;
    EventCounter counter;
    double seconds = 0.0;
    bool failed = false;
    double logprob = -std::numeric_limits<double>::infinity();
    /// Word at which the search failed (sentence length if it failed at the end).
    std::size_t failed_at = 0;
};

/// Left-to-right top-down beam search over partial derivations, ranked by
/// logprob plus the look-ahead probability of the next word.
class BeamParser {
public:
    BeamParser(const IncrementalModel& model, const LeftCornerTable& left_corner);

    /// Look-ahead log probability that the top of `stack` rewrites to
    /// `token` at its left corner (0 for an empty stack at the end of the
    /// sentence). Records one Lookahead event.
    double lookahead_logprob(std::span<const StackEntry> stack, const std::optional<Token>& token,
                             EventCounter& counter) const;

    /// Processes the word at `position`. The heap's foms must include the
    /// look-ahead for that word. Throws WordFailure if nothing succeeds.
    WordBeam advance_word(AnalysisHeap& heap, const Sentence& sentence, std::size_t position,
                          const BeamConfig& config, EventCounter& counter) const;

    /// Events go to `counter` and are copied into the result. Failure is a
    /// flag, not an exception.
    BrResult parse(const Sentence& sentence, const BeamConfig& config, EventCounter& counter) const;

    /// Tree built by a complete analysis.
    Tree analysis_tree(const PartialAnalysis& a, const Sentence& sentence) const;

    const IncrementalModel& model() const { return *model_; }
    const LeftCornerTable& left_corner() const { return *left_corner_; }

private:
    struct Lookahead;
    Lookahead lookahead_for(const std::optional<Token>& token) const;
    double lookahead_cached(const Lookahead& la, std::span<const StackEntry> stack, EventCounter& counter) const;
    WordBeam advance(AnalysisHeap& heap, const Sentence& sentence, std::size_t position, const Lookahead& la,
                     const BeamConfig& config, EventCounter& counter) const;

    const IncrementalModel* model_;
    const LeftCornerTable* left_corner_;
};

BrResult br_parse(const BeamParser& parser, const Sentence& sentence, const BeamConfig& config,
                  EventCounter& counter);

}  // namespace effparse
