#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "effparse/boundary.hpp"
#include "effparse/errors.hpp"
#include "effparse/events.hpp"
#include "effparse/full_model.hpp"
#include "effparse/pcfg.hpp"
#include "effparse/sentence.hpp"
#include "effparse/symbols.hpp"
#include "effparse/tree.hpp"

namespace effparse {

/// The PCFG with n-ary rules left-factored into binary ones. Intermediate
/// symbols ("@A|X1 X2") carry log probability 0 and are removed again
/// when trees are unpacked.
class BinarizedGrammar {
public:
    struct UnaryRule {
        SymbolId parent;
        double logprob;
    };
    struct BinaryRule {
        SymbolId parent;
        double logprob;
    };

    explicit BinarizedGrammar(const Pcfg& pcfg);

    const Pcfg& pcfg() const { return *pcfg_; }
    const SymbolTable& symbols() const { return symbols_; }
    SymbolId start() const { return pcfg_->start(); }
    bool is_intermediate(SymbolId s) const { return s >= first_intermediate_; }
    /// Left-hand side an intermediate symbol was factored out of; identity otherwise.
    SymbolId base_label(SymbolId s) const { return is_intermediate(s) ? base_[s - first_intermediate_] : s; }

    std::span<const UnaryRule> unary_parents(SymbolId child) const;
    std::span<const BinaryRule> binary_parents(SymbolId left, SymbolId right) const;

private:
    const Pcfg* pcfg_;
    SymbolTable symbols_;
    SymbolId first_intermediate_ = 0;
    std::vector<SymbolId> base_;
    std::vector<std::vector<UnaryRule>> unary_;
    std::unordered_map<std::uint64_t, std::vector<BinaryRule>> binary_;
};

struct EdgeAlternative {
    enum class Kind : std::uint8_t { Lexical, Unary, Binary };
    Kind kind = Kind::Lexical;
    std::int32_t left = -1;   // child edge (Unary, Binary)
    std::int32_t right = -1;  // Binary only
    double rule_logprob = 0.0;
};

struct Edge {
    SymbolId label = 0;
    std::uint32_t start = 0;
    std::uint32_t end = 0;
    double inside_logprob = -std::numeric_limits<double>::infinity();
    double fom = -std::numeric_limits<double>::infinity();
    bool in_chart = false;
    std::uint32_t version = 0;
    std::vector<EdgeAlternative> alternatives;
};

/// Edges keyed by (label, span); later derivations of an existing edge are
/// packed in as additional alternatives.
class PackedChart {
public:
    const std::vector<Edge>& edges() const { return edges_; }
    const BinarizedGrammar& grammar() const { return *grammar_; }
    std::optional<std::size_t> find(SymbolId label, std::size_t start, std::size_t end) const;
    std::optional<std::size_t> find(std::string_view label, std::size_t start, std::size_t end) const;

    std::size_t chart_size() const { return chart_size_; }
    /// Chart size when the first complete parse entered it (0 if none did).
    std::size_t edges_at_first_parse() const { return edges_at_first_parse_; }
    std::optional<std::size_t> root_edge() const;
    bool has_parse() const { return root_edge().has_value(); }
    /// Figures of merit of agenda pops, in pop order.
    const std::vector<double>& pop_foms() const { return pop_foms_; }
    /// (label, start, end) for every edge in the chart; intermediates included.
    std::set<std::tuple<std::string, std::size_t, std::size_t>> chart_keys() const;

    const std::vector<std::string>& words() const { return words_; }
    /// POS used as boundary context for each position.
    const std::vector<std::string>& pos_context() const { return pos_context_; }
    std::size_t length() const { return words_.size(); }

private:
    friend class ChartParser;
    static std::uint64_t key(SymbolId label, std::size_t start, std::size_t end) {
        return (static_cast<std::uint64_t>(label) << 40) | (static_cast<std::uint64_t>(start) << 20) | end;
    }

    std::shared_ptr<const BinarizedGrammar> grammar_;
    std::vector<Edge> edges_;
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
    std::vector<std::vector<std::uint32_t>> chart_by_start_;
    std::vector<std::vector<std::uint32_t>> chart_by_end_;
    std::size_t chart_size_ = 0;
    std::size_t edges_at_first_parse_ = 0;
    std::vector<double> pop_foms_;
    std::vector<std::string> words_;
    std::vector<std::string> pos_context_;
};

class NoParseError : public Error {
public:
    NoParseError(const std::string& what, std::shared_ptr<const PackedChart> chart = nullptr)
        : Error(what), chart_(std::move(chart)) {}
    /// Chart as it stood when the search gave up (may be null).
    const PackedChart* chart() const { return chart_.get(); }

private:
    std::shared_ptr<const PackedChart> chart_;
};

/// Edge figure of merit: inside log probability plus the boundary score
/// (left context, right context and span length terms). Records one Edge
/// event.
double fom_edge(const BoundaryModel& boundary, std::string_view label, std::size_t start, std::size_t end,
                double inside_logprob, std::span<const std::string> pos_context, EventCounter& counter);

struct Candidate {
    Tree tree;
    double pcfg_logprob = 0.0;
};

/// Best-first agenda chart parser driven by the boundary figure of merit.
class ChartParser {
public:
    ChartParser(const Pcfg& pcfg, const BoundaryModel& boundary);

    /// Builds the chart until it holds overparse_factor times the number of
    /// edges present at the first complete parse, or the agenda empties.
    /// Untagged words are tagged from the lexicon (Tag events); every
    /// figure-of-merit computation records an Edge event.
    /// Throws NoParseError (carrying the chart) if no complete parse exists.
    PackedChart best_first_parse(const Sentence& sentence, double overparse_factor, EventCounter& counter) const;

    /// Complete parses with PCFG probability >= threshold_ratio times the
    /// best one, best first, at most max_candidates.
    std::vector<Candidate> extract_candidates(const PackedChart& chart, double threshold_ratio,
                                              std::size_t max_candidates) const;

    const BinarizedGrammar& grammar() const { return *grammar_; }
    const BoundaryModel& boundary() const { return *boundary_; }

private:
    struct Agenda;
    double score_edge(SymbolId label, std::size_t start, std::size_t end, double inside,
                      const std::vector<std::optional<std::size_t>>& pos_cond, EventCounter& counter) const;

    std::shared_ptr<const BinarizedGrammar> grammar_;
    const BoundaryModel* boundary_;
    std::vector<std::optional<std::size_t>> boundary_label_;  // per grammar symbol
};

/// Top-down product of head-POS, head-word and expansion probabilities under
/// the full model; three events per constituent.
double rescore_parse(const FullModel& model, const Tree& tree, EventCounter& counter);

struct EcConfig {
    double overparse_factor = 2.0;
    double threshold_ratio = 1e-2;
    std::size_t max_candidates = 50;
};

struct EcResult {
    Tree tree;
    EventCounter counter;
    double seconds = 0.0;
    std::size_t num_candidates = 0;
    double full_logprob = 0.0;
    double pcfg_logprob = 0.0;
};

/// Two-stage parse: best-first chart, candidate extraction, full-model
/// rescoring, argmax (ties go to the earlier, higher-PCFG candidate).
/// Events go to `counter` (the caller's scope) and are copied into the
/// result; on NoParseError the counter still holds the work done.
EcResult ec_parse(const ChartParser& parser, const FullModel& model, const Sentence& sentence, const EcConfig& config,
                  EventCounter& counter);

}  // namespace effparse
