#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "effparse/pcfg.hpp"
#include "effparse/tree.hpp"

namespace effparse {

/// Label-vs-adjacent-POS statistics for the chart parser's figure of merit:
/// log P(label | POS left of the span) and log P(label | POS right of the
/// span), add-one smoothed over the constituent labels.
class BoundaryModel {
public:
    static BoundaryModel train(const std::vector<Tree>& trees);
    /// Every score is log 1 = 0.
    static BoundaryModel neutral();

    bool is_neutral() const { return neutral_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<std::size_t> label_index(std::string_view label) const;
    /// Conditioning POS (or sentence sentinel); nullopt if never observed.
    std::optional<std::size_t> condition_index(std::string_view pos) const;

    /// Unknown labels score 0; unknown conditions score uniformly.
    double left(std::optional<std::size_t> label, std::optional<std::size_t> prev_pos) const;
    double right(std::optional<std::size_t> label, std::optional<std::size_t> next_pos) const;
    double left(std::string_view label, std::string_view prev_pos) const;
    double right(std::string_view label, std::string_view next_pos) const;
    /// Label-independent length term: word_cost() per word in the span, so
    /// long edges are not ranked below short ones merely for covering more
    /// words. 0 for the neutral model.
    double span(std::size_t length) const { return neutral_ ? 0.0 : word_cost_ * static_cast<double>(length); }
    double word_cost() const { return word_cost_; }
    void set_word_cost(double cost) { word_cost_ = cost; }
    /// Mean negative log probability per word of the trees under `pcfg`.
    static double estimate_word_cost(const Pcfg& pcfg, const std::vector<Tree>& trees);

    void write(std::ostream& out) const;
    static BoundaryModel read(std::istream& in);

    /// Builds a model from explicit tables (log scores), for tests.
    static BoundaryModel from_tables(std::vector<std::string> labels, std::vector<std::string> conditions,
                                     std::vector<std::vector<double>> left, std::vector<std::vector<double>> right);

private:
    void index();
    double score(const std::vector<std::vector<double>>& table, std::optional<std::size_t> label,
                 std::optional<std::size_t> cond) const;

    bool neutral_ = false;
    double word_cost_ = 0.0;
    std::vector<std::string> labels_;
    std::vector<std::string> conditions_;
    // [condition][label], log scores
    std::vector<std::vector<double>> left_;
    std::vector<std::vector<double>> right_;
    // raw counts kept for serialization
    std::vector<std::vector<std::uint64_t>> left_counts_;
    std::vector<std::vector<std::uint64_t>> right_counts_;
    bool from_counts_ = false;
    std::unordered_map<std::string, std::size_t> label_index_;
    std::unordered_map<std::string, std::size_t> condition_index_;
};

}  // namespace effparse
