#include "effparse/boundary.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "effparse/errors.hpp"
#include "effparse/treebank.hpp"
#include "text_io.hpp"

namespace effparse {

namespace {

std::vector<std::vector<double>> smoothed(const std::vector<std::vector<std::uint64_t>>& counts, std::size_t labels) {
    std::vector<std::vector<double>> out(counts.size(), std::vector<double>(labels, 0.0));
    for (std::size_t c = 0; c < counts.size(); ++c) {
        std::uint64_t total = 0;
        for (auto n : counts[c]) total += n;
        for (std::size_t l = 0; l < labels; ++l)
            out[c][l] = std::log(static_cast<double>(counts[c][l] + 1) / static_cast<double>(total + labels));
    }
    return out;
}

}  // namespace

BoundaryModel BoundaryModel::train(const std::vector<Tree>& trees) {
    if (trees.empty()) throw TrainingError("boundary model: empty training corpus");
    const HeadFinder heads = HeadFinder::builtin();
    std::set<std::string> labels, conds{std::string(kSentenceStart), std::string(kSentenceEnd)};
    struct Obs {
        std::string label, prev, next;
    };
    std::vector<Obs> obs;
    for (const Tree& t : trees) {
        const auto tags = t.tags();
        for (const std::string& p : tags) conds.insert(p);
        for (const Constituent& c : constituents_topdown(t, heads)) {
            labels.insert(c.node->label);
            obs.push_back({c.node->label, c.prev_pos,
                           c.end < tags.size() ? tags[c.end] : std::string(kSentenceEnd)});
        }
    }
    BoundaryModel m;
    m.labels_.assign(labels.begin(), labels.end());
    m.conditions_.assign(conds.begin(), conds.end());
    m.index();
    m.left_counts_.assign(m.conditions_.size(), std::vector<std::uint64_t>(m.labels_.size(), 0));
    m.right_counts_ = m.left_counts_;
    for (const Obs& o : obs) {
        const std::size_t l = m.label_index_.at(o.label);
        ++m.left_counts_[m.condition_index_.at(o.prev)][l];
        ++m.right_counts_[m.condition_index_.at(o.next)][l];
    }
    m.from_counts_ = true;
    m.left_ = smoothed(m.left_counts_, m.labels_.size());
    m.right_ = smoothed(m.right_counts_, m.labels_.size());
    return m;
}

double BoundaryModel::estimate_word_cost(const Pcfg& pcfg, const std::vector<Tree>& trees) {
    double logprob = 0.0;
    std::size_t words = 0;
    for (const Tree& t : trees) {
        const double lp = pcfg.tree_logprob(t);
        if (!std::isfinite(lp)) continue;
        logprob += lp;
        words += t.num_words();
    }
    return words == 0 ? 0.0 : -logprob / static_cast<double>(words);
}

BoundaryModel BoundaryModel::neutral() {
    BoundaryModel m;
    m.neutral_ = true;
    return m;
}

BoundaryModel BoundaryModel::from_tables(std::vector<std::string> labels, std::vector<std::string> conditions,
                                         std::vector<std::vector<double>> left,
                                         std::vector<std::vector<double>> right) {
    BoundaryModel m;
    m.labels_ = std::move(labels);
    m.conditions_ = std::move(conditions);
    m.left_ = std::move(left);
    m.right_ = std::move(right);
    m.index();
    return m;
}

void BoundaryModel::index() {
    label_index_.clear();
    condition_index_.clear();
    for (std::size_t i = 0; i < labels_.size(); ++i) label_index_.emplace(labels_[i], i);
    for (std::size_t i = 0; i < conditions_.size(); ++i) condition_index_.emplace(conditions_[i], i);
}

std::optional<std::size_t> BoundaryModel::label_index(std::string_view label) const {
    auto it = label_index_.find(std::string(label));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> BoundaryModel::condition_index(std::string_view pos) const {
    auto it = condition_index_.find(std::string(pos));
    if (it == condition_index_.end()) return std::nullopt;
    return it->second;
}

double BoundaryModel::score(const std::vector<std::vector<double>>& table, std::optional<std::size_t> label,
                            std::optional<std::size_t> cond) const {
    if (neutral_ || !label) return 0.0;
    if (!cond) return -std::log(static_cast<double>(labels_.size()));
    return table[*cond][*label];
}

double BoundaryModel::left(std::optional<std::size_t> label, std::optional<std::size_t> prev_pos) const {
    return score(left_, label, prev_pos);
}

double BoundaryModel::right(std::optional<std::size_t> label, std::optional<std::size_t> next_pos) const {
    return score(right_, label, next_pos);
}

double BoundaryModel::left(std::string_view label, std::string_view prev_pos) const {
    return left(label_index(label), condition_index(prev_pos));
}

double BoundaryModel::right(std::string_view label, std::string_view next_pos) const {
    return right(label_index(label), condition_index(next_pos));
}

void BoundaryModel::write(std::ostream& out) const {
    out << "boundary-model 1\n";
    if (neutral_) {
        out << "neutral\nend\n";
        return;
    }
    if (!from_counts_) throw SerializationError("boundary model: only trained models can be serialized");
    out << "labels " << labels_.size() << '\n';
    for (const auto& l : labels_) out << l << '\n';
    out << "conditions " << conditions_.size() << '\n';
    for (const auto& c : conditions_) out << c << '\n';
    for (const auto* counts : {&left_counts_, &right_counts_}) {
        out << (counts == &left_counts_ ? "left\n" : "right\n");
        for (const auto& row : *counts) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
            out << '\n';
        }
    }
    out << "word_cost " << textio::fmt_double(word_cost_) << '\n';
    out << "end\n";
}

BoundaryModel BoundaryModel::read(std::istream& in) {
    using namespace textio;
    expect_word(in, "boundary-model");
    if (read_value<int>(in, "version") != 1) throw SerializationError("boundary model: unsupported version");
    auto tag = read_value<std::string>(in, "section");
    if (tag == "neutral") {
        expect_word(in, "end");
        return neutral();
    }
    if (tag != "labels") throw SerializationError("boundary model: expected labels");
    BoundaryModel m;
    const auto nl = read_value<std::size_t>(in, "label count");
    for (std::size_t i = 0; i < nl; ++i) m.labels_.push_back(read_value<std::string>(in, "label"));
    expect_word(in, "conditions");
    const auto nc = read_value<std::size_t>(in, "condition count");
    for (std::size_t i = 0; i < nc; ++i) m.conditions_.push_back(read_value<std::string>(in, "condition"));
    for (auto* counts : {&m.left_counts_, &m.right_counts_}) {
        expect_word(in, counts == &m.left_counts_ ? "left" : "right");
        counts->assign(nc, std::vector<std::uint64_t>(nl, 0));
        for (auto& row : *counts)
            for (auto& v : row) v = read_value<std::uint64_t>(in, "boundary count");
    }
    expect_word(in, "word_cost");
    m.word_cost_ = read_double(in, "word cost");
    expect_word(in, "end");
    m.from_counts_ = true;
    m.index();
    m.left_ = smoothed(m.left_counts_, nl);
    m.right_ = smoothed(m.right_counts_, nl);
    return m;
}

}  // namespace effparse
