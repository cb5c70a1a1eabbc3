#include "effparse/left_corner.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "effparse/errors.hpp"
#include "text_io.hpp"

namespace effparse {

namespace {
constexpr std::size_t kNpos = static_cast<std::size_t>(-1);
}

LeftCornerTable LeftCornerTable::compute(const Pcfg& pcfg) {
    LeftCornerTable t;
    const SymbolTable& syms = pcfg.symbols();
    t.num_symbols_ = syms.size();
    t.pos_ = pcfg.pos_tags();
    t.pos_index_.assign(t.num_symbols_, kNpos);
    for (std::size_t i = 0; i < t.pos_.size(); ++i) t.pos_index_[t.pos_[i]] = i;

    const auto& nts = pcfg.nonterminals();
    std::vector<std::size_t> nt_index(t.num_symbols_, kNpos);
    for (std::size_t i = 0; i < nts.size(); ++i) nt_index[nts[i]] = i;

    const auto n = static_cast<Eigen::Index>(nts.size());
    const auto m = static_cast<Eigen::Index>(t.pos_.size());
    Eigen::MatrixXd lc = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(n, m);
    for (const PcfgRule& r : pcfg.rules()) {
        const SymbolId first = r.rhs.front();
        const auto a = static_cast<Eigen::Index>(nt_index[r.lhs]);
        if (nt_index[first] != kNpos) lc(a, static_cast<Eigen::Index>(nt_index[first])) += r.prob;
        if (t.pos_index_[first] != kNpos) direct(a, static_cast<Eigen::Index>(t.pos_index_[first])) += r.prob;
    }
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - lc;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible())
        throw LeftCornerError("left-corner system is singular: a left-corner cycle carries probability mass 1");
    const Eigen::MatrixXd closure = lu.solve(direct);
    if (!closure.allFinite() || (system * closure - direct).cwiseAbs().maxCoeff() > 1e-8)
        throw LeftCornerError("left-corner system could not be solved accurately");
    if (closure.size() > 0 && closure.minCoeff() < -1e-9)
        throw LeftCornerError("left-corner closure has negative entries: left-corner mass is not summable");

    t.reach_.assign(t.num_symbols_ * t.pos_.size(), 0.0);
    for (SymbolId s = 0; s < t.num_symbols_; ++s) {
        double* row = t.reach_.data() + s * t.pos_.size();
        if (t.pos_index_[s] != kNpos) row[t.pos_index_[s]] = 1.0;
        if (nt_index[s] != kNpos) {
            const auto a = static_cast<Eigen::Index>(nt_index[s]);
            for (Eigen::Index j = 0; j < m; ++j) row[j] = std::max(row[j], std::max(0.0, closure(a, j)));
        }
    }
    return t;
}

double LeftCornerTable::reach(SymbolId symbol, SymbolId pos) const {
    if (symbol >= num_symbols_ || pos >= num_symbols_ || pos_index_[pos] == kNpos) return 0.0;
    return reach_[symbol * pos_.size() + pos_index_[pos]];
}

double LeftCornerTable::word_prob(const Pcfg& pcfg, SymbolId symbol, std::string_view word) const {
    if (symbol >= num_symbols_) return 0.0;
    const double* row = reach_.data() + symbol * pos_.size();
    double p = 0.0;
    for (SymbolId tag : pcfg.candidate_tags(word)) {
        const std::size_t j = pos_index_.at(tag);
        if (j != kNpos && row[j] > 0.0) p += row[j] * pcfg.lexical_prob(tag, word);
    }
    return std::clamp(p, 0.0, 1.0);
}

std::vector<double> LeftCornerTable::word_probs(const Pcfg& pcfg, std::string_view word) const {
    std::vector<std::pair<std::size_t, double>> emit;
    for (SymbolId tag : pcfg.candidate_tags(word)) {
        const std::size_t j = pos_index_.at(tag);
        if (j != kNpos) emit.emplace_back(j, pcfg.lexical_prob(tag, word));
    }
    std::vector<double> out(num_symbols_, 0.0);
    for (std::size_t s = 0; s < num_symbols_; ++s) {
        const double* row = reach_.data() + s * pos_.size();
        double p = 0.0;
        for (const auto& [j, lp] : emit) p += row[j] * lp;
        out[s] = std::clamp(p, 0.0, 1.0);
    }
    return out;
}

void LeftCornerTable::write(std::ostream& out) const {
    using textio::fmt_double;
    out << "left-corner 1\n";
    out << "symbols " << num_symbols_ << '\n';
    out << "pos " << pos_.size();
    for (SymbolId p : pos_) out << ' ' << p;
    out << '\n';
    for (std::size_t s = 0; s < num_symbols_; ++s) {
        bool any = false;
        for (std::size_t j = 0; j < pos_.size(); ++j) any = any || reach_[s * pos_.size() + j] != 0.0;
        if (!any) continue;
        out << "row " << s;
        for (std::size_t j = 0; j < pos_.size(); ++j) out << ' ' << fmt_double(reach_[s * pos_.size() + j]);
        out << '\n';
    }
    out << "end\n";
}

LeftCornerTable LeftCornerTable::read(std::istream& in) {
    using namespace textio;
    LeftCornerTable t;
    expect_word(in, "left-corner");
    if (read_value<int>(in, "version") != 1) throw SerializationError("left-corner: unsupported version");
    expect_word(in, "symbols");
    t.num_symbols_ = read_value<std::size_t>(in, "symbol count");
    expect_word(in, "pos");
    const auto m = read_value<std::size_t>(in, "pos count");
    t.pos_index_.assign(t.num_symbols_, kNpos);
    for (std::size_t j = 0; j < m; ++j) {
        const auto p = read_value<SymbolId>(in, "pos id");
        if (p >= t.num_symbols_) throw SerializationError("left-corner: pos id out of range");
        t.pos_.push_back(p);
        t.pos_index_[p] = j;
    }
    t.reach_.assign(t.num_symbols_ * m, 0.0);
    for (;;) {
        const auto word = read_value<std::string>(in, "row or end");
        if (word == "end") break;
        if (word != "row") throw SerializationError("left-corner: expected 'row', got '" + word + "'");
        const auto s = read_value<std::size_t>(in, "row symbol");
        if (s >= t.num_symbols_) throw SerializationError("left-corner: row symbol out of range");
        for (std::size_t j = 0; j < m; ++j) t.reach_[s * m + j] = read_double(in, "reach value");
    }
    return t;
}

}  // namespace effparse
