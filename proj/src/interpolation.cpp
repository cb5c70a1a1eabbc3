#include "effparse/interpolation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <utility>

#include "effparse/errors.hpp"
#include "text_io.hpp"

namespace effparse {

std::size_t BucketSpec::bucket_of(std::uint64_t count) const {
    if (count == 0) return 0;
    return std::min<std::size_t>(num_buckets - 1, static_cast<std::size_t>(std::bit_width(count)));
}

std::uint64_t BucketSpec::lower_bound(std::size_t bucket) const {
    return bucket == 0 ? 0 : std::uint64_t{1} << (bucket - 1);
}

std::string BucketSpec::describe() const {
    std::string out;
    for (std::size_t b = 0; b < num_buckets; ++b) {
        if (!out.empty()) out += ' ';
        const std::uint64_t lo = lower_bound(b);
        if (b + 1 == num_buckets) {
            out += std::to_string(lo) + "+";
        } else {
            const std::uint64_t hi = b == 0 ? 0 : (lo << 1) - 1;
            out += lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
        }
    }
    return out;
}

namespace {

/// Maximizes sum log(l * a_i + (1 - l) * b_i) over l in [0,1]. The objective
/// is concave, so golden-section search converges; both endpoints are also
/// checked so that boundary optima come out exact.
double fit_mixing_weight(const std::vector<std::pair<double, double>>& points, double tolerance, double max_lambda) {
    auto objective = [&](double l) {
        double s = 0.0;
        for (const auto& [a, b] : points) s += std::log(l * a + (1.0 - l) * b);
        return s;
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = max_lambda;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > tolerance) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    double best = 0.5 * (lo + hi);
    double f_best = objective(best);
    for (double edge : {0.0, max_lambda}) {
        double f = objective(edge);
        if (f > f_best) {
            best = edge;
            f_best = f;
        }
    }
    return best;
}

}  // namespace

double InterpolatedModel::fixed_lambda(std::size_t bucket) const {
    if (bucket == 0) return 0.0;
    const double lo = static_cast<double>(options_.buckets.lower_bound(bucket));
    return lo / (lo + 1.0);
}

InterpolatedModel InterpolatedModel::train(std::span<const EventTuple> training, std::span<const EventTuple> heldout,
                                           std::size_t order, const InterpolationOptions& options) {
    if (order < 1) throw TrainingError("interpolated model: order must be at least 1");
    if (training.empty()) throw TrainingError("interpolated model: no training events");
    if (options.buckets.num_buckets < 2) throw TrainingError("interpolated model: need at least two buckets");
    if (!(options.max_lambda > 0.0 && options.max_lambda < 1.0))
        throw TrainingError("interpolated model: max_lambda must lie in (0, 1)");

    InterpolatedModel m;
    m.order_ = order;
    m.options_ = options;
    m.node_count_.push_back(0);
    m.node_parent_.push_back(kNoNode);
    m.node_event_.push_back(0);

    for (const EventTuple& t : training) {
        if (t.context.size() != order) throw TrainingError("interpolated model: training context has wrong length");
        std::uint32_t node = 0;
        ++m.node_count_[0];
        ++m.joint_counts_[pack(0, t.outcome)];
        for (std::size_t k = 0; k < order; ++k) {
            auto [it, inserted] =
                m.children_.try_emplace(pack(node, t.context[k]), static_cast<std::uint32_t>(m.node_count_.size()));
            if (inserted) {
                m.node_count_.push_back(0);
                m.node_parent_.push_back(node);
                m.node_event_.push_back(t.context[k]);
            }
            node = it->second;
            ++m.node_count_[node];
            ++m.joint_counts_[pack(node, t.outcome)];
        }
        ++m.unigram_[t.outcome];
    }
    for (const auto& [e, c] : m.unigram_) m.event_space_.push_back(e);
    std::sort(m.event_space_.begin(), m.event_space_.end());

    const std::size_t nb = options.buckets.num_buckets;
    m.lambdas_.assign(order + 1, std::vector<double>(nb, 0.0));
    for (std::size_t k = 1; k <= order; ++k)
        for (std::size_t b = 0; b < nb; ++b) m.lambdas_[k][b] = m.fixed_lambda(b);

    for (const EventTuple& t : heldout)
        if (t.context.size() != order) throw TrainingError("interpolated model: held-out context has wrong length");
    m.heldout_estimated_ = !heldout.empty();
    if (!m.heldout_estimated_) return m;

    // Lower orders first: order k mixes against the already-fitted order k-1.
    std::vector<std::uint32_t> nodes;
    for (std::size_t k = 1; k <= order; ++k) {
        std::vector<std::vector<std::pair<double, double>>> by_bucket(nb);
        for (const EventTuple& t : heldout) {
            m.walk(t.context, nodes);
            const std::uint64_t c = nodes[k] == kNoNode ? 0 : m.node_count_[nodes[k]];
            const std::size_t b = options.buckets.bucket_of(c);
            if (b == 0) continue;
            const double phat = m.joint(nodes[k], t.outcome) / static_cast<double>(c);
            by_bucket[b].emplace_back(phat, m.value_at(t.outcome, nodes, k - 1));
        }
        for (std::size_t b = 1; b < nb; ++b)
            if (!by_bucket[b].empty())
                m.lambdas_[k][b] = fit_mixing_weight(by_bucket[b], options.search_tolerance, options.max_lambda);
    }
    return m;
}

std::uint32_t InterpolatedModel::child(std::uint32_t node, EventId event) const {
    auto it = children_.find(pack(node, event));
    return it == children_.end() ? kNoNode : it->second;
}

void InterpolatedModel::walk(std::span<const EventId> context, std::vector<std::uint32_t>& nodes) const {
    nodes.assign(order_ + 1, kNoNode);
    nodes[0] = 0;
    std::uint32_t node = 0;
    for (std::size_t k = 0; k < order_ && k < context.size(); ++k) {
        node = child(node, context[k]);
        if (node == kNoNode) break;
        nodes[k + 1] = node;
    }
}

double InterpolatedModel::joint(std::uint32_t node, EventId outcome) const {
    if (node == kNoNode) return 0.0;
    auto it = joint_counts_.find(pack(node, outcome));
    return it == joint_counts_.end() ? 0.0 : static_cast<double>(it->second);
}

double InterpolatedModel::base(EventId outcome) const {
    auto it = unigram_.find(outcome);
    if (it == unigram_.end()) return options_.unknown_mass;
    const double w = options_.unigram_weight;
    const double unigram = static_cast<double>(it->second) / static_cast<double>(node_count_[0]);
    const double uniform = 1.0 / static_cast<double>(event_space_.size());
    return (1.0 - options_.unknown_mass) * (w * unigram + (1.0 - w) * uniform);
}

double InterpolatedModel::value_at(EventId outcome, const std::vector<std::uint32_t>& nodes, std::size_t k) const {
    double p = base(outcome);
    for (std::size_t j = 1; j <= k; ++j) {
        const std::uint64_t c = nodes[j] == kNoNode ? 0 : node_count_[nodes[j]];
        const double lambda = lambdas_[j][options_.buckets.bucket_of(c)];
        const double phat = c == 0 ? 0.0 : joint(nodes[j], outcome) / static_cast<double>(c);
        p = lambda * phat + (1.0 - lambda) * p;
    }
    return p;
}

void InterpolatedModel::check_context(std::span<const EventId> context) const {
    if (context.size() != order_)
        throw ModelDomainError("interpolated model: context length " + std::to_string(context.size()) +
                               " does not match order " + std::to_string(order_));
}

double InterpolatedModel::prob(EventId outcome, std::span<const EventId> context, EventCounter& counter,
                               EventCategory category) const {
    notify_score(category);
    check_context(context);
    const double p = prob_uncounted(outcome, context);
    counter.record(category);
    return p;
}

double InterpolatedModel::prob_uncounted(EventId outcome, std::span<const EventId> context) const {
    check_context(context);
    thread_local std::vector<std::uint32_t> nodes;
    walk(context, nodes);
    return value_at(outcome, nodes, order_);
}

double InterpolatedModel::empirical(std::size_t k, EventId outcome, std::span<const EventId> context) const {
    if (k > order_) throw ModelDomainError("interpolated model: order out of range");
    if (k == 0) return base(outcome);
    std::vector<std::uint32_t> nodes;
    walk(context, nodes);
    if (nodes[k] == kNoNode) return 0.0;
    return joint(nodes[k], outcome) / static_cast<double>(node_count_[nodes[k]]);
}

std::uint64_t InterpolatedModel::prefix_count(std::size_t k, std::span<const EventId> context) const {
    if (k > order_) throw ModelDomainError("interpolated model: order out of range");
    std::vector<std::uint32_t> nodes;
    walk(context, nodes);
    return nodes[k] == kNoNode ? 0 : node_count_[nodes[k]];
}

double InterpolatedModel::lambda_value(std::size_t k, std::span<const EventId> context) const {
    if (k < 1 || k > order_) throw ModelDomainError("interpolated model: lambda order out of range");
    return lambdas_[k][options_.buckets.bucket_of(prefix_count(k, context))];
}

InterpolatedModel InterpolatedModel::with_constant_lambda(double value) const {
    InterpolatedModel m = *this;
    for (std::size_t k = 1; k <= order_; ++k) std::fill(m.lambdas_[k].begin(), m.lambdas_[k].end(), value);
    return m;
}

void InterpolatedModel::write(std::ostream& out) const {
    using textio::fmt_double;
    out << "interpolated-model 1\n";
    out << "order " << order_ << '\n';
    out << "buckets " << options_.buckets.num_buckets << '\n';
    out << "unigram_weight " << fmt_double(options_.unigram_weight) << '\n';
    out << "unknown_mass " << fmt_double(options_.unknown_mass) << '\n';
    out << "search_tolerance " << fmt_double(options_.search_tolerance) << '\n';
    out << "max_lambda " << fmt_double(options_.max_lambda) << '\n';
    out << "heldout_estimated " << (heldout_estimated_ ? 1 : 0) << '\n';
    out << "nodes " << node_count_.size() << '\n';
    for (std::size_t i = 1; i < node_count_.size(); ++i)
        out << node_parent_[i] << ' ' << node_event_[i] << ' ' << node_count_[i] << '\n';
    out << "root_count " << node_count_[0] << '\n';
    std::vector<std::pair<std::uint64_t, std::uint64_t>> joints(joint_counts_.begin(), joint_counts_.end());
    std::sort(joints.begin(), joints.end());
    out << "joint " << joints.size() << '\n';
    for (const auto& [key, c] : joints) out << (key >> 32) << ' ' << (key & 0xffffffffu) << ' ' << c << '\n';
    out << "lambdas\n";
    for (std::size_t k = 1; k <= order_; ++k) {
        for (std::size_t b = 0; b < lambdas_[k].size(); ++b) out << (b ? " " : "") << fmt_double(lambdas_[k][b]);
        out << '\n';
    }
    out << "end\n";
}

InterpolatedModel InterpolatedModel::read(std::istream& in) {
    using namespace textio;
    InterpolatedModel m;
    expect_word(in, "interpolated-model");
    if (read_value<int>(in, "version") != 1) throw SerializationError("interpolated model: unsupported version");
    expect_word(in, "order");
    m.order_ = read_value<std::size_t>(in, "order");
    expect_word(in, "buckets");
    m.options_.buckets.num_buckets = read_value<std::size_t>(in, "buckets");
    expect_word(in, "unigram_weight");
    m.options_.unigram_weight = read_double(in, "unigram_weight");
    expect_word(in, "unknown_mass");
    m.options_.unknown_mass = read_double(in, "unknown_mass");
    expect_word(in, "search_tolerance");
    m.options_.search_tolerance = read_double(in, "search_tolerance");
    expect_word(in, "max_lambda");
    m.options_.max_lambda = read_double(in, "max_lambda");
    expect_word(in, "heldout_estimated");
    m.heldout_estimated_ = read_value<int>(in, "flag") != 0;
    expect_word(in, "nodes");
    const auto n_nodes = read_value<std::size_t>(in, "node count");
    if (n_nodes == 0) throw SerializationError("interpolated model: no trie root");
    m.node_count_.assign(n_nodes, 0);
    m.node_parent_.assign(n_nodes, kNoNode);
    m.node_event_.assign(n_nodes, 0);
    for (std::size_t i = 1; i < n_nodes; ++i) {
        m.node_parent_[i] = read_value<std::uint32_t>(in, "node parent");
        m.node_event_[i] = read_value<EventId>(in, "node event");
        m.node_count_[i] = read_value<std::uint64_t>(in, "node count");
        if (m.node_parent_[i] >= i) throw SerializationError("interpolated model: trie nodes out of order");
        m.children_.emplace(pack(m.node_parent_[i], m.node_event_[i]), static_cast<std::uint32_t>(i));
    }
    expect_word(in, "root_count");
    m.node_count_[0] = read_value<std::uint64_t>(in, "root count");
    expect_word(in, "joint");
    const auto n_joint = read_value<std::size_t>(in, "joint count");
    for (std::size_t i = 0; i < n_joint; ++i) {
        auto node = read_value<std::uint32_t>(in, "joint node");
        auto outcome = read_value<EventId>(in, "joint outcome");
        auto c = read_value<std::uint64_t>(in, "joint count");
        m.joint_counts_.emplace(pack(node, outcome), c);
        if (node == 0) m.unigram_.emplace(outcome, c);
    }
    for (const auto& [e, c] : m.unigram_) m.event_space_.push_back(e);
    std::sort(m.event_space_.begin(), m.event_space_.end());
    expect_word(in, "lambdas");
    m.lambdas_.assign(m.order_ + 1, std::vector<double>(m.options_.buckets.num_buckets, 0.0));
    for (std::size_t k = 1; k <= m.order_; ++k)
        for (auto& l : m.lambdas_[k]) l = read_double(in, "lambda");
    expect_word(in, "end");
    return m;
}

}  // namespace effparse
