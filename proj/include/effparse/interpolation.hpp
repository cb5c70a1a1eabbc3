#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "effparse/events.hpp"

namespace effparse {

using EventId = std::uint32_t;

/// One training observation: the predicted event and its conditioning
/// chain, most significant first (backing off drops the tail first).
struct EventTuple {
    EventId outcome = 0;
    std::vector<EventId> context;
};

/// Geometric frequency buckets: {0}, {1}, {2-3}, {4-7}, ... with the last
/// bucket open-ended.
struct BucketSpec {
    std::size_t num_buckets = 12;

    std::size_t bucket_of(std::uint64_t count) const;
    std::uint64_t lower_bound(std::size_t bucket) const;
    /// "0 1 2-3 4-7 ... 1024+"
    std::string describe() const;
};

struct InterpolationOptions {
    BucketSpec buckets;
    /// Weight of the unigram part of the order-0 base (the rest is uniform).
    double unigram_weight = 0.9;
    /// Probability reserved for events outside the closed event space.
    double unknown_mass = 1e-6;
    double search_tolerance = 1e-9;
    /// Upper end of the held-out search. Below 1 so that lower orders keep
    /// some weight and no outcome the base can produce ends up at zero.
    double max_lambda = 0.99;
};

/// Deleted-interpolation conditional model
///   P(e0 | e1..ek) = lambda_k(e1..ek) * Phat(e0 | e1..ek) + (1 - lambda_k) * P(e0 | e1..e(k-1))
/// recursing down to an order-0 base distribution. Lambdas are per order and
/// per frequency bucket of the conditioning prefix, fitted on held-out data.
class InterpolatedModel {
public:
    InterpolatedModel() = default;

    /// Empty held-out data falls back to a fixed lambda schedule
    /// (heldout_estimated() == false).
    static InterpolatedModel train(std::span<const EventTuple> training, std::span<const EventTuple> heldout,
                                   std::size_t order, const InterpolationOptions& options = {});

    /// Interpolated probability; records exactly one event in `counter`.
    /// Throws ModelDomainError if the context length differs from order().
    double prob(EventId outcome, std::span<const EventId> context, EventCounter& counter,
                EventCategory category) const;
    /// Same value without event accounting (training and diagnostics only).
    double prob_uncounted(EventId outcome, std::span<const EventId> context) const;

    /// Relative frequency at order k (k = 0 is the base distribution);
    /// 0 when the order-k prefix was never seen.
    double empirical(std::size_t k, EventId outcome, std::span<const EventId> context) const;
    double base(EventId outcome) const;
    /// Mixing weight applied at order k (1 <= k <= order) for this context.
    double lambda_value(std::size_t k, std::span<const EventId> context) const;
    std::uint64_t prefix_count(std::size_t k, std::span<const EventId> context) const;

    std::size_t order() const { return order_; }
    const std::vector<EventId>& event_space() const { return event_space_; }
    bool heldout_estimated() const { return heldout_estimated_; }
    const InterpolationOptions& options() const { return options_; }
    /// Bucket lambdas for order k, indexed by bucket.
    const std::vector<double>& bucket_lambdas(std::size_t k) const { return lambdas_.at(k); }

    /// Copy with every lambda forced to `value` (including the unseen bucket).
    InterpolatedModel with_constant_lambda(double value) const;

    void write(std::ostream& out) const;
    static InterpolatedModel read(std::istream& in);

private:
    static constexpr std::uint32_t kNoNode = 0xffffffffu;

    static std::uint64_t pack(std::uint32_t hi, std::uint32_t lo) {
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }
    std::uint32_t child(std::uint32_t node, EventId event) const;
    /// nodes[k] is the trie node of the order-k prefix, or kNoNode.
    void walk(std::span<const EventId> context, std::vector<std::uint32_t>& nodes) const;
    double joint(std::uint32_t node, EventId outcome) const;
    double value_at(EventId outcome, const std::vector<std::uint32_t>& nodes, std::size_t k) const;
    double fixed_lambda(std::size_t bucket) const;
    void check_context(std::span<const EventId> context) const;

    std::size_t order_ = 0;
    InterpolationOptions options_;
    bool heldout_estimated_ = false;

    // Prefix trie over contexts; node 0 is the empty prefix.
    std::vector<std::uint64_t> node_count_;
    std::vector<std::uint32_t> node_parent_;
    std::vector<EventId> node_event_;
    std::unordered_map<std::uint64_t, std::uint32_t> children_;
    std::unordered_map<std::uint64_t, std::uint64_t> joint_counts_;  // (node, outcome)

    std::vector<EventId> event_space_;  // sorted
    std::unordered_map<EventId, std::uint64_t> unigram_;
    std::vector<std::vector<double>> lambdas_;  // [order][bucket]; index 0 unused
};

}  // namespace effparse
