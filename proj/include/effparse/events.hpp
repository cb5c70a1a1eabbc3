#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace effparse {

/// Kinds of scored objects. Totals are plain sums over categories, so any
/// regrouping of the taxonomy is lossless.
enum class EventCategory : std::uint8_t {
    Tag,              // (POS, word) pair scored
    Edge,             // chart edge figure-of-merit
    Lookahead,        // left-corner look-ahead probability
    Expansion,        // rule expansion or word generation step
    ConstituentHead,  // head POS / head word of a constituent
    Other,
};

inline constexpr std::size_t kEventCategoryCount = 6;

inline constexpr std::array<EventCategory, kEventCategoryCount> kAllEventCategories = {
    EventCategory::Tag,       EventCategory::Edge,            EventCategory::Lookahead,
    EventCategory::Expansion, EventCategory::ConstituentHead, EventCategory::Other,
};

std::string_view category_name(EventCategory category);
std::optional<EventCategory> parse_category(std::string_view name);

/// Tally of "events considered": one increment per score calculation.
///
/// Every probability or figure-of-merit evaluation in the parsers names a
/// category and routes through record(). A counter belongs to one execution
/// scope (normally one sentence) and is merged into aggregates afterwards.
class EventCounter {
public:
    /// Adds n (> 0) events of the given category.
    void record(EventCategory category, std::uint64_t n = 1);

    std::uint64_t count(EventCategory category) const {
        return counts_[static_cast<std::size_t>(category)];
    }
    std::uint64_t total() const;

    double wall_seconds() const { return wall_seconds_; }
    void add_wall_seconds(double seconds) { wall_seconds_ += seconds; }

    std::uint64_t sentences() const { return sentences_; }
    void add_sentences(std::uint64_t n) { sentences_ += n; }

    EventCounter& merge_in(const EventCounter& other);

    /// Flat key=value text, one pair per line, fixed key order.
    std::string dump() const;
    static EventCounter parse_dump(std::string_view text);

    friend bool operator==(const EventCounter&, const EventCounter&) = default;

private:
    std::array<std::uint64_t, kEventCategoryCount> counts_{};
    double wall_seconds_ = 0.0;
    std::uint64_t sentences_ = 0;
};

EventCounter merge(const EventCounter& a, const EventCounter& b);

/// Observer invoked at each scoring entry point, separately from the
/// EventCounter bookkeeping. Tests install one to cross-check the totals.
class ScoreProbe {
public:
    virtual ~ScoreProbe() = default;
    virtual void on_score(EventCategory category) = 0;
};

/// Installs a probe for the current thread for the lifetime of the object.
class ScopedScoreProbe {
public:
    explicit ScopedScoreProbe(ScoreProbe& probe);
    ~ScopedScoreProbe();
    ScopedScoreProbe(const ScopedScoreProbe&) = delete;
    ScopedScoreProbe& operator=(const ScopedScoreProbe&) = delete;

private:
    ScoreProbe* previous_;
};

/// Called by scoring entry points; no-op unless a probe is installed.
void notify_score(EventCategory category);

/// Probe that keeps its own per-category tallies.
class ShadowCounter : public ScoreProbe {
public:
    void on_score(EventCategory category) override { ++counts_[static_cast<std::size_t>(category)]; }
    std::uint64_t count(EventCategory category) const {
        return counts_[static_cast<std::size_t>(category)];
    }
    std::uint64_t total() const;

private:
    std::array<std::uint64_t, kEventCategoryCount> counts_{};
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
/// Throws DegenerateFitError for fewer than two points or constant x.
FitResult linear_fit(std::span<const std::pair<double, double>> points);

}  // namespace effparse
