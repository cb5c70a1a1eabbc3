#include "effparse/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "effparse/errors.hpp"

namespace effparse {

namespace {

thread_local ScoreProbe* active_probe = nullptr;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string_view category_name(EventCategory category) {
    switch (category) {
        case EventCategory::Tag: return "tag";
        case EventCategory::Edge: return "edge";
        case EventCategory::Lookahead: return "lookahead";
        case EventCategory::Expansion: return "expansion";
        case EventCategory::ConstituentHead: return "constituent-head";
        case EventCategory::Other: return "other";
    }
    return "other";
}

std::optional<EventCategory> parse_category(std::string_view name) {
    for (EventCategory c : kAllEventCategories) {
        if (category_name(c) == name) return c;
    }
    return std::nullopt;
}

void EventCounter::record(EventCategory category, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("EventCounter::record: n must be positive");
    counts_[static_cast<std::size_t>(category)] += n;
}

std::uint64_t EventCounter::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

EventCounter& EventCounter::merge_in(const EventCounter& other) {
    for (std::size_t i = 0; i < kEventCategoryCount; ++i) counts_[i] += other.counts_[i];
    wall_seconds_ += other.wall_seconds_;
    sentences_ += other.sentences_;
    return *this;
}

EventCounter merge(const EventCounter& a, const EventCounter& b) {
    EventCounter out = a;
    out.merge_in(b);
    return out;
}

std::string EventCounter::dump() const {
    std::ostringstream os;
    for (EventCategory c : kAllEventCategories) os << category_name(c) << '=' << count(c) << '\n';
    os << "total=" << total() << '\n';
    os << "sentences=" << sentences_ << '\n';
    os << "wall_seconds=" << format_double(wall_seconds_) << '\n';
    return os.str();
}

EventCounter EventCounter::parse_dump(std::string_view text) {
    EventCounter out;
    std::istringstream is{std::string(text)};
    std::string line;
    std::uint64_t declared_total = 0;
    bool has_total = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw SerializationError("counter dump: missing '=' in: " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        try {
            if (auto c = parse_category(key)) {
                out.counts_[static_cast<std::size_t>(*c)] = std::stoull(value);
            } else if (key == "total") {
                declared_total = std::stoull(value);
                has_total = true;
            } else if (key == "sentences") {
                out.sentences_ = std::stoull(value);
            } else if (key == "wall_seconds") {
                out.wall_seconds_ = std::stod(value);
            } else {
                throw SerializationError("counter dump: unknown key " + key);
            }
        } catch (const std::logic_error&) {
            throw SerializationError("counter dump: bad value in: " + line);
        }
    }
    if (has_total && declared_total != out.total())
        throw SerializationError("counter dump: total does not match category sum");
    return out;
}

ScopedScoreProbe::ScopedScoreProbe(ScoreProbe& probe) : previous_(active_probe) {
    active_probe = &probe;
}

ScopedScoreProbe::~ScopedScoreProbe() { active_probe = previous_; }

void notify_score(EventCategory category) {
    if (active_probe) active_probe->on_score(category);
}

std::uint64_t ShadowCounter::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

FitResult linear_fit(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw DegenerateFitError("linear_fit: need at least two points");
    const double n = static_cast<double>(points.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if (sxx == 0.0) throw DegenerateFitError("linear_fit: x values are constant");
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    if (syy == 0.0) {
        fit.r_squared = 1.0;
    } else {
        double ss_res = 0.0;
        for (const auto& [x, y] : points) {
            double r = y - (fit.slope * x + fit.intercept);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

}  // namespace effparse
