#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace effparse {

using SymbolId = std::uint32_t;

/// Interns strings to dense ids in first-seen order.
class SymbolTable {
public:
    SymbolId intern(std::string_view name);
    std::optional<SymbolId> find(std::string_view name) const;
    SymbolId find_or(std::string_view name, SymbolId fallback) const;
    const std::string& name(SymbolId id) const { return names_.at(id); }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    friend bool operator==(const SymbolTable& a, const SymbolTable& b) { return a.names_ == b.names_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };
    std::vector<std::string> names_;
    std::unordered_map<std::string, SymbolId, Hash, std::equal_to<>> index_;
};

}  // namespace effparse
