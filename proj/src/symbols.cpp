#include "effparse/symbols.hpp"

namespace effparse {

SymbolId SymbolTable::intern(std::string_view name) {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    const auto id = static_cast<SymbolId>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
}

std::optional<SymbolId> SymbolTable::find(std::string_view name) const {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    return std::nullopt;
}

SymbolId SymbolTable::find_or(std::string_view name, SymbolId fallback) const {
    auto it = index_.find(name);
    return it == index_.end() ? fallback : it->second;
}

}  // namespace effparse
