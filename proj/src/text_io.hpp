#pragma once

// Helpers for the line-oriented model files.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <limits>
#include <string>

#include "effparse/errors.hpp"

namespace effparse::textio {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void expect_word(std::istream& in, const std::string& want) {
    std::string got;
    if (!(in >> got) || got != want)
        throw SerializationError("model file: expected '" + want + "', found '" + got + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
    T v{};
    if (!(in >> v)) throw SerializationError(std::string("model file: cannot read ") + what);
    return v;
}

inline double read_double(std::istream& in, const char* what) {
    std::string tok = read_value<std::string>(in, what);
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::logic_error&) {
        // stod rejects "inf"/"-inf" on some libcs only when malformed; handle explicitly.
        if (tok == "-inf") return -std::numeric_limits<double>::infinity();
        if (tok == "inf") return std::numeric_limits<double>::infinity();
        throw SerializationError(std::string("model file: bad number for ") + what + ": " + tok);
    }
}

}  // namespace effparse::textio
