#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace glead {

// Violated operation precondition or shape contract.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent configuration (bad key, unsupported resolution, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss during training. Carries the path of the diagnostic snapshot
// written before aborting, when one could be produced.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg, std::string snapshot = {})
        : std::runtime_error(msg), snapshot_path(std::move(snapshot)) {}
    std::string snapshot_path;
};

namespace detail {
inline void format_into(std::ostringstream&) {}
template <typename A, typename... R>
void format_into(std::ostringstream& os, const A& a, const R&... rest) {
    os << a;
    format_into(os, rest...);
}
}  // namespace detail

template <typename... A>
std::string cat(const A&... args) {
    std::ostringstream os;
    detail::format_into(os, args...);
    return os.str();
}

template <typename... A>
void check_contract(bool ok, const A&... msg) {
    if (!ok) throw ContractError(cat(msg...));
}

template <typename... A>
void check_config(bool ok, const A&... msg) {
    if (!ok) throw ConfigError(cat(msg...));
}

}  // namespace glead
