#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace corepick {

// All recoverable failures (bad input files, violated contracts) throw Error.
// Messages are single-line so the CLI can emit them as machine-parseable
// "error: ..." lines.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

template <class... Parts>
std::string cat(Parts&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}

template <class... Parts>
[[noreturn]] void fail(Parts&&... parts) {
    throw Error(cat(std::forward<Parts>(parts)...));
}

} // namespace corepick
