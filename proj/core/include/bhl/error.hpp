#pragma once

#include <stdexcept>
#include <string>

namespace bhl {

struct Span {
    int line = 0;
    int col = 0;
    bool known() const { return line > 0; }
    std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

class Error : public std::runtime_error {
public:
    enum class Kind { Syntax, Type, Eval, Budget, Proof, Io, Usage };

    Error(Kind k, const std::string& msg, Span s = {})
        : std::runtime_error(s.known() ? s.str() + ": " + msg : msg), kind_(k), span_(s) {}

    Kind kind() const { return kind_; }
    Span span() const { return span_; }

private:
    Kind kind_;
    Span span_;
};

[[noreturn]] inline void fail(Error::Kind k, const std::string& msg, Span s = {}) { throw Error(k, msg, s); }

} // namespace bhl
