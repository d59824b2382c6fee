#pragma once

#include "bhl/error.hpp"

#include <string>
#include <vector>

namespace bhl::detail {

struct Token {
    enum class Kind { Ident, Int, Real, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    double num = 0.0;
    long long inum = 0;
    Span span;
};

std::vector<Token> tokenize(const std::string& src);

} // namespace bhl::detail
