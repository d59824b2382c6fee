#include "lexer.hpp"

#include <cctype>
#include <cstdlib>

namespace bhl::detail {

std::vector<Token> tokenize(const std::string& src) {
    static const char* puncts[] = {"<->", ":=", "!=", "<=", ">=", "->", "||", "(", ")", "{", "}", "[",
                                   "]",   ",",  ";",  ":",  "=",  "<",  ">",  "+", "-", "*", "/", ".", "$"};
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.span = {line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
                ++j;
            t.kind = Token::Kind::Ident;
            t.text = src.substr(i, j - i);
            advance(j - i);
            out.push_back(t);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            bool real = false;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.' && j + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                real = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    real = true;
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            t.text = src.substr(i, j - i);
            if (real) {
                t.kind = Token::Kind::Real;
                t.num = std::strtod(t.text.c_str(), nullptr);
            } else {
                t.kind = Token::Kind::Int;
                t.inum = std::strtoll(t.text.c_str(), nullptr, 10);
                t.num = static_cast<double>(t.inum);
            }
            advance(j - i);
            out.push_back(t);
            continue;
        }
        bool matched = false;
        for (const char* p : puncts) {
            std::string s(p);
            if (src.compare(i, s.size(), s) == 0) {
                t.kind = Token::Kind::Punct;
                t.text = s;
                advance(s.size());
                out.push_back(t);
                matched = true;
                break;
            }
        }
        if (!matched) fail(Error::Kind::Syntax, std::string("unexpected character '") + c + "'", t.span);
    }
    Token end;
    end.kind = Token::Kind::End;
    end.span = {line, col};
    out.push_back(end);
    return out;
}

} // namespace bhl::detail
