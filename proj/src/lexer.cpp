#include "lexer.hpp"

#include <cctype>

#include "pullproto/events.hpp"

namespace pullproto::detail {

const char* describe(Tok t)
{
    switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::colon: return "':'";
    case Tok::assign: return "':='";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::comma: return "','";
    case Tok::underscore: return "'_'";
    case Tok::prime: return "'''";
    case Tok::amp: return "'&'";
    case Tok::bar: return "'|'";
    case Tok::bang: return "'!'";
    case Tok::arrow: return "'->'";
    case Tok::implies: return "'=>'";
    case Tok::rev_arrow: return "'<='";
    case Tok::le: return "'=<'";
    case Tok::lt: return "'<'";
    case Tok::gt: return "'>'";
    case Tok::ge: return "'>='";
    case Tok::eq: return "'='";
    case Tok::ne: return "'!='";
    case Tok::plus: return "'+'";
    case Tok::minus: return "'-'";
    case Tok::dot: return "'.'";
    case Tok::newline: return "end of line";
    case Tok::end: return "end of input";
    }
    return "?";
}

std::vector<Token> tokenize(std::string_view src)
{
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;

    auto push = [&](Tok k, std::size_t len) {
        out.push_back(Token{k, std::string(src.substr(i, len)), line, col, i});
        i += len;
        col += static_cast<int>(len);
    };

    while (i < src.size()) {
        char c = src[i];
        char next = i + 1 < src.size() ? src[i + 1] : '\0';
        if (c == '\n') {
            push(Tok::newline, 1);
            ++line;
            col = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++col;
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') {
                ++i;
                ++col;
            }
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t len = 1;
            while (i + len < src.size() && std::isalnum(static_cast<unsigned char>(src[i + len]))) ++len;
            push(Tok::ident, len);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t len = 1;
            while (i + len < src.size() && std::isdigit(static_cast<unsigned char>(src[i + len]))) ++len;
            push(Tok::number, len);
            continue;
        }
        switch (c) {
        case ':': next == '=' ? push(Tok::assign, 2) : push(Tok::colon, 1); continue;
        case '[': push(Tok::lbracket, 1); continue;
        case ']': push(Tok::rbracket, 1); continue;
        case '(': push(Tok::lparen, 1); continue;
        case ')': push(Tok::rparen, 1); continue;
        case '{': push(Tok::lbrace, 1); continue;
        case '}': push(Tok::rbrace, 1); continue;
        case ',': push(Tok::comma, 1); continue;
        case '_': push(Tok::underscore, 1); continue;
        case '\'': push(Tok::prime, 1); continue;
        case '&': push(Tok::amp, 1); continue;
        case '|': push(Tok::bar, 1); continue;
        case '.': push(Tok::dot, 1); continue;
        case '+': push(Tok::plus, 1); continue;
        case '!': next == '=' ? push(Tok::ne, 2) : push(Tok::bang, 1); continue;
        case '-': next == '>' ? push(Tok::arrow, 2) : push(Tok::minus, 1); continue;
        case '<': next == '=' ? push(Tok::rev_arrow, 2) : push(Tok::lt, 1); continue;
        case '>': next == '=' ? push(Tok::ge, 2) : push(Tok::gt, 1); continue;
        case '=':
            if (next == '>') push(Tok::implies, 2);
            else if (next == '<') push(Tok::le, 2);
            else push(Tok::eq, 1);
            continue;
        default:
            throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
        }
    }
    out.push_back(Token{Tok::end, "", line, col, src.size()});
    return out;
}

}  // namespace pullproto::detail
