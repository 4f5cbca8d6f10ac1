#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pullproto::detail {

enum class Tok {
    ident,
    number,
    colon,      // :
    assign,     // :=
    lbracket,   // [
    rbracket,   // ]
    lparen,     // (
    rparen,     // )
    lbrace,     // {
    rbrace,     // }
    comma,      // ,
    underscore, // _
    prime,      // '
    amp,        // &
    bar,        // |
    bang,       // !
    arrow,      // ->
    implies,    // =>
    rev_arrow,  // <=
    le,         // =<
    lt,         // <
    gt,         // >
    ge,         // >=
    eq,         // =
    ne,         // !=
    plus,       // +
    minus,      // -
    dot,        // .
    newline,
    end,
};

struct Token {
    Tok kind;
    std::string text;
    int line = 1;
    int column = 1;
    std::size_t offset = 0;
};

/// Splits `src` into tokens; `#` comments are dropped, newlines kept.
std::vector<Token> tokenize(std::string_view src);

const char* describe(Tok t);

}  // namespace pullproto::detail
