#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace corrbridge {

/// Character mode splits into Unicode scalar values; whitespace mode splits
/// on runs of ASCII whitespace.
enum class TokenMode { Char, Whitespace };

std::string to_string(TokenMode mode);
TokenMode parse_token_mode(std::string_view text);

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decodes UTF-8 into code points. Throws DataError on malformed input.
std::vector<char32_t> utf8_decode(std::string_view text);
std::string utf8_encode(char32_t code_point);

std::vector<std::string> tokenize(std::string_view text, TokenMode mode);
std::string detokenize(std::span<const std::string> tokens, TokenMode mode);

/// Unicode canonical composition (NFC).
std::string nfc_normalize(std::string_view text);

}  // namespace corrbridge
