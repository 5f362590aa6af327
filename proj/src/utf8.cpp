#include "mtsmt/utf8.hpp"

#include <algorithm>

namespace mtsmt::utf8 {

std::vector<char32_t> decode(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto bad = [&](const char* what) -> EncodingError {
    return EncodingError(std::string("invalid UTF-8 (") + what + ") at byte " +
                             std::to_string(i),
                         i);
  };
  while (i < text.size()) {
    unsigned char b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      throw bad("stray continuation or invalid lead byte");
    }
    if (i + len > text.size()) throw bad("truncated sequence");
    for (int k = 1; k < len; ++k) {
      unsigned char bk = static_cast<unsigned char>(text[i + k]);
      if ((bk & 0xC0) != 0x80) throw bad("missing continuation byte");
      cp = (cp << 6) | (bk & 0x3F);
    }
    static const char32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinByLen[len]) throw bad("overlong encoding");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      throw bad("code point out of range");
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x00A0:  // no-break space
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

namespace {

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

// Blocks treated as punctuation/symbols above ASCII.
bool is_nonascii_punct(char32_t cp) {
  if (in(cp, 0x00A1, 0x00BF) && cp != 0x00AA && cp != 0x00B5 && cp != 0x00BA)
    return true;
  if (cp == 0x00D7 || cp == 0x00F7) return true;
  if (in(cp, 0x2010, 0x205E)) return true;   // general punctuation
  if (in(cp, 0x2070, 0x209F)) return true;   // super/subscripts
  if (in(cp, 0x20A0, 0x20CF)) return true;   // currency
  if (in(cp, 0x2100, 0x2BFF)) return true;   // letterlike, arrows, math, box
  if (in(cp, 0x3001, 0x303F)) return true;   // CJK punctuation
  if (in(cp, 0xFE30, 0xFE6F)) return true;
  return false;
}

}  // namespace

bool is_word_char(char32_t cp) {
  if (cp < 0x80)
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') ||
           is_ascii_digit(cp);
  if (is_space(cp)) return false;
  return !is_nonascii_punct(cp);
}

bool is_punct_or_symbol(char32_t cp) {
  return !is_word_char(cp) && !is_space(cp);
}

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  // Latin-1 supplement.
  if (in(cp, 0x00C0, 0x00DE) && cp != 0x00D7) return cp + 0x20;
  // Latin Extended-A: cased pairs alternate.
  if (cp == 0x0130) return U'i';    // I with dot above
  if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
  if ((in(cp, 0x0100, 0x0137) || in(cp, 0x014A, 0x0177)) && cp % 2 == 0)
    return cp + 1;
  if ((in(cp, 0x0139, 0x0148) || in(cp, 0x0179, 0x017E)) && cp % 2 == 1)
    return cp + 1;
  // Greek.
  if (cp == 0x0386) return 0x03AC;
  if (in(cp, 0x0388, 0x038A)) return cp + 0x25;
  if (cp == 0x038C) return 0x03CC;
  if (cp == 0x038E || cp == 0x038F) return cp + 0x3F;
  if (in(cp, 0x0391, 0x03A9) && cp != 0x03A2) return cp + 0x20;
  // Cyrillic.
  if (in(cp, 0x0410, 0x042F)) return cp + 0x20;
  if (in(cp, 0x0400, 0x040F)) return cp + 0x50;
  return cp;
}

std::string lower_copy(std::string_view utf8_text) {
  std::vector<char32_t> cps = decode(utf8_text);
  for (char32_t& cp : cps) cp = to_lower(cp);
  return encode(cps);
}

Script script_of(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return Script::Latin;
  if (cp < 0x80) return Script::Common;
  if (is_space(cp) || is_nonascii_punct(cp)) return Script::Common;
  if (in(cp, 0x00C0, 0x024F) || cp == 0x00AA || cp == 0x00BA ||
      in(cp, 0x1E00, 0x1EFF))
    return Script::Latin;
  if (in(cp, 0x0370, 0x03FF) || in(cp, 0x1F00, 0x1FFF)) return Script::Greek;
  if (in(cp, 0x0400, 0x052F)) return Script::Cyrillic;
  return Script::Other;
}

Script script_from_name(const std::string& name) {
  if (name == "latin") return Script::Latin;
  if (name == "cyrillic") return Script::Cyrillic;
  if (name == "greek") return Script::Greek;
  throw Error("unknown script name: " + name +
              " (expected latin, cyrillic or greek)");
}

std::size_t length(std::string_view utf8_text) {
  std::size_t n = 0;
  for (char c : utf8_text)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace mtsmt::utf8
