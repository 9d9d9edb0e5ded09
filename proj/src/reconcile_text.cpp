// Normalization, similarity measures and domain validators.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

#include "realcred/error.hpp"
#include "realcred/reconcile.hpp"
#include "realcred/text.hpp"

namespace realcred {

namespace {

constexpr std::u32string_view kTolerantPunct = U".,;:-/";

bool is_alnum(char32_t cp) { return text::is_ascii_digit(cp) || text::is_letter(cp); }

std::u32string fold_and_strip(std::u32string_view s) {
  return text::strip_diacritics(text::casefold(text::strip_diacritics(s)));
}

std::u32string join_tokens(const std::vector<std::u32string>& tokens) {
  std::u32string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(U' ');
    out += tokens[i];
  }
  return out;
}

std::u32string tolerant(std::u32string_view s) {
  std::u32string folded = fold_and_strip(s);
  std::u32string kept;
  kept.reserve(folded.size());
  for (char32_t cp : folded) {
    if (kTolerantPunct.find(cp) == std::u32string_view::npos) kept.push_back(cp);
  }
  return join_tokens(text::split_whitespace(kept));
}

const std::unordered_map<std::u32string, std::u32string>& abbreviations() {
  static const std::unordered_map<std::u32string, std::u32string> table = {
      {U"r.", U"rua"},     {U"av.", U"avenida"}, {U"lg.", U"largo"},  {U"nº", U"numero"},
      {U"no.", U"numero"}, {U"n.º", U"numero"}, {U"dr.", U"doutor"}, {U"sto.", U"santo"},
      {U"sta.", U"santa"},
  };
  return table;
}

std::u32string super_tolerant(std::u32string_view s) {
  auto tokens = text::split_whitespace(fold_and_strip(s));
  for (auto& tok : tokens) {
    while (!tok.empty() && (tok.back() == U',' || tok.back() == U';' || tok.back() == U':')) tok.pop_back();
    if (auto it = abbreviations().find(tok); it != abbreviations().end()) tok = it->second;
  }
  std::u32string removed;
  for (char32_t cp : tolerant(join_tokens(tokens))) {
    if (is_alnum(cp) || text::is_space(cp)) removed.push_back(cp);
  }
  auto parts = text::split_whitespace(removed);
  for (auto& p : parts) {
    if (std::all_of(p.begin(), p.end(), text::is_ascii_digit)) {
      auto nz = p.find_first_not_of(U'0');
      p = nz == std::u32string::npos ? std::u32string(U"0") : p.substr(nz);
    }
  }
  return join_tokens(parts);
}

std::set<std::u32string> grams(const std::u32string& s, int n) {
  std::set<std::u32string> out;
  if (s.empty()) return out;
  const auto un = static_cast<std::size_t>(n);
  if (s.size() < un) {
    out.insert(s);
    return out;
  }
  for (std::size_t i = 0; i + un <= s.size(); ++i) out.insert(s.substr(i, un));
  return out;
}

template <class Set>
double jaccard(const Set& a, const Set& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

char soundex_digit(char c) {
  switch (c) {
    case 'b': case 'f': case 'p': case 'v': return '1';
    case 'c': case 'g': case 'j': case 'k': case 'q': case 's': case 'x': case 'z': return '2';
    case 'd': case 't': return '3';
    case 'l': return '4';
    case 'm': case 'n': return '5';
    case 'r': return '6';
    default: return 0;
  }
}

// Soundex over ASCII letters of an already-normalized token; empty if none.
std::string soundex_token(std::u32string_view tok) {
  std::string letters;
  for (char32_t cp : tok) {
    if (cp >= U'a' && cp <= U'z') letters.push_back(static_cast<char>(cp));
  }
  if (letters.empty()) return {};
  std::string code(1, static_cast<char>(letters[0] - 'a' + 'A'));
  char last = soundex_digit(letters[0]);
  for (std::size_t i = 1; i < letters.size() && code.size() < 4; ++i) {
    const char c = letters[i];
    const char d = soundex_digit(c);
    if (d) {
      if (d != last) code.push_back(d);
      last = d;
    } else if (c != 'h' && c != 'w') {
      last = 0;
    }
  }
  code.resize(4, '0');
  return code;
}

}  // namespace

std::string_view to_string(MatchMode mode) noexcept {
  switch (mode) {
    case MatchMode::Exact: return "exact";
    case MatchMode::Tolerant: return "tolerant";
    case MatchMode::SuperTolerant: return "super";
  }
  return "exact";
}

std::optional<MatchMode> parse_mode(std::string_view s) noexcept {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "exact") return MatchMode::Exact;
  if (lower == "tolerant") return MatchMode::Tolerant;
  if (lower == "super" || lower == "super-tolerant" || lower == "supertolerant" || lower == "super_tolerant") {
    return MatchMode::SuperTolerant;
  }
  return std::nullopt;
}

std::string_view to_string(MatchReason reason) noexcept {
  switch (reason) {
    case MatchReason::ExactEqual: return "ExactEqual";
    case MatchReason::NormalizedEqual: return "NormalizedEqual";
    case MatchReason::EditWithinThreshold: return "EditWithinThreshold";
    case MatchReason::DomainEqual: return "DomainEqual";
    case MatchReason::NoMatch: return "NoMatch";
  }
  return "NoMatch";
}

std::string normalize(std::string_view s, MatchMode mode) {
  switch (mode) {
    case MatchMode::Exact: return std::string(s);
    case MatchMode::Tolerant: return text::encode_utf8(tolerant(text::decode_utf8(s)));
    case MatchMode::SuperTolerant: return text::encode_utf8(super_tolerant(text::decode_utf8(s)));
  }
  return std::string(s);
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(text::decode_utf8(a), text::decode_utf8(b));
}

double ngram_jaccard(std::string_view a, std::string_view b, int n) {
  if (n < 1) throw Error(Errc::InvalidArgument, "n-gram size must be >= 1");
  return jaccard(grams(text::decode_utf8(a), n), grams(text::decode_utf8(b), n));
}

double token_jaccard(std::string_view a, std::string_view b) {
  auto ta = text::split_whitespace(tolerant(text::decode_utf8(a)));
  auto tb = text::split_whitespace(tolerant(text::decode_utf8(b)));
  return jaccard(std::set<std::u32string>(ta.begin(), ta.end()), std::set<std::u32string>(tb.begin(), tb.end()));
}

std::string phonetic_encode(std::string_view s) {
  for (const auto& tok : text::split_whitespace(tolerant(text::decode_utf8(s)))) {
    if (auto code = soundex_token(tok); !code.empty()) return code;
  }
  throw Error(Errc::NotEncodable, "no letters in '" + std::string(s) + "'");
}

std::string_view to_string(NifStatus s) noexcept {
  switch (s) {
    case NifStatus::Valid: return "valid";
    case NifStatus::Invalid: return "invalid";
    case NifStatus::Malformed: return "malformed";
  }
  return "malformed";
}

int nif_check_digit(std::string_view first_eight) {
  if (first_eight.size() != 8) throw Error(Errc::InvalidArgument, "NIF prefix must have 8 digits");
  int sum = 0;
  for (int i = 0; i < 8; ++i) {
    const char c = first_eight[static_cast<std::size_t>(i)];
    if (c < '0' || c > '9') throw Error(Errc::InvalidArgument, "NIF prefix must be digits");
    sum += (c - '0') * (9 - i);
  }
  const int check = (11 - sum % 11) % 11;
  return check == 10 ? 0 : check;
}

NifStatus validate_nif(std::string_view s) {
  if (s.size() != 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return NifStatus::Malformed;
  }
  return nif_check_digit(s.substr(0, 8)) == s[8] - '0' ? NifStatus::Valid : NifStatus::Invalid;
}

double haversine_km(GeoPoint a, GeoPoint b) {
  for (const auto& p : {a, b}) {
    if (!(p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0)) {
      throw Error(Errc::OutOfRange, "coordinate out of range");
    }
  }
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::size_t tolerant_edit_budget(std::size_t max_len) {
  return std::max<std::size_t>(1, (max_len + 9) / 10);
}

MatchVerdict field_match(std::string_view a, std::string_view b, MatchMode mode, ValueKind kind) {
  if (a == b) return {true, mode, 1.0, MatchReason::ExactEqual};

  const auto ua = text::decode_utf8(a);
  const auto ub = text::decode_utf8(b);
  auto similarity = [](std::u32string_view x, std::u32string_view y, std::size_t d) {
    const std::size_t len = std::max(x.size(), y.size());
    return len == 0 ? 1.0 : 1.0 - static_cast<double>(d) / static_cast<double>(len);
  };
  if (mode == MatchMode::Exact) return {false, mode, similarity(ua, ub, levenshtein(ua, ub)), MatchReason::NoMatch};

  const auto na = tolerant(ua);
  const auto nb = tolerant(ub);
  if (na == nb) return {true, mode, 1.0, MatchReason::NormalizedEqual};

  if (mode == MatchMode::SuperTolerant && super_tolerant(ua) == super_tolerant(ub)) {
    return {true, mode, 1.0, MatchReason::DomainEqual};
  }

  const std::size_t d = levenshtein(na, nb);
  const double score = similarity(na, nb, d);
  if (d <= tolerant_edit_budget(std::max(na.size(), nb.size()))) {
    return {true, mode, score, MatchReason::EditWithinThreshold};
  }

  if (mode == MatchMode::SuperTolerant && kind == ValueKind::PersonName) {
    const auto ta = text::split_whitespace(na);
    const auto tb = text::split_whitespace(nb);
    bool same_codes = !ta.empty() && ta.size() == tb.size();
    for (std::size_t i = 0; same_codes && i < ta.size(); ++i) {
      auto ca = soundex_token(ta[i]);
      auto cb = soundex_token(tb[i]);
      same_codes = (ca.empty() || cb.empty()) ? ta[i] == tb[i] : ca == cb;
    }
    if (same_codes && token_jaccard(a, b) >= 0.5) return {true, mode, 1.0, MatchReason::DomainEqual};
  }
  return {false, mode, score, MatchReason::NoMatch};
}

}  // namespace realcred
