#pragma once

// Shared argument handling for the command-line tools.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "realcred/doc_model.hpp"
#include "realcred/error.hpp"
#include "realcred/reconcile.hpp"
#include "realcred/synthgen.hpp"

namespace realcred::tools {

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, path + " is not valid JSON");
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error(Errc::IoFailure, "cannot write " + path);
}

/// "default" and "identity" name the built-in profiles; anything else is a
/// JSON file with the NoiseProfile fields.
inline NoiseProfile load_profile(const std::string& arg) {
  if (arg == "default") return NoiseProfile::paper_like();
  if (arg == "identity") return NoiseProfile::identity();
  auto p = profile_from_json(read_json_file(arg));
  p.validate();
  return p;
}

/// One kind, a comma list, or "all".
inline std::vector<DocumentKind> parse_kinds(const std::string& arg) {
  if (arg == "all") return {std::begin(kAllKinds), std::end(kAllKinds)};
  std::vector<DocumentKind> out;
  std::size_t start = 0;
  while (start <= arg.size()) {
    const auto comma = arg.find(',', start);
    const auto item = arg.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    auto k = parse_kind(item);
    if (!k) throw Error(Errc::InvalidArgument, "unknown kind '" + item + "'");
    out.push_back(*k);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<MatchMode> parse_modes(const std::string& arg) {
  std::vector<MatchMode> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = arg.find(',', start);
    const auto item = arg.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    auto m = parse_mode(item);
    if (!m) throw Error(Errc::InvalidArgument, "unknown mode '" + item + "'");
    out.push_back(*m);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline int report_error(const char* tool, const Error& e) {
  std::fprintf(stderr, "%s: %s: %s\n", tool, std::string(to_string(e.code())).c_str(), e.detail().c_str());
  return 1;
}

}  // namespace realcred::tools
