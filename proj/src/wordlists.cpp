#include "wordlists.hpp"

#include <map>
#include <mutex>

#include "realcred/error.hpp"

namespace realcred::detail {

const std::vector<std::string>& wordlist(std::string_view name) {
  static std::mutex mu;
  static std::map<std::string, std::vector<std::string>, std::less<>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  const auto text = wordlist_text(name);
  if (text.empty()) throw Error(Errc::InvalidArgument, "no bundled word list '" + std::string(name) + "'");
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.emplace_back(line);
    pos = end + 1;
  }
  return cache.emplace(std::string(name), std::move(lines)).first->second;
}

}  // namespace realcred::detail
