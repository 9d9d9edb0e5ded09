#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace realcred::detail {

// Defined in the build-generated wordlists_data.cpp (data/wordlists/*.txt).
std::string_view wordlist_text(std::string_view name);

/// Non-empty lines of a bundled word list.
const std::vector<std::string>& wordlist(std::string_view name);

}  // namespace realcred::detail
