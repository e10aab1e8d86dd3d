#include "gravnet/core/region.hpp"

#include <cctype>

#include "gravnet/core/errors.hpp"

namespace gravnet {

namespace {

bool is_upper_alpha(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

RegionId::RegionId(std::string code) : code_(std::move(code)) {
  if (!is_valid(code_)) {
    throw ValidationError("malformed region code '" + code_ +
                          "' (expected 2-5 uppercase alphanumerics with an "
                          "alphabetic country prefix)");
  }
}

bool RegionId::is_valid(std::string_view code) noexcept {
  if (code.size() < 2 || code.size() > 5) return false;
  if (!is_upper_alpha(code[0]) || !is_upper_alpha(code[1])) return false;
  for (char c : code) {
    if (!is_upper_alpha(c) && !is_digit(c)) return false;
  }
  return true;
}

bool RegionId::is_placeholder() const noexcept {
  return code_.find("XX") != std::string::npos ||
         code_.find("ZZ") != std::string::npos;
}

CountryId country_of(const RegionId& r) { return r.country(); }

CountryId country_of(std::string_view code) {
  return RegionId(std::string(code)).country();
}

}  // namespace gravnet
