#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace gravnet {

// Two-letter country prefix of a NUTS-style region code.
using CountryId = std::string;

// NUTS-style region code, e.g. "FR10". 2 to 5 uppercase alphanumeric
// characters, the first two alphabetic (the country prefix). Ordered
// lexicographically; that order is used for every deterministic tie-break
// in the library.
class RegionId {
 public:
  RegionId() = default;
  explicit RegionId(std::string code);

  // Returns false instead of throwing.
  static bool is_valid(std::string_view code) noexcept;

  const std::string& code() const noexcept { return code_; }
  CountryId country() const { return code_.substr(0, 2); }

  // A two-character code names a whole country rather than a NUTS2 region.
  bool is_country_level() const noexcept { return code_.size() == 2; }

  // Unknown ("XX") and extra-regio ("ZZ") placeholders.
  bool is_placeholder() const noexcept;

  auto operator<=>(const RegionId&) const = default;
  bool operator==(const RegionId&) const = default;

 private:
  std::string code_;
};

CountryId country_of(const RegionId& r);

// Validates `code` first; throws ValidationError when malformed.
CountryId country_of(std::string_view code);

}  // namespace gravnet

template <>
struct std::hash<gravnet::RegionId> {
  std::size_t operator()(const gravnet::RegionId& r) const noexcept {
    return std::hash<std::string>{}(r.code());
  }
};
