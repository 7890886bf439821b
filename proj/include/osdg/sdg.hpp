#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace osdg {

// One of the 17 Sustainable Development Goals. Goal 17 parses but is not part
// of the trainable label space.
class SdgId {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 17;
  static constexpr int kTrainable = 16;

  // Throws Error{InvalidSdg} outside 1..17.
  explicit SdgId(int value);

  static std::optional<SdgId> try_make(int value);
  // Parses a decimal integer; throws Error{InvalidSdg} on anything else.
  static SdgId parse(std::string_view text);

  int value() const { return value_; }
  bool excluded_from_training() const { return value_ == 17; }

  friend auto operator<=>(SdgId, SdgId) = default;

 private:
  int value_;
};

// SDGs 1..16, the label space of the one-vs-rest models.
std::array<SdgId, SdgId::kTrainable> trainable_sdgs();

enum class LanguageCode { en, ar, da, nl, fi, fr, de, it, ko, pl, pt, ru, es, sv, tr };

inline constexpr std::array<LanguageCode, 15> kSupportedLanguages = {
    LanguageCode::en, LanguageCode::ar, LanguageCode::da, LanguageCode::nl,
    LanguageCode::fi, LanguageCode::fr, LanguageCode::de, LanguageCode::it,
    LanguageCode::ko, LanguageCode::pl, LanguageCode::pt, LanguageCode::ru,
    LanguageCode::es, LanguageCode::sv, LanguageCode::tr};

std::string_view to_string(LanguageCode code);
// Throws Error{UnsupportedLanguage} for anything outside the supported set.
LanguageCode parse_language(std::string_view code);

}  // namespace osdg
