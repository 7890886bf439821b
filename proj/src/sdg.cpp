#include "osdg/sdg.hpp"

#include <charconv>

#include "osdg/error.hpp"

namespace osdg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidSdg: return "InvalidSdg";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::AgreementMismatch: return "AgreementMismatch";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::DuplicateRow: return "DuplicateRow";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::TooSmallToStratify: return "TooSmallToStratify";
    case ErrorCode::EmptyTerm: return "EmptyTerm";
    case ErrorCode::TermTooLong: return "TermTooLong";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::NoNegatives: return "NoNegatives";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::Corrupt: return "Corrupt";
    case ErrorCode::UnsupportedLanguage: return "UnsupportedLanguage";
    case ErrorCode::TranslatorFailure: return "TranslatorFailure";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::EmptySuggestion: return "EmptySuggestion";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::UnknownVolunteer: return "UnknownVolunteer";
    case ErrorCode::AlreadyOnboarded: return "AlreadyOnboarded";
    case ErrorCode::NotOnboarded: return "NotOnboarded";
    case ErrorCode::IntroIncomplete: return "IntroIncomplete";
    case ErrorCode::OpenSessionExists: return "OpenSessionExists";
    case ErrorCode::NoEligibleTasks: return "NoEligibleTasks";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::SessionComplete: return "SessionComplete";
    case ErrorCode::OutOfOrderTask: return "OutOfOrderTask";
    case ErrorCode::DuplicateVote: return "DuplicateVote";
    case ErrorCode::VoteCapReached: return "VoteCapReached";
    case ErrorCode::TaskRetired: return "TaskRetired";
    case ErrorCode::NoExtractor: return "NoExtractor";
    case ErrorCode::ExtractorFailed: return "ExtractorFailed";
    case ErrorCode::UnsupportedMediaType: return "UnsupportedMediaType";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

SdgId::SdgId(int value) : value_(value) {
  if (value < kMin || value > kMax)
    throw Error(ErrorCode::InvalidSdg, "SDG out of range 1..17: " + std::to_string(value));
}

std::optional<SdgId> SdgId::try_make(int value) {
  if (value < kMin || value > kMax) return std::nullopt;
  return SdgId(value);
}

SdgId SdgId::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorCode::InvalidSdg, "not an SDG number: '" + std::string(text) + "'");
  return SdgId(value);
}

std::array<SdgId, SdgId::kTrainable> trainable_sdgs() {
  return {SdgId(1), SdgId(2),  SdgId(3),  SdgId(4),  SdgId(5),  SdgId(6),
          SdgId(7), SdgId(8),  SdgId(9),  SdgId(10), SdgId(11), SdgId(12),
          SdgId(13), SdgId(14), SdgId(15), SdgId(16)};
}

std::string_view to_string(LanguageCode code) {
  switch (code) {
    case LanguageCode::en: return "en";
    case LanguageCode::ar: return "ar";
    case LanguageCode::da: return "da";
    case LanguageCode::nl: return "nl";
    case LanguageCode::fi: return "fi";
    case LanguageCode::fr: return "fr";
    case LanguageCode::de: return "de";
    case LanguageCode::it: return "it";
    case LanguageCode::ko: return "ko";
    case LanguageCode::pl: return "pl";
    case LanguageCode::pt: return "pt";
    case LanguageCode::ru: return "ru";
    case LanguageCode::es: return "es";
    case LanguageCode::sv: return "sv";
    case LanguageCode::tr: return "tr";
  }
  return "?";
}

LanguageCode parse_language(std::string_view code) {
  for (LanguageCode lang : kSupportedLanguages)
    if (to_string(lang) == code) return lang;
  throw Error(ErrorCode::UnsupportedLanguage, "unsupported language: '" + std::string(code) + "'");
}

}  // namespace osdg
