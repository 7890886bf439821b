#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace osdg {

// Machine-readable failure classes. The names double as the `code` field of
// service error bodies, so renaming one is an API change.
enum class ErrorCode {
  InvalidArgument,
  MissingFile,
  MalformedHeader,
  ParseError,
  InvalidSdg,
  EmptyText,
  AgreementMismatch,
  InvalidCounts,
  DuplicateRow,
  EmptyCorpus,
  TooSmallToStratify,
  EmptyTerm,
  TermTooLong,
  NoPositives,
  NoNegatives,
  Divergence,
  UnsupportedVersion,
  Corrupt,
  UnsupportedLanguage,
  TranslatorFailure,
  MalformedResponse,
  EmptyDocument,
  EmptySuggestion,
  StorageFailure,
  UnknownVolunteer,
  AlreadyOnboarded,
  NotOnboarded,
  IntroIncomplete,
  OpenSessionExists,
  NoEligibleTasks,
  UnknownSession,
  UnknownTask,
  SessionComplete,
  OutOfOrderTask,
  DuplicateVote,
  VoteCapReached,
  TaskRetired,
  NoExtractor,
  ExtractorFailed,
  UnsupportedMediaType,
  PayloadTooLarge,
  NotFound,
  Config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view code_name() const { return to_string(code_); }

 private:
  ErrorCode code_;
};

}  // namespace osdg
