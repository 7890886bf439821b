#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "osdg/corpus.hpp"
#include "osdg/sdg.hpp"
#include "osdg/util.hpp"

namespace osdg {

inline constexpr std::size_t kVoteCap = 9;
inline constexpr std::size_t kSessionSize = 100;
inline constexpr std::size_t kStopPointInterval = 20;
inline constexpr std::size_t kIntroSize = 10;
inline constexpr std::size_t kMinExportValidators = 3;

enum class Decision { Accept, Reject };

std::string_view to_string(Decision d);
Decision parse_decision(std::string_view text);

struct LabelTask {
  std::string task_id;
  std::string snippet;
  SdgId candidate_sdg{1};
  std::optional<std::string> source_ref;
};

struct Tally {
  std::size_t accepts = 0;
  std::size_t rejects = 0;
  std::size_t total() const { return accepts + rejects; }
  friend bool operator==(const Tally&, const Tally&) = default;
};

struct SessionMode {
  enum class Kind { Intro, SingleSdg, Mixed };
  Kind kind = Kind::Mixed;
  std::optional<SdgId> sdg;  // SingleSdg only

  static SessionMode intro() { return {Kind::Intro, std::nullopt}; }
  static SessionMode mixed() { return {Kind::Mixed, std::nullopt}; }
  static SessionMode single(SdgId sdg) { return {Kind::SingleSdg, sdg}; }
};

struct Session {
  std::string session_id;
  std::string volunteer_id;
  SessionMode mode;
  std::vector<std::string> task_ids;
  std::size_t cursor = 0;  // votes recorded so far
  std::optional<std::string> completed_at;

  bool complete() const { return cursor >= task_ids.size(); }
};

struct NextTask {
  bool complete = false;
  std::optional<LabelTask> task;
  std::size_t position = 0;  // 1-based
  std::size_t session_size = 0;
  bool is_stop_point = false;  // a block of 20 has just been finished
};

// Stop points sit at the multiples of 20 strictly inside the session.
bool is_stop_point(std::size_t completed, std::size_t session_size);

struct VoteOutcome {
  Tally tally;
  std::size_t cursor = 0;
  bool session_complete = false;
};

struct IntroStat {
  std::string task_id;
  Decision my_decision = Decision::Accept;
  std::size_t accepts = 0;
  std::size_t votes = 0;
  double community_accept_fraction = 0;
};

struct CommunityOptions {
  std::uint64_t seed = 42;
  std::size_t session_size = kSessionSize;
  bool sync = true;  // fsync every append
};

// File-backed store for the labeling exercise. Layout of the store directory:
//   tasks.csv          snippet pool (OSDG-CD columns, counts zeroed)
//   intro.json         {"intro_task_ids": [10 ids]}
//   votes.jsonl        public vote log, one JSON object per vote
//   intro_votes.jsonl  introductory-exercise votes (never exported)
//   sessions.jsonl     session open/substitute events
//   tallies.json       derived snapshot, rewritten by write_snapshot()
// The logs are the source of truth: reopening a store replays them.
// All operations are serialized by one mutex, which also makes the
// vote-cap check and the append a single atomic step.
class CommunityStore {
 public:
  // Writes tasks.csv and intro.json into `dir`. SDG 17 snippets are dropped
  // unless `include_sdg17`. Throws if `intro_task_ids` is not 10 pool ids.
  static void initialize(const std::filesystem::path& dir, const Corpus& pool,
                         const std::vector<std::string>& intro_task_ids, bool include_sdg17 = false);

  explicit CommunityStore(std::filesystem::path dir, CommunityOptions options = {});
  ~CommunityStore();

  // Resumes the volunteer's intro session when one exists.
  Session start_intro(const std::string& volunteer_id);
  std::vector<IntroStat> intro_stats(const std::string& volunteer_id) const;

  Session start_session(const std::string& volunteer_id, const SessionMode& mode);
  NextTask next_task(const std::string& session_id) const;
  // The vote must target the session's current task. If that task reached the
  // vote cap meanwhile it is replaced (or dropped when nothing is eligible)
  // and Error{TaskRetired} is thrown.
  VoteOutcome record_vote(const std::string& session_id, const std::string& task_id, Decision decision);

  // Session-free atomic check-and-append. Throws Error{VoteCapReached},
  // Error{DuplicateVote} or Error{UnknownTask}.
  Tally cast_vote(const std::string& volunteer_id, const std::string& task_id, Decision decision);

  Session session(const std::string& session_id) const;
  std::optional<std::string> open_session(const std::string& volunteer_id) const;
  bool onboarded(const std::string& volunteer_id) const;
  Tally tally(const std::string& task_id) const;
  std::map<std::string, Tally> tallies() const;
  std::size_t task_count() const;
  const std::vector<std::string>& intro_task_ids() const { return intro_ids_; }

  // Tasks with at least `min_validators` public votes, ordered by task_id.
  Corpus export_dataset(std::size_t min_validators = kMinExportValidators) const;
  void write_snapshot() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct TaskState {
    LabelTask task;
    Tally tally;
    std::set<std::string> voters;
  };
  struct VolunteerState {
    std::set<std::string> voted;
    std::optional<std::string> intro_session;
    std::optional<std::string> current_session;
    std::map<std::string, Decision> intro_decisions;
    bool onboarded = false;
  };

  VolunteerState& volunteer(const std::string& id);
  bool eligible(const TaskState& t, const VolunteerState& v, const SessionMode& mode) const;
  Session& session_ref(const std::string& session_id);
  const Session& session_ref(const std::string& session_id) const;
  std::string new_session_id();
  void log_session_open(const Session& s);
  void apply_vote(const std::string& volunteer_id, TaskState& task, Decision decision,
                  const std::string& session_id);
  void replay();

  std::filesystem::path dir_;
  CommunityOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, TaskState> tasks_;
  std::set<std::string> intro_set_;
  std::vector<std::string> intro_ids_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> intro_counts_;  // accepts, votes
  std::unordered_map<std::string, VolunteerState> volunteers_;
  std::map<std::string, Session> sessions_;
  std::uint64_t session_counter_ = 0;
  std::uint64_t vote_seq_ = 0;
  std::unique_ptr<AppendLog> votes_log_;
  std::unique_ptr<AppendLog> intro_log_;
  std::unique_ptr<AppendLog> sessions_log_;
};

// Rebuilds public tallies from the vote log alone.
std::map<std::string, Tally> replay_tallies(const std::filesystem::path& dir);

}  // namespace osdg
