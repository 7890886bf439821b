#include "osdg/community.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "osdg/error.hpp"

namespace osdg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kTasksFile = "tasks.csv";
constexpr const char* kIntroFile = "intro.json";
constexpr const char* kVotesFile = "votes.jsonl";
constexpr const char* kIntroVotesFile = "intro_votes.jsonl";
constexpr const char* kSessionsFile = "sessions.jsonl";
constexpr const char* kSnapshotFile = "tallies.json";

std::string_view mode_name(SessionMode::Kind k) {
  switch (k) {
    case SessionMode::Kind::Intro: return "intro";
    case SessionMode::Kind::SingleSdg: return "single";
    case SessionMode::Kind::Mixed: return "mixed";
  }
  return "mixed";
}

SessionMode::Kind parse_mode(std::string_view s) {
  if (s == "intro") return SessionMode::Kind::Intro;
  if (s == "single") return SessionMode::Kind::SingleSdg;
  if (s == "mixed") return SessionMode::Kind::Mixed;
  throw Error(ErrorCode::Corrupt, "unknown session mode '" + std::string(s) + "'");
}

std::vector<json> read_records(const std::filesystem::path& path) {
  std::vector<json> out;
  for (const auto& line : read_log_lines(path)) {
    auto rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object())
      throw Error(ErrorCode::StorageFailure, "corrupt log record in " + path.string());
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::string_view to_string(Decision d) { return d == Decision::Accept ? "accept" : "reject"; }

Decision parse_decision(std::string_view text) {
  if (text == "accept") return Decision::Accept;
  if (text == "reject") return Decision::Reject;
  throw Error(ErrorCode::InvalidArgument, "decision must be 'accept' or 'reject'");
}

bool is_stop_point(std::size_t completed, std::size_t session_size) {
  return completed > 0 && completed < session_size && completed % kStopPointInterval == 0;
}

void CommunityStore::initialize(const std::filesystem::path& dir, const Corpus& pool,
                                const std::vector<std::string>& intro_task_ids, bool include_sdg17) {
  std::vector<LabeledSnippet> rows;
  std::set<std::string> ids;
  for (const auto& s : pool) {
    if (s.sdg.excluded_from_training() && !include_sdg17) continue;
    if (!ids.insert(s.text_id).second)
      throw Error(ErrorCode::DuplicateRow, "task id '" + s.text_id + "' appears twice in the pool");
    LabeledSnippet row = s;
    row.labels_positive = row.labels_negative = 0;
    row.agreement = 0;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyCorpus, "snippet pool is empty");
  if (intro_task_ids.size() != kIntroSize)
    throw Error(ErrorCode::Config, "the introductory exercise needs exactly 10 tasks");
  std::set<std::string> intro(intro_task_ids.begin(), intro_task_ids.end());
  if (intro.size() != kIntroSize) throw Error(ErrorCode::Config, "introductory task ids repeat");
  for (const auto& id : intro_task_ids)
    if (!ids.count(id)) throw Error(ErrorCode::Config, "introductory task '" + id + "' is not in the pool");

  std::filesystem::create_directories(dir);
  write_corpus(Corpus(std::move(rows)), dir / kTasksFile);
  std::ofstream out(dir / kIntroFile, std::ios::binary);
  out << ordered_json{{"intro_task_ids", intro_task_ids}}.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + (dir / kIntroFile).string());
}

CommunityStore::CommunityStore(std::filesystem::path dir, CommunityOptions options)
    : dir_(std::move(dir)), options_(options) {
  if (options_.session_size == 0) throw Error(ErrorCode::InvalidArgument, "session size must be positive");
  const Corpus pool = load_snippet_pool(dir_ / kTasksFile);
  for (const auto& s : pool) {
    TaskState t;
    t.task = {s.text_id, s.text, s.sdg, s.source_ref};
    if (!tasks_.emplace(s.text_id, std::move(t)).second)
      throw Error(ErrorCode::DuplicateRow, "task id '" + s.text_id + "' appears twice in the pool");
  }
  auto intro = json::parse(read_file(dir_ / kIntroFile), nullptr, false);
  if (intro.is_discarded() || !intro.contains("intro_task_ids") || !intro["intro_task_ids"].is_array())
    throw Error(ErrorCode::Config, "malformed " + (dir_ / kIntroFile).string());
  for (const auto& id : intro["intro_task_ids"]) {
    const auto s = id.get<std::string>();
    if (!tasks_.count(s)) throw Error(ErrorCode::Config, "introductory task '" + s + "' is not in the pool");
    intro_ids_.push_back(s);
  }
  intro_set_ = {intro_ids_.begin(), intro_ids_.end()};
  if (intro_ids_.size() != kIntroSize || intro_set_.size() != kIntroSize)
    throw Error(ErrorCode::Config, "the introductory exercise needs exactly 10 distinct tasks");

  replay();
  votes_log_ = std::make_unique<AppendLog>(dir_ / kVotesFile, options_.sync);
  intro_log_ = std::make_unique<AppendLog>(dir_ / kIntroVotesFile, options_.sync);
  sessions_log_ = std::make_unique<AppendLog>(dir_ / kSessionsFile, options_.sync);
}

CommunityStore::~CommunityStore() = default;

void CommunityStore::replay() {
  // Session events first: substitutions only touch positions at or after the
  // cursor, so counting votes afterwards reproduces the live state.
  for (const auto& rec : read_records(dir_ / kSessionsFile)) {
    const auto event = rec.value("event", "");
    const auto id = rec.at("session_id").get<std::string>();
    if (event == "open") {
      Session s;
      s.session_id = id;
      s.volunteer_id = rec.at("volunteer_id").get<std::string>();
      s.mode.kind = parse_mode(rec.at("mode").get<std::string>());
      if (!rec.at("sdg").is_null()) s.mode.sdg = SdgId(rec.at("sdg").get<int>());
      s.task_ids = rec.at("task_ids").get<std::vector<std::string>>();
      auto& v = volunteer(s.volunteer_id);
      if (s.mode.kind == SessionMode::Kind::Intro)
        v.intro_session = id;
      else
        v.current_session = id;
      sessions_[id] = std::move(s);
      ++session_counter_;
    } else if (event == "substitute") {
      auto& s = session_ref(id);
      const auto pos = rec.at("position").get<std::size_t>();
      if (pos >= s.task_ids.size()) throw Error(ErrorCode::StorageFailure, "substitution past session end");
      if (rec.at("task_id").is_null())
        s.task_ids.erase(s.task_ids.begin() + static_cast<std::ptrdiff_t>(pos));
      else
        s.task_ids[pos] = rec.at("task_id").get<std::string>();
    } else {
      throw Error(ErrorCode::StorageFailure, "unknown session event '" + event + "'");
    }
  }

  for (const auto& rec : read_records(dir_ / kVotesFile)) {
    const auto task_id = rec.at("task_id").get<std::string>();
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw Error(ErrorCode::StorageFailure, "vote for unknown task " + task_id);
    const auto volunteer_id = rec.at("volunteer_id").get<std::string>();
    const auto session_id = rec.at("session_id").is_null() ? std::string() : rec.at("session_id").get<std::string>();
    apply_vote(volunteer_id, it->second, parse_decision(rec.at("decision").get<std::string>()), session_id);
    vote_seq_ = std::max(vote_seq_, rec.at("seq").get<std::uint64_t>());
  }

  for (const auto& rec : read_records(dir_ / kIntroVotesFile)) {
    const auto task_id = rec.at("task_id").get<std::string>();
    const auto volunteer_id = rec.at("volunteer_id").get<std::string>();
    const Decision d = parse_decision(rec.at("decision").get<std::string>());
    auto& v = volunteer(volunteer_id);
    v.intro_decisions[task_id] = d;
    auto& [accepts, votes] = intro_counts_[task_id];
    accepts += d == Decision::Accept;
    ++votes;
    auto& s = session_ref(rec.at("session_id").get<std::string>());
    ++s.cursor;
    if (s.complete()) {
      v.onboarded = true;
      s.completed_at = rec.value("timestamp", "");
    }
  }
}

CommunityStore::VolunteerState& CommunityStore::volunteer(const std::string& id) {
  if (trim(id).empty()) throw Error(ErrorCode::UnknownVolunteer, "volunteer id is empty");
  return volunteers_[id];
}

Session& CommunityStore::session_ref(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + session_id + "'");
  return it->second;
}

const Session& CommunityStore::session_ref(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + session_id + "'");
  return it->second;
}

std::string CommunityStore::new_session_id() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s-%06llu", static_cast<unsigned long long>(++session_counter_));
  return buf;
}

void CommunityStore::log_session_open(const Session& s) {
  ordered_json rec{{"event", "open"},
                   {"timestamp", utc_timestamp()},
                   {"session_id", s.session_id},
                   {"volunteer_id", s.volunteer_id},
                   {"mode", mode_name(s.mode.kind)},
                   {"sdg", s.mode.sdg ? ordered_json(s.mode.sdg->value()) : ordered_json()},
                   {"task_ids", s.task_ids}};
  sessions_log_->append(rec.dump());
}

bool CommunityStore::eligible(const TaskState& t, const VolunteerState& v, const SessionMode& mode) const {
  if (t.tally.total() >= kVoteCap) return false;
  if (intro_set_.count(t.task.task_id)) return false;
  if (v.voted.count(t.task.task_id)) return false;
  if (mode.kind == SessionMode::Kind::SingleSdg && t.task.candidate_sdg != *mode.sdg) return false;
  return true;
}

void CommunityStore::apply_vote(const std::string& volunteer_id, TaskState& task, Decision decision,
                                const std::string& session_id) {
  auto& v = volunteer(volunteer_id);
  if (!task.voters.insert(volunteer_id).second)
    throw Error(ErrorCode::StorageFailure, "vote log repeats a vote by " + volunteer_id);
  v.voted.insert(task.task.task_id);
  (decision == Decision::Accept ? task.tally.accepts : task.tally.rejects) += 1;
  if (!session_id.empty()) {
    auto& s = session_ref(session_id);
    ++s.cursor;
    if (s.complete() && !s.completed_at) s.completed_at = utc_timestamp();
  }
}

Session CommunityStore::start_intro(const std::string& volunteer_id) {
  std::lock_guard lock(mu_);
  auto& v = volunteer(volunteer_id);
  if (v.onboarded) throw Error(ErrorCode::AlreadyOnboarded, volunteer_id + " has completed the introduction");
  if (v.intro_session) return session_ref(*v.intro_session);
  Session s;
  s.session_id = new_session_id();
  s.volunteer_id = volunteer_id;
  s.mode = SessionMode::intro();
  s.task_ids = intro_ids_;
  log_session_open(s);
  v.intro_session = s.session_id;
  sessions_[s.session_id] = s;
  return s;
}

std::vector<IntroStat> CommunityStore::intro_stats(const std::string& volunteer_id) const {
  std::lock_guard lock(mu_);
  auto it = volunteers_.find(volunteer_id);
  if (it == volunteers_.end()) throw Error(ErrorCode::UnknownVolunteer, "unknown volunteer '" + volunteer_id + "'");
  if (!it->second.onboarded)
    throw Error(ErrorCode::IntroIncomplete, volunteer_id + " has not finished the introduction");
  std::vector<IntroStat> stats;
  for (const auto& id : intro_ids_) {
    IntroStat st;
    st.task_id = id;
    st.my_decision = it->second.intro_decisions.at(id);
    const auto& [accepts, votes] = intro_counts_.at(id);
    st.accepts = accepts;
    st.votes = votes;
    st.community_accept_fraction = static_cast<double>(accepts) / static_cast<double>(votes);
    stats.push_back(st);
  }
  return stats;
}

Session CommunityStore::start_session(const std::string& volunteer_id, const SessionMode& mode) {
  if (mode.kind == SessionMode::Kind::Intro) return start_intro(volunteer_id);
  if (mode.kind == SessionMode::Kind::SingleSdg && !mode.sdg)
    throw Error(ErrorCode::InvalidArgument, "single-SDG sessions need an SDG");
  std::lock_guard lock(mu_);
  auto& v = volunteer(volunteer_id);
  if (!v.onboarded) throw Error(ErrorCode::NotOnboarded, volunteer_id + " must finish the introduction first");
  if (v.current_session && !session_ref(*v.current_session).complete())
    throw Error(ErrorCode::OpenSessionExists, *v.current_session);

  std::vector<std::string> candidates;
  for (const auto& [id, t] : tasks_)
    if (eligible(t, v, mode)) candidates.push_back(id);
  if (candidates.empty()) throw Error(ErrorCode::NoEligibleTasks, "no tasks are open for " + volunteer_id);

  Session s;
  s.session_id = new_session_id();
  Rng rng(options_.seed ^ (session_counter_ * 0x9E3779B97F4A7C15ULL));
  shuffle(candidates, rng);
  candidates.resize(std::min(candidates.size(), options_.session_size));
  s.volunteer_id = volunteer_id;
  s.mode = mode;
  s.task_ids = std::move(candidates);
  log_session_open(s);
  v.current_session = s.session_id;
  sessions_[s.session_id] = s;
  return s;
}

NextTask CommunityStore::next_task(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const auto& s = session_ref(session_id);
  NextTask next;
  next.session_size = s.task_ids.size();
  next.complete = s.complete();
  next.position = s.cursor + 1;
  next.is_stop_point = is_stop_point(s.cursor, s.task_ids.size());
  if (!next.complete) next.task = tasks_.at(s.task_ids[s.cursor]).task;
  return next;
}

VoteOutcome CommunityStore::record_vote(const std::string& session_id, const std::string& task_id,
                                        Decision decision) {
  std::lock_guard lock(mu_);
  auto& s = session_ref(session_id);
  auto& v = volunteer(s.volunteer_id);
  if (s.complete()) throw Error(ErrorCode::SessionComplete, "session " + session_id + " is complete");

  if (s.mode.kind == SessionMode::Kind::Intro) {
    if (v.intro_decisions.count(task_id))
      throw Error(ErrorCode::DuplicateVote, s.volunteer_id + " already voted on " + task_id);
    if (task_id != s.task_ids[s.cursor])
      throw Error(ErrorCode::OutOfOrderTask, "expected task " + s.task_ids[s.cursor]);
    const auto ts = utc_timestamp();
    ordered_json rec{{"timestamp", ts},
                     {"session_id", session_id},
                     {"volunteer_id", s.volunteer_id},
                     {"task_id", task_id},
                     {"decision", to_string(decision)}};
    intro_log_->append(rec.dump());
    v.intro_decisions[task_id] = decision;
    auto& [accepts, votes] = intro_counts_[task_id];
    accepts += decision == Decision::Accept;
    ++votes;
    ++s.cursor;
    if (s.complete()) {
      v.onboarded = true;
      s.completed_at = ts;
    }
    return {{accepts, votes - accepts}, s.cursor, s.complete()};
  }

  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw Error(ErrorCode::UnknownTask, "unknown task '" + task_id + "'");
  if (it->second.voters.count(s.volunteer_id))
    throw Error(ErrorCode::DuplicateVote, s.volunteer_id + " already voted on " + task_id);
  if (task_id != s.task_ids[s.cursor])
    throw Error(ErrorCode::OutOfOrderTask, "expected task " + s.task_ids[s.cursor]);

  if (it->second.tally.total() >= kVoteCap) {
    // Retired while the session was open: swap in the least-voted eligible
    // task not already in this session, or drop the slot.
    const std::set<std::string> in_session(s.task_ids.begin(), s.task_ids.end());
    const TaskState* best = nullptr;
    for (const auto& [id, t] : tasks_) {
      if (in_session.count(id) || !eligible(t, v, s.mode)) continue;
      if (!best || t.tally.total() < best->tally.total()) best = &t;
    }
    ordered_json rec{{"event", "substitute"},
                     {"timestamp", utc_timestamp()},
                     {"session_id", session_id},
                     {"position", s.cursor},
                     {"task_id", best ? ordered_json(best->task.task_id) : ordered_json()}};
    sessions_log_->append(rec.dump());
    if (best)
      s.task_ids[s.cursor] = best->task.task_id;
    else
      s.task_ids.erase(s.task_ids.begin() + static_cast<std::ptrdiff_t>(s.cursor));
    if (s.complete() && !s.completed_at) s.completed_at = utc_timestamp();
    throw Error(ErrorCode::TaskRetired, "task " + task_id + " reached the vote cap");
  }

  ordered_json rec{{"seq", ++vote_seq_},
                   {"timestamp", utc_timestamp()},
                   {"session_id", session_id},
                   {"volunteer_id", s.volunteer_id},
                   {"task_id", task_id},
                   {"sdg", it->second.task.candidate_sdg.value()},
                   {"decision", to_string(decision)}};
  votes_log_->append(rec.dump());
  apply_vote(s.volunteer_id, it->second, decision, session_id);
  return {it->second.tally, s.cursor, s.complete()};
}

Tally CommunityStore::cast_vote(const std::string& volunteer_id, const std::string& task_id, Decision decision) {
  std::lock_guard lock(mu_);
  volunteer(volunteer_id);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw Error(ErrorCode::UnknownTask, "unknown task '" + task_id + "'");
  if (it->second.voters.count(volunteer_id))
    throw Error(ErrorCode::DuplicateVote, volunteer_id + " already voted on " + task_id);
  if (it->second.tally.total() >= kVoteCap)
    throw Error(ErrorCode::VoteCapReached, "task " + task_id + " already has 9 votes");
  ordered_json rec{{"seq", ++vote_seq_},
                   {"timestamp", utc_timestamp()},
                   {"session_id", nullptr},
                   {"volunteer_id", volunteer_id},
                   {"task_id", task_id},
                   {"sdg", it->second.task.candidate_sdg.value()},
                   {"decision", to_string(decision)}};
  votes_log_->append(rec.dump());
  apply_vote(volunteer_id, it->second, decision, "");
  return it->second.tally;
}

Session CommunityStore::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return session_ref(session_id);
}

std::optional<std::string> CommunityStore::open_session(const std::string& volunteer_id) const {
  std::lock_guard lock(mu_);
  auto it = volunteers_.find(volunteer_id);
  if (it == volunteers_.end() || !it->second.current_session) return std::nullopt;
  if (session_ref(*it->second.current_session).complete()) return std::nullopt;
  return it->second.current_session;
}

bool CommunityStore::onboarded(const std::string& volunteer_id) const {
  std::lock_guard lock(mu_);
  auto it = volunteers_.find(volunteer_id);
  return it != volunteers_.end() && it->second.onboarded;
}

Tally CommunityStore::tally(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw Error(ErrorCode::UnknownTask, "unknown task '" + task_id + "'");
  return it->second.tally;
}

std::map<std::string, Tally> CommunityStore::tallies() const {
  std::lock_guard lock(mu_);
  std::map<std::string, Tally> out;
  for (const auto& [id, t] : tasks_)
    if (t.tally.total() > 0) out[id] = t.tally;
  return out;
}

std::size_t CommunityStore::task_count() const {
  std::lock_guard lock(mu_);
  return tasks_.size();
}

Corpus CommunityStore::export_dataset(std::size_t min_validators) const {
  if (min_validators == 0) throw Error(ErrorCode::InvalidArgument, "min_validators must be positive");
  std::lock_guard lock(mu_);
  std::vector<LabeledSnippet> rows;
  for (const auto& [id, t] : tasks_) {
    if (t.tally.total() < min_validators) continue;
    LabeledSnippet row;
    row.text_id = id;
    row.source_ref = t.task.source_ref;
    row.text = t.task.snippet;
    row.sdg = t.task.candidate_sdg;
    row.labels_positive = static_cast<long long>(t.tally.accepts);
    row.labels_negative = static_cast<long long>(t.tally.rejects);
    row.agreement = compute_agreement(row.labels_positive, row.labels_negative);
    rows.push_back(std::move(row));
  }
  return Corpus(std::move(rows));
}

void CommunityStore::write_snapshot() const {
  std::lock_guard lock(mu_);
  ordered_json tallies = ordered_json::object();
  for (const auto& [id, t] : tasks_)
    if (t.tally.total() > 0) tallies[id] = {{"accepts", t.tally.accepts}, {"rejects", t.tally.rejects}};
  ordered_json doc{{"last_seq", vote_seq_}, {"written_at", utc_timestamp()}, {"tallies", tallies}};
  const auto tmp = dir_ / (std::string(kSnapshotFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, dir_ / kSnapshotFile);
}

std::map<std::string, Tally> replay_tallies(const std::filesystem::path& dir) {
  std::map<std::string, Tally> out;
  for (const auto& rec : read_records(dir / kVotesFile)) {
    auto& t = out[rec.at("task_id").get<std::string>()];
    (parse_decision(rec.at("decision").get<std::string>()) == Decision::Accept ? t.accepts : t.rejects) += 1;
  }
  return out;
}

}  // namespace osdg
