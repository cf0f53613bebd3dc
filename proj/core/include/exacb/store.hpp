#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exacb/timeutil.hpp"

namespace exacb {

enum class StoreBackend { filesystem, git_orphan_branch, object_store };

inline constexpr const char* kDefaultBranch = "exacb.data";

struct ResultStore {
  StoreBackend backend = StoreBackend::filesystem;
  std::string root;                     // directory or git repository path
  std::string branch = kDefaultBranch;  // git backend only
};

struct StoreReceipt {
  std::string key;
  bool trusted = true;
  std::string commit;  // git backend: the recording commit's sha
};

// Slash-separated, no leading slash, no "."/".." segments, segment charset
// [A-Za-z0-9._+-]. Throws ConfigError on violation.
void validate_key(const std::string& key);

// URI forms: "git:<repo>", "fs:<dir>", "s3:<bucket>" or a bare directory
// path (filesystem). Filesystem roots are created when missing; git roots
// must already be repositories.
ResultStore open_store(const std::string& uri);

// Atomic write (filesystem: temp file + rename; git: one commit on the
// orphan branch with message "exacb: record <key>"). Writers serialize
// through a per-store lock file with a 30 s timeout.
StoreReceipt put_report(const ResultStore& store, const std::string& key,
                        const std::string& bytes);

// Exact stored bytes; NotFoundError when absent. The git backend reads from
// the branch, not the working tree.
std::string get_report(const ResultStore& store, const std::string& key);

// Keys with the prefix, lexicographically sorted. Sidecar markers and raw
// attachments are not listed. With a time span, only keys whose stored
// report's experiment.started_at lies within [from, to] are returned.
std::vector<std::string> list_reports(
    const ResultStore& store, const std::string& key_prefix,
    std::optional<std::pair<UtcSeconds, UtcSeconds>> time_span = std::nullopt);

// Injection hook for externally produced reports: bytes must validate as a
// protocol report, and a sidecar marker "<key>.trust" records trusted=false.
StoreReceipt inject_external(const ResultStore& store, const std::string& key,
                             const std::string& bytes);

// Raw harness artifacts attached next to a report under "<key>.raw/<name>".
StoreReceipt put_raw(const ResultStore& store, const std::string& key,
                     const std::string& name, const std::string& bytes);

// False iff a trust sidecar marks the key as externally injected.
bool is_trusted(const ResultStore& store, const std::string& key);

}  // namespace exacb
