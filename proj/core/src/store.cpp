#include "exacb/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "exacb/errors.hpp"
#include "exacb/protocol.hpp"
#include "exacb/subprocess.hpp"

namespace fs = std::filesystem;

namespace exacb {

namespace {

constexpr int kLockTimeoutMs = 30000;
constexpr int kLockRetryMs = 50;
constexpr const char* kTrustSuffix = ".trust";
constexpr const char* kRawInfix = ".raw/";

bool key_char_ok(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '+' || c == '-';
}

// Exclusive-create lock file, removed on release. put/inject serialize
// through this; readers never take it.
class StoreLock {
 public:
  explicit StoreLock(std::string path) : path_(std::move(path)) {
    int waited = 0;
    for (;;) {
      int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        std::string pid = std::to_string(getpid()) + "\n";
        [[maybe_unused]] ssize_t n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
        return;
      }
      if (waited >= kLockTimeoutMs) {
        throw StoreError("lock timeout after 30 s on " + path_ +
                         " (retryable)");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(kLockRetryMs));
      waited += kLockRetryMs;
    }
  }
  ~StoreLock() { ::unlink(path_.c_str()); }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  std::string path_;
};

[[noreturn]] void not_implemented() {
  throw StoreError("object-store backend is not implemented");
}

bool is_sidecar_or_raw(const std::string& key) {
  if (key.size() >= 6 && key.compare(key.size() - 6, 6, kTrustSuffix) == 0) {
    return true;
  }
  return key.find(kRawInfix) != std::string::npos;
}

// --- filesystem backend ---------------------------------------------------

std::string fs_path(const ResultStore& store, const std::string& key) {
  return store.root + "/" + key;
}

void fs_write_atomic(const ResultStore& store, const std::string& key,
                     const std::string& bytes) {
  const fs::path target = fs_path(store, key);
  fs::create_directories(target.parent_path());
  static std::atomic<unsigned> counter{0};
  const fs::path tmp = target.parent_path() /
                       (".tmp-" + std::to_string(getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StoreError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw StoreError("rename failed for key " + key + ": " + ec.message());
  }
}

std::string fs_read(const ResultStore& store, const std::string& key) {
  std::ifstream in(fs_path(store, key), std::ios::binary);
  if (!in) throw NotFoundError("no such key: " + key);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> fs_list(const ResultStore& store) {
  std::vector<std::string> keys;
  if (!fs::exists(store.root)) return keys;
  for (const auto& entry : fs::recursive_directory_iterator(store.root)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), store.root).string();
    const std::string name = entry.path().filename().string();
    if (name.rfind(".tmp-", 0) == 0 || name == ".exacb.lock") continue;
    keys.push_back(std::move(rel));
  }
  return keys;
}

// --- git orphan-branch backend ---------------------------------------------

ProcessResult git(const ResultStore& store, std::vector<std::string> args,
                  const std::string& stdin_bytes = {},
                  const std::string& index_file = {}) {
  std::vector<std::string> argv{"git"};
  for (auto& a : args) argv.push_back(std::move(a));
  ProcessOptions opts;
  opts.cwd = store.root;
  opts.stdin_bytes = stdin_bytes;
  // Self-contained identity so fresh repositories need no user config.
  opts.env["GIT_AUTHOR_NAME"] = "exacb";
  opts.env["GIT_AUTHOR_EMAIL"] = "exacb@localhost";
  opts.env["GIT_COMMITTER_NAME"] = "exacb";
  opts.env["GIT_COMMITTER_EMAIL"] = "exacb@localhost";
  if (!index_file.empty()) opts.env["GIT_INDEX_FILE"] = index_file;
  return run_process(argv, opts);
}

ProcessResult git_checked(const ResultStore& store,
                          std::vector<std::string> args,
                          const std::string& stdin_bytes = {},
                          const std::string& index_file = {}) {
  ProcessResult res = git(store, std::move(args), stdin_bytes, index_file);
  if (!res.ok()) {
    throw StoreError("git failed (exit " + std::to_string(res.exit_code) +
                     "): " + res.err);
  }
  return res;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string git_dir(const ResultStore& store) {
  return trim(git_checked(store, {"rev-parse", "--absolute-git-dir"}).out);
}

std::optional<std::string> git_branch_tip(const ResultStore& store) {
  ProcessResult res = git(store, {"rev-parse", "--verify", "--quiet",
                                  "refs/heads/" + store.branch});
  if (!res.ok()) return std::nullopt;
  return trim(res.out);
}

// One commit per put. The branch is orphan by construction: the first
// commit is created without a parent.
std::string git_commit_files(
    const ResultStore& store,
    const std::vector<std::pair<std::string, std::string>>& files,
    const std::string& message) {
  const std::string gdir = git_dir(store);
  StoreLock lock(gdir + "/exacb-store.lock");

  const std::string index =
      gdir + "/exacb-index-" + std::to_string(getpid());
  struct IndexGuard {
    std::string path;
    ~IndexGuard() { ::unlink(path.c_str()); }
  } guard{index};

  std::optional<std::string> parent = git_branch_tip(store);
  if (parent) {
    git_checked(store, {"read-tree", *parent}, {}, index);
  } else {
    git_checked(store, {"read-tree", "--empty"}, {}, index);
  }
  for (const auto& [key, bytes] : files) {
    std::string blob =
        trim(git_checked(store, {"hash-object", "-w", "--stdin"}, bytes).out);
    git_checked(store,
                {"update-index", "--add", "--cacheinfo",
                 "100644," + blob + "," + key},
                {}, index);
  }
  std::string tree = trim(git_checked(store, {"write-tree"}, {}, index).out);

  std::vector<std::string> commit_args{"commit-tree", tree, "-m", message};
  if (parent) {
    commit_args.push_back("-p");
    commit_args.push_back(*parent);
  }
  std::string commit = trim(git_checked(store, commit_args).out);
  git_checked(store,
              {"update-ref", "refs/heads/" + store.branch, commit,
               parent ? *parent : std::string(40, '0')});
  return commit;
}

std::string git_read(const ResultStore& store, const std::string& key) {
  ProcessResult res =
      git(store, {"cat-file", "blob", "refs/heads/" + store.branch + ":" + key});
  if (!res.ok()) throw NotFoundError("no such key: " + key);
  return res.out;
}

std::vector<std::string> git_list(const ResultStore& store) {
  if (!git_branch_tip(store)) return {};
  ProcessResult res = git_checked(
      store, {"ls-tree", "-r", "--name-only", "refs/heads/" + store.branch});
  std::vector<std::string> keys;
  std::istringstream lines(res.out);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) keys.push_back(line);
  }
  return keys;
}

// --- shared dispatch --------------------------------------------------------

StoreReceipt put_bytes(const ResultStore& store, const std::string& key,
                       const std::string& bytes, bool trusted) {
  validate_key(key);
  StoreReceipt receipt;
  receipt.key = key;
  receipt.trusted = trusted;
  switch (store.backend) {
    case StoreBackend::filesystem: {
      StoreLock lock(store.root + "/.exacb.lock");
      fs_write_atomic(store, key, bytes);
      if (!trusted) fs_write_atomic(store, key + kTrustSuffix, "trusted=false\n");
      break;
    }
    case StoreBackend::git_orphan_branch: {
      std::vector<std::pair<std::string, std::string>> files{{key, bytes}};
      if (!trusted) files.emplace_back(key + kTrustSuffix, "trusted=false\n");
      receipt.commit = git_commit_files(store, files, "exacb: record " + key);
      break;
    }
    case StoreBackend::object_store:
      not_implemented();
  }
  return receipt;
}

}  // namespace

void validate_key(const std::string& key) {
  if (key.empty()) throw ConfigError("store key: must be non-empty");
  if (key.front() == '/') throw ConfigError("store key: no leading slash");
  std::string segment;
  auto check_segment = [&key](const std::string& seg) {
    if (seg.empty()) throw ConfigError("store key: empty segment in " + key);
    if (seg == "." || seg == "..") {
      throw ConfigError("store key: \"" + seg + "\" segment in " + key);
    }
  };
  for (char c : key) {
    if (c == '/') {
      check_segment(segment);
      segment.clear();
      continue;
    }
    if (!key_char_ok(c)) {
      throw ConfigError(std::string("store key: illegal character '") + c +
                        "' in " + key);
    }
    segment.push_back(c);
  }
  check_segment(segment);
}

ResultStore open_store(const std::string& uri) {
  ResultStore store;
  std::string path = uri;
  if (uri.rfind("git:", 0) == 0) {
    store.backend = StoreBackend::git_orphan_branch;
    path = uri.substr(4);
  } else if (uri.rfind("fs:", 0) == 0) {
    path = uri.substr(3);
  } else if (uri.rfind("s3:", 0) == 0) {
    store.backend = StoreBackend::object_store;
    path = uri.substr(3);
  }
  if (path.empty()) throw ConfigError("store: empty path in \"" + uri + "\"");
  store.root = path;
  if (store.backend == StoreBackend::filesystem) {
    fs::create_directories(store.root);
  } else if (store.backend == StoreBackend::git_orphan_branch) {
    if (!fs::exists(store.root)) {
      throw ConfigError("store: no such repository: " + store.root);
    }
    if (!git(store, {"rev-parse", "--git-dir"}).ok()) {
      throw ConfigError("store: not a git repository: " + store.root);
    }
  }
  return store;
}

StoreReceipt put_report(const ResultStore& store, const std::string& key,
                        const std::string& bytes) {
  return put_bytes(store, key, bytes, /*trusted=*/true);
}

std::string get_report(const ResultStore& store, const std::string& key) {
  validate_key(key);
  switch (store.backend) {
    case StoreBackend::filesystem:
      return fs_read(store, key);
    case StoreBackend::git_orphan_branch:
      return git_read(store, key);
    case StoreBackend::object_store:
      not_implemented();
  }
  throw StoreError("unreachable");
}

std::vector<std::string> list_reports(
    const ResultStore& store, const std::string& key_prefix,
    std::optional<std::pair<UtcSeconds, UtcSeconds>> time_span) {
  std::vector<std::string> all;
  switch (store.backend) {
    case StoreBackend::filesystem:
      all = fs_list(store);
      break;
    case StoreBackend::git_orphan_branch:
      all = git_list(store);
      break;
    case StoreBackend::object_store:
      not_implemented();
  }
  std::vector<std::string> keys;
  for (auto& key : all) {
    if (is_sidecar_or_raw(key)) continue;
    if (key.rfind(key_prefix, 0) != 0) continue;
    keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end());
  if (!time_span) return keys;

  std::vector<std::string> filtered;
  for (auto& key : keys) {
    ValidationResult parsed = validate_report_text(get_report(store, key));
    if (!parsed.ok()) continue;  // no started_at to filter on
    const UtcSeconds at = parsed.report->experiment.started_at;
    if (at >= time_span->first && at <= time_span->second) {
      filtered.push_back(std::move(key));
    }
  }
  return filtered;
}

StoreReceipt inject_external(const ResultStore& store, const std::string& key,
                             const std::string& bytes) {
  ValidationResult parsed = validate_report_text(bytes);
  if (!parsed.ok()) throw ValidationError(std::move(parsed.errors));
  return put_bytes(store, key, bytes, /*trusted=*/false);
}

StoreReceipt put_raw(const ResultStore& store, const std::string& key,
                     const std::string& name, const std::string& bytes) {
  validate_key(key);
  validate_key(name);
  if (name.find('/') != std::string::npos) {
    throw ConfigError("raw attachment name must be a single segment");
  }
  return put_bytes(store, key + ".raw/" + name, bytes, /*trusted=*/true);
}

bool is_trusted(const ResultStore& store, const std::string& key) {
  try {
    get_report(store, key + kTrustSuffix);
    return false;
  } catch (const NotFoundError&) {
    return true;
  }
}

}  // namespace exacb
