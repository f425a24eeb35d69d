#include <poll.h>
#include <sys/inotify.h>
#include <unistd.h>

#include <algorithm>
#include <map>
#include <set>
#include <thread>

#include "vibeguard/sidecar.hpp"

namespace vibeguard::sidecar {

namespace fs = std::filesystem;
using namespace std::chrono_literals;

void Debouncer::notify(Clock::time_point now) {
  pending_ = true;
  last_ = now;
}

bool Debouncer::due(Clock::time_point now) {
  if (!pending_ || now - last_ < quiet_) return false;
  pending_ = false;
  return true;
}

std::optional<Debouncer::Clock::time_point> Debouncer::deadline() const {
  if (!pending_) return std::nullopt;
  return last_ + quiet_;
}

namespace {

bool skipped_dir(const fs::path& p) {
  const auto name = p.filename().string();
  return name == "node_modules" || (!name.empty() && name.front() == '.');
}

bool is_source(const std::string& name) {
  return name.ends_with(".ts") || name.ends_with(".tsx");
}

class InotifySource final : public ChangeSource {
 public:
  explicit InotifySource(fs::path root) : root_(std::move(root)) {
    fd_ = inotify_init1(IN_NONBLOCK | IN_CLOEXEC);
    if (fd_ < 0) throw Error(ErrorCode::WatchUnavailable, "inotify is not available");
    add_tree(root_);
    if (dirs_.empty()) {
      ::close(fd_);
      throw Error(ErrorCode::WatchUnavailable, "cannot watch " + root_.string());
    }
  }
  ~InotifySource() override { ::close(fd_); }

  std::string name() const override { return "inotify"; }

  std::vector<std::string> wait(std::chrono::milliseconds timeout) override {
    pollfd pfd{fd_, POLLIN, 0};
    std::vector<std::string> out;
    if (::poll(&pfd, 1, static_cast<int>(timeout.count())) <= 0) return out;
    alignas(inotify_event) char buf[16384];
    while (true) {
      ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n <= 0) break;
      for (char* p = buf; p < buf + n;) {
        auto* ev = reinterpret_cast<inotify_event*>(p);
        p += sizeof(inotify_event) + ev->len;
        auto dir = dirs_.find(ev->wd);
        if (dir == dirs_.end() || ev->len == 0) continue;
        const std::string name = ev->name;
        const fs::path full = dir->second / name;
        if (ev->mask & IN_ISDIR) {
          if ((ev->mask & (IN_CREATE | IN_MOVED_TO)) && !skipped_dir(full)) {
            add_tree(full);
            out.push_back(fs::relative(full, root_).generic_string());
          }
          continue;
        }
        if (is_source(name)) out.push_back(fs::relative(full, root_).generic_string());
      }
    }
    return out;
  }

 private:
  void add_tree(const fs::path& dir) {
    add(dir);
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
      if (!it->is_directory(ec)) continue;
      if (skipped_dir(it->path())) {
        it.disable_recursion_pending();
        continue;
      }
      add(it->path());
    }
  }
  void add(const fs::path& dir) {
    const int wd = inotify_add_watch(fd_, dir.c_str(),
                                     IN_CLOSE_WRITE | IN_MOVED_TO | IN_MOVED_FROM | IN_CREATE | IN_DELETE | IN_MODIFY);
    if (wd >= 0) dirs_[wd] = dir;
  }

  fs::path root_;
  int fd_ = -1;
  std::map<int, fs::path> dirs_;
};

class PollingSource final : public ChangeSource {
 public:
  PollingSource(fs::path root, std::chrono::milliseconds interval)
      : root_(std::move(root)), interval_(interval), state_(scan()), next_(std::chrono::steady_clock::now() + interval) {}

  std::string name() const override { return "polling"; }

  std::vector<std::string> wait(std::chrono::milliseconds timeout) override {
    const auto now = std::chrono::steady_clock::now();
    if (next_ > now) {
      std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(next_ - now, timeout));
      if (std::chrono::steady_clock::now() < next_) return {};
    }
    next_ = std::chrono::steady_clock::now() + interval_;
    auto fresh = scan();
    std::vector<std::string> out;
    for (const auto& [path, stamp] : fresh) {
      auto it = state_.find(path);
      if (it == state_.end() || it->second != stamp) out.push_back(path);
    }
    for (const auto& [path, _] : state_)
      if (!fresh.count(path)) out.push_back(path);
    state_ = std::move(fresh);
    return out;
  }

 private:
  using Stamp = std::pair<fs::file_time_type, std::uintmax_t>;
  std::map<std::string, Stamp> scan() const {
    std::map<std::string, Stamp> out;
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(root_, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
      if (it->is_directory(ec)) {
        if (skipped_dir(it->path())) it.disable_recursion_pending();
        continue;
      }
      const auto name = it->path().filename().string();
      if (!is_source(name)) continue;
      std::error_code e2;
      out[fs::relative(it->path(), root_).generic_string()] = {it->last_write_time(e2), it->file_size(e2)};
    }
    return out;
  }

  fs::path root_;
  std::chrono::milliseconds interval_;
  std::map<std::string, Stamp> state_;
  std::chrono::steady_clock::time_point next_;
};

}  // namespace

std::unique_ptr<ChangeSource> make_inotify_source(const fs::path& root) {
  return std::make_unique<InotifySource>(root);
}

std::unique_ptr<ChangeSource> make_polling_source(const fs::path& root, std::chrono::milliseconds interval) {
  return std::make_unique<PollingSource>(root, interval);
}

void watch(Sidecar& sidecar, const WatchOptions& options, const std::atomic<bool>& stop) {
  auto log = [&](const std::string& msg) {
    if (options.on_log) options.on_log(msg);
  };
  std::unique_ptr<ChangeSource> source;
  if (!options.force_polling) {
    try {
      source = make_inotify_source(sidecar.workspace());
    } catch (const Error& e) {
      log(std::string(e.what()) + "; falling back to polling");
    }
  }
  if (!source) source = make_polling_source(sidecar.workspace(), options.poll_interval);
  log("watching " + sidecar.workspace().string() + " via " + source->name());

  Debouncer debounce(options.debounce);
  std::set<std::string> batch;
  while (!stop.load()) {
    auto timeout = std::chrono::milliseconds(100);
    if (auto deadline = debounce.deadline()) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline.value() -
                                                                        Debouncer::Clock::now());
      timeout = std::clamp(left, std::chrono::milliseconds(0), timeout);
    }
    auto changes = source->wait(timeout);
    const auto now = Debouncer::Clock::now();
    if (!changes.empty()) {
      debounce.notify(now);
      batch.insert(changes.begin(), changes.end());
    }
    if (!debounce.due(now)) continue;
    HookEvent ev{EventKind::PostEdit, {batch.begin(), batch.end()}, "watch"};
    batch.clear();
    try {
      auto report = sidecar.handle(ev);
      if (options.on_report) options.on_report(report);
    } catch (const Error& e) {
      log("pass failed: " + std::string(to_string(e.code())) + ": " + e.message());
    }
  }
}

}  // namespace vibeguard::sidecar
