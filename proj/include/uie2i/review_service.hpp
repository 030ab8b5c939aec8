#pragma once

// Review state for one benchmark-build directory and the HTTP API in front of
// it. Layout: tasks.jsonl, verdicts.jsonl (append-only log, last write wins)
// and screenshots/.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "httplib.h"
#include "uie2i/dataset.hpp"

namespace uie2i {

inline constexpr const char* kTasksFile = "tasks.jsonl";
inline constexpr const char* kVerdictsFile = "verdicts.jsonl";
inline constexpr const char* kScreenshotsDir = "screenshots";

/// Collapses a verdict log to the latest verdict per task, ordered by task_id.
inline std::vector<ReviewVerdict> materialize_verdicts(const std::vector<ReviewVerdict>& log) {
  std::map<std::string, ReviewVerdict> latest;
  for (const auto& v : log) latest.insert_or_assign(v.task_id, v);
  std::vector<ReviewVerdict> out;
  for (auto& [id, v] : latest) out.push_back(std::move(v));
  return out;
}

/// Appends one line and fsyncs before returning.
inline void append_durable(const fs::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const auto n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error("write to " + path.string() + " failed: " + std::strerror(err));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw Error("fsync of " + path.string() + " failed");
}

struct TaskPage {
  std::size_t total = 0;
  std::size_t offset = 0;
  std::size_t limit = 0;
  std::vector<ReviewTask> tasks;
};

struct Progress {
  std::size_t pending = 0;
  std::size_t done = 0;
  std::size_t total = 0;
};

enum class UpsertStatus { Stored, Unchanged, UnknownTask, Invalid };

struct UpsertResult {
  UpsertStatus status = UpsertStatus::Stored;
  std::vector<FieldError> errors;
  std::optional<ReviewVerdict> verdict;
};

class ReviewStore {
 public:
  explicit ReviewStore(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_ / kTasksFile)) throw DataError("not a benchmark build: missing " + (dir_ / kTasksFile).string());
    for (auto& t : read_records<ReviewTask>(dir_ / kTasksFile).records) {
      t.status = TaskStatus::Pending;
      if (index_.count(t.task_id)) throw DataError("duplicate task id '" + t.task_id + "'");
      index_.emplace(t.task_id, tasks_.size());
      tasks_.push_back(std::move(t));
    }
    // A crash can leave a torn final line; it never received a 2xx, so skip it.
    if (fs::exists(dir_ / kVerdictsFile))
      for (const auto& v : materialize_verdicts(read_records<ReviewVerdict>(dir_ / kVerdictsFile, ReadMode::Lenient).records))
        if (index_.count(v.task_id)) apply(v);
  }

  const fs::path& dir() const { return dir_; }

  TaskPage list(std::optional<TaskStatus> status, std::size_t offset, std::size_t limit) const {
    std::lock_guard lock(mu_);
    TaskPage page{0, offset, limit, {}};
    for (const auto& t : tasks_) {
      if (status && t.status != *status) continue;
      if (page.total >= offset && page.tasks.size() < limit) page.tasks.push_back(t);
      ++page.total;
    }
    return page;
  }

  std::optional<ReviewTask> task(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return tasks_[it->second];
  }

  std::optional<ReviewVerdict> verdict(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = verdicts_.find(id);
    if (it == verdicts_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<ReviewTask> tasks() const {
    std::lock_guard lock(mu_);
    return tasks_;
  }

  std::vector<ReviewVerdict> verdicts() const {
    std::lock_guard lock(mu_);
    std::vector<ReviewVerdict> out;
    for (const auto& [id, v] : verdicts_) out.push_back(v);
    return out;
  }

  Progress progress() const {
    std::lock_guard lock(mu_);
    Progress p;
    for (const auto& t : tasks_) ++(t.status == TaskStatus::Done ? p.done : p.pending);
    p.total = tasks_.size();
    return p;
  }

  /// Validates and durably records a verdict. Re-posting a verdict equal to
  /// the current one (timestamps aside) leaves the log untouched.
  UpsertResult upsert(ReviewVerdict v) {
    std::lock_guard lock(mu_);
    auto it = index_.find(v.task_id);
    if (it == index_.end()) return {UpsertStatus::UnknownTask, {}, std::nullopt};
    if (auto errors = validate_verdict(v, &tasks_[it->second]); !errors.empty())
      return {UpsertStatus::Invalid, std::move(errors), std::nullopt};
    if (auto cur = verdicts_.find(v.task_id); cur != verdicts_.end()) {
      ReviewVerdict a = cur->second, b = v;
      a.timestamp = b.timestamp = "";
      if (a == b) return {UpsertStatus::Unchanged, {}, cur->second};
    }
    if (v.timestamp.empty()) v.timestamp = utc_timestamp();
    append_durable(dir_ / kVerdictsFile, Json(v).dump() + "\n");
    apply(v);
    return {UpsertStatus::Stored, {}, v};
  }

  /// Path of a screenshot inside the build, or nullopt for names that would
  /// escape the screenshots directory or do not exist.
  std::optional<fs::path> screenshot(const std::string& file) const {
    if (file.empty() || file.find('/') != std::string::npos || file.find('\\') != std::string::npos ||
        file.front() == '.')
      return std::nullopt;
    auto p = dir_ / kScreenshotsDir / file;
    if (!fs::is_regular_file(p)) return std::nullopt;
    return p;
  }

 private:
  void apply(const ReviewVerdict& v) {
    verdicts_.insert_or_assign(v.task_id, v);
    tasks_[index_.at(v.task_id)].status = TaskStatus::Done;
  }

  fs::path dir_;
  mutable std::mutex mu_;
  std::vector<ReviewTask> tasks_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, ReviewVerdict> verdicts_;
};

inline std::string screenshot_url(const ReviewTask& t) {
  return "/screenshots/" + fs::path(t.screenshot_path).filename().string();
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

inline std::optional<std::size_t> query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto s = req.get_param_value(key);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9) return std::nullopt;
  return static_cast<std::size_t>(std::stoul(s));
}

}  // namespace detail

/// HTTP front end for a ReviewStore. Handlers run concurrently on the
/// server's thread pool; the store serializes state changes.
class ReviewService {
 public:
  explicit ReviewService(ReviewStore& store, std::optional<fs::path> ui_dir = std::nullopt) : store_(store) {
    using httplib::Request, httplib::Response;
    server_.Get("/tasks", [this](const Request& req, Response& res) { list_tasks(req, res); });
    server_.Get(R"(/tasks/([^/]+))", [this](const Request& req, Response& res) { get_task(req, res); });
    server_.Post(R"(/tasks/([^/]+)/verdict)", [this](const Request& req, Response& res) { post_verdict(req, res); });
    server_.Get(R"(/screenshots/([^/]+))", [this](const Request& req, Response& res) { get_screenshot(req, res); });
    server_.Get("/progress", [this](const Request&, Response& res) {
      const auto p = store_.progress();
      detail::send_json(res, 200, Json{{"pending", p.pending}, {"done", p.done}, {"total", p.total}});
    });
    if (ui_dir && !server_.set_mount_point("/ui", ui_dir->string()))
      throw InvalidInput("ui directory not found: " + ui_dir->string());
    server_.set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
      std::string msg = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        msg = e.what();
      } catch (...) {
      }
      log_event("error", "review_handler_failed", {{"error", msg}});
      detail::send_error(res, 500, msg);
    });
    server_.set_logger([](const Request& req, const Response& res) {
      log_event("info", "http", {{"method", req.method}, {"path", req.path}, {"status", res.status}});
    });
  }

  /// Binds the listening socket; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void wait_until_ready() { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  void list_tasks(const httplib::Request& req, httplib::Response& res) {
    std::optional<TaskStatus> status;
    if (req.has_param("status")) {
      status = task_status_from_string(req.get_param_value("status"));
      if (!status) return detail::send_error(res, 400, "status must be pending or done");
    }
    const auto offset = detail::query_size(req, "offset", 0);
    const auto limit = detail::query_size(req, "limit", 50);
    if (!offset || !limit) return detail::send_error(res, 400, "offset and limit must be non-negative integers");
    const auto page = store_.list(status, *offset, *limit);
    detail::send_json(res, 200,
                      Json{{"total", page.total}, {"offset", page.offset}, {"limit", page.limit}, {"tasks", page.tasks}});
  }

  void get_task(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    const auto task = store_.task(id);
    if (!task) return detail::send_error(res, 404, "unknown task '" + id + "'");
    const auto v = store_.verdict(id);
    detail::send_json(res, 200,
                      Json{{"task", *task}, {"screenshot_url", screenshot_url(*task)}, {"verdict", v ? Json(*v) : Json()}});
  }

  void post_verdict(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    if (!store_.task(id)) return detail::send_error(res, 404, "unknown task '" + id + "'");
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      return detail::send_error(res, 400, std::string("body is not valid JSON: ") + e.what());
    }
    if (!body.is_object()) return detail::send_error(res, 400, "body must be a JSON object");
    if (!body.contains("task_id")) body["task_id"] = id;
    ReviewVerdict v;
    try {
      v = body.get<ReviewVerdict>();
    } catch (const std::exception& e) {
      return detail::send_json(res, 422, Json{{"errors", Json::array({FieldError{"body", e.what()}})}});
    }
    if (v.task_id != id)
      return detail::send_json(res, 422,
                               Json{{"errors", Json::array({FieldError{"task_id", "does not match the URL"}})}});
    auto result = store_.upsert(std::move(v));
    switch (result.status) {
      case UpsertStatus::UnknownTask: return detail::send_error(res, 404, "unknown task '" + id + "'");
      case UpsertStatus::Invalid: return detail::send_json(res, 422, Json{{"errors", result.errors}});
      case UpsertStatus::Stored:
      case UpsertStatus::Unchanged:
        detail::send_json(res, 200, Json{{"task", *store_.task(id)}, {"verdict", *result.verdict}});
    }
  }

  void get_screenshot(const httplib::Request& req, httplib::Response& res) {
    const auto path = store_.screenshot(req.matches[1].str());
    if (!path) return detail::send_error(res, 404, "no such screenshot");
    res.status = 200;
    res.set_content(read_file(*path), "image/png");
  }

  ReviewStore& store_;
  httplib::Server server_;
};

}  // namespace uie2i
