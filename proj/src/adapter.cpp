#include "rita/adapter.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "rita/error.hpp"
#include "rita/text.hpp"

namespace rita {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string make_adapter_request(std::string_view id, std::string_view text) {
  return json{{"id", std::string(id)}, {"text", std::string(text)}}.dump();
}

AdapterReply parse_adapter_reply(std::string_view line, std::string_view expected_id,
                                 std::u32string_view text) {
  const std::string raw(line);
  auto malformed = [&](const std::string& why) {
    return AdapterError(AdapterError::Kind::MalformedReply, "malformed adapter reply: " + why, raw);
  };
  json obj;
  try {
    obj = json::parse(raw);
  } catch (const json::parse_error&) {
    throw malformed("not valid JSON");
  }
  if (!obj.is_object()) throw malformed("not an object");
  const auto id = obj.find("id");
  if (id == obj.end() || !id->is_string()) throw malformed("missing string 'id'");
  if (id->get<std::string>() != expected_id)
    throw malformed("reply id '" + id->get<std::string>() + "' does not answer request '" +
                    std::string(expected_id) + "'");
  const auto entities = obj.find("entities");
  if (entities == obj.end() || !entities->is_array()) throw malformed("missing array 'entities'");

  AdapterReply reply;
  std::vector<EntitySpan> candidates;
  for (const json& e : *entities) {
    const bool shaped = e.is_object() && e.contains("start") && e.contains("end") &&
                        e.contains("label") && e["start"].is_number_integer() &&
                        e["end"].is_number_integer() && e["label"].is_string();
    if (!shaped) {
      ++reply.dropped;
      continue;
    }
    const long long start = e["start"].get<long long>();
    const long long end = e["end"].get<long long>();
    if (start < 0 || end <= start || static_cast<std::size_t>(end) > text.size()) {
      ++reply.dropped;
      continue;
    }
    IcoCategory label;
    try {
      label = parse_category(e["label"].get<std::string>());
    } catch (const UnknownCategory&) {
      ++reply.dropped;
      continue;
    }
    const auto s = static_cast<std::size_t>(start);
    const auto t = static_cast<std::size_t>(end);
    candidates.push_back({s, t, label, text::encode_utf8(text.substr(s, t - s))});
  }

  std::stable_sort(candidates.begin(), candidates.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  for (EntitySpan& s : candidates) {
    if (!reply.spans.empty() && s.start < reply.spans.back().end) {
      ++reply.dropped;
      continue;
    }
    reply.spans.push_back(std::move(s));
  }
  return reply;
}

class ExternalAdapter::Connection {
 public:
  explicit Connection(const AdapterConfig& cfg) : timeout_(cfg.timeout) {
    if (cfg.transport == AdapterConfig::Transport::Process)
      spawn(cfg.locator);
    else
      connect_tcp(cfg.locator);
  }

  ~Connection() {
    if (fd_ >= 0) ::close(fd_);
    if (pid_ > 0) reap();
  }

  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  std::string round_trip(const std::string& request) {
    const auto deadline = Clock::now() + timeout_;
    write_all(request + "\n", deadline);
    return read_line(deadline);
  }

 private:
  static AdapterError unreachable(const std::string& why) {
    return AdapterError(AdapterError::Kind::Unreachable, "adapter unreachable: " + why);
  }

  void spawn(const std::string& command) {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
      throw unreachable(std::strerror(errno));
    const pid_t pid = ::fork();
    if (pid < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      throw unreachable(std::strerror(errno));
    }
    if (pid == 0) {
      ::setpgid(0, 0);  // lets reap() take down anything the shell starts
      ::dup2(sv[1], STDIN_FILENO);
      ::dup2(sv[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(sv[1]);
    pid_ = pid;
    fd_ = sv[0];
    ::fcntl(fd_, F_SETFL, ::fcntl(fd_, F_GETFL) | O_NONBLOCK);
  }

  void connect_tcp(const std::string& locator) {
    const auto colon = locator.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == locator.size())
      throw unreachable("endpoint must be host:port, got '" + locator + "'");
    std::string host = locator.substr(0, colon);
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    const std::string port = locator.substr(colon + 1);

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0)
      throw unreachable(::gai_strerror(rc));
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);

    const auto deadline = Clock::now() + timeout_;
    std::string last_error = "no usable address";
    for (addrinfo* ai = found; ai; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK, ai->ai_protocol);
      if (fd < 0) {
        last_error = std::strerror(errno);
        continue;
      }
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0 || wait_connected(fd, deadline, last_error)) {
        fd_ = fd;
        return;
      }
      ::close(fd);
    }
    throw unreachable(locator + ": " + last_error);
  }

  static bool wait_connected(int fd, Clock::time_point deadline, std::string& error) {
    if (errno != EINPROGRESS) {
      error = std::strerror(errno);
      return false;
    }
    pollfd p{fd, POLLOUT, 0};
    if (::poll(&p, 1, remaining_ms(deadline)) <= 0) {
      error = "connect timed out";
      return false;
    }
    int so_error = 0;
    socklen_t len = sizeof so_error;
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &so_error, &len);
    if (so_error != 0) {
      error = std::strerror(so_error);
      return false;
    }
    return true;
  }

  static int remaining_ms(Clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return static_cast<int>(std::max<long long>(0, left.count()));
  }

  void wait_for(short events, Clock::time_point deadline) {
    for (;;) {
      pollfd p{fd_, events, 0};
      const int rc = ::poll(&p, 1, remaining_ms(deadline));
      if (rc > 0) return;
      if (rc == 0)
        throw AdapterError(AdapterError::Kind::Timeout,
                           "adapter did not answer within " + std::to_string(timeout_.count()) + " ms");
      if (errno != EINTR) throw unreachable(std::strerror(errno));
    }
  }

  void write_all(const std::string& data, Clock::time_point deadline) {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n > 0) {
        sent += static_cast<std::size_t>(n);
      } else if (errno == EAGAIN || errno == EWOULDBLOCK) {
        wait_for(POLLOUT, deadline);
      } else if (errno != EINTR) {
        throw unreachable(std::strerror(errno));
      }
    }
  }

  std::string read_line(Clock::time_point deadline) {
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      wait_for(POLLIN, deadline);
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n > 0) {
        buffer_.append(chunk, static_cast<std::size_t>(n));
      } else if (n == 0) {
        throw unreachable("predictor closed the connection");
      } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        throw unreachable(std::strerror(errno));
      }
    }
  }

  void reap() {
    for (int i = 0; i < 20; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) != 0) {
        ::kill(-pid_, SIGKILL);
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  pid_t pid_ = -1;
  std::string buffer_;
};

ExternalAdapter::ExternalAdapter(AdapterConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.timeout.count() <= 0) throw std::invalid_argument("adapter timeout must be positive");
  if (cfg_.locator.empty()) throw std::invalid_argument("adapter locator is empty");
}

ExternalAdapter::~ExternalAdapter() = default;

AdapterReply ExternalAdapter::request(std::string_view text) {
  const std::u32string cps = text::decode_utf8(text);
  if (cps.size() > cfg_.max_text_length)
    throw Error("text of " + std::to_string(cps.size()) + " characters exceeds the adapter limit of " +
                std::to_string(cfg_.max_text_length));

  std::lock_guard lock(mu_);
  const std::string id = std::to_string(next_id_++);
  try {
    if (!conn_) conn_ = std::make_unique<Connection>(cfg_);
    const std::string line = conn_->round_trip(make_adapter_request(id, text));
    return parse_adapter_reply(line, id, cps);
  } catch (const AdapterError&) {
    // The stream may be out of step with our request ids now.
    conn_.reset();
    throw;
  }
}

std::vector<EntitySpan> external_extract(const AdapterConfig& cfg, std::string_view text,
                                         std::size_t* dropped) {
  ExternalAdapter adapter(cfg);
  AdapterReply reply = adapter.request(text);
  if (dropped) *dropped = reply.dropped;
  return std::move(reply.spans);
}

std::vector<EntitySpan> AdapterExtractor::extract(std::string_view text) {
  AdapterReply reply = adapter_.request(text);
  dropped_ += reply.dropped;
  return std::move(reply.spans);
}

}  // namespace rita
