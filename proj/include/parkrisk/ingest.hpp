// Copyright 2026 The parkrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PARKRISK__INGEST_HPP_
#define PARKRISK__INGEST_HPP_

#include "parkrisk/errors.hpp"
#include "parkrisk/ldm.hpp"
#include "parkrisk/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace parkrisk::ingest
{

using wire::parse_line;
using wire::Percept;
using wire::serialize_line;

/// Writes a percept into the matching LDM layer.
inline void insert_percept(ldm::LocalDynamicMap & sink, const Percept & p)
{
  if (const auto * det = std::get_if<ExteriorDetection>(&p)) {
    sink.append_detection(*det);
  } else {
    const auto & gaze = std::get<GazeEvent>(p);
    sink.insert({ldm::LdmLayer::Interior, gaze.source_id, gaze.timestamp, gaze});
  }
}

struct LineError
{
  std::string file;
  std::size_t line{0};
  std::string message;
};

struct ReplayOptions
{
  /// Playback rate relative to recorded time; infinity replays as fast as possible.
  double speed_factor{std::numeric_limits<double>::infinity()};
  /// Skip and report bad lines instead of failing.
  bool lenient{false};
};

struct ReplaySummary
{
  std::size_t count{0};      // percepts inserted
  Timestamp duration_ms{0};  // recorded time span
  std::vector<LineError> errors;
};

/// Reads every line of the given files. Strict mode throws on the first bad line.
inline std::vector<Percept> read_percepts(
  const std::vector<std::filesystem::path> & paths, bool lenient, std::vector<LineError> & errors)
{
  std::vector<Percept> percepts;
  for (const auto & path : paths) {
    std::ifstream in(path);
    if (!in) {
      throw IoError("cannot open " + path.string());
    }
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
      ++line;
      if (text.empty()) {
        continue;
      }
      try {
        percepts.push_back(parse_line(text, line));
      } catch (const ParseError & e) {
        if (!lenient) {
          throw ParseError(line, path.filename().string() + ": " + e.what());
        }
        errors.push_back({path.string(), line, e.what()});
      }
    }
  }
  std::stable_sort(percepts.begin(), percepts.end(), [](const Percept & a, const Percept & b) {
    return wire::timestamp_of(a) < wire::timestamp_of(b);
  });
  return percepts;
}

/// Feeds recorded streams into the map in timestamp order, pacing by `speed_factor`.
inline ReplaySummary replay(
  const std::vector<std::filesystem::path> & paths, const ReplayOptions & options,
  ldm::LocalDynamicMap & sink)
{
  if (!(options.speed_factor > 0.0)) {
    throw ValidationError("speed factor must be positive");
  }
  ReplaySummary summary;
  const auto percepts = read_percepts(paths, options.lenient, summary.errors);
  if (percepts.empty()) {
    return summary;
  }
  const Timestamp first = wire::timestamp_of(percepts.front());
  const auto wall_start = std::chrono::steady_clock::now();
  const bool paced = std::isfinite(options.speed_factor);
  for (const auto & p : percepts) {
    if (paced) {
      const auto offset = std::chrono::duration<double, std::milli>(
        static_cast<double>(wire::timestamp_of(p) - first) / options.speed_factor);
      std::this_thread::sleep_until(
        wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(offset));
    }
    insert_percept(sink, p);
    ++summary.count;
  }
  summary.duration_ms = wire::timestamp_of(percepts.back()) - first;
  return summary;
}

struct Endpoint
{
  std::string host{"127.0.0.1"};
  std::uint16_t port{0};
};

inline Endpoint parse_endpoint(const std::string & text)
{
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) {
    throw ValidationError("endpoint must be host:port");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  try {
    const int port = std::stoi(text.substr(colon + 1));
    if (port < 0 || port > 65535) {
      throw ValidationError("port out of range");
    }
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::logic_error &) {
    throw ValidationError("invalid port in endpoint '" + text + "'");
  }
  return ep;
}

struct ListenStats
{
  std::size_t connections{0};
  std::size_t lines{0};
  std::size_t inserted{0};
  std::size_t errors{0};
};

/// Live TCP line feed into an LDM. Each connection is served on its own thread; bad lines are
/// counted (and passed to the logger) without dropping the connection.
class ListenHandle
{
public:
  using Logger = std::function<void(const std::string &)>;

  ListenHandle(const Endpoint & endpoint, ldm::LocalDynamicMap & sink, Logger logger = {})
  : sink_(sink), logger_(std::move(logger))
  {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo * res = nullptr;
    const auto port = std::to_string(endpoint.port);
    if (getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
      throw IoError("cannot resolve " + endpoint.host);
    }
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    int yes = 1;
    if (fd_ >= 0) {
      ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    }
    const bool ok =
      fd_ >= 0 && ::bind(fd_, res->ai_addr, res->ai_addrlen) == 0 && ::listen(fd_, 16) == 0;
    freeaddrinfo(res);
    if (!ok) {
      if (fd_ >= 0) {
        ::close(fd_);
      }
      throw IoError("cannot bind " + endpoint.host + ":" + port);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr *>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  ListenHandle(const ListenHandle &) = delete;
  ListenHandle & operator=(const ListenHandle &) = delete;

  ~ListenHandle() { shutdown(); }

  std::uint16_t port() const { return port_; }

  ListenStats stats() const
  {
    return {connections_.load(), lines_.load(), inserted_.load(), errors_.load()};
  }

  /// Stops accepting, closes connections and joins every thread. Idempotent.
  ListenStats shutdown()
  {
    if (!stopping_.exchange(true)) {
      if (acceptor_.joinable()) {
        acceptor_.join();
      }
      std::lock_guard lock(workers_mutex_);
      for (auto & w : workers_) {
        w.join();
      }
      workers_.clear();
      ::close(fd_);
    }
    return stats();
  }

private:
  void accept_loop()
  {
    while (!stopping_) {
      pollfd pfd{fd_, POLLIN, 0};
      if (::poll(&pfd, 1, 50) <= 0) {
        continue;
      }
      const int client = ::accept(fd_, nullptr, nullptr);
      if (client < 0) {
        continue;
      }
      ++connections_;
      std::lock_guard lock(workers_mutex_);
      workers_.emplace_back([this, client] { serve(client); });
    }
  }

  void serve(int client)
  {
    std::string buffer;
    char chunk[4096];
    while (!stopping_) {
      pollfd pfd{client, POLLIN, 0};
      if (::poll(&pfd, 1, 50) <= 0) {
        continue;
      }
      const auto n = ::recv(client, chunk, sizeof(chunk), 0);
      if (n <= 0) {
        break;
      }
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t start = 0;
      for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n', start)) {
        handle_line(std::string_view(buffer).substr(start, nl - start));
        start = nl + 1;
      }
      buffer.erase(0, start);
    }
    if (!buffer.empty()) {
      handle_line(buffer);
    }
    ::close(client);
  }

  void handle_line(std::string_view text)
  {
    if (!text.empty() && text.back() == '\r') {
      text.remove_suffix(1);
    }
    if (text.empty()) {
      return;
    }
    const auto line = ++lines_;
    try {
      insert_percept(sink_, parse_line(text, line));
      ++inserted_;
    } catch (const ValidationError & e) {
      ++errors_;
      if (logger_) {
        logger_(e.what());
      }
    }
  }

  ldm::LocalDynamicMap & sink_;
  Logger logger_;
  int fd_{-1};
  std::uint16_t port_{0};
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> connections_{0};
  std::atomic<std::size_t> lines_{0};
  std::atomic<std::size_t> inserted_{0};
  std::atomic<std::size_t> errors_{0};
  std::thread acceptor_;
  std::mutex workers_mutex_;
  std::list<std::thread> workers_;
};

inline std::unique_ptr<ListenHandle> listen(
  const Endpoint & endpoint, ldm::LocalDynamicMap & sink, ListenHandle::Logger logger = {})
{
  return std::make_unique<ListenHandle>(endpoint, sink, std::move(logger));
}

}  // namespace parkrisk::ingest

#endif  // PARKRISK__INGEST_HPP_
