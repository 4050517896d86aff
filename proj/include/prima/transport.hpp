// Copyright 2026 The PRIMA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "prima/wire.hpp"

namespace httplib {
class Server;
}

namespace prima::wire {

enum class Method { get, post };

struct Reply {
  int status = 200;
  std::string body;
};

/// Server side of an endpoint set: receives raw request bytes, returns raw
/// response bytes.
class Handler {
 public:
  virtual ~Handler() = default;
  virtual Reply handle(Method method, std::string_view path, std::string_view body) = 0;
};

/// One request/response exchange. `status` is 0 when no response arrived.
struct CaptureRecord {
  std::string endpoint;
  std::string path;
  Method method = Method::post;
  std::string request;
  std::string response;
  int status = 0;
};

/// Append-only, thread-safe record of every exchange a transport carried.
class CaptureLog {
 public:
  void append(CaptureRecord record);
  std::vector<CaptureRecord> snapshot() const;
  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<CaptureRecord> records_;
};

/// Client side. `endpoint` is "loop://name" for loopback or
/// "http://host:port" for HTTP.
class Transport {
 public:
  virtual ~Transport() = default;

  /// Sends request bytes and returns response bytes. Throws
  /// Error(network_error) when the endpoint cannot be reached.
  std::string send(const std::string& endpoint, Method method, std::string_view path, std::string_view body);

  /// Null turns capture off; the send path then copies nothing.
  void set_capture(std::shared_ptr<CaptureLog> log) { std::atomic_store(&capture_, std::move(log)); }
  std::shared_ptr<CaptureLog> capture() const { return std::atomic_load(&capture_); }

 protected:
  virtual Reply do_send(const std::string& endpoint, Method method, std::string_view path,
                        std::string_view body) = 0;

 private:
  std::shared_ptr<CaptureLog> capture_;
};

/// In-process network: servers bind under a name, the network itself is the
/// client transport. Delivery is synchronous and in order.
class LoopbackNetwork final : public Transport {
 public:
  /// Returns the endpoint string "loop://<name>".
  std::string bind(const std::string& name, std::shared_ptr<Handler> handler);
  void unbind(const std::string& name);

  /// Delay applied to every request before delivery.
  void set_latency(std::chrono::microseconds latency) { latency_us_ = latency.count(); }

 protected:
  Reply do_send(const std::string& endpoint, Method method, std::string_view path, std::string_view body) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Handler>> handlers_;
  std::atomic<long long> latency_us_{0};
};

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::chrono::milliseconds timeout = std::chrono::seconds(10)) : timeout_(timeout) {}

 protected:
  Reply do_send(const std::string& endpoint, Method method, std::string_view path, std::string_view body) override;

 private:
  std::chrono::milliseconds timeout_;
};

/// Serves a Handler over HTTP on a background thread until destroyed.
class HttpServer {
 public:
  /// port 0 picks an ephemeral port.
  HttpServer(std::shared_ptr<Handler> handler, const std::string& host = "127.0.0.1", int port = 0);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int port() const { return port_; }
  std::string endpoint() const;
  void stop();

 private:
  std::shared_ptr<Handler> handler_;
  std::unique_ptr<httplib::Server> server_;
  std::string host_;
  int port_ = 0;
  std::thread thread_;
};

/// Routes (method, path) to typed functions and turns thrown prima::Error
/// into error envelopes of the route's response type.
class Router : public Handler {
 public:
  using Fn = std::function<Envelope(const Envelope&)>;

  void add(Method method, std::string path, MessageType response_type, Fn fn);

  Reply handle(Method method, std::string_view path, std::string_view body) override;

 private:
  struct Route {
    MessageType response_type;
    Fn fn;
  };
  std::map<std::pair<Method, std::string>, Route> routes_;
};

/// Encodes `request`, sends it, decodes the reply envelope.
Envelope round_trip(Transport& transport, const std::string& endpoint, Method method, std::string_view path,
                    const Envelope* request);

template <class Response, class Request>
Response call(Transport& transport, const std::string& endpoint, std::string_view path, const Request& request);

}  // namespace prima::wire

#include "prima/messages.hpp"

namespace prima::wire {

template <class Response, class Request>
Response call(Transport& transport, const std::string& endpoint, std::string_view path, const Request& request) {
  const auto env = make_envelope(request);
  return open<Response>(round_trip(transport, endpoint, Method::post, path, &env));
}

template <class Response>
Response get(Transport& transport, const std::string& endpoint, std::string_view path) {
  return open<Response>(round_trip(transport, endpoint, Method::get, path, nullptr));
}

}  // namespace prima::wire
