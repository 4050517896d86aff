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

#include "prima/transport.hpp"

// The default backlog of 5 drops SYNs under a burst of concurrent clients.
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#define CPPHTTPLIB_THREAD_POOL_COUNT 16
#include <httplib.h>

#include "prima/error.hpp"

namespace prima::wire {
namespace {

constexpr std::string_view kLoopScheme = "loop://";

}  // namespace

void CaptureLog::append(CaptureRecord record) {
  std::lock_guard lock(mutex_);
  records_.push_back(std::move(record));
}

std::vector<CaptureRecord> CaptureLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t CaptureLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

void CaptureLog::clear() {
  std::lock_guard lock(mutex_);
  records_.clear();
}

std::string Transport::send(const std::string& endpoint, Method method, std::string_view path,
                            std::string_view body) {
  const auto log = capture();
  Reply reply;
  try {
    reply = do_send(endpoint, method, path, body);
  } catch (...) {
    if (log) log->append(CaptureRecord{endpoint, std::string(path), method, std::string(body), {}, 0});
    throw;
  }
  if (log) log->append(CaptureRecord{endpoint, std::string(path), method, std::string(body), reply.body, reply.status});
  if (reply.status == 404 && reply.body.empty()) {
    throw Error(Errc::not_found, endpoint + std::string(path));
  }
  return std::move(reply.body);
}

std::string LoopbackNetwork::bind(const std::string& name, std::shared_ptr<Handler> handler) {
  std::lock_guard lock(mutex_);
  handlers_[name] = std::move(handler);
  return std::string(kLoopScheme) + name;
}

void LoopbackNetwork::unbind(const std::string& name) {
  std::lock_guard lock(mutex_);
  handlers_.erase(name);
}

Reply LoopbackNetwork::do_send(const std::string& endpoint, Method method, std::string_view path,
                               std::string_view body) {
  if (endpoint.rfind(kLoopScheme, 0) != 0) {
    throw Error(Errc::network_error, "not a loopback endpoint: " + endpoint);
  }
  std::shared_ptr<Handler> handler;
  {
    std::lock_guard lock(mutex_);
    auto it = handlers_.find(endpoint.substr(kLoopScheme.size()));
    if (it == handlers_.end()) throw Error(Errc::network_error, "unreachable: " + endpoint);
    handler = it->second;
  }
  if (const auto us = latency_us_.load(); us > 0) {
    std::this_thread::sleep_for(std::chrono::microseconds(us));
  }
  return handler->handle(method, path, body);
}

Reply HttpTransport::do_send(const std::string& endpoint, Method method, std::string_view path,
                             std::string_view body) {
  if (endpoint.rfind("http://", 0) != 0) {
    throw Error(Errc::network_error, "unsupported endpoint scheme: " + endpoint);
  }
  httplib::Client client(endpoint);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Result res = method == Method::get
                            ? client.Get(std::string(path))
                            : client.Post(std::string(path), std::string(body), std::string(kContentType));
  if (!res) {
    throw Error(Errc::network_error, endpoint + ": " + httplib::to_string(res.error()));
  }
  return Reply{res->status, res->body};
}

HttpServer::HttpServer(std::shared_ptr<Handler> handler, const std::string& host, int port)
    : handler_(std::move(handler)), server_(std::make_unique<httplib::Server>()), host_(host) {
  auto serve = [this](Method method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      auto reply = handler_->handle(method, req.path, req.body);
      res.status = reply.status;
      if (!reply.body.empty()) res.set_content(reply.body, std::string(kContentType));
    };
  };
  server_->Post(R"(/.*)", serve(Method::post));
  server_->Get(R"(/.*)", serve(Method::get));
  server_->set_payload_max_length(kMaxMessageBytes * 2);

  port_ = port == 0 ? server_->bind_to_any_port(host_) : (server_->bind_to_port(host_, port) ? port : -1);
  if (port_ <= 0) throw Error(Errc::network_error, "cannot bind " + host_ + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

HttpServer::~HttpServer() { stop(); }

std::string HttpServer::endpoint() const { return "http://" + host_ + ":" + std::to_string(port_); }

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void Router::add(Method method, std::string path, MessageType response_type, Fn fn) {
  routes_[{method, std::move(path)}] = Route{response_type, std::move(fn)};
}

Reply Router::handle(Method method, std::string_view path, std::string_view body) {
  auto it = routes_.find({method, std::string(path)});
  if (it == routes_.end()) return Reply{404, {}};
  const auto& route = it->second;
  try {
    Envelope request;
    if (method == Method::post) request = decode(body);
    return Reply{200, encode(route.fn(request))};
  } catch (const Error& e) {
    return Reply{400, encode(Envelope::failure(route.response_type, e))};
  } catch (const std::exception& e) {
    return Reply{500, encode(Envelope::failure(route.response_type, Errc::internal, e.what()))};
  }
}

Envelope round_trip(Transport& transport, const std::string& endpoint, Method method, std::string_view path,
                    const Envelope* request) {
  const std::string body = request != nullptr ? encode(*request) : std::string{};
  return decode(transport.send(endpoint, method, path, body));
}

}  // namespace prima::wire
