// Copyright 2026 The Probe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// HTTP transport for the backend wire protocol: a client-side BackendService
// and the matching server routes (used by `probe serve-mock` and tests).

#include <chrono>
#include <memory>
#include <string>
#include <utility>

#include "httplib.h"

#include "probe/backend.hpp"

namespace probe {

class HttpService final : public BackendService {
 public:
  explicit HttpService(const std::string& endpoint,
                       std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
    std::string origin;
    if (!split_url(endpoint, &origin, &base_path_)) {
      throw ConfigError("invalid backend endpoint '" + endpoint + "'");
    }
    origin_ = origin;
    timeout_ = timeout;
  }

  std::vector<Generation> generate(const GenerationRequest& request) override {
    return post(protocol::kGeneratePath, protocol::encode(request));
  }

  std::vector<Generation> translate(const TranslationRequest& request) override {
    return post(protocol::kTranslatePath, protocol::encode(request));
  }

 private:
  std::vector<Generation> post(std::string_view path, const std::string& body) const {
    // httplib::Client is not safe to share across threads; one per call.
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    const std::string full = base_path_ + std::string(path);
    auto res = client.Post(full, body, "application/json");
    if (!res) {
      throw TransportError("POST " + origin_ + full + ": " + httplib::to_string(res.error()));
    }
    if (res->status == 200) return protocol::decode_candidates(res->body);
    const std::string message = protocol::decode_error(res->body);
    if (res->status == 429 || res->status >= 500) {
      throw TransportError("POST " + origin_ + full + ": HTTP " + std::to_string(res->status) +
                           ": " + message);
    }
    throw ConfigError("POST " + origin_ + full + " rejected (HTTP " +
                      std::to_string(res->status) + "): " + message);
  }

  std::string origin_;
  std::string base_path_;
  std::chrono::milliseconds timeout_{};
};

/// Serves /v1/generate and /v1/translate from `service`. Malformed bodies
/// answer 400, unsupported requests 422, service failures 503.
inline void mount_protocol_routes(httplib::Server& server, std::shared_ptr<BackendService> service) {
  auto handle = [service](auto decode, auto call) {
    return [service, decode, call](const httplib::Request& req, httplib::Response& res) {
      try {
        auto request = decode(req.body);
        request.validate();
        res.set_content(protocol::encode(call(*service, request)), "application/json");
      } catch (const ProtocolError& e) {
        res.status = 400;
        res.set_content(protocol::encode_error(e.what()), "application/json");
      } catch (const TransportError& e) {
        res.status = 503;
        res.set_content(protocol::encode_error(e.what()), "application/json");
      } catch (const Error& e) {
        res.status = 422;
        res.set_content(protocol::encode_error(e.what()), "application/json");
      }
    };
  };
  server.Post(std::string(protocol::kGeneratePath),
              handle(protocol::decode_generation_request,
                     [](BackendService& s, const GenerationRequest& r) { return s.generate(r); }));
  server.Post(std::string(protocol::kTranslatePath),
              handle(protocol::decode_translation_request,
                     [](BackendService& s, const TranslationRequest& r) { return s.translate(r); }));
}

/// Backend talking the wire protocol to `descriptor.endpoint`.
inline Backend http_backend(BackendDescriptor descriptor, RetryPolicy retry = {},
                            int max_in_flight = kDefaultMaxInFlight) {
  auto service = std::make_shared<HttpService>(descriptor.endpoint);
  return Backend(std::move(descriptor), std::move(service), retry, max_in_flight);
}

}  // namespace probe
