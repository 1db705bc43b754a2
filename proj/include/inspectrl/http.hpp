#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace inspectrl {

// "http://host:port/prefix" split into its parts.
struct HttpEndpoint {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
  std::string path_prefix;       // e.g. "/v1", never ending in '/'

  static HttpEndpoint parse(std::string_view url);
  std::string url(std::string_view path) const { return scheme_host_port + path_prefix + std::string(path); }
};

struct HttpReply {
  int status = 0;
  std::string body;
};

// POSTs a JSON body. Transport failures throw ProviderError (Connection or
// Timeout); any HTTP status is returned to the caller.
HttpReply http_post_json(const HttpEndpoint& endpoint, std::string_view path, const std::string& body,
                         std::chrono::milliseconds timeout, const std::string& bearer_token = {});

}  // namespace inspectrl
