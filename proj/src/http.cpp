#include "inspectrl/http.hpp"

#include <httplib.h>

#include "inspectrl/errors.hpp"

namespace inspectrl {

HttpEndpoint HttpEndpoint::parse(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http") {
    throw InputFormatError("endpoint must be an http:// URL, got '" + std::string(url) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  HttpEndpoint ep;
  ep.scheme_host_port = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) {
    ep.path_prefix = std::string(url.substr(path_start));
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  }
  if (ep.scheme_host_port.size() <= scheme_end + 3) throw InputFormatError("endpoint has no host");
  return ep;
}

HttpReply http_post_json(const HttpEndpoint& endpoint, std::string_view path, const std::string& body,
                         std::chrono::milliseconds timeout, const std::string& bearer_token) {
  httplib::Client client(endpoint.scheme_host_port);
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  if (!bearer_token.empty()) client.set_bearer_token_auth(bearer_token);

  const std::string full_path = endpoint.path_prefix + std::string(path);
  auto res = client.Post(full_path, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const std::string msg = "POST " + endpoint.url(path) + " failed: " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw ProviderError(ProviderError::Kind::Timeout, msg);
    }
    throw ProviderError(ProviderError::Kind::Connection, msg);
  }
  return HttpReply{res->status, res->body};
}

}  // namespace inspectrl
