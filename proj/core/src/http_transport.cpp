#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <regex>

#include "sttest/llm.hpp"

namespace sttest {

HttpResponse http_post(const HttpRequest& request) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  HttpResponse out;
  if (!std::regex_match(request.url, m, url_re)) {
    out.failure = HttpResponse::Failure::Connection;
    out.error = "malformed endpoint URL '" + request.url + "'";
    return out;
  }
  httplib::Client cli(m[1].str());
  const auto sec = static_cast<time_t>(request.timeout_ms / 1000);
  const auto usec = static_cast<time_t>((request.timeout_ms % 1000) * 1000);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : request.headers) {
    if (k == "Content-Type") content_type = v;
    else headers.emplace(k, v);
  }
  const std::string path = m[2].matched ? m[2].str() : "/";
  auto res = cli.Post(path, headers, request.body, content_type);
  if (!res) {
    const auto err = res.error();
    out.failure = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                   err == httplib::Error::Write)
                      ? HttpResponse::Failure::Timeout
                      : HttpResponse::Failure::Connection;
    out.error = httplib::to_string(err);
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace sttest
