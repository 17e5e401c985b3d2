#include <httplib.h>

#include "octlayers/service.hpp"

namespace octlayers {

using nlohmann::json;

struct HttpServer::Impl {
  ApiService& api;
  httplib::Server server;
  explicit Impl(ApiService& a) : api(a) {}
};

namespace {

void send_json(httplib::Response& res, const std::string& body, int status = 200) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) {
  send_json(res, e.body().dump(), e.status());
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ApiError(400, "bad_request", std::string("body is not valid JSON: ") + e.what());
  }
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

template <typename F>
httplib::Server::Handler wrap(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ApiError& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_error(res, ApiError(500, "internal", e.what()));
    }
  };
}

}  // namespace

HttpServer::HttpServer(ApiService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& s = impl_->server;
  ApiService& api = impl_->api;

  s.Get("/catalog", wrap([&api](const auto&, auto& res) { send_json(res, api.catalog().dump()); }));
  s.Get(R"(/datasets/([^/]+))", wrap([&api](const auto& req, auto& res) {
          send_json(res, api.dataset(req.matches[1]).dump());
        }));
  s.Get(R"(/datasets/([^/]+)/layers/([^/]+)/attributes/([^/]+)/map)",
        wrap([&api](const auto& req, auto& res) {
          send_json(res, api.map(req.matches[1], req.matches[2], req.matches[3],
                                 query(req, "deviation"))
                             .dump());
        }));
  s.Get(R"(/datasets/([^/]+)/bscans/(-?\d+))", wrap([&api](const auto& req, auto& res) {
          int iy = 0;
          try {
            iy = std::stoi(req.matches[2]);
          } catch (const std::exception&) {
            throw ApiError(404, "out_of_range", "bad B-scan index");
          }
          send_json(res, api.bscan(req.matches[1], iy, query(req, "layer"), query(req, "attribute")).dump());
        }));
  s.Post("/sessions", wrap([&api](const auto&, auto& res) {
           send_json(res, api.create_session().dump(), 201);
         }));
  s.Get(R"(/sessions/([^/]+)/grids)", wrap([&api](const auto& req, auto& res) {
          send_json(res, api.list_grids(req.matches[1]).dump());
        }));
  s.Post(R"(/sessions/([^/]+)/grids)", wrap([&api](const auto& req, auto& res) {
           send_json(res, api.create_grid(req.matches[1], parse_body(req)).dump(), 201);
         }));
  s.Get(R"(/sessions/([^/]+)/grids/([^/]+))", wrap([&api](const auto& req, auto& res) {
          send_json(res, api.get_grid(req.matches[1], req.matches[2]).dump());
        }));
  s.Post(R"(/sessions/([^/]+)/grids/([^/]+)/cells/(.+)/(split|merge))",
         wrap([&api](const auto& req, auto& res) {
           send_json(res, api.edit_grid(req.matches[1], req.matches[2], req.matches[3],
                                        req.matches[4], parse_body(req))
                              .dump());
         }));
  s.Post("/compare", wrap([&api](const auto& req, auto& res) {
           send_json(res, api.compare(parse_body(req)));
         }));
  s.Post(R"(/sessions/([^/]+)/measure)", wrap([&api](const auto& req, auto& res) {
           send_json(res, api.measure(req.matches[1], parse_body(req)).dump());
         }));
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty())
      send_error(res, ApiError(404, "not_found", "no such route"));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  if (port == 0) {
    const int p = s.bind_to_any_port(host);
    if (p < 0) throw std::runtime_error("cannot bind " + host);
    return p;
  }
  if (!s.bind_to_port(host, port))
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace octlayers
