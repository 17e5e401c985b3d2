// octserve: HTTP API over a directory of datasets.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>

#include "octlayers/service.hpp"

namespace {
octlayers::HttpServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OCT layer analytics HTTP service"};
  std::string data, host = "127.0.0.1";
  int port = 8080;
  app.add_option("--data", data, "Data root (datasets or cohort directories)")->required();
  app.add_option("--host", host, "Bind address")->capture_default_str();
  app.add_option("--port", port, "Port (0 = any free port)")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    octlayers::ApiService api(data);
    octlayers::HttpServer server(api);
    const int bound = server.bind(host, port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::printf("listening on http://%s:%d\n", host.c_str(), bound);
    std::fflush(stdout);
    server.listen();
    g_server = nullptr;
  } catch (const octlayers::ApiError& e) {
    std::cerr << e.body().dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 4;
  }
  return 0;
}
