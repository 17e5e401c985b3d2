#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "octlayers/comparison.hpp"
#include "octlayers/control_model.hpp"
#include "octlayers/dataset.hpp"
#include "octlayers/error.hpp"

namespace octlayers {

/// Error with an HTTP status and a stable machine code; serialized as
/// {"code", "message", "detail"}.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message,
           nlohmann::json detail = nullptr);
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }
  nlohmann::json body() const;

  static ApiError from(const Error& e);

 private:
  int status_;
  std::string code_;
  nlohmann::json detail_;
};

/// Transport-independent request handlers. Datasets are read once from the
/// data root: each subdirectory is either a dataset or a cohort directory of
/// datasets. Dataset ids are the ids stored in the data and must be unique.
/// Thread-safe; edits to one session are serialized.
class ApiService {
 public:
  explicit ApiService(const std::filesystem::path& data_root);
  ~ApiService();

  nlohmann::json catalog() const;
  nlohmann::json dataset(const std::string& id) const;
  /// `deviation` names a cohort whose control model the map is compared to.
  nlohmann::json map(const std::string& id, const std::string& layer, const std::string& attribute,
                     const std::optional<std::string>& deviation = std::nullopt) const;
  nlohmann::json bscan(const std::string& id, int iy, const std::optional<std::string>& layer,
                       const std::optional<std::string>& attribute) const;

  nlohmann::json create_session();
  nlohmann::json list_grids(const std::string& session) const;
  /// Body: {dataset | cohort, layer, attribute, sd_threshold?, max_depth?,
  /// min_points?, compare?: {patients, controls, test, alpha, correction}}.
  nlohmann::json create_grid(const std::string& session, const nlohmann::json& body);
  nlohmann::json get_grid(const std::string& session, const std::string& grid) const;
  /// op is "split" or "merge"; body carries {"version": n}.
  nlohmann::json edit_grid(const std::string& session, const std::string& grid,
                           const std::string& cell, const std::string& op,
                           const nlohmann::json& body);

  /// Body: {patients, controls, layer, attribute, mode?, test?, alpha?,
  /// correction?, sd_threshold?, max_depth?}. Identical requests return the
  /// cached bytes.
  std::string compare(const nlohmann::json& body);

  /// Body: {layer, attribute, dataset | (patients, controls), deviation?,
  /// selection: {cells: [...], grid} | {polygon: [[x_mm, y_mm], ...]}}.
  nlohmann::json measure(const std::string& session, const nlohmann::json& body);

  std::size_t compare_cache_size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP binding of ApiService.
class HttpServer {
 public:
  explicit HttpServer(ApiService& service);
  ~HttpServer();

  /// Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace octlayers
