#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "coapids/error.hpp"

namespace coapids::detail {

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  out << j.dump(1) << '\n';
  if (!out) throw Error(Errc::io, "write failed for '" + path.string() + "'");
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_model, "'" + path.string() + "' is not JSON: " + e.what());
  }
}

}  // namespace coapids::detail
