#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "defectspec/error.hpp"

namespace defectspec::cli {

/// Rejects keys outside `allowed`, so typos in config files surface as schema errors.
inline void check_keys(const nlohmann::json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw Error(ErrorKind::schema, std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::schema, "unknown key '" + key + "' in " + std::string(where));
  }
}

template <class T>
T value_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::schema, std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T required(const nlohmann::json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) throw Error(ErrorKind::schema, "missing '" + std::string(key) + "' in " + std::string(where));
  return value_or<T>(j, key, T{});
}

}  // namespace defectspec::cli
