#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "common/error.hpp"

namespace ponlab::json_util {

// Reads known keys into fields and rejects anything else, so typos in
// configuration files fail loudly instead of silently using defaults.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string section) : j_(j), section_(std::move(section)) {
    require(j_.is_object(), ErrorCode::kInvalidArgument, "config section '" + section_ + "' must be an object");
  }

  template <typename T>
  Reader& field(const char* key, T& out) {
    known_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->template get<T>();
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kInvalidArgument, "config key " + section_ + "." + key + ": " + e.what());
      }
    }
    return *this;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(known_.count(it.key()) > 0, ErrorCode::kInvalidArgument,
              "unknown config key " + section_ + "." + it.key());
  }

 private:
  const nlohmann::json& j_;
  std::string section_;
  std::set<std::string> known_;
};

} // namespace ponlab::json_util
