#pragma once

#include <string>
#include <vector>

#include "daimon/common/strings.hpp"
#include "daimon/numerics/mlp.hpp"
#include "json.hpp"

namespace daimon::numerics {

inline constexpr int kMlpFormatVersion = 1;

namespace detail {

inline nlohmann::json vec_to_json(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(double_to_string(x));
  return a;
}

inline std::vector<double> vec_from_json(const nlohmann::json& a, std::size_t expect,
                                         const char* name) {
  if (!a.is_array() || a.size() != expect)
    throw std::runtime_error(std::string("mlp_from_json: bad '") + name + "' array");
  std::vector<double> v;
  v.reserve(expect);
  for (const auto& e : a) v.push_back(double_from_string(e.get<std::string>()));
  return v;
}

}  // namespace detail

/// JSON document with every value as a shortest round-trip decimal string.
/// Layer order w1, b1, w2, b2; matrices row-major.
inline nlohmann::json mlp_to_json(const MlpParams& p) {
  return {{"format_version", kMlpFormatVersion},
          {"in", p.in},
          {"hidden", p.hidden},
          {"out", p.out},
          {"w1", detail::vec_to_json(p.w1)},
          {"b1", detail::vec_to_json(p.b1)},
          {"w2", detail::vec_to_json(p.w2)},
          {"b2", detail::vec_to_json(p.b2)}};
}

inline MlpParams mlp_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kMlpFormatVersion)
    throw std::runtime_error("mlp_from_json: unsupported format version");
  MlpParams p;
  p.in = j.at("in").get<std::size_t>();
  p.hidden = j.at("hidden").get<std::size_t>();
  p.out = j.at("out").get<std::size_t>();
  p.w1 = detail::vec_from_json(j.at("w1"), p.hidden * p.in, "w1");
  p.b1 = detail::vec_from_json(j.at("b1"), p.hidden, "b1");
  p.w2 = detail::vec_from_json(j.at("w2"), p.out * p.hidden, "w2");
  p.b2 = detail::vec_from_json(j.at("b2"), p.out, "b2");
  return p;
}

}  // namespace daimon::numerics
