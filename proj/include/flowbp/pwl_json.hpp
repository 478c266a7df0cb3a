#pragma once

// JSON form of a PwlConvex:
//   {"breakpoints": ["-inf", 0, 3, "inf"], "slopes": [-1, 2, 5], "anchor": [0, 4]}
// Numbers that do not fit in 64 bits are written as decimal strings.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowbp/pwl.hpp"

namespace flowbp {

template <class I>
nlohmann::json int_to_json(const I& v) {
  BigInt b = to_big(v);
  if (fits_int64(b)) return nlohmann::json(to_int64(b));
  return nlohmann::json(b.str());
}

template <class I>
I int_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return int_from<I>(BigInt(j.get<Int>()));
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.empty() || s.find_first_not_of("-0123456789") != std::string::npos) {
      throw Error(Errc::kSyntaxError, "not an integer: " + s);
    }
    return int_from<I>(BigInt(s));
  }
  throw Error(Errc::kSyntaxError, "expected an integer, got " + j.dump());
}

template <class I>
nlohmann::json to_json(const PwlConvex<I>& f) {
  nlohmann::json bps = nlohmann::json::array();
  for (const auto& b : f.breakpoints()) {
    if (b.is_neg_inf()) {
      bps.push_back("-inf");
    } else if (b.is_pos_inf()) {
      bps.push_back("inf");
    } else {
      bps.push_back(int_to_json(b.value()));
    }
  }
  nlohmann::json slopes = nlohmann::json::array();
  for (const auto& s : f.slopes()) slopes.push_back(int_to_json(s));
  const auto [ax, ay] = f.anchor();
  return {{"breakpoints", bps}, {"slopes", slopes},
          {"anchor", nlohmann::json::array({int_to_json(ax), int_to_json(ay)})}};
}

template <class I>
PwlConvex<I> pwl_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("slopes") ||
      !j.contains("anchor")) {
    throw Error(Errc::kSyntaxError, "piecewise function needs breakpoints, slopes and anchor");
  }
  std::vector<ExtendedInt<I>> bps;
  for (const auto& b : j.at("breakpoints")) {
    if (b == "-inf") {
      bps.push_back(ExtendedInt<I>::neg_inf());
    } else if (b == "inf" || b == "+inf") {
      bps.push_back(ExtendedInt<I>::pos_inf());
    } else {
      bps.emplace_back(int_from_json<I>(b));
    }
  }
  std::vector<I> slopes;
  for (const auto& s : j.at("slopes")) slopes.push_back(int_from_json<I>(s));
  const auto& a = j.at("anchor");
  if (!a.is_array() || a.size() != 2) throw Error(Errc::kSyntaxError, "anchor must be [x, value]");
  return PwlConvex<I>::construct(bps, slopes, int_from_json<I>(a[0]), int_from_json<I>(a[1]));
}

}  // namespace flowbp
