#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "daimon/common/errors.hpp"

namespace daimon::chain {

/// Ledger token amount: 12-decimal fixed point. Conversion from a real
/// rewards value rounds half to even (the default FP rounding mode used by
/// nearbyint).
struct TokenAmount {
  static constexpr std::int64_t kScale = 1'000'000'000'000;  // 1e12

  std::int64_t units = 0;

  static TokenAmount from_real(double v) {
    if (!std::isfinite(v)) throw ContractViolation("TokenAmount: non-finite value");
    return {static_cast<std::int64_t>(std::nearbyint(v * static_cast<double>(kScale)))};
  }

  double to_real() const { return static_cast<double>(units) / static_cast<double>(kScale); }

  std::string to_string() const {
    std::int64_t whole = units / kScale;
    std::int64_t frac = units % kScale;
    std::string sign;
    if (frac < 0) frac = -frac;
    if (units < 0 && whole == 0) sign = "-";
    std::string f = std::to_string(frac);
    return sign + std::to_string(whole) + "." + std::string(12 - f.size(), '0') + f;
  }

  TokenAmount& operator+=(TokenAmount o) {
    units += o.units;
    return *this;
  }

  friend TokenAmount operator+(TokenAmount a, TokenAmount b) { return {a.units + b.units}; }
  auto operator<=>(const TokenAmount&) const = default;
};

}  // namespace daimon::chain
