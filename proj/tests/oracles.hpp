#pragma once

// Independent reference computations for the valuation calculators.

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "ledgermind/valuation.hpp"

namespace oracle {

using namespace ledgermind;
using namespace ledgermind::valuation;

// Unit-by-unit simulation over expanded lots, independent of issue_cost.
struct Simulated {
  Rational cost = 0;
  std::vector<std::pair<int, Rational>> remaining;  // seq, quantity
};

inline Simulated simulate(const LotLedger& ledger, const Rational& qty, IssueMethod method) {
  std::vector<std::pair<int, std::pair<Rational, Rational>>> lots;  // seq -> (qty, unit cost)
  for (const auto& l : ledger.lots()) lots.push_back({l.seq, {l.quantity.to_rational(), l.unit_cost.to_rational()}});
  Simulated out;
  if (qty == 0) {
    for (auto& [seq, qc] : lots) out.remaining.push_back({seq, qc.first});
    return out;
  }
  Rational left = qty;
  if (method == IssueMethod::wac) {
    Rational total_q = 0, total_v = 0;
    for (auto& [seq, qc] : lots) {
      total_q += qc.first;
      total_v += qc.first * qc.second;
    }
    out.cost = total_v * qty / total_q;
    return out;
  }
  // Take the smallest step that either finishes the issue or a lot.
  while (left > 0) {
    auto it = method == IssueMethod::fifo
                  ? std::find_if(lots.begin(), lots.end(), [](const auto& l) { return l.second.first > 0; })
                  : std::find_if(lots.rbegin(), lots.rend(), [](const auto& l) { return l.second.first > 0; }).base() - 1;
    Rational step = std::min(left, it->second.first);
    out.cost += step * it->second.second;
    it->second.first -= step;
    left -= step;
  }
  for (auto& [seq, qc] : lots) {
    if (qc.first > 0) out.remaining.push_back({seq, qc.first});
  }
  return out;
}


// Cents of an exact amount, half-up with ties away from zero.
inline std::int64_t cents_half_up(const Rational& amount) {
  Rational scaled = abs(amount) * 100;
  BigInt whole = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
  Rational rest = scaled - Rational(whole);
  if (rest * 2 >= 1) whole += 1;
  std::int64_t c = whole.convert_to<std::int64_t>();
  return amount < 0 ? -c : c;
}

// Sum of amount / (1 + rate)^period, term by term.
inline Rational discounted(const std::vector<std::pair<int, Rational>>& flows, const Rational& rate) {
  Rational total = 0;
  for (const auto& [period, amount] : flows) {
    Rational factor = 1;
    for (int t = 0; t < period; ++t) factor *= 1 + rate;
    total += amount / factor;
  }
  return total;
}

}  // namespace oracle
