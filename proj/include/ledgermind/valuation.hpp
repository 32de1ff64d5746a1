#pragma once

// Accounting evaluation parameters: input value (acquisition and
// production cost), issue costing of stock lots (WAC, FIFO, LIFO), net
// accounting value, present (actualized) value, net realizable value,
// residual value, use value and recoverable value.
//
// All arithmetic is exact; results are rounded half-up to the cent once,
// at the end of each operation.

#include <algorithm>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ledgermind/decimal.hpp"
#include "ledgermind/error.hpp"

namespace ledgermind::valuation {

struct Lot {
  int seq = 0;
  Decimal quantity;
  Decimal unit_cost;
  friend bool operator==(const Lot&, const Lot&) = default;
};

class LotLedger {
 public:
  LotLedger() = default;
  explicit LotLedger(std::vector<Lot> lots) : lots_(std::move(lots)) {
    for (std::size_t i = 0; i < lots_.size(); ++i) {
      if (lots_[i].quantity.sign() < 0) throw Error(Errc::negative_component, "lot " + std::to_string(lots_[i].seq) + " has a negative quantity");
      if (lots_[i].unit_cost.sign() < 0) throw Error(Errc::negative_component, "lot " + std::to_string(lots_[i].seq) + " has a negative unit cost");
      if (i > 0 && lots_[i].seq <= lots_[i - 1].seq) throw Error(Errc::invalid_number, "lot sequence numbers must increase");
    }
  }

  const std::vector<Lot>& lots() const { return lots_; }
  bool empty() const { return lots_.empty(); }

  Decimal total_quantity() const {
    Decimal q;
    for (const auto& l : lots_) q += l.quantity;
    return q;
  }

  Rational exact_value() const {
    Rational v = 0;
    for (const auto& l : lots_) v += (l.quantity * l.unit_cost).to_rational();
    return v;
  }

  Money value() const { return Money::from_rational(exact_value()); }

  friend bool operator==(const LotLedger&, const LotLedger&) = default;

 private:
  std::vector<Lot> lots_;
};

enum class IssueMethod { wac, fifo, lifo };

inline std::optional<IssueMethod> parse_issue_method(std::string_view text) {
  if (text == "WAC" || text == "wac") return IssueMethod::wac;
  if (text == "FIFO" || text == "fifo") return IssueMethod::fifo;
  if (text == "LIFO" || text == "lifo") return IssueMethod::lifo;
  return std::nullopt;
}

struct IssueResult {
  Money cost;
  LotLedger remaining;
};

// Digits kept on the unit cost of the collapsed WAC lot.
inline constexpr unsigned wac_unit_cost_scale = 12;

inline IssueResult issue_cost(const LotLedger& ledger, const Decimal& quantity, IssueMethod method) {
  if (quantity.sign() < 0) throw Error(Errc::negative_component, "issue quantity is negative");
  Decimal on_hand = ledger.total_quantity();
  if (quantity > on_hand) {
    throw Error(Errc::insufficient_quantity, "issuing " + quantity.to_string() + " units from " + on_hand.to_string() + " on hand");
  }
  if (quantity.is_zero()) return IssueResult{Money{}, ledger};

  if (method == IssueMethod::wac) {
    Rational average = ledger.exact_value() / on_hand.to_rational();
    Money cost = Money::from_rational(quantity.to_rational() * average);
    Decimal left = (on_hand - quantity).normalized();
    std::vector<Lot> rest;
    if (!left.is_zero()) {
      int seq = ledger.lots().back().seq;
      rest.push_back(Lot{seq, left, Decimal::from_rational(average, wac_unit_cost_scale).normalized()});
    }
    return IssueResult{cost, LotLedger(std::move(rest))};
  }

  std::vector<Lot> lots = ledger.lots();
  if (method == IssueMethod::lifo) std::reverse(lots.begin(), lots.end());
  Rational consumed = 0;
  Decimal needed = quantity;
  std::vector<Lot> rest;
  for (auto& lot : lots) {
    if (needed.is_zero()) {
      if (!lot.quantity.is_zero()) rest.push_back(lot);
      continue;
    }
    Decimal take = lot.quantity < needed ? lot.quantity : needed;
    consumed += (take * lot.unit_cost).to_rational();
    needed -= take;
    Decimal left = (lot.quantity - take).normalized();
    if (!left.is_zero()) rest.push_back(Lot{lot.seq, left, lot.unit_cost});
  }
  if (method == IssueMethod::lifo) std::reverse(rest.begin(), rest.end());
  return IssueResult{Money::from_rational(consumed), LotLedger(std::move(rest))};
}

namespace detail {

inline void require_non_negative(Money m, const char* what) {
  if (m.is_negative()) throw Error(Errc::negative_component, std::string(what) + " is negative");
}

}  // namespace detail

// Price (net of recoverable VAT) plus irrecoverable taxes, transport and
// accessory expenses.
inline Money acquisition_cost(Money price, Money irrecoverable_taxes, Money transport, Money accessory) {
  detail::require_non_negative(price, "acquisition price");
  detail::require_non_negative(irrecoverable_taxes, "irrecoverable taxes");
  detail::require_non_negative(transport, "transport expenses");
  detail::require_non_negative(accessory, "accessory expenses");
  return price + irrecoverable_taxes + transport + accessory;
}

// Raw materials and other direct costs plus the allocated share of indirect
// production cost. Administration, financial and unpacking costs stay out.
inline Money production_cost(Money raw_materials, Money other_direct, Money indirect_total, const Decimal& allocation_fraction) {
  detail::require_non_negative(raw_materials, "raw materials cost");
  detail::require_non_negative(other_direct, "other direct cost");
  detail::require_non_negative(indirect_total, "indirect cost");
  if (allocation_fraction.sign() < 0 || allocation_fraction > Decimal(1)) {
    throw Error(Errc::fraction_out_of_range, "allocation fraction " + allocation_fraction.to_string() + " outside [0, 1]");
  }
  Rational total = raw_materials.to_rational() + other_direct.to_rational() +
                   indirect_total.to_rational() * allocation_fraction.to_rational();
  return Money::from_rational(total);
}

inline Money net_accounting_value(Money input_value, const std::vector<Money>& depreciations) {
  detail::require_non_negative(input_value, "input value");
  Money total;
  for (Money d : depreciations) {
    detail::require_non_negative(d, "depreciation");
    total += d;
  }
  if (total > input_value) {
    throw Error(Errc::over_depreciated, "depreciations " + total.to_string() + " exceed input value " + input_value.to_string());
  }
  return input_value - total;
}

struct CashFlow {
  int period = 0;
  Money amount;
};

struct CashFlowSchedule {
  std::vector<CashFlow> flows;
  Decimal rate;  // per period

  CashFlowSchedule() = default;
  CashFlowSchedule(std::vector<CashFlow> f, Decimal r) : flows(std::move(f)), rate(std::move(r)) {
    if (rate.sign() < 0) throw Error(Errc::out_of_range, "discount rate is negative");
    for (std::size_t i = 0; i < flows.size(); ++i) {
      if (flows[i].period < 1) throw Error(Errc::period_inconsistent, "cash-flow periods start at 1");
      if (i > 0 && flows[i].period <= flows[i - 1].period) throw Error(Errc::period_inconsistent, "cash-flow periods must increase");
    }
  }
};

namespace detail {

inline Rational discount_factor(const Decimal& rate, int period) {
  Rational base = 1 + rate.to_rational();
  Rational f = 1;
  for (int i = 0; i < period; ++i) f *= base;
  return 1 / f;
}

inline Rational exact_present_value(const CashFlowSchedule& schedule) {
  Rational sum = 0;
  for (const auto& f : schedule.flows) sum += f.amount.to_rational() * discount_factor(schedule.rate, f.period);
  return sum;
}

inline Rational exact_use_value(const CashFlowSchedule& schedule, int end_of_life_period, Money residual) {
  if (!schedule.flows.empty() && end_of_life_period < schedule.flows.back().period) {
    throw Error(Errc::period_inconsistent, "end of useful life precedes the last cash flow");
  }
  if (end_of_life_period < 0) throw Error(Errc::period_inconsistent, "end of useful life is negative");
  return exact_present_value(schedule) + residual.to_rational() * discount_factor(schedule.rate, end_of_life_period);
}

}  // namespace detail

inline Money present_value(const CashFlowSchedule& schedule) { return Money::from_rational(detail::exact_present_value(schedule)); }

// Negative results are returned as they are: they signal a loss-making sale.
inline Money net_realizable_value(Money sell_price, Money sale_costs) {
  detail::require_non_negative(sell_price, "sell price");
  detail::require_non_negative(sale_costs, "sale costs");
  return sell_price - sale_costs;
}

struct ResidualValue {
  Money value;
  bool floored = false;  // cease costs exceeded the proceeds
};

inline ResidualValue residual_value(Money cease_proceeds, Money cease_costs) {
  detail::require_non_negative(cease_proceeds, "cease proceeds");
  detail::require_non_negative(cease_costs, "cease costs");
  Money net = cease_proceeds - cease_costs;
  if (net.is_negative()) return ResidualValue{Money{}, true};
  return ResidualValue{net, false};
}

inline Money use_value(const CashFlowSchedule& schedule, int end_of_life_period, Money residual) {
  return Money::from_rational(detail::exact_use_value(schedule, end_of_life_period, residual));
}

// Same computation as use_value; kept as its own parameter.
inline Money recoverable_value(const CashFlowSchedule& schedule, int end_of_life_period, Money residual) {
  return Money::from_rational(detail::exact_use_value(schedule, end_of_life_period, residual));
}

// ---------------------------------------------------------------------------
// Lot ledger CSV: header `seq,quantity,unit_cost`, one lot per row.

inline LotLedger read_lot_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
  };
  bool header = false;
  std::vector<Lot> lots;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!header) {
      if (cells != std::vector<std::string>{"seq", "quantity", "unit_cost"}) {
        throw Error(Errc::parse_failure, "line 1: expected header 'seq,quantity,unit_cost'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 3) throw Error(Errc::parse_failure, "line " + std::to_string(line_no) + ": expected 3 fields");
    Lot lot;
    try {
      std::size_t used = 0;
      lot.seq = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw Error(Errc::invalid_number, cells[0]);
    } catch (const std::logic_error&) {
      throw Error(Errc::parse_failure, "line " + std::to_string(line_no) + ": bad seq '" + cells[0] + "'");
    }
    lot.quantity = Decimal::parse(cells[1]);
    lot.unit_cost = Decimal::parse(cells[2]);
    lots.push_back(std::move(lot));
  }
  if (!header) throw Error(Errc::parse_failure, "missing header 'seq,quantity,unit_cost'");
  return LotLedger(std::move(lots));
}

inline std::string write_lot_csv(const LotLedger& ledger) {
  std::string out = "seq,quantity,unit_cost\n";
  for (const auto& l : ledger.lots()) out += std::to_string(l.seq) + "," + l.quantity.to_string() + "," + l.unit_cost.to_string() + "\n";
  return out;
}

}  // namespace ledgermind::valuation
