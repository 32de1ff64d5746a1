#pragma once

// Certainty-factor combination for the six scoring modes.
//
// Shell policy, per mode:
//   YES/NO, FUZZY   maximum (logical OR on {0,1})
//   0-10, -100/+100 arithmetic mean, except that an endpoint contribution
//                   (absolute uncertainty or absolute certainty) locks the
//                   score at the first such value
//   INCR/DECR       sum, unbounded
//   CUSTOM          left fold of the formula; PREV is the accumulator
//                   (seeded by the first contribution), NEW the next value

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ledgermind/error.hpp"
#include "ledgermind/kb_model.hpp"

namespace ledgermind {

struct CertaintyValue {
  ModeKind mode = ModeKind::zero_10;
  double value = 0;
  bool locked = false;
  friend bool operator==(const CertaintyValue&, const CertaintyValue&) = default;
};

// Left endpoint of the scale: what a choice without evidence is worth.
inline double uncertainty_floor(ModeKind kind) {
  ModeBounds b = bounds(kind);
  return b.bounded ? b.low : 0;
}

// Scores at or below the floor are not listed as solutions.
inline bool above_display_floor(ModeKind kind, double value) {
  if (kind == ModeKind::zero_10) return value >= 1;
  return value > 0;
}

namespace detail {

inline double eval_formula(const Expression& e, double prev, double next, bool& ok) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) return n.value;
        else if constexpr (std::is_same_v<T, TextLit>) {
          ok = false;
          return 0;
        } else if constexpr (std::is_same_v<T, VarRef>) return n.name == "PREV" ? prev : next;
        else if constexpr (std::is_same_v<T, Negate>) return -eval_formula(*n.operand, prev, next, ok);
        else {
          double l = eval_formula(*n.lhs, prev, next, ok);
          double r = eval_formula(*n.rhs, prev, next, ok);
          switch (n.op) {
            case BinaryOp::add: return l + r;
            case BinaryOp::subtract: return l - r;
            case BinaryOp::multiply: return l * r;
            case BinaryOp::divide:
              if (r == 0) ok = false;
              return r == 0 ? 0 : l / r;
          }
          return 0;
        }
      },
      e.node);
}

// Sums in sorted order so that any permutation of the inputs gives the
// same floating-point result.
inline double ordered_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  for (double v : sorted) sum += v;
  return sum;
}

}  // namespace detail

inline CertaintyValue combine_confidences(const CertaintyMode& mode, std::span<const double> contributions) {
  CertaintyValue out;
  out.mode = mode.kind;
  if (contributions.empty()) {
    out.value = uncertainty_floor(mode.kind);
    return out;
  }
  for (double c : contributions) {
    if (!confidence_in_range(mode.kind, c)) {
      throw Error(Errc::out_of_range, "contribution " + format_number(c) + " outside the " + mode_name(mode.kind) + " scale");
    }
  }
  switch (mode.kind) {
    case ModeKind::yes_no:
    case ModeKind::fuzzy: {
      double best = contributions.front();
      for (double c : contributions) best = std::max(best, c);
      out.value = best;
      break;
    }
    case ModeKind::zero_10:
    case ModeKind::minus100_plus100: {
      ModeBounds b = bounds(mode.kind);
      for (double c : contributions) {
        if (c == b.low || c == b.high) {
          out.value = c;
          out.locked = true;
          return out;
        }
      }
      out.value = detail::ordered_sum(contributions) / static_cast<double>(contributions.size());
      // Guard the interval invariant against rounding in the mean.
      out.value = std::clamp(out.value, b.low, b.high);
      break;
    }
    case ModeKind::incr_decr: {
      out.value = detail::ordered_sum(contributions);
      break;
    }
    case ModeKind::custom_formula: {
      double acc = contributions.front();
      for (std::size_t i = 1; i < contributions.size(); ++i) {
        bool ok = true;
        double next = mode.formula ? detail::eval_formula(*mode.formula, acc, contributions[i], ok) : contributions[i];
        // An undefined step (division by zero) leaves the accumulator as it was.
        if (ok && std::isfinite(next)) acc = next;
      }
      out.value = acc;
      break;
    }
  }
  return out;
}

inline CertaintyValue combine_confidences(const CertaintyMode& mode, std::initializer_list<double> contributions) {
  return combine_confidences(mode, std::span<const double>(contributions.begin(), contributions.size()));
}

// "8/10" style rendering against the mode's scale, at most two decimals.
inline std::string format_confidence(ModeKind kind, double value) {
  std::string shown = format_number(std::round(value * 100) / 100);
  switch (kind) {
    case ModeKind::yes_no: return value >= 1 ? "YES" : "NO";
    case ModeKind::zero_10: return shown + "/10";
    case ModeKind::minus100_plus100: return shown + "/100";
    default: return shown;
  }
}

}  // namespace ledgermind
