#include <gtest/gtest.h>

#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"
#include "ledgermind/valuation.hpp"

using namespace ledgermind;
using namespace ledgermind::valuation;

namespace {

Money m(const char* s) { return Money::parse(s); }

LotLedger two_lots() { return LotLedger({Lot{1, 10, 5}, Lot{2, 10, 7}}); }

}  // namespace

TEST(Decimal, ParsesAndPrints) {
  EXPECT_EQ(Decimal::parse("12.340").to_string(), "12.340");
  EXPECT_EQ(Decimal::parse("-0.5").to_string(), "-0.5");
  EXPECT_EQ(Decimal::parse("007").to_string(), "7");
  EXPECT_THROW(Decimal::parse("1e3"), Error);
  EXPECT_THROW(Decimal::parse("."), Error);
  EXPECT_THROW(Decimal::parse(""), Error);
}

TEST(Decimal, ExactArithmetic) {
  Decimal a = Decimal::parse("0.1"), b = Decimal::parse("0.2");
  EXPECT_EQ(a + b, Decimal::parse("0.3"));
  EXPECT_EQ((Decimal::parse("1.5") * Decimal::parse("1.5")).to_string(), "2.25");
  EXPECT_LT(Decimal::parse("1.09"), Decimal::parse("1.1"));
}

TEST(Money, RoundsHalfUpAwayFromZero) {
  EXPECT_EQ(Money::parse("1.005").to_string(), "1.01");
  EXPECT_EQ(Money::parse("1.004999").to_string(), "1.00");
  EXPECT_EQ(Money::parse("-1.005").to_string(), "-1.01");
  EXPECT_EQ(Money::parse("2.5").to_string(), "2.50");
  EXPECT_EQ(Money::from_rational(Rational(1, 3)).to_string(), "0.33");
  EXPECT_EQ(Money::from_rational(Rational(2, 3)).to_string(), "0.67");
}

TEST(Money, AlwaysTwoFractionDigits) {
  gen::Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    Money x = Money::from_cents(rng.uniform(-1000000, 1000000));
    std::string s = x.to_string();
    ASSERT_EQ(s.size() - s.find('.'), 3u) << s;
    EXPECT_EQ(Money::parse(s), x);
  }
}

TEST(AcquisitionCost, SumsComponents) {
  EXPECT_EQ(acquisition_cost(m("1000"), m("50"), m("30"), m("20")).to_string(), "1100.00");
  EXPECT_EQ(acquisition_cost(m("0"), m("0"), m("0"), m("0")).to_string(), "0.00");
  try {
    acquisition_cost(m("-1"), m("0"), m("0"), m("0"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::negative_component);
  }
}

TEST(ProductionCost, AllocatesIndirectShare) {
  EXPECT_EQ(production_cost(m("500"), m("200"), m("300"), Decimal::parse("0.5")).to_string(), "850.00");
  EXPECT_EQ(production_cost(m("12.34"), m("5.66"), m("999"), 0), m("18.00"));
  EXPECT_EQ(production_cost(m("0"), m("0"), m("100"), Decimal::parse("1.0")).to_string(), "100.00");
  EXPECT_EQ(production_cost(m("0"), m("0"), m("0.01"), Decimal::parse("0.5")).to_string(), "0.01");
  try {
    production_cost(m("1"), m("1"), m("1"), Decimal::parse("1.01"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::fraction_out_of_range);
  }
  EXPECT_THROW(production_cost(m("1"), m("-1"), m("1"), 0), Error);
}

TEST(NetAccountingValue, SubtractsDepreciations) {
  EXPECT_EQ(net_accounting_value(m("1000"), {m("200"), m("100")}).to_string(), "700.00");
  EXPECT_EQ(net_accounting_value(m("1000"), {}).to_string(), "1000.00");
  try {
    net_accounting_value(m("100"), {m("150")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::over_depreciated);
  }
}

TEST(NetRealizableValue, MayBeNegative) {
  EXPECT_EQ(net_realizable_value(m("100"), m("8")).to_string(), "92.00");
  EXPECT_EQ(net_realizable_value(m("42.17"), m("0")), m("42.17"));
  EXPECT_EQ(net_realizable_value(m("5"), m("8")).to_string(), "-3.00");
}

TEST(ResidualValue, FloorsAtZeroWithFlag) {
  auto a = residual_value(m("50"), m("10"));
  EXPECT_EQ(a.value.to_string(), "40.00");
  EXPECT_FALSE(a.floored);
  auto b = residual_value(m("10"), m("10"));
  EXPECT_EQ(b.value.to_string(), "0.00");
  EXPECT_FALSE(b.floored);
  auto c = residual_value(m("5"), m("10"));
  EXPECT_EQ(c.value.to_string(), "0.00");
  EXPECT_TRUE(c.floored);
}

TEST(PresentValue, DiscountsEachFlow) {
  Decimal ten = Decimal::parse("0.10"), five = Decimal::parse("0.05");
  EXPECT_EQ(present_value(CashFlowSchedule({{1, m("110")}}, ten)).to_string(), "100.00");
  EXPECT_EQ(present_value(CashFlowSchedule({{1, m("10.01")}, {3, m("20")}, {4, m("0.99")}}, 0)).to_string(), "31.00");
  // 100/1.05 + 100/1.05^2 = 95.238095... + 90.702947... = 185.941043...
  EXPECT_EQ(present_value(CashFlowSchedule({{1, m("100")}, {2, m("100")}}, five)).to_string(), "185.94");
}

TEST(PresentValue, RoundsOnlyTheFinalSum) {
  // 0.01/2 + 0.02/4 = 0.005 + 0.005; rounding each term first would give 0.02.
  EXPECT_EQ(present_value(CashFlowSchedule({{1, m("0.01")}, {2, m("0.02")}}, 1)).to_string(), "0.01");
}

TEST(PresentValue, MonotoneDecreasingInRate) {
  gen::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<CashFlow> flows;
    int period = 0;
    for (int k = 0, n = rng.uniform(1, 8); k < n; ++k) flows.push_back({period += rng.uniform(1, 3), Money::from_cents(rng.uniform(1, 1000000))});
    Decimal r1(BigInt(rng.uniform(0, 500)), 3);
    Decimal r2 = r1 + Decimal(BigInt(rng.uniform(1, 500)), 3);
    Rational p1 = valuation::detail::exact_present_value(CashFlowSchedule(flows, r1));
    Rational p2 = valuation::detail::exact_present_value(CashFlowSchedule(flows, r2));
    EXPECT_GT(p1, p2);
    EXPECT_GE(present_value(CashFlowSchedule(flows, r1)), present_value(CashFlowSchedule(flows, r2)));
  }
}

TEST(CashFlowSchedule, RejectsBadPeriods) {
  EXPECT_THROW(CashFlowSchedule({{2, m("1")}, {2, m("1")}}, 0), Error);
  EXPECT_THROW(CashFlowSchedule({{0, m("1")}}, 0), Error);
  EXPECT_THROW(CashFlowSchedule({}, -1), Error);
}

TEST(UseValue, AddsDiscountedResidual) {
  Decimal ten = Decimal::parse("0.10"), five = Decimal::parse("0.05");
  EXPECT_EQ(use_value(CashFlowSchedule({{1, m("110")}}, ten), 1, m("0")).to_string(), "100.00");
  EXPECT_EQ(use_value(CashFlowSchedule({}, ten), 1, m("110")).to_string(), "100.00");
  // 100/1.05 + 50/1.05^2 = 95.238095... + 45.351473... = 140.589569...
  Rational oracle = Rational(100) / Rational(105, 100) + Rational(50) / (Rational(105, 100) * Rational(105, 100));
  EXPECT_EQ(Money::from_rational(oracle).to_string(), "140.59");
  EXPECT_EQ(use_value(CashFlowSchedule({{1, m("100")}}, five), 2, m("50")).to_string(), "140.59");
  try {
    use_value(CashFlowSchedule({{3, m("100")}}, five), 2, m("50"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::period_inconsistent);
  }
}

TEST(RecoverableValue, MatchesUseValue) {
  Decimal ten = Decimal::parse("0.10"), five = Decimal::parse("0.05");
  EXPECT_EQ(recoverable_value(CashFlowSchedule({{1, m("110")}}, ten), 1, m("0")).to_string(), "100.00");
  EXPECT_EQ(recoverable_value(CashFlowSchedule({}, ten), 1, m("110")).to_string(), "100.00");
  EXPECT_EQ(recoverable_value(CashFlowSchedule({{1, m("100")}}, five), 2, m("50")).to_string(), "140.59");
  EXPECT_THROW(recoverable_value(CashFlowSchedule({{3, m("1")}}, five), 1, m("0")), Error);
}

TEST(IssueCost, WorkedLedger) {
  auto fifo = issue_cost(two_lots(), 15, IssueMethod::fifo);
  EXPECT_EQ(fifo.cost.to_string(), "85.00");
  EXPECT_EQ(fifo.remaining, LotLedger({Lot{2, 5, 7}}));
  auto lifo = issue_cost(two_lots(), 15, IssueMethod::lifo);
  EXPECT_EQ(lifo.cost.to_string(), "95.00");
  EXPECT_EQ(lifo.remaining, LotLedger({Lot{1, 5, 5}}));
  auto wac = issue_cost(two_lots(), 15, IssueMethod::wac);
  EXPECT_EQ(wac.cost.to_string(), "90.00");
  ASSERT_EQ(wac.remaining.lots().size(), 1u);
  EXPECT_EQ(wac.remaining.lots()[0].quantity, Decimal(5));
  EXPECT_EQ(wac.remaining.lots()[0].unit_cost, Decimal(6));
}

TEST(IssueCost, ZeroQuantityIsIdentity) {
  gen::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    auto ledger = gen::random_ledger(rng);
    for (auto method : {IssueMethod::wac, IssueMethod::fifo, IssueMethod::lifo}) {
      auto r = issue_cost(ledger, 0, method);
      EXPECT_EQ(r.cost.to_string(), "0.00");
      EXPECT_EQ(r.remaining, ledger);
    }
  }
}

TEST(IssueCost, InsufficientQuantity) {
  try {
    issue_cost(two_lots(), 21, IssueMethod::fifo);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::insufficient_quantity);
  }
}

TEST(IssueCost, MatchesUnitSimulator) {
  gen::Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    auto ledger = gen::random_ledger(rng);
    Rational total = ledger.total_quantity().to_rational();
    Decimal qty = Decimal::from_rational(total * Rational(rng.uniform(0, 100), 100), 2);
    if (qty.to_rational() > total) qty = ledger.total_quantity();
    for (auto method : {IssueMethod::wac, IssueMethod::fifo, IssueMethod::lifo}) {
      auto got = issue_cost(ledger, qty, method);
      auto want = oracle::simulate(ledger, qty.to_rational(), method);
      EXPECT_EQ(got.cost, Money::from_rational(want.cost));
      EXPECT_EQ(got.remaining.total_quantity().to_rational(), total - qty.to_rational());
      if (method != IssueMethod::wac) {
        ASSERT_EQ(got.remaining.lots().size(), want.remaining.size());
        for (std::size_t k = 0; k < want.remaining.size(); ++k) {
          EXPECT_EQ(got.remaining.lots()[k].seq, want.remaining[k].first);
          EXPECT_EQ(got.remaining.lots()[k].quantity.to_rational(), want.remaining[k].second);
        }
      }
      std::int64_t drift = (got.cost + got.remaining.value()).cents() - ledger.value().cents();
      EXPECT_LE(std::abs(drift), 1);
    }
  }
}

TEST(IssueCost, MethodsAgreeOnUniformCost) {
  gen::Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    auto base = gen::random_ledger(rng);
    Decimal unit(BigInt(rng.uniform(0, 10000)), 2);
    std::vector<Lot> lots;
    for (auto l : base.lots()) lots.push_back(Lot{l.seq, l.quantity, unit});
    LotLedger ledger(lots);
    Decimal qty = Decimal::from_rational(ledger.total_quantity().to_rational() * Rational(rng.uniform(0, 100), 100), 2);
    if (qty > ledger.total_quantity()) qty = ledger.total_quantity();
    auto w = issue_cost(ledger, qty, IssueMethod::wac);
    auto f = issue_cost(ledger, qty, IssueMethod::fifo);
    auto l = issue_cost(ledger, qty, IssueMethod::lifo);
    EXPECT_EQ(w.cost, f.cost);
    EXPECT_EQ(f.cost, l.cost);
    EXPECT_EQ(w.remaining.value(), f.remaining.value());
    EXPECT_EQ(f.remaining.value(), l.remaining.value());
  }
}

TEST(IssueCost, LifoIsFifoOnReversedLedger) {
  gen::Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    auto ledger = gen::random_ledger(rng);
    std::vector<Lot> reversed = ledger.lots();
    std::reverse(reversed.begin(), reversed.end());
    int seq = 0;
    for (auto& l : reversed) l.seq = ++seq;
    Decimal qty = Decimal::from_rational(ledger.total_quantity().to_rational() * Rational(rng.uniform(0, 100), 100), 2);
    if (qty > ledger.total_quantity()) qty = ledger.total_quantity();
    auto lifo = issue_cost(ledger, qty, IssueMethod::lifo);
    auto fifo = issue_cost(LotLedger(reversed), qty, IssueMethod::fifo);
    EXPECT_EQ(lifo.cost, fifo.cost);
    EXPECT_EQ(lifo.remaining.value(), fifo.remaining.value());
  }
}

TEST(LotLedger, RejectsInvalidLots) {
  EXPECT_THROW(LotLedger({Lot{1, -1, 5}}), Error);
  EXPECT_THROW(LotLedger({Lot{1, 1, -5}}), Error);
  EXPECT_THROW(LotLedger({Lot{2, 1, 5}, Lot{2, 1, 5}}), Error);
}

TEST(LotCsv, RoundTrips) {
  std::istringstream in("seq,quantity,unit_cost\n1,10,5\n2, 2.5 ,7.125\r\n\n");
  auto ledger = read_lot_csv(in);
  ASSERT_EQ(ledger.lots().size(), 2u);
  EXPECT_EQ(ledger.lots()[1].quantity, Decimal::parse("2.5"));
  std::istringstream again(write_lot_csv(ledger));
  EXPECT_EQ(read_lot_csv(again), ledger);
}

TEST(LotCsv, RejectsMalformedInput) {
  std::istringstream no_header("1,10,5\n");
  EXPECT_THROW(read_lot_csv(no_header), Error);
  std::istringstream short_row("seq,quantity,unit_cost\n1,10\n");
  EXPECT_THROW(read_lot_csv(short_row), Error);
  std::istringstream bad_number("seq,quantity,unit_cost\n1,ten,5\n");
  EXPECT_THROW(read_lot_csv(bad_number), Error);
}
