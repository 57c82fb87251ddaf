#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "doobkit/csv.hpp"
#include "doobkit/errors.hpp"
#include "doobkit/trees.hpp"

using namespace doobkit;

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    const double back = parse_double(format_double(v));
    if (v == 0.0) {
      EXPECT_EQ(back, 0.0);
    } else {
      ASSERT_EQ(back, v) << format_double(v);
    }
  }
  EXPECT_THROW(parse_double("1.5x"), ValidationError);
  EXPECT_THROW(parse_double(""), ValidationError);
}

TEST(CsvTable, RowWidthChecked) {
  CsvTable t({"a", "b"});
  t.row({"1", "2"});
  EXPECT_THROW(t.row({"1"}), DimensionError);
  EXPECT_EQ(t.str(), "a,b\n1,2\n");
}

TEST(Csv, ProcessLayout) {
  const auto s = tree_walk(binary_tree_filtration(1));
  EXPECT_EQ(process_csv(s), "time,atom,value\n0,0,0\n0,1,0\n1,0,-1\n1,1,1\n");
}

TEST(Csv, AuditLayout) {
  AuditReport r;
  r.trials = 5;
  r.counts[1][1] = 3;
  r.counts[0][0] = 2;
  EXPECT_EQ(audit_csv(r),
            "predictable,natural,count\ntrue,true,3\ntrue,false,0\nfalse,true,0\nfalse,false,2\n");
}

TEST(Csv, TailReportHeader) {
  const auto x = squared(tree_walk(binary_tree_filtration(2)));
  const auto csv = tail_report_csv(epsilon_profile(x, {1.0}));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,chain1,chain2,chain3,chain4,chain5,markov_lhs,markov_rhs");
}
