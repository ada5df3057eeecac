#include <gtest/gtest.h>

#include <numbers>

#include "nugap/index.hpp"
#include "support.hpp"

using namespace nugap;

TEST(MeanMotion, Examples) {
  EXPECT_NEAR(ap_mean_motion(std::vector<Atom>{{1.0, 2.0}}), -2.0, 1e-12);
  EXPECT_NEAR(ap_mean_motion(std::vector<Atom>{{3.0, 0.0}, {1.0, 5.0}}), 0.0, 1e-9);
  EXPECT_NEAR(ap_mean_motion(std::vector<Atom>{{1.0, 0.0}, {2.0, 1.0}}), -1.0, 1e-9);
}

TEST(MeanMotion, EqualModulusPairIsNotInvertible) {
  try {
    ap_mean_motion(std::vector<Atom>{{1.0, 0.0}, {-1.0, 1.0}});
    FAIL() << "expected NOT_INVERTIBLE_AP";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInvertibleAp);
  }
}

TEST(MeanMotion, MatchesRootCount) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const std::vector<Atom> atoms{{c(rng), 0.0}, {c(rng), 0.5}, {c(rng), 1.0}, {c(rng), 1.5}};
    std::vector<double> coeffs;
    for (const Atom& a : atoms) coeffs.push_back(a.coeff);
    bool near_circle = false;
    for (const Complex& r : oracle::eigen_roots(Poly(coeffs))) near_circle |= std::abs(std::abs(r) - 1.0) < 0.05;
    if (near_circle) continue;
    EXPECT_NEAR(ap_mean_motion(atoms), oracle::root_count_mean_motion(atoms, 0.5), 1e-8);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(RelativeWinding, Examples) {
  EXPECT_EQ(relative_winding(LineElement::atom(1.0, 2.0)), 0);
  EXPECT_EQ(relative_winding(LineElement::rational(Poly{-1.0, 1.0}, Poly{1.0, 1.0})), -1);
  const Poly num = Poly{-1.0, 1.0} * Poly{-2.0, 1.0};
  const Poly den = Poly{1.0, 1.0} * Poly{2.0, 1.0};
  EXPECT_EQ(relative_winding(LineElement::rational(num, den)), -2);
}

TEST(RelativeWinding, TraceRecordsUnwrappedPhase) {
  WindingTrace tr;
  const long w = relative_winding(LineElement::rational(Poly{-1.0, 1.0}, Poly{1.0, 1.0}), {}, &tr);
  EXPECT_EQ(w, -1);
  EXPECT_TRUE(tr.certified);
  EXPECT_NEAR(tr.total_turn, -1.0, 0.05);
  ASSERT_GT(tr.samples.size(), 2u);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) EXPECT_LT(tr.samples[i - 1].y, tr.samples[i].y);
}

TEST(RelativeWinding, MatchesPoleZeroCount) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const Poly num = corpus::random_poly(rng, 1 + t % 4, 1.0);
    const Poly den = corpus::random_poly(rng, 1 + t % 4, 1.0);
    if (have_common_root(num, den, 1e-3)) continue;
    EXPECT_EQ(relative_winding(LineElement::rational(num, den)), oracle::pole_zero_winding(num, den));
  }
}

TEST(IndexW, Examples) {
  const IndexPair one = index_W(LineElement::constant(1.0));
  EXPECT_EQ(one.rel_wind, 0);
  EXPECT_NEAR(one.ap_motion, 0.0, 1e-12);
  const IndexPair d = index_W(LineElement::atom(1.0, 1.0));
  EXPECT_NEAR(d.ap_motion, -1.0, 1e-12);
  EXPECT_EQ(d.rel_wind, 0);
  const IndexPair l = index_W(LineElement::rational(Poly{-1.0, 1.0}, Poly{std::numbers::sqrt2, 1.0}));
  EXPECT_NEAR(l.ap_motion, 0.0, 1e-12);
  EXPECT_EQ(l.rel_wind, -1);
}

TEST(IndexW, InvertibleInAplus) {
  EXPECT_TRUE(invertible_in_Aplus(PlusElement(LineElement::constant(2.0) + LineElement::atom(1.0, 1.0))));
  EXPECT_FALSE(invertible_in_Aplus(PlusElement(LineElement::atom(1.0, 1.0))));
  EXPECT_FALSE(invertible_in_Aplus(PlusElement(LineElement::rational(Poly{-1.0, 1.0}, Poly{std::numbers::sqrt2, 1.0}))));
}

TEST(IndexW, AdditiveAndOddUnderStar) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 15; ++t) {
    const auto a = corpus::random_invertible(rng);
    const auto b = corpus::random_invertible(rng);
    const IndexPair wa = index_W(a.at());
    const IndexPair wb = index_W(b.at());
    EXPECT_NEAR(wa.ap_motion, a.expected_motion(), 1e-8);
    EXPECT_EQ(wa.rel_wind, a.expected_winding());
    const IndexPair wab = index_W(a.at() * b.at());
    EXPECT_EQ(wab.rel_wind, wa.rel_wind + wb.rel_wind);
    EXPECT_NEAR(wab.ap_motion, wa.ap_motion + wb.ap_motion, 1e-8);
    const IndexPair ws = index_W(a.at().star());
    EXPECT_EQ(ws.rel_wind, -wa.rel_wind);
    EXPECT_NEAR(ws.ap_motion, -wa.ap_motion, 1e-8);
  }
}
