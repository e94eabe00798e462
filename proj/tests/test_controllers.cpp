#include <gtest/gtest.h>

#include <array>

#include "nictl/controllers.hpp"
#include "nictl/errors.hpp"
#include "test_support.hpp"

namespace nictl {
namespace {

using test::mass_spring;

// K = Cn / (Cd - D Cn) for C = Cn / Cd, normalized so den[0] = 1.
std::pair<std::vector<double>, std::vector<double>> compose(std::vector<double> cn, std::vector<double> cd, double D) {
  std::vector<double> den = cd;
  const std::size_t off = den.size() - cn.size();
  for (std::size_t i = 0; i < cn.size(); ++i) den[off + i] -= D * cn[i];
  const double lead = den.front();
  for (auto& c : den) c /= lead;
  for (auto& c : cn) c /= lead;
  return {cn, den};
}

void expect_same_tf(const RationalTF& tf, const std::pair<std::vector<double>, std::vector<double>>& ref) {
  const double lead = tf.den().front();
  ASSERT_EQ(tf.den().size(), ref.second.size());
  for (std::size_t i = 0; i < ref.second.size(); ++i) EXPECT_NEAR(tf.den()[i] / lead, ref.second[i], 1e-14);
  ASSERT_EQ(tf.num().size(), ref.first.size());
  for (std::size_t i = 0; i < ref.first.size(); ++i) EXPECT_NEAR(tf.num()[i] / lead, ref.first[i], 1e-14);
}

TEST(Irc, Examples) {
  const auto a = irc_tf(IrcParams(1.0, -1.0));
  EXPECT_EQ(a.num(), std::vector<double>({1.0}));
  EXPECT_EQ(a.den(), std::vector<double>({1.0, 1.0}));
  const auto b = irc_tf(IrcParams(2.0, -0.5));
  EXPECT_EQ(b.num(), std::vector<double>({2.0}));
  EXPECT_EQ(b.den(), std::vector<double>({1.0, 1.0}));
  EXPECT_THROW(IrcParams(0.0, -1.0), PreconditionViolation);
  EXPECT_THROW(IrcParams(1.0, 0.0), PreconditionViolation);
}

TEST(Irc, ComposedFormAndDcGain) {
  std::mt19937_64 rng(test::kSeed);
  for (int i = 0; i < 200; ++i) {
    const IrcParams p(test::log_uniform(rng, 1e-2, 1e2), -test::log_uniform(rng, 1e-2, 1e2));
    const auto tf = irc_tf(p);
    expect_same_tf(tf, compose({p.Gamma}, {1.0, 0.0}, p.D));
    EXPECT_LE(test::rel_err(freq_response(tf, 0.0).real(), -1.0 / p.D), 1e-12);
  }
}

TEST(Pii2rc, Examples) {
  const auto tf = pii2rc_tf(Pii2Params(1, 1, 1, -1));
  EXPECT_EQ(tf.num(), std::vector<double>({1.0, 1.0, 1.0}));
  EXPECT_EQ(tf.den(), std::vector<double>({2.0, 1.0, 1.0}));
  EXPECT_DOUBLE_EQ(freq_response(pii2rc_tf(Pii2Params(1, 1, 1, -2)), 0.0).real(), 0.5);
  EXPECT_THROW(Pii2Params(1, 1, 0, -1), PreconditionViolation);
  EXPECT_THROW(Pii2Params(1, 1, 1, 0), PreconditionViolation);
}

TEST(Pii2rc, ComposedFormAndDcGain) {
  std::mt19937_64 rng(test::kSeed);
  for (int i = 0; i < 200; ++i) {
    const Pii2Params p(test::log_uniform(rng, 1e-2, 1e2), test::log_uniform(rng, 1e-2, 1e2),
                       test::log_uniform(rng, 1e-2, 1e2), -test::log_uniform(rng, 1e-2, 1e2));
    const auto tf = pii2rc_tf(p);
    expect_same_tf(tf, compose({p.k_p, p.k1, p.k2}, {1.0, 0.0, 0.0}, p.D));
    EXPECT_LE(test::rel_err(freq_response(tf, 1e-9).real(), -1.0 / p.D), 1e-9);
  }
}

TEST(SniValue, UnitExample) {
  const Pii2Params p(1, 1, 1, -1);
  EXPECT_DOUBLE_EQ(pii2rc_sni_value(1.0, p), 1.0);
  EXPECT_NEAR(ni_index(pii2rc_tf(p), 1.0), 1.0, 1e-15);
}

double direct_sni(double w, const Pii2Params& p) { return test::pii2_index_quad(p.k_p, p.k1, p.k2, p.D, w); }

TEST(SniValue, AgreesWithComplexOracle) {
  std::mt19937_64 rng(test::kSeed);
  const auto grid = log_grid(1e-3, 1e3, 50);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Pii2Params p(test::log_uniform(rng, 1e-2, 1e2), test::log_uniform(rng, 1e-2, 1e2),
                       test::log_uniform(rng, 1e-2, 1e2), -test::log_uniform(rng, 1e-2, 1e2));
    for (double w : grid) worst = std::max(worst, test::rel_err(pii2rc_sni_value(w, p), direct_sni(w, p)));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(SniValue, PositiveAndVanishingAtZero) {
  std::mt19937_64 rng(test::kSeed + 7);
  const auto grid = log_grid(1e-3, 1e3, 200);
  for (int i = 0; i < 200; ++i) {
    const Pii2Params p(test::log_uniform(rng, 1e-2, 1e2), test::log_uniform(rng, 1e-2, 1e2),
                       test::log_uniform(rng, 1e-2, 1e2), -test::log_uniform(rng, 1e-2, 1e2));
    for (double w : grid) ASSERT_GT(pii2rc_sni_value(w, p), 0.0);
    EXPECT_LT(pii2rc_sni_value(1e-6, p), pii2rc_sni_value(1e-5, p));
  }
}

TEST(Stability, IrcExamples) {
  EXPECT_TRUE(check_irc_stability(mass_spring(), 20.0 / 21.0).pass);
  EXPECT_NEAR(check_irc_stability(mass_spring(), 20.0 / 21.0).margin, 1.0 / 21.0, 1e-15);
  EXPECT_TRUE(check_irc_stability(mass_spring(), 5.0 / 6.0).pass);
  EXPECT_FALSE(check_irc_stability(mass_spring(), 1.0).pass);
}

TEST(Stability, Pii2Examples) {
  EXPECT_TRUE(check_pii2_stability(mass_spring(), -1.5).pass);
  const auto edge = check_pii2_stability(mass_spring(), -1.0);
  EXPECT_FALSE(edge.pass);
  EXPECT_EQ(edge.margin, 0.0);
  EXPECT_FALSE(check_pii2_stability(mass_spring(), -0.5).pass);
}

HigsPii2Params pii2(double k_p, double D, double k1 = 1.0, double k2 = 1.0) {
  return HigsPii2Params(k_p, D, HigsParams(0.3, k1), HigsParams(0.2, k2), HigsParams(0.4, k2));
}

TEST(HigsPii2, ParamsAndGamma) {
  EXPECT_DOUBLE_EQ(pii2(1.0, -1.0).gamma(), 0.5);
  EXPECT_THROW(HigsPii2Params(1.0, -1.0, HigsParams(1, 1), HigsParams(0.2, 1), HigsParams(0.4, 2)),
               CascadeAssumptionViolated);
  EXPECT_THROW(pii2(0.0, -1.0), PreconditionViolation);
  EXPECT_THROW(pii2(1.0, 0.0), PreconditionViolation);
}

TEST(HigsPii2, GainSumClearance) {
  // 1/(G(0) + D) = 2 at D = -0.5; k_h1 + k_h2^2 + k_p = 0.5 + 1 + 0.5 hits it exactly.
  EXPECT_EQ(gain_sum_clearance(mass_spring(), pii2(0.5, -0.5, 0.5, 1.0)), 0.0);
  EXPECT_DOUBLE_EQ(gain_sum_clearance(mass_spring(), pii2(0.5, -1.5, 2.0, 1.0)), 5.5);
  EXPECT_TRUE(std::isinf(gain_sum_clearance(mass_spring(), pii2(0.5, -1.0))));
}

TEST(Resolve, Examples) {
  const ModeTriple integ{HigsMode::Integrator, HigsMode::Integrator, HigsMode::Integrator};
  auto s = resolve_pii2_error_signal(1.0, 0, 0, 0, integ, pii2(1.0, -1.0));
  EXPECT_DOUBLE_EQ(s.e, 0.5);
  EXPECT_DOUBLE_EQ(s.u, 0.5);

  s = resolve_pii2_error_signal(0.0, 0, 0, 0, integ, pii2(1.0, -1.0));
  EXPECT_EQ(s.e, 0.0);
  EXPECT_EQ(s.u, 0.0);

  const ModeTriple g1{HigsMode::Gain, HigsMode::Integrator, HigsMode::Integrator};
  s = resolve_pii2_error_signal(1.0, 0, 0, 0, g1, pii2(1.0, -1.0, 1.0));
  EXPECT_DOUBLE_EQ(s.e, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.u, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.x_h1, 1.0 / 3.0);
}

TEST(Resolve, SelfConsistentForAllModeCombinations) {
  std::mt19937_64 rng(test::kSeed);
  for (int trial = 0; trial < 200; ++trial) {
    const double k2 = test::log_uniform(rng, 0.1, 10);
    const HigsPii2Params p(test::log_uniform(rng, 0.1, 10), -test::log_uniform(rng, 0.1, 10),
                           HigsParams(1.0, test::log_uniform(rng, 0.1, 10)), HigsParams(0.5, k2), HigsParams(1.5, k2));
    const double y = test::uniform(rng, -5, 5);
    const std::array<double, 3> xs{test::uniform(rng, -5, 5), test::uniform(rng, -5, 5), test::uniform(rng, -5, 5)};
    for (int combo = 0; combo < 8; ++combo) {
      ModeTriple m;
      for (int i = 0; i < 3; ++i) m[i] = (combo >> i) & 1 ? HigsMode::Gain : HigsMode::Integrator;
      const auto s = resolve_pii2_error_signal(y, xs[0], xs[1], xs[2], m, p);
      const double g = p.gamma();
      EXPECT_NEAR(s.x_h1, m[0] == HigsMode::Gain ? p.h1().k_h * s.e : xs[0], 1e-12);
      EXPECT_NEAR(s.x_h2, m[1] == HigsMode::Gain ? p.h2().k_h * s.e : xs[1], 1e-12);
      EXPECT_NEAR(s.x_h3, m[2] == HigsMode::Gain ? p.h3().k_h * s.x_h2 : xs[2], 1e-12 * std::max(1.0, std::abs(s.x_h3)));
      const double y_back = (s.e - g * p.D() * (s.x_h1 + s.x_h3)) / g;
      EXPECT_NEAR(y_back, y, 1e-12 * std::max(1.0, std::abs(y) + std::abs(p.D() * (s.x_h1 + s.x_h3))));
      EXPECT_NEAR(s.u, s.x_h1 + s.x_h3 + p.k_p() * s.e, 1e-12 * std::max(1.0, std::abs(s.u)));
    }
  }
}

TEST(Rates, SatisfyTheDifferentiatedLoop) {
  std::mt19937_64 rng(test::kSeed + 3);
  for (int trial = 0; trial < 100; ++trial) {
    const double k2 = test::log_uniform(rng, 0.1, 10);
    const HigsPii2Params p(test::log_uniform(rng, 0.1, 10), -test::log_uniform(rng, 0.1, 10),
                           HigsParams(0.7, test::log_uniform(rng, 0.1, 10)), HigsParams(0.5, k2), HigsParams(1.5, k2));
    const double y = test::uniform(rng, -5, 5);
    const double y_dot = test::uniform(rng, -5, 5);
    for (int combo = 0; combo < 8; ++combo) {
      ModeTriple m;
      for (int i = 0; i < 3; ++i) m[i] = (combo >> i) & 1 ? HigsMode::Gain : HigsMode::Integrator;
      const auto s = resolve_pii2_error_signal(y, 0.3, -0.2, 0.1, m, p);
      const auto r = pii2_rates(y_dot, s, m, p);
      const bool g1 = m[0] == HigsMode::Gain, g2 = m[1] == HigsMode::Gain, g3 = m[2] == HigsMode::Gain;
      EXPECT_NEAR(r.x_h1_dot, g1 ? p.h1().k_h * r.e_dot : p.h1().omega_h * s.e, 1e-10);
      EXPECT_NEAR(r.x_h2_dot, g2 ? p.h2().k_h * r.e_dot : p.h2().omega_h * s.e, 1e-10);
      EXPECT_NEAR(r.x_h3_dot, g3 ? p.h3().k_h * r.x_h2_dot : p.h3().omega_h * s.x_h2, 1e-10);
      EXPECT_NEAR(r.e_dot, p.gamma() * (y_dot + p.D() * (r.x_h1_dot + r.x_h3_dot)), 1e-10 * std::max(1.0, std::abs(r.e_dot)));
    }
  }
}

TEST(ModeUpdate, Examples) {
  const auto p = pii2(1.0, -1.0, 2.0, 1.5);
  const ModeTriple integ{HigsMode::Integrator, HigsMode::Integrator, HigsMode::Integrator};
  EXPECT_EQ(higs_pii2_mode_update(1.0, 0.0, 0, 0, 0, p), integ);

  const double k1 = p.h1().k_h, k2 = p.h2().k_h, k3 = p.h3().k_h;
  const ModeTriple gain{HigsMode::Gain, HigsMode::Gain, HigsMode::Gain};
  EXPECT_EQ(higs_pii2_mode_update(1.0, 0.0, k1, k2, k3 * k2, p), gain);

  // H2 on its boundary, omega_h2 e^2 <= k_h2 e e_dot.
  const double e_dot = p.h2().omega_h / k2;
  EXPECT_EQ(higs_pii2_mode_update(1.0, e_dot, 0.0, k2, 0.0, p)[1], HigsMode::Integrator);
}

TEST(ModeUpdate, H3RateFollowsH2Mode) {
  const auto p = pii2(1.0, -1.0, 2.0, 1.0);
  // H2 integrating, so e3_dot = omega_h2 e = 0.2 and H3 sits on x_h3 = x_h2.
  // x_h2 = 0.8: 0.4 * 0.64 > 0.8 * 0.2 -> Gain.
  EXPECT_EQ(higs_pii2_mode_update(1.0, 0.0, 0.0, 0.8, 0.8, p)[2], HigsMode::Gain);
  // x_h2 = 0.4: 0.4 * 0.16 < 0.4 * 0.2 -> Integrator (k_h2 e_dot = 0 would have said Gain).
  EXPECT_EQ(higs_pii2_mode_update(1.0, 0.0, 0.0, 0.4, 0.4, p)[2], HigsMode::Integrator);
}

}  // namespace
}  // namespace nictl
