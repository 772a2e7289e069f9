#include <spectv/flows.hpp>
#include <spectv/orthobasis.hpp>

#include "test_support.hpp"

using namespace spectv;
using spectv::test::random_grid;

namespace {

OrthoBasis identity(std::size_t m) { return {Eigen::MatrixXd::Identity(Eigen::Index(m), Eigen::Index(m))}; }

Grid vec(std::vector<double> v) { return make_1d(std::move(v)); }

// unnormalized pairwise averages/differences; nonzero details are counted directly
int haar_details_by_averaging(std::vector<double> a) {
  int nz = 0;
  while (a.size() > 1) {
    std::vector<double> next;
    for (std::size_t i = 0; i < a.size(); i += 2) {
      next.push_back(0.5 * (a[i] + a[i + 1]));
      nz += std::abs(a[i] - a[i + 1]) > 1e-12;
    }
    a = next;
  }
  return nz;
}

}  // namespace

TEST(Basis, IdentityAnalysis) {
  auto z = analyze(identity(2), as_vector(vec({3, -1})));
  EXPECT_EQ(z[0], 3.0);
  EXPECT_EQ(z[1], -1.0);
}

TEST(Basis, RoundTripOnRandomSignal) {
  OrthoBasis B = haar_basis(16);
  Grid f = random_grid({16}, 1);
  Grid g = as_grid(synthesize(B, analyze(B, as_vector(f))), f);
  EXPECT_LE(max_abs_diff(f, g), 1e-10);
}

TEST(Basis, HaarSmallest) {
  OrthoBasis B = haar_basis(2);
  const double s = 1 / std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(B.V(0, 0), s);
  EXPECT_DOUBLE_EQ(B.V(0, 1), s);
  EXPECT_DOUBLE_EQ(B.V(1, 0), s);
  EXPECT_DOUBLE_EQ(B.V(1, 1), -s);
}

TEST(Basis, HaarOrthonormal) {
  EXPECT_LE(haar_basis(8).orthonormality_error(), 1e-12);
  EXPECT_NO_THROW(haar_basis(64).validate());
  EXPECT_THROW(haar_basis(6), Error);
}

TEST(Basis, HaarOfConstantIsScalingOnly) {
  auto z = analyze(haar_basis(8), as_vector(Grid({8}, 1.0, 2.0)));
  EXPECT_EQ(sparsity_count(z), 1);
  EXPECT_NEAR(z[0], 2.0 * std::sqrt(8.0), 1e-12);
}

TEST(Basis, ShapeMismatch) { EXPECT_THROW(analyze(haar_basis(4), Eigen::VectorXd::Zero(3)), Error); }

TEST(Thresholds, SoftAndHard) {
  Eigen::Vector2d z(3, -1);
  Eigen::VectorXd s = soft_threshold(z, 2);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[1], 0.0);
  Eigen::VectorXd h = hard_threshold(z, 2);
  EXPECT_EQ(h[0], 3.0);
  EXPECT_EQ(h[1], 0.0);
  EXPECT_EQ(hard_threshold(z, 0), Eigen::VectorXd(z));
}

TEST(ClosedForm, IdentityExample) {
  Grid f = vec({3, -1});
  Grid u = closed_form_flow(identity(2), f, 2);
  EXPECT_EQ(u[0], 1.0);
  EXPECT_EQ(u[1], 0.0);
  auto vp = closed_form_vp(identity(2), f, 2);
  EXPECT_EQ(vp[0], 1.0);
  EXPECT_EQ(vp[1], 0.0);
}

TEST(ClosedForm, EndpointsOfTime) {
  OrthoBasis B = haar_basis(8);
  Grid f = random_grid({8}, 2);
  EXPECT_LE(max_abs_diff(closed_form_flow(B, f, 0), f), 1e-12);
  const double zmax = analyze(B, as_vector(f)).cwiseAbs().maxCoeff();
  EXPECT_EQ(norm_inf(closed_form_flow(B, f, zmax)), 0.0);
  EXPECT_LE(norm_inf(closed_form_subgradient(B, f, zmax * 1.01)), 0.0);
}

TEST(ClosedForm, SubgradientIsSignPattern) {
  // p(t) is itself an eigenfunction: V p has entries in {-1, 0, 1} and agrees in sign with V u
  OrthoBasis B = haar_basis(8);
  Grid f = random_grid({8}, 3);
  for (double t : {0.1, 0.5, 1.0}) {
    Grid p = closed_form_subgradient(B, f, t);
    Eigen::VectorXd vp = analyze(B, as_vector(p)), vu = analyze(B, as_vector(closed_form_flow(B, f, t)));
    for (Eigen::Index i = 0; i < vp.size(); ++i) {
      const double r = std::round(vp[i]);
      EXPECT_NEAR(vp[i], r, 1e-12);
      if (std::abs(vu[i]) > 1e-12) EXPECT_EQ(r, vu[i] > 0 ? 1.0 : -1.0);
    }
  }
}

TEST(GenericFlow, MatchesClosedFormEveryStep) {
  for (auto B : {identity(8), haar_basis(8)}) {
    Grid f = random_grid({8}, 4);
    FlowTrace tr = gradient_flow(f, 0.05, 40, OrthoL1Functional{B});
    double worst = 0.0;
    for (std::size_t n = 0; n < tr.u.size(); ++n)
      worst = std::max(worst, max_abs_diff(tr.u[n], closed_form_flow(B, f, tr.t[n])));
    EXPECT_LE(worst, 1e-8);
  }
}

TEST(Deltas, SingleAtom) {
  OrthoBasis B = haar_basis(8);
  Grid f = as_grid(-2.5 * B.V.row(3).transpose(), Grid({8}));
  auto d = closed_form_phi(B, f);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d[0].t, 2.5, 1e-12);
  EXPECT_EQ(d[0].index, 3u);
}

TEST(Deltas, MassesAndExactSum) {
  OrthoBasis B = haar_basis(16);
  Grid f = random_grid({16}, 5);
  auto z = analyze(B, as_vector(f));
  auto d = closed_form_phi(B, f);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(16);
  for (const auto& a : d) {
    EXPECT_NEAR(a.atom.squaredNorm(), z[Eigen::Index(a.index)] * z[Eigen::Index(a.index)], 1e-12);
    s += a.atom;
  }
  EXPECT_LE((s - as_vector(f)).cwiseAbs().maxCoeff(), 1e-12);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE(d[i - 1].t, d[i].t);
}

TEST(Deltas, LowPassIsHardThreshold) {
  OrthoBasis B = haar_basis(8);
  Grid f = random_grid({8}, 6);
  auto d = closed_form_phi(B, f);
  for (double tc : {0.0, 0.2, 0.7, 1.5, 10.0}) {
    Eigen::VectorXd lp = filter_deltas(d, ideal_lpf(tc), 8);
    Eigen::VectorXd ht = synthesize(B, hard_threshold(analyze(B, as_vector(f)), tc));
    EXPECT_LE((lp - ht).cwiseAbs().maxCoeff(), 1e-8) << tc;
  }
}

TEST(ThreePeak, FifteenHaarCoefficients) {
  Grid f = spectv::test::three_peak_signal();
  EXPECT_EQ(haar_details_by_averaging(f.values), 15);
  EXPECT_EQ(haar_wavelet_count(f), 15);
}

TEST(BasisCsv, WritesRows) {
  auto dir = spectv::test::scratch_dir("basis");
  write_basis_csv(haar_basis(4), dir / "v.csv");
  Grid g = read_csv(dir / "v.csv");
  ASSERT_EQ(g.dims, (std::vector<std::size_t>{4, 4}));
  EXPECT_DOUBLE_EQ(g.at(1, 3), -0.5);
}
