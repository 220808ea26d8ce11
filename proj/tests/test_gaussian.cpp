#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fbcap/common.hpp"
#include "fbcap/gaussian.hpp"

using namespace fbcap;

namespace {

constexpr double kHalfLn2PiE = 1.418938533204673;  // 0.5 ln(2 pi e)

Mat random_psd(Rng& rng, int d, double scale = 1.0) {
    Mat r(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r(i, j) = rng.normal();
    return sym(scale * (r * r.transpose()) / d);
}

Mat random_pd(Rng& rng, int d, double floor = 0.05, double scale = 1.0) {
    return sym(random_psd(rng, d, scale) + floor * Mat::Identity(d, d));
}

Mat random_square(Rng& rng, int d, double scale = 1.0) {
    Mat r(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r(i, j) = scale * rng.normal();
    return r;
}

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

double normal_cdf(double x, double mean, double var) {
    return 0.5 * (1.0 + std::erf((x - mean) / std::sqrt(2.0 * var)));
}

// Bin masses of N(mean, var) over cells centered at the given grid points,
// with unbounded end cells so each row sums to one.
Vec bin_probs(const Vec& grid, double mean, double var) {
    Eigen::Index n = grid.size();
    Vec out(n);
    double prev = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double hi = (j + 1 < n) ? normal_cdf(0.5 * (grid(j) + grid(j + 1)), mean, var) : 1.0;
        out(j) = hi - prev;
        prev = hi;
    }
    return out;
}

double disc_entropy(const Vec& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > kProbFloor) h -= p(i) * std::log(p(i));
    return h;
}

// Quantized-Gaussian enumeration of the directed information of the scalar
// system X1 ~ N(0,p1), Y1 = X1 + N(0,k), X2 = a Y1 + N(0,w), Y2 = X2 + N(0,k),
// used as an independent oracle for the closed-form covariance evaluation.
double quantized_directed_information(double p1, double k, double a, double w, int nb) {
    auto linsp = [](double lo, double hi, int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * i / (n - 1);
        return v;
    };
    double sx = std::sqrt(p1), sk = std::sqrt(k), sw = std::sqrt(w);
    Vec gx1 = linsp(-6 * sx, 6 * sx, nb);
    double ry = 6 * sx + 6 * sk;
    Vec gy1 = linsp(-ry, ry, nb);
    double rx2 = std::abs(a) * ry + 6 * sw;
    Vec gx2 = linsp(-rx2, rx2, nb);
    double ry2 = rx2 + 6 * sk;
    Vec gy2 = linsp(-ry2, ry2, nb);

    Vec wx1 = bin_probs(gx1, 0.0, p1);
    Mat py1_x1(nb, nb);  // rows: x1
    for (int i = 0; i < nb; ++i) py1_x1.row(i) = bin_probs(gy1, gx1(i), k).transpose();
    Vec py1 = py1_x1.transpose() * wx1;
    double h_y1 = disc_entropy(py1);
    double h_y1_x1 = 0.0;
    for (int i = 0; i < nb; ++i) h_y1_x1 += wx1(i) * disc_entropy(py1_x1.row(i).transpose());

    Mat px2_y1(nb, nb);  // rows: y1
    for (int j = 0; j < nb; ++j) px2_y1.row(j) = bin_probs(gx2, a * gy1(j), w).transpose();
    Mat py2_x2(nb, nb);  // rows: x2
    for (int i = 0; i < nb; ++i) py2_x2.row(i) = bin_probs(gy2, gx2(i), k).transpose();

    double h_y2_y1 = 0.0;
    for (int j = 0; j < nb; ++j) {
        Vec py2_j = py2_x2.transpose() * px2_y1.row(j).transpose();
        h_y2_y1 += py1(j) * disc_entropy(py2_j);
    }
    Vec px2 = px2_y1.transpose() * py1;
    double h_y2_x2 = 0.0;
    for (int i = 0; i < nb; ++i) h_y2_x2 += px2(i) * disc_entropy(py2_x2.row(i).transpose());

    return (h_y1 - h_y1_x1) + (h_y2_y1 - h_y2_x2);
}

LinearFeedbackSystem scalar_system(double p1, double a, double c, double w, double k1, double k2) {
    auto m = [](double v) { return (Mat(1, 1) << v).finished(); };
    return LinearFeedbackSystem(1, m(p1), m(a), m(c), m(w), m(k1), m(k2));
}

}  // namespace

TEST_CASE("gaussian entropy closed forms") {
    Mat one = Mat::Identity(1, 1);
    CHECK(gaussian_entropy(one) == doctest::Approx(kHalfLn2PiE).epsilon(1e-14));
    CHECK(gaussian_entropy(Mat::Identity(2, 2)) ==
          doctest::Approx(2 * kHalfLn2PiE).epsilon(1e-14));
    // Block diagonal: sum of block entropies.
    Rng rng(5);
    Mat a = random_pd(rng, 2), b = random_pd(rng, 3);
    Mat blk = Mat::Zero(5, 5);
    blk.block(0, 0, 2, 2) = a;
    blk.block(2, 2, 3, 3) = b;
    CHECK(gaussian_entropy(blk) ==
          doctest::Approx(gaussian_entropy(a) + gaussian_entropy(b)).epsilon(1e-12));
}

TEST_CASE("gaussian entropy rejects non-symmetric and signals singular") {
    Mat bad(2, 2);
    bad << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(gaussian_entropy(bad), input_error);
    Mat sing(2, 2);
    sing << 1.0, 1.0, 1.0, 1.0;
    CHECK(gaussian_entropy(sing) == -std::numeric_limits<double>::infinity());
    Mat neg = -Mat::Identity(2, 2);
    CHECK_THROWS_AS(gaussian_entropy(neg), input_error);
}

TEST_CASE("gaussian entropy is rotation invariant") {
    Rng rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        Mat c = random_pd(rng, 3);
        Eigen::HouseholderQR<Mat> qr(random_square(rng, 3));
        Mat q = qr.householderQ();
        CHECK(std::abs(gaussian_entropy(sym(q * c * q.transpose())) - gaussian_entropy(c)) <=
              1e-10);
    }
}

TEST_CASE("schur conditional closed forms") {
    // Independent blocks: keep block unchanged.
    Mat ind = Mat::Zero(3, 3);
    ind(0, 0) = 2.0;
    ind(1, 1) = 3.0;
    ind(2, 2) = 4.0;
    Mat r = schur_conditional(ind, {0, 1}, {2});
    CHECK((r - diag2(2.0, 3.0)).cwiseAbs().maxCoeff() <= 1e-14);

    // Perfectly correlated scalars: conditional variance 0.
    Mat corr(2, 2);
    corr << 1.0, 1.0, 1.0, 1.0;
    CHECK(schur_conditional(corr, {0}, {1})(0, 0) == doctest::Approx(0.0).epsilon(1e-14));

    // [[2,1],[1,2]] conditioned on the second: 2 - 1*(1/2)*1 = 1.5.
    Mat j(2, 2);
    j << 2.0, 1.0, 1.0, 2.0;
    CHECK(schur_conditional(j, {0}, {1})(0, 0) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("schur conditional rejects singular given block and overlap") {
    Mat z = Mat::Zero(2, 2);
    z(0, 0) = 1.0;  // second variable deterministic
    CHECK_THROWS_AS(schur_conditional(z, {0}, {1}), input_error);
    Mat ok = Mat::Identity(2, 2);
    CHECK_THROWS_AS(schur_conditional(ok, {0}, {0}), input_error);
}

TEST_CASE("conditioning reduces gaussian entropy") {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        Mat joint = random_pd(rng, 4, 0.1);
        Mat cond = schur_conditional(joint, {0, 1}, {2, 3});
        Mat marg = joint.block(0, 0, 2, 2);
        CHECK(gaussian_entropy(cond) <= gaussian_entropy(marg) + 1e-10);
    }
}

TEST_CASE("loewner order basics") {
    Mat a = diag2(2.0, 1.0), b = diag2(1.0, 2.0);
    CHECK(loewner_leq(a, a));
    CHECK(loewner_leq(Mat::Zero(2, 2), a));
    CHECK_FALSE(loewner_leq(a, b));
    CHECK_FALSE(loewner_leq(b, a));
    CHECK_THROWS_AS(loewner_leq(a, Mat::Identity(3, 3)), input_error);
}

TEST_CASE("loewner order is a partial order on PSD matrices") {
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        Mat a = random_psd(rng, 3);
        Mat p1 = random_psd(rng, 3) + 1e-4 * Mat::Identity(3, 3);
        Mat p2 = random_psd(rng, 3) + 1e-4 * Mat::Identity(3, 3);
        CHECK(loewner_leq(a, a + p1));             // monotone step
        CHECK(loewner_leq(a + p1, a + p1 + p2));   // second step
        CHECK(loewner_leq(a, a + p1 + p2));        // transitivity
        CHECK_FALSE(loewner_leq(a + p1, a));       // strict increase not reversible
        // Antisymmetry within tolerance: both directions force near-equality.
        Mat eps = 1e-12 * p2;
        CHECK(loewner_leq(a + eps, a));
        CHECK(loewner_leq(a, a + eps));
        CHECK((eps).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("psd projection closed forms and idempotence") {
    Mat cap = Mat::Identity(2, 2);
    Mat feas = diag2(0.3, 0.6);
    CHECK((psd_project(feas, cap) - feas).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((psd_project(diag2(-1.0, 0.5), cap) - diag2(0.0, 0.5)).cwiseAbs().maxCoeff() <= 1e-12);
    Rng rng(43);
    Mat c2 = random_pd(rng, 3);
    CHECK((psd_project(2.0 * c2, c2) - c2).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("psd projection output is always feasible") {
    Rng rng(47);
    for (int trial = 0; trial < 60; ++trial) {
        int d = 2 + static_cast<int>(rng.uniform_int(2));
        Mat m = random_square(rng, d, 2.0);
        m = sym(m);
        Mat cap = (trial % 5 == 0) ? random_psd(rng, d) : random_pd(rng, d);
        Mat p = psd_project(m, cap);
        CHECK(loewner_leq(Mat::Zero(d, d), p));
        CHECK(loewner_leq(p, cap));
        CHECK((psd_project(p, cap) - p).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("gaussian bc model validation") {
    Mat I = Mat::Identity(2, 2);
    CHECK_NOTHROW(GaussianBCModel(I, I, I, 2.0 * I));
    CHECK_THROWS_AS(GaussianBCModel(Mat::Zero(2, 2), I, I, I), input_error);  // singular G
    Mat singK = Mat::Zero(2, 2);
    CHECK_THROWS_AS(GaussianBCModel(I, singK, I, I), input_error);
    CHECK_THROWS_AS(GaussianBCModel(I, I, I, -I), input_error);  // constraint not PSD
}

TEST_CASE("directed information: decoupled letters give per-letter SNR sum") {
    double p1 = 1.7, w = 0.9, k1 = 0.8, k2 = 1.3;
    auto sys = scalar_system(p1, 0.0, 0.0, w, k1, k2);
    double expect = 0.5 * std::log(1 + p1 / k1) + 0.5 * std::log(1 + w / k2);
    CHECK(gaussian_directed_information(sys) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("directed information: zero input power gives zero") {
    auto sys = scalar_system(0.0, 0.0, 0.0, 0.0, 1.0, 1.0);
    CHECK(gaussian_directed_information(sys) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("directed information is feedback-gain independent at fixed innovation") {
    // Closed form: 0.5 ln((p1+k1)/k1) + 0.5 ln((w+k2)/k2) regardless of A.
    double p1 = 1.0, w = 1.0, k = 1.0;
    double expect = std::log(2.0);
    for (double a : {0.0, 0.25, 0.5, 1.0, -0.7}) {
        auto sys = scalar_system(p1, a, 0.0, w, k, k);
        CHECK(gaussian_directed_information(sys) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("directed information matches the quantized-Gaussian oracle") {
    // d=1, unit noise, unit innovation, gain 0.5.
    auto sys = scalar_system(1.0, 0.5, 0.0, 1.0, 1.0, 1.0);
    double di = gaussian_directed_information(sys);
    double oracle = quantized_directed_information(1.0, 1.0, 0.5, 1.0, 193);
    CHECK(std::abs(di - oracle) <= 1e-3);
    // Convergence from below coarser grids.
    double coarse = quantized_directed_information(1.0, 1.0, 0.5, 1.0, 65);
    CHECK(std::abs(di - coarse) <= 1e-2);
    CHECK(std::abs(di - oracle) < std::abs(di - coarse));
}

TEST_CASE("input cross gain enters the closed form through the conditional variance") {
    double p1 = 1.2, c = 0.8, w = 0.6, k1 = 0.9, k2 = 1.1;
    auto sys = scalar_system(p1, 0.0, c, w, k1, k2);
    double condx1 = p1 * k1 / (p1 + k1);
    double expect = 0.5 * std::log((p1 + k1) / k1) +
                    0.5 * std::log((c * c * condx1 + w + k2) / k2);
    CHECK(gaussian_directed_information(sys) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rotation invariance holds for noise-independent inputs") {
    Rng rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        int d = 1 + static_cast<int>(rng.uniform_int(2));
        Mat n = random_pd(rng, d, 0.2);
        LinearFeedbackSystem sys(d, random_psd(rng, d), Mat::Zero(d, d),
                                 random_square(rng, d), random_psd(rng, d), n, n);
        auto rec = check_rotation_invariance(sys);
        CHECK(rec.pass);
        CHECK(rec.gap <= 1e-9);
    }
}

TEST_CASE("rotation invariance rejects hypothesis violations") {
    Mat one = Mat::Identity(1, 1);
    // Unequal noise covariances.
    LinearFeedbackSystem uneq(1, one, Mat::Zero(1, 1), Mat::Zero(1, 1), one, one, 2.0 * one);
    CHECK_THROWS_AS(check_rotation_invariance(uneq), model_class_error);
    // Nonzero output-feedback gain.
    auto fb = scalar_system(1.0, 0.5, 0.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(check_rotation_invariance(fb), model_class_error);
}

TEST_CASE("output feedback breaks the rotation identity by half ln(7/6)") {
    // Documents why nonzero feedback gain is outside the identity's scope:
    // with p1 = w = k = 1 and A = 0.5 the two sides differ by 0.5 ln(7/6).
    auto sys = scalar_system(1.0, 0.5, 0.0, 1.0, 1.0, 1.0);
    Mat comp = sys.composite_covariance();
    double lhs = directed_information_gaussian(comp, 1);
    double rhs = directed_information_gaussian(rotate_composite(comp, 1), 1);
    CHECK(std::abs(std::abs(lhs - rhs) - 0.077075339913629) <= 1e-12);
}

TEST_CASE("composite covariance is PSD and has the stated marginals") {
    Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 1 + static_cast<int>(rng.uniform_int(2));
        Mat n = random_pd(rng, d, 0.2);
        LinearFeedbackSystem sys(d, random_psd(rng, d), random_square(rng, d, 0.5),
                                 random_square(rng, d), random_psd(rng, d), n, n);
        Mat c = sys.composite_covariance();
        Eigen::SelfAdjointEigenSolver<Mat> es(c, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        // Cov(Y1) = Cov(X1) + N1.
        CHECK((c.block(2 * d, 2 * d, d, d) - sys.input1_cov - sys.noise1_cov)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
    }
}
