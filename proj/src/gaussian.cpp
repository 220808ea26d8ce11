#include "fbcap/gaussian.hpp"

#include <cmath>
#include <limits>

namespace fbcap {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kPsdTol = 1e-10;
constexpr double kLoewnerTol = 1e-9;

Mat take_block(const Mat& joint, const std::vector<int>& rows, const std::vector<int>& cols) {
    Mat b(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                joint(rows[i], cols[j]);
    return b;
}

void check_axes(const Mat& joint, const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> count(static_cast<std::size_t>(joint.rows()), 0);
    for (int i : a) {
        if (i < 0 || i >= joint.rows()) throw input_error("schur_conditional: axis out of range");
        count[static_cast<std::size_t>(i)]++;
    }
    for (int i : b) {
        if (i < 0 || i >= joint.rows()) throw input_error("schur_conditional: axis out of range");
        count[static_cast<std::size_t>(i)]++;
    }
    for (int c : count)
        if (c > 1) throw input_error("schur_conditional: overlapping axis sets");
}

std::vector<int> range_vec(int lo, int hi) {
    std::vector<int> v;
    for (int i = lo; i < hi; ++i) v.push_back(i);
    return v;
}

/// Conditional covariance with pseudo-inverse semantics on the given block:
/// exact degeneracies are dropped (their cross-covariance must vanish for a
/// PSD joint); a singular block with nonvanishing cross-covariance is
/// rejected.
Mat schur_pinv(const Mat& joint, const std::vector<int>& keep, const std::vector<int>& given) {
    check_axes(joint, keep, given);
    if (given.empty()) return take_block(joint, keep, keep);
    Mat skk = take_block(joint, keep, keep);
    Mat skg = take_block(joint, keep, given);
    Mat sgg = sym(take_block(joint, given, given));
    Eigen::SelfAdjointEigenSolver<Mat> es(sgg);
    const auto& ev = es.eigenvalues();
    double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    Mat u = es.eigenvectors();
    Mat cross = skg * u;  // keep x given, rotated
    Mat acc = Mat::Zero(skk.rows(), skk.rows());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) <= 1e-13 * scale) {
            if (cross.col(i).norm() > 1e-7 * scale)
                throw input_error("singular conditioning block");
            continue;
        }
        acc += (cross.col(i) * cross.col(i).transpose()) / ev(i);
    }
    return sym(skk - acc);
}

double entropy_given(const Mat& joint, const std::vector<int>& keep,
                     const std::vector<int>& given) {
    return gaussian_entropy(schur_pinv(joint, keep, given));
}

}  // namespace

void require_symmetric(const Mat& m, const char* what) {
    if (m.rows() != m.cols()) throw input_error(std::string(what) + ": not square");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymTol)
        throw input_error(std::string(what) + ": not symmetric");
}

void require_psd(const Mat& m, const char* what) {
    require_symmetric(m, what);
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(m), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol)
        throw input_error(std::string(what) + ": not positive semidefinite");
}

double gaussian_entropy(const Mat& c) {
    require_symmetric(c, "gaussian_entropy");
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(c), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    if (ev.minCoeff() < -kPsdTol * scale)
        throw input_error("gaussian_entropy: not positive semidefinite");
    double h = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) <= 1e-13 * scale) return -std::numeric_limits<double>::infinity();
        h += 0.5 * std::log(2.0 * M_PI * M_E * ev(i));
    }
    return h;
}

Mat schur_conditional(const Mat& joint, const std::vector<int>& keep_axes,
                      const std::vector<int>& given_axes) {
    require_symmetric(joint, "schur_conditional");
    check_axes(joint, keep_axes, given_axes);
    if (given_axes.empty()) return take_block(joint, keep_axes, keep_axes);
    Mat sgg = sym(take_block(joint, given_axes, given_axes));
    Eigen::LLT<Mat> llt(sgg);
    if (llt.info() != Eigen::Success) throw input_error("schur_conditional: singular given block");
    Mat skg = take_block(joint, keep_axes, given_axes);
    Mat skk = take_block(joint, keep_axes, keep_axes);
    return sym(skk - skg * llt.solve(skg.transpose()));
}

bool loewner_leq(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw input_error("loewner_leq: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(b - a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -kLoewnerTol;
}

Mat psd_project(const Mat& m, const Mat& cap) {
    require_symmetric(m, "psd_project");
    require_psd(cap, "psd_project cap");
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(m));
    Vec ev = es.eigenvalues().cwiseMax(0.0);
    Mat clamped = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    clamped = sym(clamped);
    if (loewner_leq(clamped, cap)) return clamped;

    Eigen::SelfAdjointEigenSolver<Mat> cs(sym(cap));
    if (cs.eigenvalues().minCoeff() > 0.0) {
        // PD cap: exact projection in the cap metric.  With W = cap^{1/2},
        // clip the eigenvalues of W^{-1} m W^{-1} to [0, 1] and map back.
        Vec root = cs.eigenvalues().cwiseSqrt();
        Mat W = cs.eigenvectors() * root.asDiagonal() * cs.eigenvectors().transpose();
        Mat Winv = cs.eigenvectors() * root.cwiseInverse().asDiagonal() *
                   cs.eigenvectors().transpose();
        Eigen::SelfAdjointEigenSolver<Mat> as(sym(Winv * sym(m) * Winv));
        Vec av = as.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
        Mat back = W * as.eigenvectors() * av.asDiagonal() * as.eigenvectors().transpose() * W;
        back = sym(back);
        if (loewner_leq(Mat::Zero(m.rows(), m.cols()), back) && loewner_leq(back, cap))
            return back;
    }
    // Singular cap or numerical trouble: bisect the largest feasible scale.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (loewner_leq(mid * clamped, cap))
            lo = mid;
        else
            hi = mid;
    }
    return lo * clamped;
}

GaussianBCModel::GaussianBCModel(Mat g, Mat k, Mat ktilde, Mat kprime)
    : d(static_cast<int>(k.rows())), G(std::move(g)), K(std::move(k)),
      Ktilde(std::move(ktilde)), Kprime(std::move(kprime)) {
    if (G.rows() != d || G.cols() != d || Ktilde.rows() != d || Kprime.rows() != d)
        throw input_error("GaussianBCModel: dimension mismatch");
    require_symmetric(K, "GaussianBCModel K");
    require_symmetric(Ktilde, "GaussianBCModel Ktilde");
    require_psd(Kprime, "GaussianBCModel Kprime");
    Eigen::SelfAdjointEigenSolver<Mat> esk(sym(K), Eigen::EigenvaluesOnly);
    if (esk.eigenvalues().minCoeff() <= 1e-10)
        throw input_error("GaussianBCModel: K must be strictly positive definite");
    Eigen::SelfAdjointEigenSolver<Mat> est(sym(Ktilde), Eigen::EigenvaluesOnly);
    if (est.eigenvalues().minCoeff() <= 1e-10)
        throw input_error("GaussianBCModel: Ktilde must be strictly positive definite");
    Eigen::FullPivLU<Mat> lu(G);
    if (!lu.isInvertible() || std::abs(lu.determinant()) <= 1e-12)
        throw input_error("GaussianBCModel: G must be invertible");
}

LinearFeedbackSystem::LinearFeedbackSystem(int dim, Mat s1, Mat a, Mat c, Mat w, Mat n1, Mat n2)
    : d(dim), input1_cov(std::move(s1)), feedback_gain(std::move(a)),
      input_cross_gain(std::move(c)), innovation_cov(std::move(w)),
      noise1_cov(std::move(n1)), noise2_cov(std::move(n2)) {
    if (d < 1) throw input_error("LinearFeedbackSystem: dimension must be positive");
    for (const Mat* m : {&input1_cov, &feedback_gain, &input_cross_gain, &innovation_cov,
                         &noise1_cov, &noise2_cov})
        if (m->rows() != d || m->cols() != d)
            throw input_error("LinearFeedbackSystem: dimension mismatch");
    require_psd(input1_cov, "LinearFeedbackSystem input1_cov");
    require_psd(innovation_cov, "LinearFeedbackSystem innovation_cov");
    for (const Mat* m : {&noise1_cov, &noise2_cov}) {
        require_symmetric(*m, "LinearFeedbackSystem noise");
        Eigen::SelfAdjointEigenSolver<Mat> es(sym(*m), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= 1e-10)
            throw input_error("LinearFeedbackSystem: noise covariances must be strictly PD");
    }
}

Mat LinearFeedbackSystem::composite_covariance() const {
    // Coefficients of (X1, X2, Y1, Y2) over the independent base (X1, W, N1, N2).
    const Mat I = Mat::Identity(d, d);
    const Mat Z = Mat::Zero(d, d);
    const Mat AC = feedback_gain + input_cross_gain;
    Mat coef(4 * d, 4 * d);
    auto set_row = [&](int r, const Mat& c0, const Mat& c1, const Mat& c2, const Mat& c3) {
        coef.block(r * d, 0, d, d) = c0;
        coef.block(r * d, d, d, d) = c1;
        coef.block(r * d, 2 * d, d, d) = c2;
        coef.block(r * d, 3 * d, d, d) = c3;
    };
    set_row(0, I, Z, Z, Z);                      // X1
    set_row(1, AC, I, feedback_gain, Z);         // X2 = (A+C) X1 + W + A N1
    set_row(2, I, Z, I, Z);                      // Y1 = X1 + N1
    set_row(3, AC, I, feedback_gain, I);         // Y2 = X2 + N2
    Mat base = Mat::Zero(4 * d, 4 * d);
    base.block(0, 0, d, d) = input1_cov;
    base.block(d, d, d, d) = innovation_cov;
    base.block(2 * d, 2 * d, d, d) = noise1_cov;
    base.block(3 * d, 3 * d, d, d) = noise2_cov;
    return sym(coef * base * coef.transpose());
}

double directed_information_gaussian(const Mat& composite, int d) {
    require_symmetric(composite, "directed_information_gaussian");
    if (composite.rows() != 4 * d) throw input_error("directed_information_gaussian: bad block size");
    auto x1 = range_vec(0, d);
    auto x2 = range_vec(d, 2 * d);
    auto y1 = range_vec(2 * d, 3 * d);
    auto y2 = range_vec(3 * d, 4 * d);
    std::vector<int> x1x2 = x1;
    x1x2.insert(x1x2.end(), x2.begin(), x2.end());
    std::vector<int> y1x1x2 = y1;
    y1x1x2.insert(y1x1x2.end(), x1x2.begin(), x1x2.end());

    double h_y1 = gaussian_entropy(take_block(composite, y1, y1));
    double h_y1_x1 = entropy_given(composite, y1, x1);
    double h_y2_y1 = entropy_given(composite, y2, y1);
    double h_y2_all = entropy_given(composite, y2, y1x1x2);
    return (h_y1 - h_y1_x1) + (h_y2_y1 - h_y2_all);
}

double gaussian_directed_information(const LinearFeedbackSystem& sys) {
    return directed_information_gaussian(sys.composite_covariance(), sys.d);
}

Mat rotate_composite(const Mat& composite, int d) {
    const double r = 1.0 / std::sqrt(2.0);
    const Mat I = Mat::Identity(d, d);
    Mat T = Mat::Zero(4 * d, 4 * d);
    T.block(0, 0, d, d) = r * I;
    T.block(0, d, d, d) = r * I;
    T.block(d, 0, d, d) = r * I;
    T.block(d, d, d, d) = -r * I;
    T.block(2 * d, 2 * d, d, d) = r * I;
    T.block(2 * d, 3 * d, d, d) = r * I;
    T.block(3 * d, 2 * d, d, d) = r * I;
    T.block(3 * d, 3 * d, d, d) = -r * I;
    return sym(T * composite * T.transpose());
}

CheckRecord check_rotation_invariance(const LinearFeedbackSystem& sys) {
    if ((sys.noise1_cov - sys.noise2_cov).cwiseAbs().maxCoeff() > 1e-10)
        throw model_class_error(
            "rotation invariance requires equal per-letter noise covariances");
    if (sys.feedback_gain.cwiseAbs().maxCoeff() > 0.0)
        throw model_class_error(
            "rotation invariance requires inputs independent of the channel noise "
            "(zero output-feedback gain)");
    Mat c = sys.composite_covariance();
    double lhs = directed_information_gaussian(c, sys.d);
    double rhs = directed_information_gaussian(rotate_composite(c, sys.d), sys.d);
    CheckRecord rec;
    rec.construction = "joint 45-degree rotation of inputs and outputs";
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.gap = std::abs(lhs - rhs);
    rec.pass = rec.gap <= 1e-9;
    return rec;
}

}  // namespace fbcap
