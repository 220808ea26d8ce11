#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fbcap/common.hpp"

namespace fbcap {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Symmetrized copy of m.
inline Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Throws input_error unless m is square and symmetric within 1e-10.
void require_symmetric(const Mat& m, const char* what);

/// Throws input_error unless m is symmetric PSD (eigenvalues >= -1e-10).
void require_psd(const Mat& m, const char* what);

/// Differential entropy of N(0, c) in nats: 0.5 log((2 pi e)^d det c).
/// Singular c yields -infinity.
double gaussian_entropy(const Mat& c);

/// Conditional covariance of the kept block given the other block:
/// S_kk - S_kg S_gg^{-1} S_gk.  The given block must be strictly PD.
Mat schur_conditional(const Mat& joint, const std::vector<int>& keep_axes,
                      const std::vector<int>& given_axes);

/// Loewner partial order: a <= b iff min eigenvalue of (b - a) >= -1e-9.
bool loewner_leq(const Mat& a, const Mat& b);

/// Eigen-clamp of m onto the PSD cone followed by a shrink onto the Loewner
/// interval [0, cap].  Idempotent on feasible inputs; the shrink moves along
/// the ray through the clamped matrix.
Mat psd_project(const Mat& m, const Mat& cap);

/// Degraded Gaussian vector broadcast channel: Y = G'X + N, Z = Y + N~ with
/// N ~ N(0, K), N~ ~ N(0, Ktilde) and input constraint E[XX'] <= Kprime.
struct GaussianBCModel {
    int d = 0;
    Mat G, K, Ktilde, Kprime;

    GaussianBCModel(Mat g, Mat k, Mat ktilde, Mat kprime);

    /// Channel-output covariance contribution G' B G of an input covariance B.
    Mat out_cov(const Mat& B) const { return sym(G.transpose() * B * G); }
};

/// Two-letter scalar-channel-per-letter linear system:
///   Y1 = X1 + N1,  X2 = A Y1 + C X1 + W,  Y2 = X2 + N2
/// with X1 ~ N(0, input1_cov), W ~ N(0, innovation_cov) fresh, and all of
/// (X1, W, N1, N2) independent.  A is the output-feedback gain; C correlates
/// the inputs without touching the noise.
struct LinearFeedbackSystem {
    int d = 0;
    Mat input1_cov;      // Cov(X1)
    Mat feedback_gain;   // A
    Mat input_cross_gain;  // C
    Mat innovation_cov;  // Cov(W)
    Mat noise1_cov;      // Cov(N1), strictly PD
    Mat noise2_cov;      // Cov(N2), strictly PD

    LinearFeedbackSystem(int dim, Mat s1, Mat a, Mat c, Mat w, Mat n1, Mat n2);

    /// 4d x 4d covariance of (X1, X2, Y1, Y2), PSD by construction.
    Mat composite_covariance() const;
};

/// Directed information I(X1,X2 -> Y1,Y2) in nats for a jointly Gaussian
/// composite covariance with blocks (X1, X2, Y1, Y2) of size d:
/// h(Y1) - h(Y1|X1) + h(Y2|Y1) - h(Y2|Y1,X1,X2).  Exactly degenerate
/// conditioning blocks are handled by restriction to their range; singular
/// blocks inconsistent with the joint covariance raise input_error.
double directed_information_gaussian(const Mat& composite, int d);

double gaussian_directed_information(const LinearFeedbackSystem& sys);

/// Composite covariance of the rotated pair U = ((X1+X2), (X1-X2))/sqrt(2),
/// V likewise on the outputs.
Mat rotate_composite(const Mat& composite, int d);

/// Directed information is invariant under the joint input/output rotation
/// when the inputs are independent of the channel noises and the two letters
/// share one noise covariance.  Systems outside that class (nonzero
/// output-feedback gain or unequal noise covariances) are rejected with
/// model_class_error.  gap = |lhs - rhs|, pass at 1e-9 nats.
CheckRecord check_rotation_invariance(const LinearFeedbackSystem& sys);

}  // namespace fbcap
