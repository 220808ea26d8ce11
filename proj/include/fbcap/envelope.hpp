#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fbcap/common.hpp"
#include "fbcap/finite.hpp"

namespace fbcap {

/// Two-stage broadcast channel X -> Y -> Z with q(y,z|x) = p1(y|x) p2(z|y);
/// Z is a physically degraded version of Y by construction.
struct DegradedBC {
    DMChannel stage1;
    DMChannel stage2;

    DegradedBC() = default;
    DegradedBC(DMChannel s1, DMChannel s2);

    int input_size() const { return stage1.in_size; }
    int y_size() const { return stage1.out_size; }
    int z_size() const { return stage2.out_size; }

    /// Cascade channel X -> Z.
    DMChannel end_to_end() const { return stage1.compose(stage2); }

    /// Independent pair used as a two-letter channel; indices follow
    /// DMChannel::product.
    DegradedBC product(const DegradedBC& other) const;

    static DegradedBC bsc(double crossover1, double crossover2);
};

/// I(X;Y) - lambda I(X;Z) in nats at input pmf px.  Requires lambda >= 1.
double s_lambda(const DegradedBC& bc, const FiniteDist& px, double lambda);

/// sum_v p(v) s_lambda(p(x|v)) for a joint p(v,x) with axes (v, x).
double s_lambda_conditional(const DegradedBC& bc, const JointDist& pvx, double lambda);

/// Best value found by hill-climbing over joints p(v,x) whose X-marginal is
/// pinned to the query; vx carries the achieving joint with axes (v, x) and
/// |V| = input_size + 1.
struct ClimbResult {
    double value = 0.0;
    JointDist vx;
    int restart = -1;
};

ClimbResult climb_envelope(const DegradedBC& bc, double lambda, const FiniteDist& query,
                           std::uint64_t seed, int restarts = 32, int workers = 1);

/// Largest simplex grid on which the exact hull LP is still run for input
/// alphabets of size >= 3 (binary inputs use the 1-D chain instead).
inline constexpr std::size_t kEnvelopeLpGridCap = 1000;

/// s_lambda sampled on a simplex grid together with its upper concave
/// envelope on that grid and a one-cell modulus bound for off-grid queries.
struct EnvelopeTable {
    double lambda = 1.0;
    int resolution = 0;
    int dim = 0;
    std::vector<FiniteDist> grid;
    std::vector<double> base;
    std::vector<double> hull;
    double certified_gap = 0.0;

    /// Grid-envelope estimate at an arbitrary pmf: chord interpolation for
    /// binary inputs, the hull LP otherwise.  Underestimates the true
    /// envelope by at most certified_gap.
    double hull_at(const FiniteDist& query) const;
};

EnvelopeTable envelope_table(const DegradedBC& bc, double lambda, int resolution);

/// Dual-route envelope estimate: grid hull and |V|-bounded climb, with the
/// larger of the two reported as value.
struct EnvelopeEstimate {
    EnvelopeTable table;
    FiniteDist query;
    double hull_at_query = 0.0;
    double climb_at_query = 0.0;
    double value = 0.0;
    ClimbResult climb;
};

EnvelopeEstimate envelope(const DegradedBC& bc, double lambda, const FiniteDist& query,
                          int resolution, std::uint64_t seed = 0xe57ULL, int restarts = 32,
                          int workers = 1);

/// sum_w weights[w] * envelope(components[w]).value.
double conditional_envelope(const DegradedBC& bc, double lambda,
                            const std::vector<double>& weights,
                            const std::vector<FiniteDist>& components, int resolution,
                            std::uint64_t seed = 0xe57ULL, int restarts = 32, int workers = 1);

/// Joint law of (V, X1, Y1, Z1, X2, Y2, Z2) for a two-letter scheme: X1 is
/// drawn from px1_given_v, both letters pass through bc independently, and
/// X2 is drawn from px2 given everything observable after the first letter.
JointDist build_two_letter_joint(
    const DegradedBC& bc, const FiniteDist& pv, const std::vector<FiniteDist>& px1_given_v,
    const std::function<FiniteDist(int v, int x1, int y1, int z1)>& px2);

/// I(X1,X2 -> Y1,Y2 | V) - lambda I(X1,X2 -> Z1,Z2 | V) in nats for a joint
/// produced by build_two_letter_joint.
double two_letter_directed_objective(const JointDist& scheme, double lambda);

/// Envelope sanity sweep over random binary degraded BCs: grid dominance,
/// grid concavity (second differences), and mixture-vs-envelope (Jensen)
/// margins, three records per channel.
CheckReport check_envelope_properties(int n_channels, int resolution, std::uint64_t seed,
                                      int workers = 1);

/// Two-letter envelope subadditivity without feedback: for random joints
/// q(x1,x2), the climbed product-channel envelope never exceeds the sum of
/// single-letter envelopes beyond the combined certificate.
CheckReport check_envelope_subadditivity(const DegradedBC& bc, double lambda, int samples,
                                         int resolution, std::uint64_t seed, int workers = 1);

/// Two-letter directed objective under strong-output feedback (X2 drawn
/// given V, X1, Y1) stays below the sum of single-letter envelopes.  Schemes
/// where X2 sees Z1 are excluded: build_two_letter_joint with an explicit
/// Z1-dependent rule exhibits strict violations (see the tests).
CheckReport check_feedback_envelope_subadditivity(const DegradedBC& bc, double lambda,
                                                  int samples, int resolution,
                                                  std::uint64_t seed, int workers = 1);

}  // namespace fbcap
