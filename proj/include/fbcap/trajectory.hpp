#pragma once

#include <functional>
#include <vector>

#include "fbcap/common.hpp"
#include "fbcap/finite.hpp"

namespace fbcap {

/// Per-step input law of a feedback encoder: at step n the distribution of
/// X_n given the visible history (X^{n-1}, and Y^{n-1} when sees_outputs).
/// tables[n] has axes [x]*n (+ [y]*n when sees_outputs) + [x]; every history
/// slice of the last axis is a conditional pmf.
struct FeedbackPolicy {
    int horizon = 0;
    int x_size = 0;
    int y_size = 0;
    bool sees_outputs = true;
    std::vector<JointDist> tables;

    FeedbackPolicy() = default;
    FeedbackPolicy(int n, int xs, int ys, bool sees, std::vector<JointDist> t);

    /// Same marginal pmf every step, history ignored.
    static FeedbackPolicy iid(int n, int y_size, const FiniteDist& px);

    /// Output-ignoring policy realizing an arbitrary joint input law p(x^n).
    static FeedbackPolicy from_input_law(const JointDist& input_law, int y_size);

    /// Fully random conditional tables over the complete visible history.
    static FeedbackPolicy random(Rng& rng, int n, int x_size, int y_size);

    /// Policy from an explicit map of visible histories to input pmfs.
    static FeedbackPolicy from_function(
        int n, int x_size, int y_size, bool sees_outputs,
        const std::function<FiniteDist(const std::vector<int>& xh, const std::vector<int>& yh)>& f);

    /// Conditional pmf of x_n for a concrete history.
    FiniteDist step_dist(int n, const std::vector<int>& xh, const std::vector<int>& yh) const;
};

/// Exact joint law of (X_1..X_N, Y_1..Y_N) induced by a policy over a
/// memoryless channel.  Input axes come first.
struct TrajectoryDist {
    int N = 0;
    int x_size = 0;
    int y_size = 0;
    JointDist law;

    std::vector<int> input_axes() const;
    std::vector<int> output_axes() const;
};

inline constexpr std::size_t kTrajectoryCellCap = 2'000'000;

TrajectoryDist build_trajectory(const DMChannel& ch, const FeedbackPolicy& pol);

/// Max deviation of the trajectory's channel conditionals from the rows of
/// ch; zero (within fp) for any law produced by build_trajectory.
double trajectory_channel_residual(const TrajectoryDist& t, const DMChannel& ch);

/// Directed information sum_n I(X^n; Y_n | Y^{n-1} [, given]) in nats.
/// input_axes and output_axes are time-ordered and of equal length.
double directed_information(const JointDist& j, const std::vector<int>& input_axes,
                            const std::vector<int>& output_axes,
                            const std::vector<int>& given_axes = {});

double directed_information(const TrajectoryDist& t);

double block_mutual_information(const TrajectoryDist& t);

/// Two-letter subadditivity of directed information over a memoryless
/// channel: I(X^2 -> Y^2) <= I(X1;Y1) + I(X2;Y2) for every feedback policy,
/// with slack exactly I(Y1;Y2).  gap = rhs - lhs.
CheckReport check_directed_subadditivity(const DMChannel& letter_channel,
                                         const std::vector<FeedbackPolicy>& policies);

/// Fixed construction showing that block mutual information can exceed the
/// per-letter sum under feedback (X2 = previous output on a BSC) while the
/// directed quantity cannot.  All values in nats.
CheckReport check_feedback_mi_counterexample();

/// Random sweep of directed vs block mutual information: directed <= block
/// on every (channel, policy) draw, with equality for output-ignoring
/// policies.  gap = rhs - lhs where rhs is the block quantity.
CheckReport check_directed_vs_block(std::uint64_t seed, int n_triples, int workers = 1);

}  // namespace fbcap
