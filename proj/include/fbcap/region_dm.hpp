#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fbcap/common.hpp"
#include "fbcap/envelope.hpp"
#include "fbcap/finite.hpp"

namespace fbcap {

/// One point of a DM rate region, in bits, together with the joint law(s)
/// p(u, x) that achieve it (one joint for superposition regions, two for
/// product regions).
struct DmRatePoint {
    double R0 = 0.0;
    double R1 = 0.0;
    double R2 = 0.0;
    std::vector<JointDist> joints;
};

inline constexpr std::size_t kSuperpositionCellCap = 50'000'000;

/// Pareto frontier of the superposition region of a degraded BC:
/// R1 <= I(X;Y|U), R2 <= I(U;Z) over a resolution-r grid on p(u) and the
/// per-u conditionals p(x|u), with |U| = min(|X|,|Y|,|Z|) + 1.  Points are
/// ordered by ascending R1; ties between grid cells resolve to the earliest
/// cell so output is independent of worker count.
std::vector<DmRatePoint> superposition_region(const DegradedBC& bc, int resolution,
                                              int workers = 1);

/// Closed-form superposition pair for a BSC cascade: crossover p1 to the
/// strong user, end-to-end crossover p_end to the weak user, time-sharing
/// parameter alpha in [0, 1/2].  Returns (R1, R2) in bits.
std::pair<double, double> bsc_closed_form(double p1, double p_end, double alpha);

/// Product of two oppositely degraded components.  User 1 observes the pair
/// (Y1, Y2), user 2 observes (Z1, Z2); component 1 degrades X1 -> Y1 -> Z1
/// while component 2 degrades X2 -> Z2 -> Y2.
struct RpdbcModel {
    DegradedBC comp1;  // stages X1 -> Y1, Y1 -> Z1
    DegradedBC comp2;  // stages X2 -> Z2, Z2 -> Y2

    RpdbcModel(DegradedBC component1, DegradedBC component2);
};

/// 3-D Pareto set of (R0, R1, R2) corner points of the product region over
/// independent grids on p(u1,x1) and p(u2,x2) with |U_i| =
/// min(|X_i|,|Y_i|,|Z_i|), in bits.  Output sorted by (R0, R1, R2).
std::vector<DmRatePoint> rpdbc_region(const RpdbcModel& model, int resolution,
                                      int workers = 1);

/// Outcome of the physical-degradedness factorization check.
struct DegradednessResult {
    bool ok = false;
    double max_violation = 0.0;
    DegradedBC bc;  // populated when ok
};

/// Tests whether a joint channel X -> (Y, Z), output index y * z_size + z,
/// factors as q(y,z|x) = p1(y|x) p2(z|y) for a stochastic p2, and recovers
/// the stages when it does.  Unreached y rows of p2 default to uniform.
DegradednessResult is_degraded(const DMChannel& q, int y_size, int z_size);

}  // namespace fbcap
