#pragma once

#include <vector>

#include "fbcap/common.hpp"

namespace fbcap {

/// Probability mass function over a finite alphabet.
struct FiniteDist {
    std::vector<double> p;

    FiniteDist() = default;
    explicit FiniteDist(std::vector<double> mass);

    int size() const { return static_cast<int>(p.size()); }
    double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }

    static FiniteDist uniform(int n);
    static FiniteDist point_mass(int n, int i);
};

/// Dense joint pmf over a tuple of finite alphabets, row-major with the last
/// axis fastest.
struct JointDist {
    std::vector<int> axes;
    std::vector<double> p;

    JointDist() = default;
    JointDist(std::vector<int> axis_sizes, std::vector<double> mass);

    int rank() const { return static_cast<int>(axes.size()); }
    std::size_t cells() const { return p.size(); }
    std::size_t flat_index(const std::vector<int>& idx) const;
    double at(const std::vector<int>& idx) const { return p[flat_index(idx)]; }

    /// Marginal over the given axes, in the given order.
    JointDist marginal(const std::vector<int>& keep) const;

    /// Marginal pmf of a single axis.
    FiniteDist axis_marginal(int axis) const;
};

/// Row-stochastic transition matrix between finite alphabets.
struct DMChannel {
    int in_size = 0;
    int out_size = 0;
    std::vector<FiniteDist> rows;

    DMChannel() = default;
    DMChannel(int input_size, int output_size, std::vector<FiniteDist> transition_rows);

    const FiniteDist& row(int x) const { return rows[static_cast<std::size_t>(x)]; }

    /// Output pmf for input pmf px.
    FiniteDist apply(const FiniteDist& px) const;

    /// Joint law over (x, y) for input pmf px.
    JointDist joint(const FiniteDist& px) const;

    /// Cascade: this followed by next (output of this feeds next).
    DMChannel compose(const DMChannel& next) const;

    /// Product channel on pairs; input (a,b) -> output (ya,yb), indices
    /// a*other.in_size+b and ya*other.out_size+yb.
    DMChannel product(const DMChannel& other) const;

    static DMChannel bsc(double crossover);
    static DMChannel identity(int n);
};

double entropy(const FiniteDist& d, Unit unit = Unit::nats);

/// Entropy of the marginal over a subset of axes, in nats.
double subset_entropy(const JointDist& j, const std::vector<int>& axes);

double mutual_information(const JointDist& j, const std::vector<int>& axes_a,
                          const std::vector<int>& axes_b, Unit unit = Unit::nats);

double conditional_mi(const JointDist& j, const std::vector<int>& axes_a,
                      const std::vector<int>& axes_b, const std::vector<int>& axes_c,
                      Unit unit = Unit::nats);

/// All compositions (k_1,...,k_dim)/resolution with sum k_i = resolution,
/// lexicographically ascending in the count vectors.  Throws when the point
/// count would exceed the configured cap.
std::vector<FiniteDist> simplex_grid(int dim, int resolution);

/// Number of points simplex_grid would return, as a double (to allow cap
/// checks without overflow).
double simplex_grid_size(int dim, int resolution);

inline constexpr std::size_t kSimplexGridCap = 20'000'000;

}  // namespace fbcap
