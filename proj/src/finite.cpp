#include "fbcap/finite.hpp"

#include <algorithm>
#include <cmath>

namespace fbcap {

namespace {

void validate_mass(std::vector<double>& mass, const char* what) {
    double sum = 0.0;
    for (auto& v : mass) {
        if (v < 0.0) {
            if (v < -1e-12) throw input_error(std::string(what) + ": negative mass entry");
            v = 0.0;
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw input_error(std::string(what) + ": mass sums to " + fmt_g17(sum));
}

void check_axis_set(const JointDist& j, const std::vector<int>& axes) {
    std::vector<bool> seen(static_cast<std::size_t>(j.rank()), false);
    for (int a : axes) {
        if (a < 0 || a >= j.rank()) throw input_error("axis index out of range");
        if (seen[static_cast<std::size_t>(a)]) throw input_error("duplicate axis in set");
        seen[static_cast<std::size_t>(a)] = true;
    }
}

void check_disjoint(const JointDist& j, std::initializer_list<const std::vector<int>*> sets) {
    std::vector<int> count(static_cast<std::size_t>(j.rank()), 0);
    for (const auto* s : sets) {
        check_axis_set(j, *s);
        for (int a : *s) ++count[static_cast<std::size_t>(a)];
    }
    for (int c : count)
        if (c > 1) throw input_error("overlapping axis sets");
}

std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

}  // namespace

FiniteDist::FiniteDist(std::vector<double> mass) : p(std::move(mass)) {
    if (p.empty()) throw input_error("FiniteDist: empty support");
    validate_mass(p, "FiniteDist");
}

FiniteDist FiniteDist::uniform(int n) {
    if (n < 1) throw input_error("FiniteDist::uniform: empty support");
    return FiniteDist(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
}

FiniteDist FiniteDist::point_mass(int n, int i) {
    if (n < 1 || i < 0 || i >= n) throw input_error("FiniteDist::point_mass: bad index");
    std::vector<double> m(static_cast<std::size_t>(n), 0.0);
    m[static_cast<std::size_t>(i)] = 1.0;
    return FiniteDist(std::move(m));
}

JointDist::JointDist(std::vector<int> axis_sizes, std::vector<double> mass)
    : axes(std::move(axis_sizes)), p(std::move(mass)) {
    if (axes.empty()) throw input_error("JointDist: no axes");
    std::size_t n = 1;
    for (int a : axes) {
        if (a < 1) throw input_error("JointDist: axis size must be positive");
        n *= static_cast<std::size_t>(a);
    }
    if (n != p.size()) throw input_error("JointDist: mass size does not match axes");
    validate_mass(p, "JointDist");
}

std::size_t JointDist::flat_index(const std::vector<int>& idx) const {
    if (idx.size() != axes.size()) throw input_error("JointDist: index rank mismatch");
    std::size_t f = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= axes[k]) throw input_error("JointDist: index out of range");
        f = f * static_cast<std::size_t>(axes[k]) + static_cast<std::size_t>(idx[k]);
    }
    return f;
}

JointDist JointDist::marginal(const std::vector<int>& keep) const {
    check_axis_set(*this, keep);
    std::vector<int> out_axes;
    out_axes.reserve(keep.size());
    for (int a : keep) out_axes.push_back(axes[static_cast<std::size_t>(a)]);
    std::size_t out_cells = 1;
    for (int a : out_axes) out_cells *= static_cast<std::size_t>(a);
    std::vector<double> out(out_cells, 0.0);

    std::size_t r = axes.size();
    std::vector<int> digit(r, 0);
    for (std::size_t f = 0; f < p.size(); ++f) {
        std::size_t sub = 0;
        for (std::size_t k = 0; k < keep.size(); ++k)
            sub = sub * static_cast<std::size_t>(out_axes[k]) +
                  static_cast<std::size_t>(digit[static_cast<std::size_t>(keep[k])]);
        out[sub] += p[f];
        for (std::size_t k = r; k-- > 0;) {
            if (++digit[k] < axes[k]) break;
            digit[k] = 0;
        }
    }
    JointDist m;
    m.axes = std::move(out_axes);
    m.p = std::move(out);
    return m;
}

FiniteDist JointDist::axis_marginal(int axis) const {
    JointDist m = marginal({axis});
    FiniteDist d;
    d.p = std::move(m.p);
    return d;
}

DMChannel::DMChannel(int input_size, int output_size, std::vector<FiniteDist> transition_rows)
    : in_size(input_size), out_size(output_size), rows(std::move(transition_rows)) {
    if (in_size < 1 || out_size < 1) throw input_error("DMChannel: alphabet sizes must be positive");
    if (rows.size() != static_cast<std::size_t>(in_size))
        throw input_error("DMChannel: row count does not match input size");
    for (const auto& r : rows)
        if (r.size() != out_size) throw input_error("DMChannel: row length does not match output size");
}

FiniteDist DMChannel::apply(const FiniteDist& px) const {
    if (px.size() != in_size) throw input_error("DMChannel::apply: input size mismatch");
    std::vector<double> out(static_cast<std::size_t>(out_size), 0.0);
    for (int x = 0; x < in_size; ++x)
        for (int y = 0; y < out_size; ++y)
            out[static_cast<std::size_t>(y)] += px[x] * row(x)[y];
    FiniteDist d;
    d.p = std::move(out);
    return d;
}

JointDist DMChannel::joint(const FiniteDist& px) const {
    if (px.size() != in_size) throw input_error("DMChannel::joint: input size mismatch");
    std::vector<double> mass;
    mass.reserve(static_cast<std::size_t>(in_size) * static_cast<std::size_t>(out_size));
    for (int x = 0; x < in_size; ++x)
        for (int y = 0; y < out_size; ++y) mass.push_back(px[x] * row(x)[y]);
    JointDist j;
    j.axes = {in_size, out_size};
    j.p = std::move(mass);
    return j;
}

DMChannel DMChannel::compose(const DMChannel& next) const {
    if (out_size != next.in_size) throw input_error("DMChannel::compose: alphabet mismatch");
    std::vector<FiniteDist> out_rows;
    out_rows.reserve(static_cast<std::size_t>(in_size));
    for (int x = 0; x < in_size; ++x) {
        std::vector<double> r(static_cast<std::size_t>(next.out_size), 0.0);
        for (int y = 0; y < out_size; ++y)
            for (int z = 0; z < next.out_size; ++z)
                r[static_cast<std::size_t>(z)] += row(x)[y] * next.row(y)[z];
        FiniteDist d;
        d.p = std::move(r);
        out_rows.push_back(std::move(d));
    }
    DMChannel c;
    c.in_size = in_size;
    c.out_size = next.out_size;
    c.rows = std::move(out_rows);
    return c;
}

DMChannel DMChannel::product(const DMChannel& other) const {
    std::vector<FiniteDist> out_rows;
    out_rows.reserve(static_cast<std::size_t>(in_size) * static_cast<std::size_t>(other.in_size));
    for (int a = 0; a < in_size; ++a)
        for (int b = 0; b < other.in_size; ++b) {
            std::vector<double> r;
            r.reserve(static_cast<std::size_t>(out_size) * static_cast<std::size_t>(other.out_size));
            for (int ya = 0; ya < out_size; ++ya)
                for (int yb = 0; yb < other.out_size; ++yb)
                    r.push_back(row(a)[ya] * other.row(b)[yb]);
            FiniteDist d;
            d.p = std::move(r);
            out_rows.push_back(std::move(d));
        }
    DMChannel c;
    c.in_size = in_size * other.in_size;
    c.out_size = out_size * other.out_size;
    c.rows = std::move(out_rows);
    return c;
}

DMChannel DMChannel::bsc(double crossover) {
    if (crossover < 0.0 || crossover > 1.0) throw input_error("bsc: crossover outside [0,1]");
    return DMChannel(2, 2,
                     {FiniteDist({1.0 - crossover, crossover}),
                      FiniteDist({crossover, 1.0 - crossover})});
}

DMChannel DMChannel::identity(int n) {
    std::vector<FiniteDist> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows.push_back(FiniteDist::point_mass(n, i));
    return DMChannel(n, n, std::move(rows));
}

double entropy(const FiniteDist& d, Unit unit) {
    double h = 0.0;
    for (double v : d.p)
        if (v > kProbFloor) h -= xlogx(v);
    return from_nats(h, unit);
}

double subset_entropy(const JointDist& j, const std::vector<int>& axes) {
    JointDist m = j.marginal(axes);
    double h = 0.0;
    for (double v : m.p)
        if (v > kProbFloor) h -= xlogx(v);
    return h;
}

double mutual_information(const JointDist& j, const std::vector<int>& axes_a,
                          const std::vector<int>& axes_b, Unit unit) {
    check_disjoint(j, {&axes_a, &axes_b});
    double v = subset_entropy(j, axes_a) + subset_entropy(j, axes_b) -
               subset_entropy(j, concat(axes_a, axes_b));
    if (v < 0.0 && v > -1e-12) v = 0.0;
    return from_nats(v, unit);
}

double conditional_mi(const JointDist& j, const std::vector<int>& axes_a,
                      const std::vector<int>& axes_b, const std::vector<int>& axes_c,
                      Unit unit) {
    check_disjoint(j, {&axes_a, &axes_b, &axes_c});
    if (axes_c.empty()) return mutual_information(j, axes_a, axes_b, unit);
    double v = subset_entropy(j, concat(axes_a, axes_c)) +
               subset_entropy(j, concat(axes_b, axes_c)) - subset_entropy(j, axes_c) -
               subset_entropy(j, concat(concat(axes_a, axes_b), axes_c));
    if (v < 0.0 && v > -1e-12) v = 0.0;
    return from_nats(v, unit);
}

double simplex_grid_size(int dim, int resolution) {
    // C(resolution + dim - 1, dim - 1)
    double c = 1.0;
    for (int i = 1; i <= dim - 1; ++i) c *= static_cast<double>(resolution + i) / i;
    return c;
}

std::vector<FiniteDist> simplex_grid(int dim, int resolution) {
    if (dim < 1 || resolution < 1) throw input_error("simplex_grid: dim and resolution must be >= 1");
    double count = simplex_grid_size(dim, resolution);
    if (count > static_cast<double>(kSimplexGridCap))
        throw input_error("simplex_grid: " + fmt_g17(count) + " points exceeds cap");

    std::vector<FiniteDist> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<int> k(static_cast<std::size_t>(dim), 0);
    // Lexicographic recursion over count vectors.
    auto emit = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == dim - 1) {
            k[static_cast<std::size_t>(pos)] = remaining;
            std::vector<double> mass(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i)
                mass[static_cast<std::size_t>(i)] =
                    static_cast<double>(k[static_cast<std::size_t>(i)]) / resolution;
            FiniteDist d;
            d.p = std::move(mass);
            out.push_back(std::move(d));
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            k[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    emit(emit, 0, resolution);
    return out;
}

}  // namespace fbcap
