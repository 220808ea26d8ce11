#include "fbcap/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "fbcap/parallel.hpp"

namespace fbcap {

namespace {

std::vector<int> policy_axes(int step, int x_size, int y_size, bool sees) {
    std::vector<int> axes;
    for (int i = 0; i < step; ++i) axes.push_back(x_size);
    if (sees)
        for (int i = 0; i < step; ++i) axes.push_back(y_size);
    axes.push_back(x_size);
    return axes;
}

Rng stream_rng(std::uint64_t seed, std::size_t index) {
    return Rng(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

}  // namespace

FeedbackPolicy::FeedbackPolicy(int n, int xs, int ys, bool sees, std::vector<JointDist> t)
    : horizon(n), x_size(xs), y_size(ys), sees_outputs(sees), tables(std::move(t)) {
    if (n < 1 || xs < 2 || ys < 1) throw input_error("FeedbackPolicy: bad sizes");
    if (tables.size() != static_cast<std::size_t>(n))
        throw input_error("FeedbackPolicy: one table per step required");
    for (int step = 0; step < n; ++step) {
        const auto& tab = tables[static_cast<std::size_t>(step)];
        if (tab.axes != policy_axes(step, xs, ys, sees))
            throw input_error("FeedbackPolicy: table axes mismatch at step " + std::to_string(step));
        std::size_t block = static_cast<std::size_t>(xs);
        for (std::size_t off = 0; off < tab.p.size(); off += block) {
            double s = 0.0;
            for (std::size_t i = 0; i < block; ++i) s += tab.p[off + i];
            if (std::abs(s - 1.0) > 1e-12)
                throw input_error("FeedbackPolicy: conditional slice does not sum to 1");
        }
    }
}

FeedbackPolicy FeedbackPolicy::iid(int n, int y_size, const FiniteDist& px) {
    return from_function(n, px.size(), y_size, false,
                         [&px](const std::vector<int>&, const std::vector<int>&) { return px; });
}

FeedbackPolicy FeedbackPolicy::from_input_law(const JointDist& input_law, int y_size) {
    int n = input_law.rank();
    int xs = input_law.axes[0];
    for (int a : input_law.axes)
        if (a != xs) throw input_error("from_input_law: unequal input axes");
    // Conditionals p(x_k | x^{k-1}) from the prefix marginals.
    std::vector<JointDist> prefixes;
    for (int k = 1; k <= n; ++k) {
        std::vector<int> keep;
        for (int i = 0; i < k; ++i) keep.push_back(i);
        prefixes.push_back(input_law.marginal(keep));
    }
    return from_function(n, xs, y_size, false,
                         [&](const std::vector<int>& xh, const std::vector<int>&) {
                             int k = static_cast<int>(xh.size());
                             const auto& num = prefixes[static_cast<std::size_t>(k)];
                             std::vector<int> idx = xh;
                             idx.push_back(0);
                             std::vector<double> mass(static_cast<std::size_t>(xs));
                             double denom = 0.0;
                             for (int x = 0; x < xs; ++x) {
                                 idx.back() = x;
                                 mass[static_cast<std::size_t>(x)] = num.at(idx);
                                 denom += mass[static_cast<std::size_t>(x)];
                             }
                             if (denom <= 0.0) return FiniteDist::uniform(xs);
                             for (auto& v : mass) v /= denom;
                             FiniteDist d;
                             d.p = std::move(mass);
                             return d;
                         });
}

FeedbackPolicy FeedbackPolicy::random(Rng& rng, int n, int x_size, int y_size) {
    return from_function(n, x_size, y_size, true,
                         [&rng, x_size](const std::vector<int>&, const std::vector<int>&) {
                             FiniteDist d;
                             d.p = rng.simplex(static_cast<std::size_t>(x_size));
                             return d;
                         });
}

FeedbackPolicy FeedbackPolicy::from_function(
    int n, int x_size, int y_size, bool sees_outputs,
    const std::function<FiniteDist(const std::vector<int>&, const std::vector<int>&)>& f) {
    std::vector<JointDist> tables;
    for (int step = 0; step < n; ++step) {
        auto axes = policy_axes(step, x_size, y_size, sees_outputs);
        std::size_t cells = 1;
        for (int a : axes) cells *= static_cast<std::size_t>(a);
        std::vector<double> mass(cells, 0.0);
        std::size_t histories = cells / static_cast<std::size_t>(x_size);
        std::vector<int> xh(static_cast<std::size_t>(step));
        std::vector<int> yh(sees_outputs ? static_cast<std::size_t>(step) : 0);
        for (std::size_t h = 0; h < histories; ++h) {
            std::size_t rem = h;
            if (sees_outputs)
                for (int i = step - 1; i >= 0; --i) {
                    yh[static_cast<std::size_t>(i)] = static_cast<int>(rem % y_size);
                    rem /= static_cast<std::size_t>(y_size);
                }
            for (int i = step - 1; i >= 0; --i) {
                xh[static_cast<std::size_t>(i)] = static_cast<int>(rem % x_size);
                rem /= static_cast<std::size_t>(x_size);
            }
            FiniteDist d = f(xh, yh);
            if (d.size() != x_size) throw input_error("from_function: pmf size mismatch");
            for (int x = 0; x < x_size; ++x)
                mass[h * static_cast<std::size_t>(x_size) + static_cast<std::size_t>(x)] = d[x];
        }
        // Tables are conditional tensors, not joint pmfs; bypass mass checks.
        JointDist t;
        t.axes = std::move(axes);
        t.p = std::move(mass);
        tables.push_back(std::move(t));
    }
    return FeedbackPolicy(n, x_size, y_size, sees_outputs, std::move(tables));
}

FiniteDist FeedbackPolicy::step_dist(int n, const std::vector<int>& xh,
                                     const std::vector<int>& yh) const {
    const auto& tab = tables[static_cast<std::size_t>(n)];
    std::vector<int> idx(xh.begin(), xh.end());
    if (sees_outputs) idx.insert(idx.end(), yh.begin(), yh.begin() + n);
    idx.push_back(0);
    std::vector<double> mass(static_cast<std::size_t>(x_size));
    for (int x = 0; x < x_size; ++x) {
        idx.back() = x;
        mass[static_cast<std::size_t>(x)] = tab.at(idx);
    }
    FiniteDist d;
    d.p = std::move(mass);
    return d;
}

std::vector<int> TrajectoryDist::input_axes() const {
    std::vector<int> v;
    for (int i = 0; i < N; ++i) v.push_back(i);
    return v;
}

std::vector<int> TrajectoryDist::output_axes() const {
    std::vector<int> v;
    for (int i = 0; i < N; ++i) v.push_back(N + i);
    return v;
}

TrajectoryDist build_trajectory(const DMChannel& ch, const FeedbackPolicy& pol) {
    if (pol.x_size != ch.in_size || pol.y_size != ch.out_size)
        throw input_error("build_trajectory: alphabet mismatch");
    const int N = pol.horizon;
    const int xs = ch.in_size, ys = ch.out_size;
    double cells_d = std::pow(static_cast<double>(xs), N) * std::pow(static_cast<double>(ys), N);
    if (cells_d > static_cast<double>(kTrajectoryCellCap))
        throw input_error("build_trajectory: trajectory tensor exceeds cell cap");
    std::size_t cells = static_cast<std::size_t>(cells_d + 0.5);

    std::vector<int> axes;
    for (int i = 0; i < N; ++i) axes.push_back(xs);
    for (int i = 0; i < N; ++i) axes.push_back(ys);
    std::vector<double> mass(cells, 0.0);

    std::vector<int> x(static_cast<std::size_t>(N)), y(static_cast<std::size_t>(N));
    std::vector<int> tidx;
    tidx.reserve(2 * static_cast<std::size_t>(N) + 1);
    for (std::size_t f = 0; f < cells; ++f) {
        std::size_t rem = f;
        for (int i = N - 1; i >= 0; --i) {
            y[static_cast<std::size_t>(i)] = static_cast<int>(rem % ys);
            rem /= static_cast<std::size_t>(ys);
        }
        for (int i = N - 1; i >= 0; --i) {
            x[static_cast<std::size_t>(i)] = static_cast<int>(rem % xs);
            rem /= static_cast<std::size_t>(xs);
        }
        double p = 1.0;
        for (int n = 0; n < N && p > 0.0; ++n) {
            const auto& tab = pol.tables[static_cast<std::size_t>(n)];
            tidx.assign(x.begin(), x.begin() + n);
            if (pol.sees_outputs) tidx.insert(tidx.end(), y.begin(), y.begin() + n);
            tidx.push_back(x[static_cast<std::size_t>(n)]);
            p *= tab.at(tidx);
            p *= ch.row(x[static_cast<std::size_t>(n)])[y[static_cast<std::size_t>(n)]];
        }
        mass[f] = p;
    }
    TrajectoryDist t;
    t.N = N;
    t.x_size = xs;
    t.y_size = ys;
    t.law.axes = std::move(axes);
    t.law.p = std::move(mass);
    double s = 0.0;
    for (double v : t.law.p) s += v;
    if (std::abs(s - 1.0) > 1e-12) throw input_error("build_trajectory: law does not normalize");
    return t;
}

double trajectory_channel_residual(const TrajectoryDist& t, const DMChannel& ch) {
    double worst = 0.0;
    for (int n = 0; n < t.N; ++n) {
        // Marginal over (x_1..x_{n+1}, y_1..y_{n+1}); the conditional of the
        // last output given the rest must match the channel row of x_{n+1}.
        std::vector<int> keep;
        for (int i = 0; i <= n; ++i) keep.push_back(i);
        for (int i = 0; i <= n; ++i) keep.push_back(t.N + i);
        JointDist m = t.law.marginal(keep);
        std::size_t ys = static_cast<std::size_t>(t.y_size);
        for (std::size_t base = 0; base < m.p.size(); base += ys) {
            double mass = 0.0;
            for (std::size_t j = 0; j < ys; ++j) mass += m.p[base + j];
            if (mass <= 1e-12) continue;
            // x_{n+1} digit: axis n within the kept tensor.
            std::size_t stride = 1;
            for (std::size_t a = static_cast<std::size_t>(n) + 1; a < m.axes.size(); ++a)
                stride *= static_cast<std::size_t>(m.axes[a]);
            int xn = static_cast<int>((base / stride) % static_cast<std::size_t>(t.x_size));
            for (std::size_t j = 0; j < ys; ++j)
                worst = std::max(worst,
                                 std::abs(m.p[base + j] / mass - ch.row(xn)[static_cast<int>(j)]));
        }
    }
    return worst;
}

double directed_information(const JointDist& j, const std::vector<int>& input_axes,
                            const std::vector<int>& output_axes,
                            const std::vector<int>& given_axes) {
    if (input_axes.size() != output_axes.size())
        throw input_error("directed_information: axis count mismatch");
    double total = 0.0;
    for (std::size_t n = 0; n < input_axes.size(); ++n) {
        std::vector<int> a(input_axes.begin(), input_axes.begin() + n + 1);
        std::vector<int> b{output_axes[n]};
        std::vector<int> c(output_axes.begin(), output_axes.begin() + n);
        c.insert(c.end(), given_axes.begin(), given_axes.end());
        total += conditional_mi(j, a, b, c);
    }
    return total;
}

double directed_information(const TrajectoryDist& t) {
    return directed_information(t.law, t.input_axes(), t.output_axes());
}

double block_mutual_information(const TrajectoryDist& t) {
    return mutual_information(t.law, t.input_axes(), t.output_axes());
}

CheckReport check_directed_subadditivity(const DMChannel& letter_channel,
                                         const std::vector<FeedbackPolicy>& policies) {
    CheckReport rep;
    rep.suite = "two-letter directed-information subadditivity";
    for (std::size_t k = 0; k < policies.size(); ++k) {
        const auto& pol = policies[k];
        if (pol.horizon != 2)
            throw input_error("check_directed_subadditivity: two-letter policies required");
        TrajectoryDist t = build_trajectory(letter_channel, pol);
        double lhs = directed_information(t);
        double rhs = mutual_information(t.law, {0}, {2}) + mutual_information(t.law, {1}, {3});
        double iy = mutual_information(t.law, {2}, {3});
        CheckRecord rec;
        rec.lhs = lhs;
        rec.rhs = rhs;
        rec.gap = rhs - lhs;
        bool slack_is_output_mi = std::abs(rec.gap - iy) <= 1e-9;
        rec.pass = rec.gap >= -1e-10 && slack_is_output_mi;
        rec.construction = "policy " + std::to_string(k) +
                           (rec.gap <= 1e-9 ? " (equality, outputs independent)" : "") +
                           ", slack = I(Y1;Y2) = " + fmt_g17(iy);
        rep.add(std::move(rec));
    }
    return rep;
}

CheckReport check_feedback_mi_counterexample() {
    CheckReport rep;
    rep.suite = "feedback counterexample to mutual-information subadditivity";
    const double h04 = -(0.4 * std::log(0.4) + 0.6 * std::log(0.6));
    const double ln2 = std::log(2.0);

    auto make_traj = [](double p) {
        auto ch = DMChannel::bsc(p);
        auto pol = FeedbackPolicy::from_function(
            2, 2, 2, true, [](const std::vector<int>& xh, const std::vector<int>& yh) {
                if (xh.empty()) return FiniteDist::uniform(2);
                return FiniteDist::point_mass(2, yh[0]);
            });
        return build_trajectory(ch, pol);
    };

    TrajectoryDist t = make_traj(0.4);
    double joint_mi = block_mutual_information(t);
    double marg_sum = mutual_information(t.law, {0}, {2}) + mutual_information(t.law, {1}, {3});
    double directed = directed_information(t);

    CheckRecord r1;
    r1.construction = "BSC(0.4), X2 = previous output: joint MI vs marginal-MI sum";
    r1.lhs = joint_mi;
    r1.rhs = marg_sum;
    r1.gap = joint_mi - marg_sum;
    r1.pass = joint_mi > marg_sum && std::abs(joint_mi - ln2) <= 1e-9 &&
              std::abs(marg_sum - 2.0 * (ln2 - h04)) <= 1e-9;
    rep.add(std::move(r1));

    CheckRecord r2;
    r2.construction = "BSC(0.4), X2 = previous output: directed vs marginal-MI sum";
    r2.lhs = directed;
    r2.rhs = marg_sum;
    r2.gap = marg_sum - directed;
    r2.pass = directed <= marg_sum + 1e-12 && std::abs(directed - (ln2 - h04)) <= 1e-9;
    rep.add(std::move(r2));

    TrajectoryDist t0 = make_traj(0.0);
    CheckRecord r3;
    r3.construction = "noiseless control (p = 0): joint MI vs marginal-MI sum";
    r3.lhs = block_mutual_information(t0);
    r3.rhs = mutual_information(t0.law, {0}, {2}) + mutual_information(t0.law, {1}, {3});
    r3.gap = r3.rhs - r3.lhs;
    r3.pass = r3.lhs <= r3.rhs + 1e-12 && std::abs(r3.lhs - ln2) <= 1e-9 &&
              std::abs(r3.rhs - 2.0 * ln2) <= 1e-9;
    rep.add(std::move(r3));
    return rep;
}

CheckReport check_directed_vs_block(std::uint64_t seed, int n_triples, int workers) {
    std::vector<CheckRecord> recs(static_cast<std::size_t>(n_triples) * 2);
    parallel_for(static_cast<std::size_t>(n_triples), workers, [&](std::size_t i) {
        Rng rng = stream_rng(seed, i);
        int xs = 2 + static_cast<int>(rng.uniform_int(3));
        int ys = 2 + static_cast<int>(rng.uniform_int(3));
        int N = 1 + static_cast<int>(rng.uniform_int(3));
        std::vector<FiniteDist> rows;
        for (int x = 0; x < xs; ++x) {
            FiniteDist d;
            d.p = rng.simplex(static_cast<std::size_t>(ys));
            rows.push_back(std::move(d));
        }
        DMChannel ch(xs, ys, std::move(rows));

        auto pol = FeedbackPolicy::random(rng, N, xs, ys);
        TrajectoryDist t = build_trajectory(ch, pol);
        CheckRecord a;
        a.construction = "triple " + std::to_string(i) + ": random feedback policy, N=" +
                         std::to_string(N) + ", |X|=" + std::to_string(xs) + ", |Y|=" +
                         std::to_string(ys);
        a.lhs = directed_information(t);
        a.rhs = block_mutual_information(t);
        a.gap = a.rhs - a.lhs;
        a.pass = a.gap >= -1e-12;
        recs[2 * i] = std::move(a);

        std::size_t ncells = 1;
        for (int k = 0; k < N; ++k) ncells *= static_cast<std::size_t>(xs);
        JointDist law(std::vector<int>(static_cast<std::size_t>(N), xs), rng.simplex(ncells));
        TrajectoryDist tnf = build_trajectory(ch, FeedbackPolicy::from_input_law(law, ys));
        CheckRecord b;
        b.construction = "triple " + std::to_string(i) + ": output-ignoring policy (equality)";
        b.lhs = directed_information(tnf);
        b.rhs = block_mutual_information(tnf);
        b.gap = b.rhs - b.lhs;
        b.pass = std::abs(b.gap) <= 1e-12;
        recs[2 * i + 1] = std::move(b);
    });
    CheckReport rep;
    rep.suite = "directed vs block mutual information";
    for (auto& r : recs) rep.add(std::move(r));
    return rep;
}

}  // namespace fbcap
