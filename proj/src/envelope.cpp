#include "fbcap/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fbcap/parallel.hpp"
#include "fbcap/trajectory.hpp"

namespace fbcap {

namespace {

Rng stream_rng(std::uint64_t seed, std::size_t index) {
    return Rng(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

double pmf_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) h -= xlogx(v);
    return h;
}

/// Precomputed per-row quantities so that s_lambda evaluations inside the
/// climb are a handful of dot products.
class SLambdaEvaluator {
  public:
    SLambdaEvaluator(const DegradedBC& bc, double lambda)
        : lambda_(lambda),
          nx_(bc.input_size()),
          ny_(bc.y_size()),
          nz_(bc.z_size()),
          py_(static_cast<std::size_t>(ny_)),
          pz_(static_cast<std::size_t>(nz_)) {
        DMChannel cascade = bc.end_to_end();
        yrows_.resize(static_cast<std::size_t>(nx_) * ny_);
        zrows_.resize(static_cast<std::size_t>(nx_) * nz_);
        hy_.resize(static_cast<std::size_t>(nx_));
        hz_.resize(static_cast<std::size_t>(nx_));
        for (int x = 0; x < nx_; ++x) {
            hy_[static_cast<std::size_t>(x)] = entropy(bc.stage1.row(x));
            hz_[static_cast<std::size_t>(x)] = entropy(cascade.row(x));
            for (int y = 0; y < ny_; ++y)
                yrows_[static_cast<std::size_t>(x) * ny_ + y] = bc.stage1.row(x)[y];
            for (int z = 0; z < nz_; ++z)
                zrows_[static_cast<std::size_t>(x) * nz_ + z] = cascade.row(x)[z];
        }
    }

    double at(const double* px) {
        std::fill(py_.begin(), py_.end(), 0.0);
        std::fill(pz_.begin(), pz_.end(), 0.0);
        double hyx = 0.0, hzx = 0.0;
        for (int x = 0; x < nx_; ++x) {
            double w = px[x];
            if (w <= 0.0) continue;
            hyx += w * hy_[static_cast<std::size_t>(x)];
            hzx += w * hz_[static_cast<std::size_t>(x)];
            for (int y = 0; y < ny_; ++y) py_[static_cast<std::size_t>(y)] += w * yrows_[static_cast<std::size_t>(x) * ny_ + y];
            for (int z = 0; z < nz_; ++z) pz_[static_cast<std::size_t>(z)] += w * zrows_[static_cast<std::size_t>(x) * nz_ + z];
        }
        return (pmf_entropy(py_) - hyx) - lambda_ * (pmf_entropy(pz_) - hzx);
    }

    int input_size() const { return nx_; }

  private:
    double lambda_;
    int nx_, ny_, nz_;
    std::vector<double> yrows_, zrows_, hy_, hz_;
    std::vector<double> py_, pz_;
};

void require_lambda(double lambda) {
    if (!(lambda >= 1.0)) throw input_error("lambda must be at least 1");
}

/// maximize c.w subject to A w = b, w >= 0 via two-phase dense simplex with
/// Bland's rule; assumes b >= 0 and a feasible, bounded program.
double lp_maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                   const std::vector<double>& c) {
    const int m = static_cast<int>(A.size());
    const int n = static_cast<int>(c.size());
    const int cols = n + m + 1;
    const double eps = 1e-9;
    std::vector<double> T(static_cast<std::size_t>(m + 1) * cols, 0.0);
    auto at = [&](int r, int j) -> double& {
        return T[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(j)];
    };
    std::vector<int> basis(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) at(i, j) = A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        at(i, n + i) = 1.0;
        at(i, cols - 1) = b[static_cast<std::size_t>(i)];
        basis[static_cast<std::size_t>(i)] = n + i;
    }

    auto pivot = [&](int pr, int pc) {
        double pv = at(pr, pc);
        for (int j = 0; j < cols; ++j) at(pr, j) /= pv;
        for (int r = 0; r <= m; ++r) {
            if (r == pr) continue;
            double f = at(r, pc);
            if (f == 0.0) continue;
            for (int j = 0; j < cols; ++j) at(r, j) -= f * at(pr, j);
        }
        basis[static_cast<std::size_t>(pr)] = pc;
    };

    auto run = [&](int jmax) {
        for (int iter = 0; iter < 50000; ++iter) {
            int pc = -1;
            for (int j = 0; j < jmax; ++j)
                if (at(m, j) < -eps) {
                    pc = j;
                    break;
                }
            if (pc < 0) return;
            int pr = -1;
            double best = 0.0;
            for (int r = 0; r < m; ++r) {
                if (at(r, pc) > eps) {
                    double ratio = at(r, cols - 1) / at(r, pc);
                    if (pr < 0 || ratio < best - 1e-15 ||
                        (ratio <= best + 1e-15 &&
                         basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(pr)])) {
                        pr = r;
                        best = ratio;
                    }
                }
            }
            if (pr < 0) throw std::runtime_error("hull LP unbounded");
            pivot(pr, pc);
        }
        throw std::runtime_error("hull LP did not converge");
    };

    // Phase 1: maximize minus the artificial sum.
    for (int j = 0; j < n + m; ++j) {
        double colsum = 0.0;
        for (int i = 0; i < m; ++i) colsum += at(i, j);
        at(m, j) = (j >= n ? 1.0 : 0.0) - colsum;
    }
    {
        double rhs = 0.0;
        for (int i = 0; i < m; ++i) rhs += at(i, cols - 1);
        at(m, cols - 1) = -rhs;
    }
    run(n + m);
    if (at(m, cols - 1) < -1e-7) throw std::runtime_error("hull LP infeasible");
    for (int i = 0; i < m; ++i) {
        if (basis[static_cast<std::size_t>(i)] < n) continue;
        for (int j = 0; j < n; ++j)
            if (std::abs(at(i, j)) > eps) {
                pivot(i, j);
                break;
            }
    }

    // Phase 2 over the original objective, artificials barred from entering.
    for (int j = 0; j < cols; ++j) at(m, j) = 0.0;
    for (int j = 0; j < n; ++j) at(m, j) = -c[static_cast<std::size_t>(j)];
    for (int i = 0; i < m; ++i) {
        int bi = basis[static_cast<std::size_t>(i)];
        double coef = bi < n ? c[static_cast<std::size_t>(bi)] : 0.0;
        if (coef == 0.0) continue;
        for (int j = 0; j < cols; ++j) at(m, j) += coef * at(i, j);
    }
    run(n);
    return at(m, cols - 1);
}

std::vector<std::vector<double>> hull_lp_rows(const std::vector<FiniteDist>& grid, int dim) {
    std::vector<std::vector<double>> A(static_cast<std::size_t>(dim),
                                       std::vector<double>(grid.size(), 1.0));
    for (std::size_t j = 0; j < grid.size(); ++j)
        for (int k = 0; k + 1 < dim; ++k) A[static_cast<std::size_t>(k)][j] = grid[j][k];
    return A;
}

std::vector<double> hull_lp_rhs(const FiniteDist& q, int dim) {
    std::vector<double> b(static_cast<std::size_t>(dim), 1.0);
    for (int k = 0; k + 1 < dim; ++k)
        b[static_cast<std::size_t>(k)] = std::max(0.0, q[k]);
    return b;
}

}  // namespace

DegradedBC::DegradedBC(DMChannel s1, DMChannel s2) : stage1(std::move(s1)), stage2(std::move(s2)) {
    if (stage1.out_size != stage2.in_size)
        throw input_error("DegradedBC: stage alphabets do not chain");
    if (stage1.in_size < 2) throw input_error("DegradedBC: input alphabet too small");
}

DegradedBC DegradedBC::product(const DegradedBC& other) const {
    return DegradedBC(stage1.product(other.stage1), stage2.product(other.stage2));
}

DegradedBC DegradedBC::bsc(double crossover1, double crossover2) {
    return DegradedBC(DMChannel::bsc(crossover1), DMChannel::bsc(crossover2));
}

double s_lambda(const DegradedBC& bc, const FiniteDist& px, double lambda) {
    require_lambda(lambda);
    if (px.size() != bc.input_size()) throw input_error("s_lambda: pmf size mismatch");
    SLambdaEvaluator ev(bc, lambda);
    return ev.at(px.p.data());
}

double s_lambda_conditional(const DegradedBC& bc, const JointDist& pvx, double lambda) {
    require_lambda(lambda);
    if (pvx.rank() != 2 || pvx.axes[1] != bc.input_size())
        throw input_error("s_lambda_conditional: joint must have axes (v, x)");
    SLambdaEvaluator ev(bc, lambda);
    const int nv = pvx.axes[0];
    const int nx = pvx.axes[1];
    std::vector<double> cond(static_cast<std::size_t>(nx));
    double total = 0.0;
    for (int v = 0; v < nv; ++v) {
        double pv = 0.0;
        for (int x = 0; x < nx; ++x) pv += pvx.p[static_cast<std::size_t>(v * nx + x)];
        if (pv <= 1e-14) continue;
        for (int x = 0; x < nx; ++x)
            cond[static_cast<std::size_t>(x)] = pvx.p[static_cast<std::size_t>(v * nx + x)] / pv;
        total += pv * ev.at(cond.data());
    }
    return total;
}

ClimbResult climb_envelope(const DegradedBC& bc, double lambda, const FiniteDist& query,
                           std::uint64_t seed, int restarts, int workers) {
    require_lambda(lambda);
    if (query.size() != bc.input_size()) throw input_error("climb_envelope: query size mismatch");
    if (restarts < 1) throw input_error("climb_envelope: need at least one restart");
    const int nx = bc.input_size();
    const int nv = nx + 1;
    std::vector<ClimbResult> slots(static_cast<std::size_t>(restarts));
    parallel_for(static_cast<std::size_t>(restarts), workers, [&](std::size_t r) {
        Rng rng = stream_rng(seed, r);
        SLambdaEvaluator ev(bc, lambda);
        std::vector<double> W(static_cast<std::size_t>(nx) * nv, 0.0);
        if (r == 0) {
            for (int x = 0; x < nx; ++x) W[static_cast<std::size_t>(x) * nv] = 1.0;
        } else {
            for (int x = 0; x < nx; ++x) {
                auto row = rng.simplex(static_cast<std::size_t>(nv));
                std::copy(row.begin(), row.end(), W.begin() + static_cast<std::size_t>(x) * nv);
            }
        }
        std::vector<double> cond(static_cast<std::size_t>(nx));
        auto objective = [&](const std::vector<double>& w) {
            double total = 0.0;
            for (int v = 0; v < nv; ++v) {
                double pv = 0.0;
                for (int x = 0; x < nx; ++x) pv += query[x] * w[static_cast<std::size_t>(x) * nv + v];
                if (pv <= 1e-14) continue;
                for (int x = 0; x < nx; ++x)
                    cond[static_cast<std::size_t>(x)] =
                        query[x] * w[static_cast<std::size_t>(x) * nv + v] / pv;
                total += pv * ev.at(cond.data());
            }
            return total;
        };
        double best = objective(W);
        std::vector<double> cand(W.size());
        for (double step = 0.25; step >= 1e-7; step *= 0.5) {
            // The accepted-move cap bounds ridge-following at one scale; the
            // next (halved) scale resumes from the same iterate, so long flat
            // ridges cost O(scales * cap) evaluations instead of unbounded
            // micro-accept streaks.
            int tries = 0, moves = 0;
            while (tries < 20 && moves < 200) {
                for (std::size_t k = 0; k < W.size(); ++k)
                    cand[k] = std::max(W[k] + step * rng.normal(), 1e-12);
                for (int x = 0; x < nx; ++x) {
                    double s = 0.0;
                    for (int v = 0; v < nv; ++v) s += cand[static_cast<std::size_t>(x) * nv + v];
                    for (int v = 0; v < nv; ++v) cand[static_cast<std::size_t>(x) * nv + v] /= s;
                }
                double val = objective(cand);
                if (val > best + 1e-15) {
                    best = val;
                    W.swap(cand);
                    tries = 0;
                    ++moves;
                } else {
                    ++tries;
                }
            }
        }
        std::vector<double> mass(static_cast<std::size_t>(nv) * nx, 0.0);
        for (int v = 0; v < nv; ++v)
            for (int x = 0; x < nx; ++x)
                mass[static_cast<std::size_t>(v) * nx + x] =
                    query[x] * W[static_cast<std::size_t>(x) * nv + v];
        ClimbResult res;
        res.value = best;
        res.vx = JointDist({nv, nx}, std::move(mass));
        res.restart = static_cast<int>(r);
        slots[r] = std::move(res);
    });
    std::size_t argmax = 0;
    for (std::size_t r = 1; r < slots.size(); ++r)
        if (slots[r].value > slots[argmax].value) argmax = r;
    return slots[argmax];
}

double EnvelopeTable::hull_at(const FiniteDist& query) const {
    if (query.size() != dim) throw input_error("hull_at: query size mismatch");
    if (dim == 2) {
        double pos = std::clamp(query[0], 0.0, 1.0) * resolution;
        int i0 = std::min(static_cast<int>(pos), resolution - 1);
        double frac = pos - i0;
        return hull[static_cast<std::size_t>(i0)] * (1.0 - frac) +
               hull[static_cast<std::size_t>(i0) + 1] * frac;
    }
    auto A = hull_lp_rows(grid, dim);
    return lp_maximize(A, hull_lp_rhs(query, dim), base);
}

EnvelopeTable envelope_table(const DegradedBC& bc, double lambda, int resolution) {
    require_lambda(lambda);
    if (resolution < 8) throw input_error("envelope resolution must be at least 8");
    EnvelopeTable t;
    t.lambda = lambda;
    t.resolution = resolution;
    t.dim = bc.input_size();
    t.grid = simplex_grid(t.dim, resolution);
    if (t.dim >= 3 && t.grid.size() > kEnvelopeLpGridCap)
        throw input_error("envelope resolution exceeds the hull grid cap");
    SLambdaEvaluator ev(bc, lambda);
    t.base.resize(t.grid.size());
    for (std::size_t i = 0; i < t.grid.size(); ++i) t.base[i] = ev.at(t.grid[i].p.data());
    t.hull.resize(t.grid.size());

    if (t.dim == 2) {
        // Upper concave majorant along the segment via a monotone chain.
        const std::vector<double>& y = t.base;
        std::vector<int> stack;
        for (int i = 0; i < static_cast<int>(y.size()); ++i) {
            while (stack.size() >= 2) {
                int a = stack[stack.size() - 2];
                int b = stack.back();
                double cross = static_cast<double>(b - a) * (y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(a)]) -
                               (y[static_cast<std::size_t>(b)] - y[static_cast<std::size_t>(a)]) * static_cast<double>(i - a);
                if (cross >= 0.0)
                    stack.pop_back();
                else
                    break;
            }
            stack.push_back(i);
        }
        for (std::size_t s = 0; s + 1 < stack.size(); ++s) {
            int a = stack[s], b = stack[s + 1];
            for (int i = a; i <= b; ++i) {
                double frac = static_cast<double>(i - a) / static_cast<double>(b - a);
                t.hull[static_cast<std::size_t>(i)] =
                    y[static_cast<std::size_t>(a)] * (1.0 - frac) + y[static_cast<std::size_t>(b)] * frac;
            }
        }
        double gap = 0.0;
        for (std::size_t i = 0; i + 1 < t.hull.size(); ++i)
            gap = std::max(gap, std::abs(t.hull[i + 1] - t.hull[i]));
        t.certified_gap = gap;
        return t;
    }

    auto A = hull_lp_rows(t.grid, t.dim);
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
        t.hull[i] = std::max(t.base[i], lp_maximize(A, hull_lp_rhs(t.grid[i], t.dim), t.base));
    }

    // One-cell modulus from neighboring compositions.
    std::map<std::vector<int>, std::size_t> index;
    std::vector<std::vector<int>> counts(t.grid.size());
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
        std::vector<int> c(static_cast<std::size_t>(t.dim));
        for (int k = 0; k < t.dim; ++k)
            c[static_cast<std::size_t>(k)] = static_cast<int>(std::lround(t.grid[i][k] * resolution));
        index[c] = i;
        counts[i] = std::move(c);
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
        for (int a = 0; a < t.dim; ++a) {
            if (counts[i][static_cast<std::size_t>(a)] == 0) continue;
            for (int b = 0; b < t.dim; ++b) {
                if (b == a) continue;
                std::vector<int> c = counts[i];
                --c[static_cast<std::size_t>(a)];
                ++c[static_cast<std::size_t>(b)];
                auto it = index.find(c);
                if (it != index.end())
                    gap = std::max(gap, std::abs(t.base[i] - t.base[it->second]));
            }
        }
    }
    t.certified_gap = gap;
    return t;
}

EnvelopeEstimate envelope(const DegradedBC& bc, double lambda, const FiniteDist& query,
                          int resolution, std::uint64_t seed, int restarts, int workers) {
    EnvelopeEstimate est;
    est.table = envelope_table(bc, lambda, resolution);
    est.query = query;
    est.hull_at_query = est.table.hull_at(query);
    est.climb = climb_envelope(bc, lambda, query, seed, restarts, workers);
    est.climb_at_query = est.climb.value;
    est.value = std::max(est.hull_at_query, est.climb_at_query);
    return est;
}

double conditional_envelope(const DegradedBC& bc, double lambda,
                            const std::vector<double>& weights,
                            const std::vector<FiniteDist>& components, int resolution,
                            std::uint64_t seed, int restarts, int workers) {
    if (weights.empty() || weights.size() != components.size())
        throw input_error("conditional_envelope: weights and components must pair up");
    double sum = 0.0;
    for (double w : weights) {
        if (w < -1e-12) throw input_error("conditional_envelope: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw input_error("conditional_envelope: weights must sum to 1");
    EnvelopeTable table = envelope_table(bc, lambda, resolution);
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        double hull = table.hull_at(components[i]);
        double climb = climb_envelope(bc, lambda, components[i], seed, restarts, workers).value;
        total += weights[i] * std::max(hull, climb);
    }
    return total;
}

JointDist build_two_letter_joint(
    const DegradedBC& bc, const FiniteDist& pv, const std::vector<FiniteDist>& px1_given_v,
    const std::function<FiniteDist(int v, int x1, int y1, int z1)>& px2) {
    const int nv = pv.size();
    const int nx = bc.input_size();
    const int ny = bc.y_size();
    const int nz = bc.z_size();
    if (static_cast<int>(px1_given_v.size()) != nv)
        throw input_error("build_two_letter_joint: one X1 pmf per v required");
    std::vector<int> axes{nv, nx, ny, nz, nx, ny, nz};
    std::size_t cells = 1;
    for (int a : axes) cells *= static_cast<std::size_t>(a);
    std::vector<double> mass(cells, 0.0);
    std::size_t f = 0;
    for (int v = 0; v < nv; ++v)
        for (int x1 = 0; x1 < nx; ++x1)
            for (int y1 = 0; y1 < ny; ++y1)
                for (int z1 = 0; z1 < nz; ++z1) {
                    double head = pv[v] * px1_given_v[static_cast<std::size_t>(v)][x1] *
                                  bc.stage1.row(x1)[y1] * bc.stage2.row(y1)[z1];
                    FiniteDist d2 = px2(v, x1, y1, z1);
                    if (d2.size() != nx)
                        throw input_error("build_two_letter_joint: X2 pmf size mismatch");
                    for (int x2 = 0; x2 < nx; ++x2)
                        for (int y2 = 0; y2 < ny; ++y2)
                            for (int z2 = 0; z2 < nz; ++z2, ++f)
                                mass[f] = head * d2[x2] * bc.stage1.row(x2)[y2] *
                                          bc.stage2.row(y2)[z2];
                }
    return JointDist(std::move(axes), std::move(mass));
}

double two_letter_directed_objective(const JointDist& scheme, double lambda) {
    require_lambda(lambda);
    if (scheme.rank() != 7)
        throw input_error("two_letter_directed_objective: expected a 7-axis scheme");
    double diy = directed_information(scheme, {1, 4}, {2, 5}, {0});
    double diz = directed_information(scheme, {1, 4}, {3, 6}, {0});
    return diy - lambda * diz;
}

CheckReport check_envelope_properties(int n_channels, int resolution, std::uint64_t seed,
                                      int workers) {
    std::vector<CheckRecord> recs(static_cast<std::size_t>(n_channels) * 3);
    parallel_for(static_cast<std::size_t>(n_channels), workers, [&](std::size_t i) {
        Rng rng = stream_rng(seed, i);
        auto draw = [&] { return 0.02 + 0.43 * rng.uniform01(); };
        double a = draw(), b = draw(), c = draw(), d = draw();
        DMChannel s1(2, 2,
                     {FiniteDist(std::vector<double>{1.0 - a, a}),
                      FiniteDist(std::vector<double>{b, 1.0 - b})});
        DMChannel s2(2, 2,
                     {FiniteDist(std::vector<double>{1.0 - c, c}),
                      FiniteDist(std::vector<double>{d, 1.0 - d})});
        DegradedBC bc(s1, s2);
        double lambda = std::exp(rng.uniform01() * std::log(8.0));
        EnvelopeTable t = envelope_table(bc, lambda, resolution);

        CheckRecord dom;
        dom.construction = "channel " + std::to_string(i) + ": grid dominance";
        double worst = 0.0;
        for (std::size_t k = 0; k < t.hull.size(); ++k)
            worst = std::min(worst, t.hull[k] - t.base[k]);
        dom.lhs = worst;
        dom.rhs = 0.0;
        dom.gap = worst;
        dom.pass = worst >= -1e-12;
        recs[3 * i] = std::move(dom);

        CheckRecord conc;
        conc.construction = "channel " + std::to_string(i) + ": grid concavity";
        double worst_sd = 0.0;
        for (std::size_t k = 1; k + 1 < t.hull.size(); ++k)
            worst_sd = std::max(worst_sd, t.hull[k - 1] + t.hull[k + 1] - 2.0 * t.hull[k]);
        conc.lhs = worst_sd;
        conc.rhs = 0.0;
        conc.gap = -worst_sd;
        conc.pass = worst_sd <= 1e-10;
        recs[3 * i + 1] = std::move(conc);

        CheckRecord jen;
        jen.construction = "channel " + std::to_string(i) + ": mixture vs envelope";
        double worst_margin = 1e300;
        double worst_lhs = 0.0, worst_rhs = 0.0;
        for (int trial = 0; trial < 8; ++trial) {
            double w = rng.uniform01();
            FiniteDist c1(rng.simplex(2)), c2(rng.simplex(2));
            std::vector<double> mix{w * c1[0] + (1.0 - w) * c2[0], w * c1[1] + (1.0 - w) * c2[1]};
            double lhs = w * t.hull_at(c1) + (1.0 - w) * t.hull_at(c2);
            double rhs = t.hull_at(FiniteDist(mix)) + t.certified_gap;
            if (rhs - lhs < worst_margin) {
                worst_margin = rhs - lhs;
                worst_lhs = lhs;
                worst_rhs = rhs;
            }
        }
        jen.lhs = worst_lhs;
        jen.rhs = worst_rhs;
        jen.gap = worst_margin;
        jen.pass = worst_margin >= -1e-9;
        recs[3 * i + 2] = std::move(jen);
    });
    CheckReport rep;
    rep.suite = "envelope grid properties";
    for (auto& r : recs) rep.add(std::move(r));
    return rep;
}

CheckReport check_envelope_subadditivity(const DegradedBC& bc, double lambda, int samples,
                                         int resolution, std::uint64_t seed, int workers) {
    EnvelopeTable table = envelope_table(bc, lambda, resolution);
    DegradedBC pair = bc.product(bc);
    const int nx = bc.input_size();
    std::vector<CheckRecord> recs(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
        Rng rng = stream_rng(seed, i);
        FiniteDist q(rng.simplex(static_cast<std::size_t>(nx) * nx));
        std::vector<double> m1(static_cast<std::size_t>(nx), 0.0), m2(static_cast<std::size_t>(nx), 0.0);
        for (int a = 0; a < nx; ++a)
            for (int b = 0; b < nx; ++b) {
                m1[static_cast<std::size_t>(a)] += q[a * nx + b];
                m2[static_cast<std::size_t>(b)] += q[a * nx + b];
            }
        CheckRecord rec;
        rec.construction = "joint " + std::to_string(i);
        rec.lhs = climb_envelope(pair, lambda, q, seed ^ (0xabcdULL + i), 32, 1).value;
        rec.rhs = table.hull_at(FiniteDist(m1)) + table.hull_at(FiniteDist(m2)) +
                  2.0 * table.certified_gap;
        rec.gap = rec.rhs - rec.lhs;
        rec.pass = rec.gap >= -1e-9;
        recs[i] = std::move(rec);
    });
    CheckReport rep;
    rep.suite = "two-letter envelope subadditivity (no feedback)";
    for (auto& r : recs) rep.add(std::move(r));
    return rep;
}

CheckReport check_feedback_envelope_subadditivity(const DegradedBC& bc, double lambda,
                                                  int samples, int resolution,
                                                  std::uint64_t seed, int workers) {
    EnvelopeTable table = envelope_table(bc, lambda, resolution);
    const int nx = bc.input_size();
    const int ny = bc.y_size();
    std::vector<CheckRecord> recs(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
        Rng rng = stream_rng(seed, i);
        int nv = 1 + static_cast<int>(rng.uniform_int(3));
        FiniteDist pv(rng.simplex(static_cast<std::size_t>(nv)));
        std::vector<FiniteDist> px1;
        for (int v = 0; v < nv; ++v) px1.emplace_back(rng.simplex(static_cast<std::size_t>(nx)));
        std::vector<FiniteDist> x2_rows;
        for (int k = 0; k < nv * nx * ny; ++k)
            x2_rows.emplace_back(rng.simplex(static_cast<std::size_t>(nx)));
        auto px2 = [&](int v, int x1, int y1, int /*z1*/) {
            return x2_rows[static_cast<std::size_t>((v * nx + x1) * ny + y1)];
        };
        JointDist scheme = build_two_letter_joint(bc, pv, px1, px2);
        CheckRecord rec;
        rec.construction = "scheme " + std::to_string(i) + " (|V|=" + std::to_string(nv) + ")";
        rec.lhs = two_letter_directed_objective(scheme, lambda);
        rec.rhs = table.hull_at(scheme.axis_marginal(1)) + table.hull_at(scheme.axis_marginal(4)) +
                  2.0 * table.certified_gap;
        rec.gap = rec.rhs - rec.lhs;
        rec.pass = rec.gap >= -1e-9;
        recs[i] = std::move(rec);
    });
    CheckReport rep;
    rep.suite = "two-letter directed envelope subadditivity (strong-output feedback)";
    for (auto& r : recs) rep.add(std::move(r));
    return rep;
}

}  // namespace fbcap
