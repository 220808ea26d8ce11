#include "fbcap/region_dm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "fbcap/parallel.hpp"

namespace fbcap {

namespace {

constexpr int kFrontierBuckets = 4096;
constexpr std::size_t kGridChunks = 64;
constexpr std::size_t kRpdbcComponentCellCap = 1'000'000;
constexpr double kDegradedTol = 1e-9;

double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) h -= xlogx(v);
    return h / M_LN2;
}

/// Product grid over p(u) and the per-u conditionals p(x|u), enumerated as
/// flat cells with u slowest and the last conditional fastest.
struct UxGrid {
    std::vector<FiniteDist> pu, px;
    int nu = 0;
    int nx = 0;
    std::size_t cells = 0;

    UxGrid(int u_size, int x_size, int resolution, std::size_t cap) : nu(u_size), nx(x_size) {
        double total = simplex_grid_size(u_size, resolution);
        for (int u = 0; u < u_size; ++u) total *= simplex_grid_size(x_size, resolution);
        if (!(total <= static_cast<double>(cap)))
            throw input_error("region grid exceeds the cell cap");
        pu = simplex_grid(u_size, resolution);
        px = simplex_grid(x_size, resolution);
        cells = pu.size();
        for (int u = 0; u < u_size; ++u) cells *= px.size();
    }

    void decode(std::size_t cell, std::size_t& iu, std::vector<std::size_t>& ix) const {
        for (int u = nu - 1; u >= 0; --u) {
            ix[static_cast<std::size_t>(u)] = cell % px.size();
            cell /= px.size();
        }
        iu = cell;
    }

    JointDist joint(std::size_t cell) const {
        std::size_t iu = 0;
        std::vector<std::size_t> ix(static_cast<std::size_t>(nu));
        decode(cell, iu, ix);
        std::vector<double> mass(static_cast<std::size_t>(nu * nx));
        for (int u = 0; u < nu; ++u)
            for (int x = 0; x < nx; ++x)
                mass[static_cast<std::size_t>(u * nx + x)] =
                    pu[iu][u] * px[ix[static_cast<std::size_t>(u)]][x];
        return JointDist({nu, nx}, std::move(mass));
    }
};

struct FrontierSlot {
    double r1 = 0.0;
    double r2 = -1.0;
    std::size_t cell = 0;
};

/// Per-joint information quantities of one degraded component, in bits:
/// S is the stage-1 (strong) output, W the end-to-end (weak) output.
struct CompPoint {
    double iu_strong = 0.0;   // I(U;S)
    double iu_weak = 0.0;     // I(U;W)
    double ix_strong = 0.0;   // I(X;S)
    double ix_strong_u = 0.0; // I(X;S|U)
    std::size_t cell = 0;
};

bool tuple_leq(const CompPoint& a, const CompPoint& b) {
    return a.iu_strong <= b.iu_strong && a.iu_weak <= b.iu_weak && a.ix_strong <= b.ix_strong &&
           a.ix_strong_u <= b.ix_strong_u;
}

struct ComponentGrid {
    UxGrid grid;
    std::vector<CompPoint> maximal;

    ComponentGrid(const DegradedBC& bc, int resolution)
        : grid(std::min({bc.input_size(), bc.y_size(), bc.z_size()}), bc.input_size(), resolution,
               kRpdbcComponentCellCap) {
        const int nu = grid.nu, nx = grid.nx;
        const DMChannel& strong = bc.stage1;
        const DMChannel weak = bc.end_to_end();
        const int ns = strong.out_size, nw = weak.out_size;

        std::vector<double> hrow_s(static_cast<std::size_t>(nx));
        for (int x = 0; x < nx; ++x) hrow_s[static_cast<std::size_t>(x)] = entropy_bits(strong.row(x).p);

        const std::size_t npx = grid.px.size();
        std::vector<std::vector<double>> srow(npx), wrow(npx);
        std::vector<double> hs(npx), hw(npx), ixs(npx);
        for (std::size_t i = 0; i < npx; ++i) {
            srow[i] = strong.apply(grid.px[i]).p;
            wrow[i] = weak.apply(grid.px[i]).p;
            hs[i] = entropy_bits(srow[i]);
            hw[i] = entropy_bits(wrow[i]);
            double cond = 0.0;
            for (int x = 0; x < nx; ++x) cond += grid.px[i][x] * hrow_s[static_cast<std::size_t>(x)];
            ixs[i] = hs[i] - cond;
        }

        std::vector<CompPoint> pts(grid.cells);
        std::size_t iu = 0;
        std::vector<std::size_t> ix(static_cast<std::size_t>(nu));
        std::vector<double> smix(static_cast<std::size_t>(ns)), wmix(static_cast<std::size_t>(nw));
        std::vector<double> pxbar(static_cast<std::size_t>(nx));
        for (std::size_t cell = 0; cell < grid.cells; ++cell) {
            grid.decode(cell, iu, ix);
            const auto& pu = grid.pu[iu];
            std::fill(smix.begin(), smix.end(), 0.0);
            std::fill(wmix.begin(), wmix.end(), 0.0);
            std::fill(pxbar.begin(), pxbar.end(), 0.0);
            double hs_u = 0.0, hw_u = 0.0, ixs_u = 0.0;
            for (int u = 0; u < nu; ++u) {
                double w = pu[u];
                if (w <= 0.0) continue;
                std::size_t i = ix[static_cast<std::size_t>(u)];
                hs_u += w * hs[i];
                hw_u += w * hw[i];
                ixs_u += w * ixs[i];
                for (int s = 0; s < ns; ++s) smix[static_cast<std::size_t>(s)] += w * srow[i][static_cast<std::size_t>(s)];
                for (int o = 0; o < nw; ++o) wmix[static_cast<std::size_t>(o)] += w * wrow[i][static_cast<std::size_t>(o)];
                for (int x = 0; x < nx; ++x) pxbar[static_cast<std::size_t>(x)] += w * grid.px[i][x];
            }
            double hsm = entropy_bits(smix);
            double cond = 0.0;
            for (int x = 0; x < nx; ++x) cond += pxbar[static_cast<std::size_t>(x)] * hrow_s[static_cast<std::size_t>(x)];
            CompPoint& p = pts[cell];
            p.iu_strong = std::max(0.0, hsm - hs_u);
            p.iu_weak = std::max(0.0, entropy_bits(wmix) - hw_u);
            p.ix_strong = std::max(0.0, hsm - cond);
            p.ix_strong_u = std::max(0.0, ixs_u);
            p.cell = cell;
        }

        // Every rate bound is nondecreasing in all four quantities, so
        // only the componentwise-maximal joints can contribute to the union.
        for (std::size_t i = 0; i < pts.size(); ++i) {
            bool dominated = false;
            for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
                if (j == i) continue;
                if (tuple_leq(pts[i], pts[j]) && (!tuple_leq(pts[j], pts[i]) || j < i))
                    dominated = true;
            }
            if (!dominated) maximal.push_back(pts[i]);
        }
    }
};

struct RegionCand {
    double r0 = 0.0, r1 = 0.0, r2 = 0.0;
    std::size_t cell1 = 0, cell2 = 0;
};

/// In-place 3-D Pareto filter (maximal points, exact duplicates deduped),
/// deterministic given candidate values and cell indices.
void pareto_filter_3d(std::vector<RegionCand>& cands) {
    std::sort(cands.begin(), cands.end(), [](const RegionCand& a, const RegionCand& b) {
        if (a.r0 != b.r0) return a.r0 > b.r0;
        if (a.r1 != b.r1) return a.r1 > b.r1;
        if (a.r2 != b.r2) return a.r2 > b.r2;
        if (a.cell1 != b.cell1) return a.cell1 < b.cell1;
        return a.cell2 < b.cell2;
    });
    // Staircase of kept (r1, r2) from strictly larger r0, ascending in r1
    // with strictly descending r2.
    std::vector<std::pair<double, double>> stairs;
    auto covered = [&](double r1, double r2) {
        auto it = std::lower_bound(stairs.begin(), stairs.end(), r1,
                                   [](const std::pair<double, double>& e, double v) { return e.first < v; });
        return it != stairs.end() && it->second >= r2;
    };
    auto insert_stair = [&](double r1, double r2) {
        if (covered(r1, r2)) return;
        auto it = std::lower_bound(stairs.begin(), stairs.end(), r1,
                                   [](const std::pair<double, double>& e, double v) { return e.first < v; });
        auto lo = it;
        while (lo != stairs.begin() && std::prev(lo)->second <= r2) --lo;
        it = stairs.erase(lo, it);
        stairs.insert(it, {r1, r2});
    };
    std::vector<RegionCand> kept;
    std::size_t i = 0;
    while (i < cands.size()) {
        std::size_t j = i;
        while (j < cands.size() && cands[j].r0 == cands[i].r0) ++j;
        double max2 = -1.0;
        std::size_t first_kept = kept.size();
        for (std::size_t k = i; k < j; ++k) {
            const RegionCand& c = cands[k];
            if (c.r2 > max2) {
                if (!covered(c.r1, c.r2)) kept.push_back(c);
                max2 = c.r2;
            }
        }
        for (std::size_t k = first_kept; k < kept.size(); ++k) insert_stair(kept[k].r1, kept[k].r2);
        i = j;
    }
    cands = std::move(kept);
}

}  // namespace

std::vector<DmRatePoint> superposition_region(const DegradedBC& bc, int resolution, int workers) {
    if (resolution < 1) throw input_error("superposition_region: resolution must be positive");
    const int nx = bc.input_size(), ny = bc.y_size(), nz = bc.z_size();
    if (nx > 4 || ny > 4 || nz > 4)
        throw input_error("superposition_region: alphabets larger than 4 are out of scope");
    const int nu = std::min({nx, ny, nz}) + 1;
    UxGrid grid(nu, nx, resolution, kSuperpositionCellCap);

    const DMChannel end = bc.end_to_end();
    const std::size_t npx = grid.px.size();
    std::vector<std::vector<double>> zrow(npx);
    std::vector<double> ixy(npx), hz(npx);
    for (std::size_t i = 0; i < npx; ++i) {
        ixy[i] = mutual_information(bc.stage1.joint(grid.px[i]), {0}, {1}, Unit::bits);
        zrow[i] = end.apply(grid.px[i]).p;
        hz[i] = entropy_bits(zrow[i]);
    }
    double r1max = 0.0;
    for (double v : ixy) r1max = std::max(r1max, v);

    const std::size_t chunks = std::min<std::size_t>(kGridChunks, grid.cells);
    std::vector<std::vector<FrontierSlot>> tables(
        chunks, std::vector<FrontierSlot>(static_cast<std::size_t>(kFrontierBuckets)));
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t lo = grid.cells * c / chunks;
        const std::size_t hi = grid.cells * (c + 1) / chunks;
        auto& table = tables[c];
        std::size_t iu = 0;
        std::vector<std::size_t> ix(static_cast<std::size_t>(nu));
        std::vector<double> zmix(static_cast<std::size_t>(nz));
        for (std::size_t cell = lo; cell < hi; ++cell) {
            grid.decode(cell, iu, ix);
            const auto& pu = grid.pu[iu];
            double r1 = 0.0, hz_u = 0.0;
            std::fill(zmix.begin(), zmix.end(), 0.0);
            for (int u = 0; u < nu; ++u) {
                double w = pu[u];
                if (w <= 0.0) continue;
                std::size_t i = ix[static_cast<std::size_t>(u)];
                r1 += w * ixy[i];
                hz_u += w * hz[i];
                for (int z = 0; z < nz; ++z) zmix[static_cast<std::size_t>(z)] += w * zrow[i][static_cast<std::size_t>(z)];
            }
            double r2 = std::max(0.0, entropy_bits(zmix) - hz_u);
            int bucket = 0;
            if (r1max > 0.0)
                bucket = std::clamp(static_cast<int>(r1 / r1max * kFrontierBuckets), 0,
                                    kFrontierBuckets - 1);
            FrontierSlot& slot = table[static_cast<std::size_t>(bucket)];
            if (r2 > slot.r2) slot = {r1, r2, cell};
        }
    });

    std::vector<FrontierSlot> merged(static_cast<std::size_t>(kFrontierBuckets));
    for (const auto& table : tables)
        for (int b = 0; b < kFrontierBuckets; ++b)
            if (table[static_cast<std::size_t>(b)].r2 > merged[static_cast<std::size_t>(b)].r2)
                merged[static_cast<std::size_t>(b)] = table[static_cast<std::size_t>(b)];

    std::vector<FrontierSlot> filled;
    for (const auto& slot : merged)
        if (slot.r2 >= 0.0) filled.push_back(slot);
    std::sort(filled.begin(), filled.end(), [](const FrontierSlot& a, const FrontierSlot& b) {
        if (a.r1 != b.r1) return a.r1 < b.r1;
        return a.cell < b.cell;
    });

    std::vector<FrontierSlot> frontier;
    double best2 = -1.0;
    for (auto it = filled.rbegin(); it != filled.rend(); ++it) {
        if (it->r2 > best2) {
            best2 = it->r2;
            frontier.push_back(*it);
        }
    }
    std::reverse(frontier.begin(), frontier.end());

    std::vector<DmRatePoint> out;
    out.reserve(frontier.size());
    for (const auto& slot : frontier) {
        DmRatePoint pt;
        pt.R1 = slot.r1;
        pt.R2 = slot.r2;
        pt.joints.push_back(grid.joint(slot.cell));
        out.push_back(std::move(pt));
    }
    return out;
}

std::pair<double, double> bsc_closed_form(double p1, double p_end, double alpha) {
    if (!(p1 >= 0.0 && p1 <= p_end && p_end <= 0.5))
        throw input_error("bsc_closed_form: need 0 <= p1 <= p_end <= 1/2");
    if (!(alpha >= 0.0 && alpha <= 0.5)) throw input_error("bsc_closed_form: alpha outside [0, 1/2]");
    auto star = [](double a, double b) { return a * (1.0 - b) + b * (1.0 - a); };
    auto h2 = [](double p) { return -(xlogx(p) + xlogx(1.0 - p)) / M_LN2; };
    double r1 = h2(star(alpha, p1)) - h2(p1);
    double r2 = 1.0 - h2(star(alpha, p_end));
    return {std::max(0.0, r1), std::max(0.0, r2)};
}

RpdbcModel::RpdbcModel(DegradedBC component1, DegradedBC component2)
    : comp1(std::move(component1)), comp2(std::move(component2)) {}

std::vector<DmRatePoint> rpdbc_region(const RpdbcModel& model, int resolution, int workers) {
    if (resolution < 1) throw input_error("rpdbc_region: resolution must be positive");
    for (const DegradedBC* bc : {&model.comp1, &model.comp2})
        if (bc->input_size() > 3 || bc->y_size() > 3 || bc->z_size() > 3)
            throw input_error("rpdbc_region: alphabets larger than 3 are out of scope");

    ComponentGrid g1(model.comp1, resolution);
    ComponentGrid g2(model.comp2, resolution);
    const auto& t1 = g1.maximal;
    const auto& t2 = g2.maximal;
    const std::size_t pairs = t1.size() * t2.size();

    const std::size_t chunks = std::min<std::size_t>(kGridChunks, pairs);
    std::vector<std::vector<RegionCand>> buffers(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t lo = pairs * c / chunks;
        const std::size_t hi = pairs * (c + 1) / chunks;
        auto& buf = buffers[c];
        for (std::size_t pair = lo; pair < hi; ++pair) {
            const CompPoint& v1 = t1[pair / t2.size()];
            const CompPoint& v2 = t2[pair % t2.size()];
            // Component 1 is degraded toward Z, component 2 toward Y, so the
            // strong side of component 2 feeds the Z-rate terms.
            const double m0 = std::min(v1.iu_strong + v2.iu_weak, v1.iu_weak + v2.iu_strong);
            const double a = v1.ix_strong + v2.iu_weak;
            const double b = v2.ix_strong + v1.iu_weak;
            const double s = std::min(a + v2.ix_strong_u, b + v1.ix_strong_u);
            const double cap = std::min(std::min(m0, s), std::min(a, b));
            const double breaks[] = {0.0, m0, a, b, a + b - s};
            for (double r0 : breaks) {
                r0 = std::clamp(r0, 0.0, cap);
                const double a2 = a - r0, b2 = b - r0, s2 = s - r0;
                double r1 = std::min(a2, s2);
                double r2 = std::max(0.0, std::min(b2, s2 - r1));
                buf.push_back({r0, r1, r2, v1.cell, v2.cell});
                r2 = std::min(b2, s2);
                r1 = std::max(0.0, std::min(a2, s2 - r2));
                buf.push_back({r0, r1, r2, v1.cell, v2.cell});
            }
        }
        pareto_filter_3d(buf);
    });

    std::vector<RegionCand> cands;
    for (auto& buf : buffers) cands.insert(cands.end(), buf.begin(), buf.end());
    pareto_filter_3d(cands);

    std::sort(cands.begin(), cands.end(), [](const RegionCand& a, const RegionCand& b) {
        if (a.r0 != b.r0) return a.r0 < b.r0;
        if (a.r1 != b.r1) return a.r1 < b.r1;
        return a.r2 < b.r2;
    });
    std::vector<DmRatePoint> out;
    out.reserve(cands.size());
    for (const auto& c : cands) {
        DmRatePoint pt;
        pt.R0 = c.r0;
        pt.R1 = c.r1;
        pt.R2 = c.r2;
        pt.joints.push_back(g1.grid.joint(c.cell1));
        pt.joints.push_back(g2.grid.joint(c.cell2));
        out.push_back(std::move(pt));
    }
    return out;
}

DegradednessResult is_degraded(const DMChannel& q, int y_size, int z_size) {
    if (y_size < 1 || z_size < 1 || q.out_size != y_size * z_size)
        throw input_error("is_degraded: output alphabet is not the stated (y, z) product");
    const int nx = q.in_size;

    std::vector<FiniteDist> p1rows;
    p1rows.reserve(static_cast<std::size_t>(nx));
    for (int x = 0; x < nx; ++x) {
        std::vector<double> row(static_cast<std::size_t>(y_size), 0.0);
        for (int y = 0; y < y_size; ++y)
            for (int z = 0; z < z_size; ++z)
                row[static_cast<std::size_t>(y)] += q.row(x)[y * z_size + z];
        p1rows.emplace_back(std::move(row));
    }

    std::vector<FiniteDist> p2rows;
    p2rows.reserve(static_cast<std::size_t>(y_size));
    for (int y = 0; y < y_size; ++y) {
        std::vector<double> row(static_cast<std::size_t>(z_size), 0.0);
        double mass = 0.0;
        for (int x = 0; x < nx; ++x)
            for (int z = 0; z < z_size; ++z) {
                row[static_cast<std::size_t>(z)] += q.row(x)[y * z_size + z];
                mass += q.row(x)[y * z_size + z];
            }
        if (mass <= 1e-12) {
            p2rows.push_back(FiniteDist::uniform(z_size));
            continue;
        }
        for (double& v : row) v /= mass;
        p2rows.emplace_back(std::move(row));
    }

    DegradednessResult res;
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < y_size; ++y)
            for (int z = 0; z < z_size; ++z) {
                double model = p1rows[static_cast<std::size_t>(x)][y] *
                               p2rows[static_cast<std::size_t>(y)][z];
                res.max_violation = std::max(
                    res.max_violation, std::abs(q.row(x)[y * z_size + z] - model));
            }
    res.ok = res.max_violation <= kDegradedTol;
    if (res.ok)
        res.bc = DegradedBC(DMChannel(nx, y_size, std::move(p1rows)),
                            DMChannel(y_size, z_size, std::move(p2rows)));
    return res;
}

}  // namespace fbcap
