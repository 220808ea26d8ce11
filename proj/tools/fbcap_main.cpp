// fbcap command line: region sweeps and verification suites.
//
// Exit codes: 0 success, 1 bad input (malformed JSON, unknown suite,
// unreadable file, invalid model or grid), 2 verification failure or a
// flagged non-converged boundary point, 3 model-class refusal (a joint
// channel that does not factor through the degraded chain).

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fbcap/common.hpp"
#include "fbcap/envelope.hpp"
#include "fbcap/finite.hpp"
#include "fbcap/gaussian.hpp"
#include "fbcap/json_io.hpp"
#include "fbcap/parallel.hpp"
#include "fbcap/region_dm.hpp"
#include "fbcap/region_gvbc.hpp"
#include "fbcap/trajectory.hpp"

namespace {

using namespace fbcap;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitVerify = 2;
constexpr int kExitModelClass = 3;

Rng stream_rng(std::uint64_t seed, std::size_t index) {
    return Rng(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

struct CommonOpts {
    std::string input;
    std::string output;
    std::string unit;
    std::uint64_t seed = 1;
    int workers = 0;
};

std::vector<double> parse_lambda_grid(const std::string& text) {
    std::vector<double> grid;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
                ++used;
            if (used != tok.size()) throw std::invalid_argument(tok);
            grid.push_back(v);
        } catch (const std::exception&) {
            throw input_error("bad lambda grid entry: '" + tok + "'");
        }
    }
    if (grid.empty()) throw input_error("empty lambda grid");
    return grid;
}

std::string sibling_json_path(const std::string& csv_path) {
    if (csv_path.size() >= 4 && csv_path.compare(csv_path.size() - 4, 4, ".csv") == 0)
        return csv_path.substr(0, csv_path.size() - 4) + ".json";
    return csv_path + ".json";
}

int cmd_gvbc_region(const CommonOpts& opt, const std::string& lambda_text) {
    const std::string raw = read_file(opt.input);
    const Unit unit = parse_unit(opt.unit);
    GaussianBCModel model = gvbc_model_from_json(parse_json(raw, opt.input));
    const std::vector<double> grid =
        lambda_text.empty() ? default_lambda_grid() : parse_lambda_grid(lambda_text);

    const std::vector<GvbcRatePoint> points = boundary_sweep(model, grid, opt.workers);

    ArtifactStamp stamp{kGvbcBoundarySchema, opt.seed, fnv1a64_hex(raw), opt.unit};
    std::string csv = csv_header(stamp);
    csv += "lambda,R1,R2";
    for (int i = 0; i < model.d; ++i)
        for (int j = 0; j < model.d; ++j)
            csv += ",B1_" + std::to_string(i) + std::to_string(j);
    csv += '\n';

    Json jpoints = Json::array();
    bool all_converged = true;
    for (const auto& pt : points) {
        std::vector<double> row{pt.lambda, from_nats(pt.R1, unit), from_nats(pt.R2, unit)};
        for (int i = 0; i < model.d; ++i)
            for (int j = 0; j < model.d; ++j) row.push_back(pt.B1(i, j));
        csv += csv_row(row);

        Json jp;
        jp["lambda"] = pt.lambda;
        jp["R1"] = from_nats(pt.R1, unit);
        jp["R2"] = from_nats(pt.R2, unit);
        jp["converged"] = pt.converged;
        jp["B1"] = mat_to_json(pt.B1);
        jpoints.push_back(std::move(jp));
        all_converged = all_converged && pt.converged;
    }

    Json doc;
    stamp_json(doc, stamp);
    doc["points"] = std::move(jpoints);

    write_file(opt.output, csv);
    write_file(sibling_json_path(opt.output), doc.dump(2) + "\n");

    if (!all_converged) {
        std::cerr << "fbcap: boundary sweep flagged non-converged slopes; "
                     "artifacts written with converged=false markers\n";
        return kExitVerify;
    }
    return kExitOk;
}

int auto_resolution(const DmModelInput& in) {
    int amax = 0;
    auto take = [&](const DegradedBC& bc) {
        amax = std::max({amax, bc.input_size(), bc.y_size(), bc.z_size()});
    };
    switch (in.kind) {
        case DmModelKind::degraded_bc:
            take(in.bc);
            break;
        case DmModelKind::joint_bc:
            amax = std::max({in.q.in_size, in.y_size, in.z_size});
            break;
        case DmModelKind::rpdbc:
            for (const auto& c : in.components) take(c);
            break;
    }
    return amax <= 2 ? 24 : 12;
}

int cmd_dm_region(const CommonOpts& opt, int resolution) {
    const std::string raw = read_file(opt.input);
    const Unit unit = parse_unit(opt.unit);
    const DmModelInput in = dm_model_from_json(parse_json(raw, opt.input));
    const int res = resolution > 0 ? resolution : auto_resolution(in);

    std::vector<DmRatePoint> points;
    switch (in.kind) {
        case DmModelKind::degraded_bc:
            points = superposition_region(in.bc, res, opt.workers);
            break;
        case DmModelKind::joint_bc: {
            const DegradednessResult deg = is_degraded(in.q, in.y_size, in.z_size);
            if (!deg.ok) {
                std::cerr << "fbcap: joint channel does not factor as p(y|x) p(z|y); "
                          << "max factorization violation " << deg.max_violation
                          << "; refusing a model outside the degraded class\n";
                return kExitModelClass;
            }
            points = superposition_region(deg.bc, res, opt.workers);
            break;
        }
        case DmModelKind::rpdbc:
            points = rpdbc_region(RpdbcModel(in.components[0], in.components[1]), res,
                                  opt.workers);
            break;
    }

    // Frontier rates are computed in bits; re-express in the requested unit.
    auto conv = [&](double bits_val) { return from_nats(bits_val * M_LN2, unit); };

    ArtifactStamp stamp{kDmFrontierSchema, opt.seed, fnv1a64_hex(raw), opt.unit};
    std::string csv = csv_header(stamp);
    csv += "R0,R1,R2\n";
    for (const auto& pt : points)
        csv += csv_row({conv(pt.R0), conv(pt.R1), conv(pt.R2)});
    write_file(opt.output, csv);
    return kExitOk;
}

Mat random_square(Rng& rng, int d, double scale) {
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
    return m;
}

Mat random_psd(Rng& rng, int d, double scale) {
    Mat r = random_square(rng, d, 1.0);
    Mat m = scale * (r * r.transpose()) / static_cast<double>(d);
    return 0.5 * (m + m.transpose());
}

CheckReport suite_prop1(std::uint64_t seed) {
    CheckReport rep;
    rep.suite = "directed-information subadditivity, random two-letter systems";
    for (std::size_t t = 0; t < 200; ++t) {
        Rng rng = stream_rng(seed, t);
        const int xs = 2 + static_cast<int>(rng.uniform_int(2));
        const int ys = 2 + static_cast<int>(rng.uniform_int(2));
        std::vector<FiniteDist> rows;
        for (int x = 0; x < xs; ++x) {
            FiniteDist d;
            d.p = rng.simplex(static_cast<std::size_t>(ys));
            rows.push_back(std::move(d));
        }
        DMChannel ch(xs, ys, std::move(rows));
        rep.merge(check_directed_subadditivity(ch, {FeedbackPolicy::random(rng, 2, xs, ys)}));
    }
    return rep;
}

CheckReport suite_prop2(std::uint64_t seed, int workers) {
    CheckReport rep;
    rep.suite = "feedback envelope subadditivity, strong-output feedback";
    const double lambdas[] = {1.0, 1.5, 3.0};
    const DegradedBC channels[] = {DegradedBC::bsc(0.1, 0.2), DegradedBC::bsc(0.02, 0.4)};
    std::uint64_t k = 0;
    for (double lam : lambdas)
        for (const auto& bc : channels)
            rep.merge(
                check_feedback_envelope_subadditivity(bc, lam, 250, 256, seed + 101 * ++k,
                                                      workers));
    return rep;
}

CheckReport suite_rotation(std::uint64_t seed) {
    CheckReport rep;
    rep.suite = "rotation invariance, linear feedback systems";
    for (std::size_t t = 0; t < 100; ++t) {
        Rng rng = stream_rng(seed, t);
        const int d = 1 + static_cast<int>(rng.uniform_int(2));
        Mat noise = random_psd(rng, d, 1.0) + 0.2 * Mat::Identity(d, d);
        LinearFeedbackSystem sys(d, random_psd(rng, d, 1.0), Mat::Zero(d, d),
                                 random_square(rng, d, 1.0), random_psd(rng, d, 0.5), noise,
                                 noise);
        rep.add(check_rotation_invariance(sys));
    }
    return rep;
}

CheckReport suite_subadditivity(std::uint64_t seed, int workers, const std::string& output,
                                const CommonOpts& opt) {
    CheckReport rep;
    rep.suite = "concave-envelope properties and two-letter subadditivity";
    rep.merge(check_envelope_properties(500, 256, seed, workers));
    const DegradedBC bc = DegradedBC::bsc(0.1, 0.2);
    const double lambdas[] = {1.0, 1.5, 3.0};
    for (std::uint64_t i = 0; i < 3; ++i)
        rep.merge(
            check_envelope_subadditivity(bc, lambdas[i], 500, 128, seed + 101 * (i + 1),
                                         workers));

    if (!output.empty()) {
        const Unit unit = parse_unit(opt.unit);
        const EnvelopeTable table = envelope_table(bc, 1.5, 128);
        ArtifactStamp stamp{kEnvelopeCurveSchema, seed, "none", opt.unit};
        std::string csv = csv_header(stamp);
        csv += "p0,p1,s_lambda,S_lambda\n";
        for (std::size_t i = 0; i < table.grid.size(); ++i)
            csv += csv_row({table.grid[i].p[0], table.grid[i].p[1],
                            from_nats(table.base[i], unit), from_nats(table.hull[i], unit)});
        write_file(output + ".envelope.csv", csv);
    }
    return rep;
}

CheckReport suite_extremality(std::uint64_t seed, int workers) {
    CheckReport rep;
    rep.suite = "scalar gaussian extremality";
    Mat g(1, 1), k(1, 1), kt(1, 1), kp(1, 1);
    g << 1.0;
    k << 1.0;
    kt << 3.0;
    kp << 3.0;
    const GaussianBCModel model(g, k, kt, kp);
    const double lambdas[] = {1.0, 2.0, 4.0};
    for (std::uint64_t i = 0; i < 3; ++i)
        rep.merge(
            check_gaussian_extremality(model, lambdas[i], 10000, seed + 101 * (i + 1),
                                       workers));
    return rep;
}

int cmd_verify(const CommonOpts& opt, const std::string& suite) {
    const Unit unit = parse_unit(opt.unit);
    CheckReport rep;
    if (suite == "massey")
        rep = check_directed_vs_block(opt.seed, 500, opt.workers);
    else if (suite == "prop1")
        rep = suite_prop1(opt.seed);
    else if (suite == "prop2")
        rep = suite_prop2(opt.seed, opt.workers);
    else if (suite == "rotation")
        rep = suite_rotation(opt.seed);
    else if (suite == "subadditivity")
        rep = suite_subadditivity(opt.seed, opt.workers, opt.output, opt);
    else if (suite == "extremality")
        rep = suite_extremality(opt.seed, opt.workers);
    else if (suite == "counterexample")
        rep = check_feedback_mi_counterexample();
    else
        throw input_error("unknown verify suite: '" + suite +
                          "' (expected massey, prop1, prop2, rotation, subadditivity, "
                          "extremality, or counterexample)");

    ArtifactStamp stamp{kVerifyReportSchema, opt.seed, "none", opt.unit};
    const Json doc = report_to_json(rep, stamp);
    const std::string text = doc.dump(2) + "\n";
    if (opt.output.empty())
        std::cout << text;
    else
        write_file(opt.output, text);

    std::cerr << "fbcap: verify " << suite << ": " << (rep.pass ? "pass" : "FAIL") << ", "
              << rep.records.size() << " records, min gap " << from_nats(rep.min_gap(), unit)
              << ' ' << opt.unit << '\n';
    return rep.pass ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "fbcap: feedback-capacity regions of degraded broadcast channels and "
        "verification suites for the factorization arguments behind them"};
    app.require_subcommand(1);

    CommonOpts gv;
    gv.unit = "nats";
    std::string gv_lambda;
    CLI::App* gvbc = app.add_subcommand(
        "gvbc-region", "Sweep the weighted-rate boundary of a Gaussian vector BC model");
    gvbc->add_option("--input", gv.input, "Model JSON (fbcap/gvbc-model-v1)")->required();
    gvbc->add_option("--output", gv.output,
                     "Boundary CSV path; a JSON twin replaces the .csv suffix")
        ->required();
    gvbc->add_option("--lambda-grid", gv_lambda,
                     "Comma-separated slopes (default: 33-point log grid on [1, 64])");
    gvbc->add_option("--workers", gv.workers,
                     "Worker threads, 0 = hardware (FBCAP_WORKERS overrides)");
    gvbc->add_option("--seed", gv.seed, "Seed recorded in the artifact stamp");
    gvbc->add_option("--unit", gv.unit, "Rate unit: nats (default) or bits");

    CommonOpts vf;
    vf.unit = "bits";
    std::string suite;
    CLI::App* verify =
        app.add_subcommand("verify", "Run a verification suite and emit a JSON report");
    verify->add_option("suite", suite,
                       "massey | prop1 | prop2 | rotation | subadditivity | extremality | "
                       "counterexample")
        ->required();
    verify->add_option("--output", vf.output, "Report path (default: stdout)");
    verify->add_option("--workers", vf.workers,
                       "Worker threads, 0 = hardware (FBCAP_WORKERS overrides)");
    verify->add_option("--seed", vf.seed, "Base seed for sampled instances");
    verify->add_option("--unit", vf.unit, "Report unit: bits (default) or nats");

    CommonOpts dm;
    dm.unit = "bits";
    int dm_res = 0;
    CLI::App* dmr = app.add_subcommand(
        "dm-region", "Compute a discrete-memoryless rate frontier (fbcap/dm-model-v1)");
    dmr->add_option("--input", dm.input, "Model JSON (fbcap/dm-model-v1)")->required();
    dmr->add_option("--output", dm.output, "Frontier CSV path")->required();
    dmr->add_option("--resolution", dm_res,
                    "Simplex grid resolution (default 24 for binary alphabets, else 12)");
    dmr->add_option("--workers", dm.workers,
                    "Worker threads, 0 = hardware (FBCAP_WORKERS overrides)");
    dmr->add_option("--seed", dm.seed, "Seed recorded in the artifact stamp");
    dmr->add_option("--unit", dm.unit, "Rate unit: bits (default) or nats");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (gvbc->parsed()) return cmd_gvbc_region(gv, gv_lambda);
        if (verify->parsed()) return cmd_verify(vf, suite);
        return cmd_dm_region(dm, dm_res);
    } catch (const model_class_error& e) {
        std::cerr << "fbcap: " << e.what() << '\n';
        return kExitModelClass;
    } catch (const input_error& e) {
        std::cerr << "fbcap: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "fbcap: " << e.what() << '\n';
        return kExitInput;
    }
}
