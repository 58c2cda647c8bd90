#include "sbsa/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sbsa/cardio.hpp"
#include "sbsa/errors.hpp"
#include "sbsa/invariants.hpp"
#include "sbsa/io.hpp"
#include "sbsa/signal.hpp"
#include "sbsa/spectral.hpp"
#include "sbsa/stats.hpp"
#include "sbsa/synthetic.hpp"
#include "sbsa/transform.hpp"

namespace sbsa {
namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

std::string g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------- plumbing

struct CommonOpts {
    std::string input;
    std::string config_path;
    std::string output_dir; // flag override; empty = take it from the config
    double rate_hz = 0.0;   // flag override for single-column inputs
};

RunConfig effective_config(const CommonOpts& c) {
    RunConfig rc =
        c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
    if (!c.output_dir.empty()) rc.output_dir = c.output_dir;
    if (c.rate_hz > 0.0) rc.rate_hz = c.rate_hz;
    return rc;
}

// Output directory, created on first use.
struct OutDir {
    std::filesystem::path dir;

    explicit OutDir(const RunConfig& rc) : dir(rc.output_dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw input_error("cannot create output directory '" +
                              dir.string() + "': " + ec.message());
    }
    std::string file(const char* name) const { return (dir / name).string(); }
};

Signal load_input_signal(const std::string& path, const RunConfig& rc) {
    std::vector<std::string> warnings;
    Signal s = load_signal(path, rc.rate_hz, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return s;
}

void write_json_file(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw input_error("write failed on '" + path + "'");
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    return out;
}

ordered_json selection_json(const ChiSelectionConfig& c) {
    return ordered_json{
        {"mode", c.mode == ChiMode::ErrorTarget ? "error_target" : "fixed_n"},
        {"target_n", c.target_n},
        {"mse_tolerance", c.mse_tolerance},
        {"chi_min", c.chi_min},
        {"chi_max", c.chi_max},
        {"max_iterations", c.max_iterations}};
}

// Decomposition at a caller-fixed chi: no search, just the spectrum and fit.
SbsaResult analyze_fixed_chi(const Signal& y, double chi) {
    SbsaResult res;
    res.decomposition = negative_spectrum(discretize_operator(y, chi));
    res.chi_hat = chi;
    res.reconstruction = reconstruct(res.decomposition);
    res.relative_mse = relative_mse(y, res.reconstruction);
    res.converged = true;
    return res;
}

// Shared "--chi beats the config search" entry used by decompose,
// reconstruct and invariants. chi_source reports which path ran.
SbsaResult run_analysis(const Signal& y, const RunConfig& rc, double fixed_chi,
                        std::string& chi_source) {
    if (fixed_chi > 0.0) {
        chi_source = "fixed";
        return analyze_fixed_chi(y, fixed_chi);
    }
    chi_source = rc.chi.mode == ChiMode::ErrorTarget ? "error_target"
                                                     : "fixed_n";
    return select_chi(y, rc.chi);
}

const char* predictor_name(Predictor p) {
    switch (p) {
        case Predictor::Lambda1: return "lambda1";
        case Predictor::SBP: return "sbp";
        default: return "pp";
    }
}

const char* predictor_axis(Predictor p) {
    switch (p) {
        case Predictor::Lambda1: return "lambda1_per_s2";
        case Predictor::SBP: return "sbp";
        default: return "pp";
    }
}

Predictor parse_predictor(const std::string& s) {
    if (s == "lambda1") return Predictor::Lambda1;
    if (s == "sbp") return Predictor::SBP;
    if (s == "pp") return Predictor::PP;
    throw input_error("predictor must be 'lambda1', 'sbp' or 'pp', got '" + s +
                      "'");
}

// ---------------------------------------------------------------- decompose

struct DecomposeOpts : CommonOpts {
    double chi = 0.0;  // > 0 = skip the search
    int target_n = 0;  // > 0 = fixed-count search
};

void handle_decompose(const DecomposeOpts& o) {
    RunConfig rc = effective_config(o);
    if (o.target_n > 0) {
        rc.chi.mode = ChiMode::FixedComponentCount;
        rc.chi.target_n = o.target_n;
    }
    const Signal y = load_input_signal(o.input, rc);
    std::string chi_source;
    const SbsaResult res = run_analysis(y, rc, o.chi, chi_source);
    const auto& d = res.decomposition;

    OutDir out(rc);
    save_signal_csv(out.file("measured.csv"), y);
    save_signal_csv(out.file("reconstructed.csv"), res.reconstruction);

    auto csv = open_csv(out.file("kappas.csv"));
    csv << "n,kappa_per_s,lambda_per_s2\n";
    for (std::size_t n = 0; n < d.count(); ++n)
        csv << n << ',' << format_double(d.kappas[n]) << ','
            << format_double(d.lambda(n)) << '\n';
    csv.flush();
    if (!csv) throw input_error("write failed on '" + out.file("kappas.csv") + "'");

    ordered_json j{{"version", kVersion},
                   {"input", o.input},
                   {"chi_source", chi_source},
                   {"chi", res.chi_hat},
                   {"converged", res.converged},
                   {"n_components", d.count()},
                   {"relative_mse", res.relative_mse},
                   {"kappas_per_s", d.kappas}};
    std::vector<double> lambdas(d.count());
    for (std::size_t n = 0; n < d.count(); ++n) lambdas[n] = d.lambda(n);
    j["lambdas_per_s2"] = lambdas;
    if (chi_source != "fixed") j["selection"] = selection_json(rc.chi);
    write_json_file(out.file("decompose.json"), j);

    std::cout << "chi = " << g6(res.chi_hat) << " (" << chi_source << ")\n"
              << "components = " << d.count() << '\n'
              << "relative_mse = " << g6(res.relative_mse) << '\n';
    if (!res.converged) std::cout << "warning: error target not reached\n";
    for (std::size_t n = 0; n < d.count(); ++n)
        std::cout << "kappa[" << n << "] = " << g6(d.kappas[n]) << " /s\n";
    std::cout << "wrote decompose.json, kappas.csv, measured.csv, "
                 "reconstructed.csv to "
              << out.dir.string() << '\n';
}

// -------------------------------------------------------------- reconstruct

struct ReconstructOpts : CommonOpts {
    double chi = 0.0;
    long long n_s = -1; // -1 = take it from the config
};

void handle_reconstruct(const ReconstructOpts& o) {
    RunConfig rc = effective_config(o);
    const Signal y = load_input_signal(o.input, rc);
    std::string chi_source;
    const SbsaResult res = run_analysis(y, rc, o.chi, chi_source);
    const auto& d = res.decomposition;

    const std::size_t requested =
        o.n_s >= 0 ? static_cast<std::size_t>(o.n_s) : rc.n_s;
    const std::size_t n_s = std::min(requested, d.count());
    const PhaseSplit split = split_phases(d, n_s);

    OutDir out(rc);
    save_signal_csv(out.file("measured.csv"), y);
    // The grouped-order sum, so the three emitted series satisfy
    // systolic + diastolic = reconstructed exactly, sample for sample.
    save_signal_csv(out.file("reconstructed.csv"), split.total());
    save_signal_csv(out.file("systolic.csv"), split.systolic);
    save_signal_csv(out.file("diastolic.csv"), split.diastolic);

    const auto energy = [](const Signal& s) {
        double acc = 0.0;
        for (const double v : s.samples) acc += v * v;
        return acc * s.dt;
    };

    write_json_file(
        out.file("reconstruct.json"),
        ordered_json{{"version", kVersion},
                     {"input", o.input},
                     {"chi_source", chi_source},
                     {"chi", res.chi_hat},
                     {"converged", res.converged},
                     {"n_components", d.count()},
                     {"n_s_requested", requested},
                     {"n_s", split.n_s},
                     {"relative_mse", res.relative_mse},
                     {"systolic_energy", energy(split.systolic)},
                     {"diastolic_energy", energy(split.diastolic)}});

    std::cout << "chi = " << g6(res.chi_hat) << " (" << chi_source << ")\n"
              << "components = " << d.count() << ", systolic group = "
              << split.n_s << '\n'
              << "relative_mse = " << g6(res.relative_mse) << '\n'
              << "wrote reconstruct.json, measured.csv, reconstructed.csv, "
                 "systolic.csv, diastolic.csv to "
              << out.dir.string() << '\n';
}

// --------------------------------------------------------------- invariants

struct InvariantsOpts : CommonOpts {
    double chi = 0.0;
    long long n_s = -1;
};

void handle_invariants(const InvariantsOpts& o) {
    RunConfig rc = effective_config(o);
    const Signal y = load_input_signal(o.input, rc);
    std::string chi_source;
    const SbsaResult res = run_analysis(y, rc, o.chi, chi_source);
    const auto& d = res.decomposition;

    const std::size_t requested =
        o.n_s >= 0 ? static_cast<std::size_t>(o.n_s) : rc.n_s;
    const InvariantSet inv = invariant_set(d, y, std::min(requested, d.count()));

    OutDir out(rc);
    const char* names[] = {"inv1_global",  "inv1_systolic", "inv1_diastolic",
                           "inv2_global",  "inv2_systolic", "inv2_diastolic",
                           "direct_inv1",  "direct_inv2",   "residual1",
                           "residual2"};
    const double values[] = {inv.inv1_global,  inv.inv1_systolic,
                             inv.inv1_diastolic, inv.inv2_global,
                             inv.inv2_systolic, inv.inv2_diastolic,
                             inv.direct_inv1,  inv.direct_inv2,
                             inv.residual1,    inv.residual2};

    auto csv = open_csv(out.file("invariants.csv"));
    csv << "quantity,value\n";
    for (std::size_t i = 0; i < std::size(names); ++i)
        csv << names[i] << ',' << format_double(values[i]) << '\n';
    csv << "n_s_effective," << inv.n_s_effective << '\n';
    csv.flush();
    if (!csv)
        throw input_error("write failed on '" + out.file("invariants.csv") + "'");

    ordered_json j{{"version", kVersion},
                   {"input", o.input},
                   {"chi_source", chi_source},
                   {"chi", res.chi_hat},
                   {"n_components", d.count()},
                   {"n_s_effective", inv.n_s_effective}};
    for (std::size_t i = 0; i < std::size(names); ++i) j[names[i]] = values[i];
    write_json_file(out.file("invariants.json"), j);

    std::cout << "chi = " << g6(res.chi_hat) << " (" << chi_source
              << "), components = " << d.count() << '\n';
    for (std::size_t i = 0; i < std::size(names); ++i)
        std::cout << names[i] << " = " << g6(values[i]) << '\n';
    std::cout << "n_s_effective = " << inv.n_s_effective << '\n'
              << "wrote invariants.json, invariants.csv to " << out.dir.string()
              << '\n';
}

// ----------------------------------------------------------------- pipeline

struct PipelineOpts : CommonOpts {
    std::string annotations; // flag override for the config path
};

void handle_pipeline(const PipelineOpts& o) {
    RunConfig rc = effective_config(o);
    const Signal y = load_input_signal(o.input, rc);

    SegmentationConfig seg = rc.segmentation;
    const std::string ann =
        o.annotations.empty() ? rc.annotations_path : o.annotations;
    if (!ann.empty()) seg.annotations = load_annotations(ann);

    const std::vector<BeatWindow> windows = segment_beats(y, seg);
    BeatConfig beat_cfg;
    beat_cfg.chi = rc.chi;
    beat_cfg.n_s = rc.n_s;
    const std::vector<BeatRecord> records = analyze_all(y, windows, beat_cfg);

    OutDir out(rc);
    save_beat_records_csv(out.file("beats.csv"), records);

    std::vector<double> t(records.size()), pi(records.size()),
        l1(records.size()), sbp(records.size()), pp(records.size()),
        inv1(records.size());
    std::size_t flagged = 0;
    double mean_n = 0.0;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        t[k] = windows[r.beat_index].onset_time;
        pi[k] = r.pi_ms;
        l1[k] = r.lambda1_abs;
        sbp[k] = r.sbp;
        pp[k] = r.pp;
        inv1[k] = r.invariants.inv1_global;
        flagged += r.pi_flagged ? 1 : 0;
        mean_n += double(r.n_chi);
    }
    if (!records.empty()) mean_n /= double(records.size());

    save_xy_csv(out.file("pi_series.csv"), "time_s", "pi_ms", t, pi);
    save_xy_csv(out.file("lambda1_series.csv"), "time_s", "lambda1_per_s2", t,
                l1);
    save_xy_csv(out.file("sbp_series.csv"), "time_s", "sbp", t, sbp);
    save_xy_csv(out.file("pp_series.csv"), "time_s", "pp", t, pp);
    save_xy_csv(out.file("inv1_series.csv"), "time_s", "inv1_global", t, inv1);

    ordered_json j{{"version", kVersion},
                   {"input", o.input},
                   {"n_windows", windows.size()},
                   {"n_beats", records.size()},
                   {"n_flagged", flagged},
                   {"mean_components", mean_n}};
    if (records.size() >= 2) {
        const auto put = [&](const char* key, const std::vector<double>& v) {
            const SummaryStat s = summarize(v);
            j[key] = ordered_json{{"mean", s.mean}, {"sem", s.sem}};
        };
        put("pi_ms", pi);
        put("lambda1", l1);
        put("sbp", sbp);
    }
    j["config"] = ordered_json{
        {"selection", selection_json(rc.chi)},
        {"n_s", rc.n_s},
        {"segmentation",
         ordered_json{{"threshold_fraction", seg.threshold_fraction},
                      {"refractory_s", seg.refractory_s},
                      {"foot_lookback_s", seg.foot_lookback_s},
                      {"min_samples", seg.min_samples},
                      {"annotations", ann}}}};
    write_json_file(out.file("pipeline.json"), j);

    std::cout << "beats = " << records.size() << " (flagged = " << flagged
              << ")\n";
    if (records.size() >= 2) {
        const SummaryStat spi = summarize(pi);
        std::cout << "mean pi = " << g6(spi.mean) << " +- " << g6(spi.sem)
                  << " ms\n";
    }
    std::cout << "mean components = " << g6(mean_n) << '\n'
              << "wrote beats.csv, pipeline.json and series CSVs to "
              << out.dir.string() << '\n';
}

// ---------------------------------------------------------------------- brs

struct BrsOpts : CommonOpts {
    std::string predictor; // empty = take it from the config
};

void handle_brs(const BrsOpts& o) {
    RunConfig rc = effective_config(o);
    const Predictor pred =
        o.predictor.empty() ? rc.predictor : parse_predictor(o.predictor);

    const std::vector<BeatRecord> records = load_beat_records_csv(o.input);
    const std::vector<BrsPair> pairs = brs_pairs(records, pred);
    const RegressionResult reg = linear_regression(pairs);

    OutDir out(rc);
    std::vector<double> x(pairs.size()), ynext(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        x[i] = pairs[i].x;
        ynext[i] = pairs[i].y;
    }
    save_xy_csv(out.file("brs_scatter.csv"), predictor_axis(pred),
                "next_pi_ms", x, ynext);

    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const std::vector<double> fx = {*lo_it, *hi_it};
    const std::vector<double> fy = {reg.intercept + reg.slope * *lo_it,
                                    reg.intercept + reg.slope * *hi_it};
    save_xy_csv(out.file("brs_fit.csv"), predictor_axis(pred), "next_pi_ms",
                fx, fy);

    write_json_file(out.file("brs.json"),
                    ordered_json{{"version", kVersion},
                                 {"input", o.input},
                                 {"predictor", predictor_name(pred)},
                                 {"n_pairs", reg.n},
                                 {"slope", reg.slope},
                                 {"intercept", reg.intercept},
                                 {"r_squared", reg.r_squared}});

    std::cout << "predictor = " << predictor_name(pred) << '\n'
              << "slope = " << g6(reg.slope) << " ms per unit\n"
              << "intercept = " << g6(reg.intercept) << " ms\n"
              << "r_squared = " << g6(reg.r_squared) << '\n'
              << "n_pairs = " << reg.n << '\n'
              << "wrote brs.json, brs_scatter.csv, brs_fit.csv to "
              << out.dir.string() << '\n';
}

// ------------------------------------------------------------------ compare

struct CompareOpts {
    std::string before;
    std::string after;
    std::string config_path;
    std::string output_dir;
};

struct ColumnStats {
    const char* name;
    SummaryStat before, after;
    bool tested = false;
    PairedTestResult test;
};

std::string significance(const ColumnStats& c) {
    if (!c.tested) return "";
    if (c.test.p_value <= 0.001) return "***";
    if (c.test.p_value <= 0.01) return "**";
    return "NS";
}

void handle_compare(const CompareOpts& o) {
    CommonOpts common;
    common.config_path = o.config_path;
    common.output_dir = o.output_dir;
    RunConfig rc = effective_config(common);

    std::vector<BeatRecord> before = load_beat_records_csv(o.before);
    std::vector<BeatRecord> after = load_beat_records_csv(o.after);
    if (before.size() != after.size()) {
        const std::size_t m = std::min(before.size(), after.size());
        std::cerr << "warning: tables differ in length (" << before.size()
                  << " vs " << after.size() << " beats); comparing the first "
                  << m << " of each\n";
        before.resize(m);
        after.resize(m);
    }
    if (before.size() < 2)
        throw insufficient_data_error(
            "compare needs at least 2 paired beats, got " +
            std::to_string(before.size()));

    struct Column {
        const char* name;
        double (*get)(const BeatRecord&);
    };
    static const Column columns[] = {
        {"pi_ms", [](const BeatRecord& r) { return r.pi_ms; }},
        {"sbp", [](const BeatRecord& r) { return r.sbp; }},
        {"dbp", [](const BeatRecord& r) { return r.dbp; }},
        {"mbp", [](const BeatRecord& r) { return r.mbp; }},
        {"pp", [](const BeatRecord& r) { return r.pp; }},
        {"lambda1", [](const BeatRecord& r) { return r.lambda1_abs; }},
        {"lambda2", [](const BeatRecord& r) { return r.lambda2_abs; }},
        {"inv1g", [](const BeatRecord& r) { return r.invariants.inv1_global; }},
        {"inv1s",
         [](const BeatRecord& r) { return r.invariants.inv1_systolic; }},
        {"inv1d",
         [](const BeatRecord& r) { return r.invariants.inv1_diastolic; }},
        {"inv2g", [](const BeatRecord& r) { return r.invariants.inv2_global; }},
        {"inv2s",
         [](const BeatRecord& r) { return r.invariants.inv2_systolic; }},
        {"inv2d",
         [](const BeatRecord& r) { return r.invariants.inv2_diastolic; }},
        {"chi", [](const BeatRecord& r) { return r.chi_hat; }},
        {"n", [](const BeatRecord& r) { return double(r.n_chi); }},
    };

    std::vector<ColumnStats> stats;
    for (const auto& col : columns) {
        std::vector<double> b(before.size()), a(after.size());
        for (std::size_t i = 0; i < before.size(); ++i) {
            b[i] = col.get(before[i]);
            a[i] = col.get(after[i]);
        }
        ColumnStats c;
        c.name = col.name;
        c.before = summarize(b);
        c.after = summarize(a);
        try {
            c.test = wilcoxon_signed_rank(b, a);
            c.tested = true;
        } catch (const insufficient_data_error&) {
            c.tested = false; // all-zero differences or too few pairs
        }
        stats.push_back(c);
    }

    OutDir out(rc);
    auto csv = open_csv(out.file("compare.csv"));
    csv << "metric,before_mean,before_sem,after_mean,after_sem,"
           "w_statistic,p_value,significance\n";
    for (const auto& c : stats) {
        csv << c.name << ',' << format_double(c.before.mean) << ','
            << format_double(c.before.sem) << ',' << format_double(c.after.mean)
            << ',' << format_double(c.after.sem) << ',';
        if (c.tested)
            csv << format_double(c.test.statistic) << ','
                << format_double(c.test.p_value) << ',' << significance(c);
        else
            csv << "nan,nan,";
        csv << '\n';
    }
    csv.flush();
    if (!csv)
        throw input_error("write failed on '" + out.file("compare.csv") + "'");

    ordered_json rows = ordered_json::array();
    for (const auto& c : stats) {
        ordered_json row{{"metric", c.name},
                         {"before", ordered_json{{"mean", c.before.mean},
                                                 {"sem", c.before.sem}}},
                         {"after", ordered_json{{"mean", c.after.mean},
                                                {"sem", c.after.sem}}}};
        if (c.tested)
            row["wilcoxon"] =
                ordered_json{{"w", c.test.statistic},
                             {"p", c.test.p_value},
                             {"n_effective", c.test.n_effective},
                             {"exact", c.test.exact},
                             {"significance", significance(c)}};
        else
            row["wilcoxon"] = nullptr;
        rows.push_back(row);
    }
    write_json_file(out.file("compare.json"),
                    ordered_json{{"version", kVersion},
                                 {"before", o.before},
                                 {"after", o.after},
                                 {"n_pairs", before.size()},
                                 {"columns", rows}});

    // Human-readable table, to compare.txt and stdout.
    std::string table;
    char linebuf[160];
    std::snprintf(linebuf, sizeof linebuf, "%-8s %14s %14s %14s %14s %10s %-3s\n",
                  "metric", "before_mean", "before_sem", "after_mean",
                  "after_sem", "p", "sig");
    table += linebuf;
    for (const auto& c : stats) {
        if (c.tested)
            std::snprintf(linebuf, sizeof linebuf,
                          "%-8s %14.6g %14.6g %14.6g %14.6g %10.4g %-3s\n",
                          c.name, c.before.mean, c.before.sem, c.after.mean,
                          c.after.sem, c.test.p_value,
                          significance(c).c_str());
        else
            std::snprintf(linebuf, sizeof linebuf,
                          "%-8s %14.6g %14.6g %14.6g %14.6g %10s %-3s\n",
                          c.name, c.before.mean, c.before.sem, c.after.mean,
                          c.after.sem, "-", "");
        table += linebuf;
    }
    auto txt = open_csv(out.file("compare.txt"));
    txt << table;
    txt.flush();
    if (!txt)
        throw input_error("write failed on '" + out.file("compare.txt") + "'");

    std::cout << table << "n_pairs = " << before.size()
              << "\nwrote compare.json, compare.csv, compare.txt to "
              << out.dir.string() << '\n';
}

// -------------------------------------------------------------------- synth

struct SynthOpts {
    std::string config_path;
    std::string output_dir;
    // reflectionless profile
    std::vector<double> kappas;
    std::string norming = "auto";
    double grid_min = -15.0;
    double grid_max = 15.0;
    double dt = 0.01;
    // synthetic pressure recording
    bool abp = false;
    double duration_s = 120.0;
    double rate_hz = 0.0; // 0 = config rate if set, else 500
    long long seed = -1;  // -1 = config seed
    double target_pi_ms = 1000.0;
    double pi_slope = -0.105;
    double pi_noise_ms = 1.0;
};

void handle_synth_profile(const SynthOpts& o, const RunConfig& rc) {
    if (o.kappas.empty())
        throw input_error("synth needs --kappas (or --abp for a recording)");
    for (const double k : o.kappas)
        if (!(k > 0.0) || !std::isfinite(k))
            throw input_error("--kappas entries must be positive and finite");
    if (!(o.dt > 0.0) || !(o.grid_max > o.grid_min))
        throw input_error("grid needs --grid-max > --grid-min and --dt > 0");
    const std::size_t n =
        static_cast<std::size_t>(
            std::floor((o.grid_max - o.grid_min) / o.dt * (1.0 + 1e-12))) +
        1;
    if (n < 3) throw input_error("grid has fewer than 3 samples");

    std::vector<double> norming;
    if (o.norming == "auto") {
        norming = balanced_norming_constants(o.kappas);
    } else {
        std::string_view v = o.norming;
        while (!v.empty()) {
            const auto comma = v.find(',');
            const std::string field(v.substr(0, comma));
            char* end = nullptr;
            const double c = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0' || !(c > 0.0) ||
                !std::isfinite(c))
                throw input_error("cannot parse norming constant '" + field +
                                  "'");
            norming.push_back(c);
            if (comma == std::string_view::npos) break;
            v.remove_prefix(comma + 1);
        }
        if (norming.size() != o.kappas.size())
            throw input_error("--norming needs one constant per kappa (" +
                              std::to_string(o.kappas.size()) + "), got " +
                              std::to_string(norming.size()));
    }

    Signal grid = make_signal(std::vector<double>(n, 0.0), o.dt, o.grid_min);
    const Signal y = synthesize_reflectionless(o.kappas, norming, grid);

    OutDir out(rc);
    save_signal_csv(out.file("synth.csv"), y);
    write_json_file(out.file("synth.json"),
                    ordered_json{{"version", kVersion},
                                 {"kappas_per_s", o.kappas},
                                 {"norming_constants", norming},
                                 {"profile_chi", 1.0},
                                 {"grid", ordered_json{{"min", o.grid_min},
                                                       {"max", o.grid_max},
                                                       {"dt", o.dt},
                                                       {"n", n}}}});

    std::cout << "wrote " << n << " samples (" << o.kappas.size()
              << "-soliton profile at chi = 1) to " << out.file("synth.csv")
              << '\n';
}

void handle_synth_abp(const SynthOpts& o, const RunConfig& rc) {
    SyntheticAbpConfig cfg;
    cfg.seed = o.seed >= 0 ? static_cast<std::uint64_t>(o.seed) : rc.seed;
    cfg.duration_s = o.duration_s;
    cfg.rate_hz = o.rate_hz > 0.0 ? o.rate_hz
                                  : (rc.rate_hz > 0.0 ? rc.rate_hz : 500.0);
    cfg.target_pi_ms = o.target_pi_ms;
    cfg.pi_slope = o.pi_slope;
    cfg.pi_noise_ms = o.pi_noise_ms;
    cfg.analysis.chi = rc.chi;
    cfg.analysis.n_s = rc.n_s;

    const SyntheticAbpRecording rec = synthesize_abp_recording(cfg);

    OutDir out(rc);
    save_signal_csv(out.file("recording.csv"), rec.signal, "pressure_mmhg");

    auto csv = open_csv(out.file("truth.csv"));
    csv << "beat,onset_index,onset_time_s,lambda1_per_s2,programmed_pi_ms\n";
    for (std::size_t k = 0; k < rec.onsets.size(); ++k)
        csv << k << ',' << rec.onsets[k] << ','
            << format_double(rec.signal.time_at(rec.onsets[k])) << ','
            << format_double(rec.lambda1_abs[k]) << ','
            << format_double(rec.programmed_pi_ms[k]) << '\n';
    csv.flush();
    if (!csv)
        throw input_error("write failed on '" + out.file("truth.csv") + "'");

    write_json_file(out.file("synth_abp.json"),
                    ordered_json{{"version", kVersion},
                                 {"seed", cfg.seed},
                                 {"duration_s", cfg.duration_s},
                                 {"rate_hz", cfg.rate_hz},
                                 {"pi_slope", cfg.pi_slope},
                                 {"pi_intercept_ms", rec.pi_intercept_ms},
                                 {"target_pi_ms", cfg.target_pi_ms},
                                 {"pi_noise_ms", cfg.pi_noise_ms},
                                 {"dbp_mmhg", cfg.dbp_mmhg},
                                 {"pulse_mmhg", cfg.pulse_mmhg},
                                 {"amp_variability", cfg.amp_variability},
                                 {"width_variability", cfg.width_variability},
                                 {"dbp_sd_mmhg", cfg.dbp_sd_mmhg},
                                 {"n_beats", rec.onsets.size()}});

    std::cout << "generated " << rec.onsets.size() << " beats over "
              << g6(cfg.duration_s) << " s at " << g6(cfg.rate_hz)
              << " Hz (seed " << cfg.seed << ")\n"
              << "wrote recording.csv, truth.csv, synth_abp.json to "
              << out.dir.string() << '\n';
}

void handle_synth(const SynthOpts& o) {
    CommonOpts common;
    common.config_path = o.config_path;
    common.output_dir = o.output_dir;
    const RunConfig rc = effective_config(common);
    if (o.abp && !o.kappas.empty())
        throw input_error("--abp and --kappas are mutually exclusive");
    if (o.abp)
        handle_synth_abp(o, rc);
    else
        handle_synth_profile(o, rc);
}

// ------------------------------------------------------------------- wiring

void add_common(CLI::App* cmd, CommonOpts& o, const char* input_help) {
    cmd->add_option("-i,--input", o.input, input_help)->required();
    cmd->add_option("-c,--config", o.config_path, "run-configuration file");
    cmd->add_option("-o,--output-dir", o.output_dir,
                    "output directory (overrides the config)");
    cmd->add_option("--rate", o.rate_hz,
                    "sample rate in Hz for single-column inputs");
}

} // namespace

int run_cli(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--dump-config") {
            std::cout << default_run_config_text();
            return 0;
        }
    }

    CLI::App app{
        "sbsa: scattering-based signal analysis. Decomposes nonnegative "
        "pulse-like signals into soliton components via the negative "
        "spectrum of -d^2/dt^2 - chi*y, and runs the beat-to-beat "
        "cardiovascular pipeline built on it."};
    app.set_version_flag("--version", std::string("sbsa ") + kVersion);
    app.require_subcommand(1);
    app.footer("Run with --dump-config to print the default run "
               "configuration and exit.");

    DecomposeOpts dec;
    auto* c_dec = app.add_subcommand(
        "decompose", "chi selection and soliton spectrum of one signal");
    add_common(c_dec, dec, "signal CSV (time,value or value)");
    c_dec->add_option("--chi", dec.chi, "fixed chi (> 0); skips the search")
        ->check(CLI::PositiveNumber);
    c_dec->add_option("--target-n", dec.target_n,
                      "search for exactly this component count")
        ->check(CLI::PositiveNumber)
        ->excludes("--chi");
    c_dec->callback([&] { handle_decompose(dec); });

    ReconstructOpts rec;
    auto* c_rec = app.add_subcommand(
        "reconstruct", "reconstruction and systolic/diastolic phase split");
    add_common(c_rec, rec, "signal CSV (time,value or value)");
    c_rec->add_option("--chi", rec.chi, "fixed chi (> 0); skips the search")
        ->check(CLI::PositiveNumber);
    c_rec->add_option("--n-s", rec.n_s,
                      "fast components in the systolic group");
    c_rec->callback([&] { handle_reconstruct(rec); });

    InvariantsOpts inv;
    auto* c_inv = app.add_subcommand(
        "invariants", "scattering invariants and sum-rule residuals");
    add_common(c_inv, inv, "signal CSV (time,value or value)");
    c_inv->add_option("--chi", inv.chi, "fixed chi (> 0); skips the search")
        ->check(CLI::PositiveNumber);
    c_inv->add_option("--n-s", inv.n_s,
                      "fast components in the systolic group");
    c_inv->callback([&] { handle_invariants(inv); });

    PipelineOpts pipe;
    auto* c_pipe = app.add_subcommand(
        "pipeline", "segment a recording and analyze every beat");
    add_common(c_pipe, pipe, "recording CSV (time,value or value)");
    c_pipe->add_option("--annotations", pipe.annotations,
                       "beat-onset annotation file (overrides the config)");
    c_pipe->callback([&] { handle_pipeline(pipe); });

    BrsOpts brs;
    auto* c_brs = app.add_subcommand(
        "brs", "lagged regression of the next pulse interval on a per-beat "
               "predictor");
    add_common(c_brs, brs, "per-beat table (beats.csv from `pipeline`)");
    c_brs->add_option("--predictor", brs.predictor,
                      "lambda1, sbp or pp (default from the config)");
    c_brs->callback([&] { handle_brs(brs); });

    CompareOpts cmp;
    auto* c_cmp = app.add_subcommand(
        "compare", "paired before/after comparison of two per-beat tables");
    c_cmp->add_option("--before", cmp.before, "per-beat table")->required();
    c_cmp->add_option("--after", cmp.after, "per-beat table")->required();
    c_cmp->add_option("-c,--config", cmp.config_path, "run-configuration file");
    c_cmp->add_option("-o,--output-dir", cmp.output_dir,
                      "output directory (overrides the config)");
    c_cmp->callback([&] { handle_compare(cmp); });

    SynthOpts syn;
    auto* c_syn = app.add_subcommand(
        "synth", "synthesize a reflectionless profile or a seeded synthetic "
                 "pressure recording");
    c_syn->add_option("--kappas", syn.kappas,
                      "decay rates of the reflectionless profile (1/s)")
        ->delimiter(',');
    c_syn->add_option("--norming", syn.norming,
                      "'auto' or comma-separated norming constants");
    c_syn->add_option("--grid-min", syn.grid_min, "grid start (s)")
        ->capture_default_str();
    c_syn->add_option("--grid-max", syn.grid_max, "grid end (s)")
        ->capture_default_str();
    c_syn->add_option("--dt", syn.dt, "grid step (s)")->capture_default_str();
    c_syn->add_flag("--abp", syn.abp, "generate a synthetic pressure recording");
    c_syn->add_option("--duration", syn.duration_s, "recording length (s)")
        ->capture_default_str();
    c_syn->add_option("--rate", syn.rate_hz, "sample rate (Hz, default 500)");
    c_syn->add_option("--seed", syn.seed, "generator seed (default from config)");
    c_syn->add_option("--target-pi", syn.target_pi_ms,
                      "nominal pulse interval (ms)")
        ->capture_default_str();
    c_syn->add_option("--slope", syn.pi_slope,
                      "programmed interval-coupling slope (ms*s^2)")
        ->capture_default_str();
    c_syn->add_option("--noise", syn.pi_noise_ms,
                      "interval noise standard deviation (ms)")
        ->capture_default_str();
    c_syn->add_option("-c,--config", syn.config_path, "run-configuration file");
    c_syn->add_option("-o,--output-dir", syn.output_dir,
                      "output directory (overrides the config)");
    c_syn->callback([&] { handle_synth(syn); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const insufficient_data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace sbsa
