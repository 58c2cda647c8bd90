#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sbsa/cli.hpp"
#include "sbsa/errors.hpp"
#include "sbsa/io.hpp"
#include "sbsa/signal.hpp"

using namespace sbsa;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("sbsa_io_" + name)).string();
}

std::string write_file(const std::string& name, const std::string& text) {
    const std::string p = tmp_path(name);
    std::ofstream out(p);
    out << text;
    return p;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_text(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

// Run the CLI in-process with cout/cerr captured, so parse errors and
// handler errors do not leak into the test log.
int call_cli(std::vector<std::string> args, std::string* out = nullptr,
             std::string* err = nullptr) {
    args.insert(args.begin(), "sbsa");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream cap_out, cap_err;
    auto* co = std::cout.rdbuf(cap_out.rdbuf());
    auto* ce = std::cerr.rdbuf(cap_err.rdbuf());
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(co);
    std::cerr.rdbuf(ce);
    if (out) *out = cap_out.str();
    if (err) *err = cap_err.str();
    return rc;
}

} // namespace

TEST_CASE("two-column csv with a header loads on its own time axis") {
    const auto p = write_file("two_col.csv",
                              "# probe A\n"
                              "time_s,pressure_mmhg\n"
                              "0.0,1.5\n"
                              "0.002,1.25\n"
                              "0.004,1.0\n"
                              "0.006,2.0\n");
    const Signal s = load_signal(p);
    REQUIRE(s.size() == 4);
    CHECK(s.t0 == 0.0);
    CHECK(s.dt == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(s.samples[0] == 1.5);
    CHECK(s.samples[3] == 2.0);
}

TEST_CASE("headerless all-numeric rows are data") {
    const auto p = write_file("no_header.csv", "1,2\n3,4\n5,6\n");
    const Signal s = load_signal(p);
    REQUIRE(s.size() == 3);
    CHECK(s.t0 == 1.0);
    CHECK(s.dt == doctest::Approx(2.0));
    CHECK(s.samples[1] == 4.0);
}

TEST_CASE("single-column input needs a declared rate") {
    const auto p = write_file("one_col.csv", "value\n1\n2\n3\n");
    CHECK_THROWS_AS(load_signal(p), input_error);
    const Signal s = load_signal(p, 250.0);
    REQUIRE(s.size() == 3);
    CHECK(s.dt == 1.0 / 250.0);
    CHECK(s.t0 == 0.0);
    CHECK(s.samples[2] == 3.0);
}

TEST_CASE("malformed rows are reported with their line numbers") {
    const auto junk = write_file("junk.csv",
                                 "# comment\n"
                                 "time,value\n"
                                 "0,1\n"
                                 "0.01,oops\n"
                                 "0.02,3\n");
    auto msg = error_text([&] { load_signal(junk); });
    CHECK(contains(msg, ":4:"));
    CHECK(contains(msg, "oops"));

    const auto nan_row =
        write_file("nan.csv", "time,value\n0,1\n0.01,nan\n0.02,3\n");
    msg = error_text([&] { load_signal(nan_row); });
    CHECK(contains(msg, ":3:"));
    CHECK(contains(msg, "non-finite"));

    const auto backwards =
        write_file("backwards.csv", "time,value\n0,1\n0.02,2\n0.01,3\n");
    msg = error_text([&] { load_signal(backwards); });
    CHECK(contains(msg, ":4:"));
    CHECK(contains(msg, "strictly increasing"));

    const auto wide = write_file("wide.csv", "a,b,c\n1,2,3\n4,5,6\n7,8,9\n");
    msg = error_text([&] { load_signal(wide); });
    CHECK(contains(msg, "expected 1 or 2 columns"));

    const auto ragged = write_file("ragged.csv", "0,1\n0.01,2\n0.02\n");
    msg = error_text([&] { load_signal(ragged); });
    CHECK(contains(msg, ":3:"));
    CHECK(contains(msg, "expected 2 columns"));

    const auto tiny = write_file("tiny.csv", "0,1\n0.01,2\n");
    msg = error_text([&] { load_signal(tiny); });
    CHECK(contains(msg, "at least 3 samples"));

    CHECK_THROWS_AS(load_signal(tmp_path("beat1_does_not_exist.csv")),
                    input_error);
}

TEST_CASE("non-uniform timestamps resample onto the median step") {
    // One 0.015 gap and one 0.005 gap inside an otherwise 0.01 grid; the
    // values lie on a line so interpolation reproduces them exactly.
    std::string text = "time,value\n";
    const double times[] = {0.0, 0.01, 0.025, 0.03, 0.04, 0.05};
    for (const double t : times)
        text += format_double(t) + "," + format_double(100.0 * t) + "\n";
    const auto p = write_file("nonuniform.csv", text);

    std::vector<std::string> warnings;
    const Signal s = load_signal(p, 0.0, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(contains(warnings[0], "resampled"));
    CHECK(s.dt == doctest::Approx(0.01));
    REQUIRE(s.size() == 6);
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(s.samples[i] == doctest::Approx(double(i)).epsilon(1e-12));

    // A declared rate is ignored when the file carries time.
    warnings.clear();
    const auto uni = write_file("uniform.csv", "0,1\n0.01,2\n0.02,3\n");
    load_signal(uni, 123.0, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(contains(warnings[0], "time column"));
}

TEST_CASE("signal save/load round trip preserves every sample bit") {
    const Signal s = make_signal(
        {1.0 / 3.0, std::sqrt(2.0), 3.14159265358979312, std::exp(1.0), 0.1},
        1.0 / 7.0, 0.25);
    const auto p = tmp_path("roundtrip.csv");
    save_signal_csv(p, s, "value");
    const Signal s2 = load_signal(p);
    REQUIRE(s2.size() == s.size());
    CHECK(std::memcmp(s2.samples.data(), s.samples.data(),
                      s.size() * sizeof(double)) == 0);
    CHECK(s2.t0 == 0.25);
    CHECK(s2.dt == doctest::Approx(s.dt).epsilon(1e-15));
}

TEST_CASE("xy writer rejects mismatched columns") {
    CHECK_THROWS_AS(
        save_xy_csv(tmp_path("xy.csv"), "x", "y", {1.0, 2.0}, {1.0}),
        input_error);
    save_xy_csv(tmp_path("xy.csv"), "x_s", "y_mmhg", {1.0, 2.0}, {3.0, 4.0});
    CHECK(read_file(tmp_path("xy.csv")) == "x_s,y_mmhg\n1,3\n2,4\n");
}

TEST_CASE("annotation files hold one index per line") {
    const auto p = write_file("ann.csv", "index\n10\n300\n590\n");
    CHECK(load_annotations(p) == std::vector<std::size_t>{10, 300, 590});
    const auto bare = write_file("ann_bare.csv", "10\n300\n");
    CHECK(load_annotations(bare) == std::vector<std::size_t>{10, 300});

    const auto junk = write_file("ann_junk.csv", "10\nx7\n");
    const auto msg = error_text([&] { load_annotations(junk); });
    CHECK(contains(msg, ":2:"));
    CHECK_THROWS_AS(load_annotations(write_file("ann_empty.csv", "# none\n")),
                    input_error);
    CHECK_THROWS_AS(load_annotations(write_file("ann_wide.csv", "1,2\n")),
                    input_error);
}

namespace {

BeatRecord sample_record(std::size_t k) {
    BeatRecord r;
    r.beat_index = k;
    r.pi_ms = 998.7 + 3.1 * double(k);
    r.sbp = 45.0 + std::sqrt(double(k) + 2.0);
    r.dbp = 0.5871915153935806;
    r.mbp = 9.1297962462387670;
    r.pp = r.sbp - r.dbp;
    r.lambda1_abs = 3588.65627701845280 + double(k);
    r.lambda2_abs = 2133.49734408347290;
    r.invariants.inv1_global = 9.0404222726856 + 0.01 * double(k);
    r.invariants.inv1_systolic = 5.15741379508666;
    r.invariants.inv1_diastolic = 3.88300847759894;
    r.invariants.inv2_global = 195.324499651163;
    r.invariants.inv2_systolic = 157.126243685085;
    r.invariants.inv2_diastolic = 38.1982559660779;
    r.chi_hat = 112.227414640188 / (1.0 + double(k));
    r.n_chi = 8 - k;
    r.pi_flagged = !pi_interval_plausible(r.pi_ms);
    return r;
}

} // namespace

TEST_CASE("beat tables round trip byte for byte") {
    std::vector<BeatRecord> records = {sample_record(0), sample_record(1),
                                       sample_record(2)};
    records[2].pi_ms = 100.0; // below the plausibility band
    records[2].pi_flagged = true;

    const auto p = tmp_path("beats.csv");
    save_beat_records_csv(p, records);
    const auto loaded = load_beat_records_csv(p);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& a = records[k];
        const auto& b = loaded[k];
        CHECK(b.beat_index == a.beat_index);
        CHECK(b.pi_ms == a.pi_ms);
        CHECK(b.pi_flagged == a.pi_flagged);
        CHECK(b.sbp == a.sbp);
        CHECK(b.dbp == a.dbp);
        CHECK(b.mbp == a.mbp);
        CHECK(b.pp == a.pp);
        CHECK(b.lambda1_abs == a.lambda1_abs);
        CHECK(b.lambda2_abs == a.lambda2_abs);
        CHECK(b.invariants.inv1_global == a.invariants.inv1_global);
        CHECK(b.invariants.inv1_systolic == a.invariants.inv1_systolic);
        CHECK(b.invariants.inv1_diastolic == a.invariants.inv1_diastolic);
        CHECK(b.invariants.inv2_global == a.invariants.inv2_global);
        CHECK(b.invariants.inv2_systolic == a.invariants.inv2_systolic);
        CHECK(b.invariants.inv2_diastolic == a.invariants.inv2_diastolic);
        CHECK(b.chi_hat == a.chi_hat);
        CHECK(b.n_chi == a.n_chi);
        // Not part of the table: left at their defaults.
        CHECK(b.invariants.direct_inv1 == 0.0);
        CHECK(b.invariants.residual2 == 0.0);
        CHECK(b.invariants.n_s_effective == 0);
    }

    const auto p2 = tmp_path("beats_resaved.csv");
    save_beat_records_csv(p2, loaded);
    CHECK(read_file(p) == read_file(p2));
}

TEST_CASE("beat tables insist on the exact schema") {
    std::string good = read_file(tmp_path("beats.csv"));

    auto tampered = good;
    tampered.replace(tampered.find("pi_ms"), 5, "pi");
    auto msg = error_text(
        [&] { load_beat_records_csv(write_file("beats_bad_hdr.csv", tampered)); });
    CHECK(contains(msg, "expected header"));

    auto short_row = good;
    short_row = short_row.substr(0, short_row.rfind(',')) + "\n";
    msg = error_text([&] {
        load_beat_records_csv(write_file("beats_short_row.csv", short_row));
    });
    CHECK(contains(msg, ":4:"));
    CHECK(contains(msg, "expected 16 columns"));

    auto frac = good;
    frac.replace(frac.find("\n0,"), 3, "\n0.5,");
    msg = error_text(
        [&] { load_beat_records_csv(write_file("beats_frac.csv", frac)); });
    CHECK(contains(msg, "beat index"));

    CHECK_THROWS_AS(
        load_beat_records_csv(write_file("beats_empty.csv", "# nothing\n")),
        input_error);
}

TEST_CASE("the documented default config parses back to the defaults") {
    const auto p = write_file("default.cfg", default_run_config_text());
    const RunConfig rc = load_run_config(p);
    const RunConfig ref;
    CHECK(rc.chi.mode == ref.chi.mode);
    CHECK(rc.chi.target_n == ref.chi.target_n);
    CHECK(rc.chi.mse_tolerance == ref.chi.mse_tolerance);
    CHECK(rc.chi.chi_min == ref.chi.chi_min);
    CHECK(rc.chi.chi_max == ref.chi.chi_max);
    CHECK(rc.chi.max_iterations == ref.chi.max_iterations);
    CHECK(rc.n_s == ref.n_s);
    CHECK(rc.segmentation.threshold_fraction ==
          ref.segmentation.threshold_fraction);
    CHECK(rc.segmentation.refractory_s == ref.segmentation.refractory_s);
    CHECK(rc.segmentation.foot_lookback_s == ref.segmentation.foot_lookback_s);
    CHECK(rc.segmentation.min_samples == ref.segmentation.min_samples);
    CHECK(rc.annotations_path.empty());
    CHECK(rc.predictor == Predictor::Lambda1);
    CHECK(rc.output_dir == ".");
    CHECK(rc.seed == 1);
    CHECK(rc.rate_hz == 0.0);
}

TEST_CASE("config overrides and rejections") {
    const auto p = write_file("override.cfg",
                              "chi_mode = fixed_n\n"
                              "chi_target_n = 5\n"
                              "predictor= sbp\n"
                              "seed = 123456789012345\n"
                              "rate_hz = 250\n"
                              "seg_min_samples = 32\n"
                              "annotations = feet.csv\n"
                              "output_dir = out/run3\n");
    const RunConfig rc = load_run_config(p);
    CHECK(rc.chi.mode == ChiMode::FixedComponentCount);
    CHECK(rc.chi.target_n == 5);
    CHECK(rc.predictor == Predictor::SBP);
    CHECK(rc.seed == 123456789012345ull);
    CHECK(rc.rate_hz == 250.0);
    CHECK(rc.segmentation.min_samples == 32);
    CHECK(rc.annotations_path == "feet.csv");
    CHECK(rc.output_dir == "out/run3");

    auto msg = error_text(
        [&] { load_run_config(write_file("bad1.cfg", "foo = 1\n")); });
    CHECK(contains(msg, ":1:"));
    CHECK(contains(msg, "unknown key 'foo'"));

    msg = error_text(
        [&] { load_run_config(write_file("bad2.cfg", "chi_mode = banana\n")); });
    CHECK(contains(msg, "chi_mode"));

    msg = error_text([&] { load_run_config(write_file("bad3.cfg", "n_s =\n")); });
    CHECK(contains(msg, "empty value"));

    msg = error_text(
        [&] { load_run_config(write_file("bad4.cfg", "just text\n")); });
    CHECK(contains(msg, "key = value"));

    msg = error_text([&] {
        load_run_config(write_file("bad5.cfg", "seg_refractory_s = fast\n"));
    });
    CHECK(contains(msg, "seg_refractory_s"));
}

TEST_CASE("cli exit codes map the error taxonomy") {
    std::string out, err;
    CHECK(call_cli({"--version"}, &out) == 0);
    CHECK(contains(out, "sbsa 1.0.0"));

    CHECK(call_cli({"--dump-config"}, &out) == 0);
    CHECK(out == default_run_config_text());

    CHECK(call_cli({}, &out, &err) == 2); // a subcommand is required

    CHECK(call_cli({"decompose", "--input", tmp_path("missing_input.csv")},
                   &out, &err) == 2);
    CHECK(contains(err, "cannot open"));

    // Two data rows pair into too few lagged points for a regression.
    std::vector<BeatRecord> two = {sample_record(0), sample_record(1)};
    const auto beats2 = tmp_path("beats_two.csv");
    save_beat_records_csv(beats2, two);
    const auto outdir = tmp_path("brs_out");
    CHECK(call_cli({"brs", "--input", beats2, "-o", outdir}, &out, &err) == 4);
    CHECK(contains(err, "error:"));

    CHECK(call_cli({"synth"}, &out, &err) == 2); // no --kappas, no --abp
}
