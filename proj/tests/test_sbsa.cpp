#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sbsa/errors.hpp"
#include "sbsa/signal.hpp"
#include "sbsa/spectral.hpp"
#include "sbsa/transform.hpp"

using namespace sbsa;

namespace {

Signal sech2_signal(double half_width, double dt, double scale = 1.0) {
    const std::size_t m = static_cast<std::size_t>(std::lround(2.0 * half_width / dt)) + 1;
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = -half_width + dt * static_cast<double>(i);
        const double c = std::cosh(t);
        y[i] = scale / (c * c);
    }
    return make_signal(std::move(y), dt, -half_width);
}

double plain_integral(const Signal& s) {
    double acc = 0.0;
    for (double v : s.samples) acc += v;
    return acc * s.dt;
}

} // namespace

TEST_CASE("reconstruction of a reflectionless signal recovers it") {
    const Signal y = sech2_signal(15.0, 0.01);
    const SpectralDecomposition d = negative_spectrum(discretize_operator(y, 6.0));
    REQUIRE(d.count() == 2);
    const Signal r = reconstruct(d);
    REQUIRE(r.samples.size() == y.samples.size());
    CHECK(r.dt == y.dt);
    CHECK(r.t0 == y.t0);
    CHECK(relative_mse(y, r) <= 1e-6); // relative L2 error 1e-3
    for (double v : r.samples) CHECK(v >= 0.0);
}

TEST_CASE("reconstruction formula on a hand-built decomposition") {
    // kappa = 1, psi = sech(t)/sqrt(2), chi = 2 -> y_chi = sech^2(t)
    const double dt = 0.01, half = 10.0;
    const std::size_t m = static_cast<std::size_t>(std::lround(2.0 * half / dt)) + 1;
    SpectralDecomposition d;
    d.chi = 2.0;
    d.dt = dt;
    d.t0 = -half;
    d.signal_length = m;
    d.kappas = {1.0};
    d.eigenfunctions.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = -half + dt * static_cast<double>(i);
        d.eigenfunctions[i] = 1.0 / (std::cosh(t) * std::sqrt(2.0));
    }
    const Signal r = reconstruct(d);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = -half + dt * static_cast<double>(i);
        const double c = std::cosh(t);
        CHECK(r.samples[i] == doctest::Approx(1.0 / (c * c)).epsilon(1e-12));
    }
}

TEST_CASE("empty decomposition reconstructs to zero") {
    SpectralDecomposition d;
    d.chi = 3.0;
    d.dt = 0.01;
    d.signal_length = 100;
    const Signal r = reconstruct(d);
    REQUIRE(r.samples.size() == 100);
    for (double v : r.samples) CHECK(v == 0.0);
}

TEST_CASE("soliton components sum to the reconstruction bit for bit") {
    const Signal y = sech2_signal(15.0, 0.01);
    const SpectralDecomposition d = negative_spectrum(discretize_operator(y, 20.0));
    REQUIRE(d.count() == 4);
    const Signal r = reconstruct(d);
    Signal acc = soliton_component(d, 1);
    for (std::size_t n = 2; n <= d.count(); ++n) {
        const Signal c = soliton_component(d, n);
        for (std::size_t i = 0; i < acc.samples.size(); ++i)
            acc.samples[i] += c.samples[i];
    }
    CHECK(std::memcmp(acc.samples.data(), r.samples.data(),
                      r.samples.size() * sizeof(double)) == 0);
}

TEST_CASE("component integrals follow 4 kappa_n / chi") {
    const Signal y = sech2_signal(15.0, 0.01);
    const SpectralDecomposition d = negative_spectrum(discretize_operator(y, 6.0));
    REQUIRE(d.count() == 2);
    CHECK(plain_integral(soliton_component(d, 1)) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-3));
    CHECK(plain_integral(soliton_component(d, 2)) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-3));
    CHECK_THROWS_AS(soliton_component(d, 0), std::out_of_range);
    CHECK_THROWS_AS(soliton_component(d, 3), std::out_of_range);
}

TEST_CASE("relative_mse basics") {
    const Signal y = sech2_signal(5.0, 0.05);
    CHECK(relative_mse(y, y) == 0.0);
    Signal z = y;
    for (double& v : z.samples) v *= 1.01; // error 1% of amplitude everywhere
    CHECK(relative_mse(y, z) == doctest::Approx(1e-4).epsilon(1e-6));
    Signal shorter = make_signal({1.0, 2.0, 3.0}, 0.05);
    CHECK_THROWS_AS(relative_mse(y, shorter), input_error);
    Signal zero = make_signal(std::vector<double>(y.samples.size(), 0.0), 0.05);
    CHECK_THROWS_AS(relative_mse(zero, y), input_error);
}

TEST_CASE("chi selection: fixed component count") {
    const Signal y = sech2_signal(15.0, 0.01);
    ChiSelectionConfig cfg;
    cfg.mode = ChiMode::FixedComponentCount;
    cfg.target_n = 2;
    const SbsaResult r = select_chi(y, cfg);
    CHECK(r.converged);
    CHECK(r.decomposition.count() == 2);
    CHECK(r.chi_hat > 2.0);
    CHECK(r.chi_hat <= 6.0);
    // smallest bracketing chi: slightly below the returned value the count drops
    CHECK(count_negative_eigenvalues(y, r.chi_hat) == 2);
    CHECK(count_negative_eigenvalues(y, r.chi_hat * (1.0 - 3e-6)) < 2);

    cfg.target_n = 4;
    const SbsaResult r4 = select_chi(y, cfg);
    CHECK(r4.decomposition.count() == 4);
    CHECK(r4.chi_hat > 12.0);
    CHECK(r4.chi_hat <= 20.0);
}

TEST_CASE("chi selection: error target") {
    const Signal y = sech2_signal(15.0, 0.01);
    ChiSelectionConfig cfg; // defaults: ErrorTarget, 1e-3
    const SbsaResult r = select_chi(y, cfg);
    CHECK(r.converged);
    CHECK(r.relative_mse <= 1e-3);
    CHECK(r.decomposition.count() >= 1);
    CHECK(relative_mse(y, r.reconstruction) == r.relative_mse);

    // unreachable tolerance: flagged, best effort still returned
    ChiSelectionConfig tight;
    tight.mse_tolerance = 1e-30;
    tight.chi_max = 2.0;
    tight.max_iterations = 30;
    const SbsaResult b = select_chi(y, tight);
    CHECK_FALSE(b.converged);
    CHECK(b.relative_mse > 1e-30);
    CHECK(b.chi_hat <= 2.0);
}

TEST_CASE("chi selection input errors") {
    const Signal y = sech2_signal(8.0, 0.02);
    ChiSelectionConfig cfg;

    Signal zero = make_signal(std::vector<double>(301, 0.0), 0.02);
    CHECK_THROWS_AS(select_chi(zero, cfg), input_error);

    Signal neg = y;
    neg.samples[10] = -0.5;
    CHECK_THROWS_AS(select_chi(neg, cfg), input_error);

    ChiSelectionConfig bad = cfg;
    bad.chi_min = 5.0;
    bad.chi_max = 1.0;
    CHECK_THROWS_AS(select_chi(y, bad), input_error);

    bad = cfg;
    bad.mode = ChiMode::FixedComponentCount;
    bad.target_n = 0;
    CHECK_THROWS_AS(select_chi(y, bad), input_error);

    bad = cfg;
    bad.mse_tolerance = 0.0;
    CHECK_THROWS_AS(select_chi(y, bad), input_error);

    // more components than the grid can hold
    ChiSelectionConfig huge = cfg;
    huge.mode = ChiMode::FixedComponentCount;
    huge.target_n = 100000;
    CHECK_THROWS_AS(select_chi(y, huge), input_error);
}

TEST_CASE("phase split partitions the reconstruction") {
    const Signal y = sech2_signal(15.0, 0.01);
    const SpectralDecomposition d = negative_spectrum(discretize_operator(y, 6.0));
    REQUIRE(d.count() == 2);
    const Signal r = reconstruct(d);

    const PhaseSplit p0 = split_phases(d, 0);
    for (double v : p0.systolic.samples) CHECK(v == 0.0);
    CHECK(std::memcmp(p0.diastolic.samples.data(), r.samples.data(),
                      r.samples.size() * sizeof(double)) == 0);

    const PhaseSplit p2 = split_phases(d, 2);
    for (double v : p2.diastolic.samples) CHECK(v == 0.0);
    CHECK(std::memcmp(p2.systolic.samples.data(), r.samples.data(),
                      r.samples.size() * sizeof(double)) == 0);

    const PhaseSplit p1 = split_phases(d, 1);
    CHECK(p1.n_s == 1);
    CHECK(plain_integral(p1.systolic) == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
    CHECK(plain_integral(p1.diastolic) == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        CHECK(p1.systolic.samples[i] >= 0.0);
        CHECK(p1.diastolic.samples[i] >= 0.0);
    }

    // the grouped-order sum is the beat-level reconstruction: total() is that
    // sum by definition, and it agrees with the one-pass sum to rounding
    const Signal tot = p1.total();
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        CHECK(tot.samples[i] == p1.systolic.samples[i] + p1.diastolic.samples[i]);
        CHECK(tot.samples[i] == doctest::Approx(r.samples[i]).epsilon(1e-13).scale(1.0));
    }

    CHECK_THROWS_AS(split_phases(d, 3), std::out_of_range);
}

TEST_CASE("reflectionless synthesis: single soliton closed form") {
    const double dt = 0.002, half = 10.0;
    const std::size_t m = static_cast<std::size_t>(std::lround(2.0 * half / dt)) + 1;
    Signal grid = make_signal(std::vector<double>(m, 0.0), dt, -half);

    const Signal s = synthesize_reflectionless({1.0}, {std::sqrt(2.0)}, grid);
    double max_err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = -half + dt * static_cast<double>(i);
        const double c = std::cosh(x);
        max_err = std::max(max_err, std::fabs(s.samples[i] - 2.0 / (c * c)));
    }
    CHECK(max_err <= 1e-6);

    // scaling the norming constant translates the profile: c = sqrt(2) e^{-1}
    const Signal sh = synthesize_reflectionless({1.0}, {std::sqrt(2.0) * std::exp(-1.0)}, grid);
    max_err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = -half + dt * static_cast<double>(i) - 1.0;
        const double c = std::cosh(x);
        max_err = std::max(max_err, std::fabs(sh.samples[i] - 2.0 / (c * c)));
    }
    CHECK(max_err <= 1e-6);
}

TEST_CASE("balanced norming constants center the profile") {
    const auto c1 = balanced_norming_constants({1.0});
    CHECK(c1[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    const auto c21 = balanced_norming_constants({2.0, 1.0});
    CHECK(c21[0] == doctest::Approx(std::sqrt(12.0)).epsilon(1e-15));
    CHECK(c21[1] == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));

    // kappas {2,1} with balanced constants give exactly 6 sech^2(x)
    const double dt = 0.002, half = 10.0;
    const std::size_t m = static_cast<std::size_t>(std::lround(2.0 * half / dt)) + 1;
    Signal grid = make_signal(std::vector<double>(m, 0.0), dt, -half);
    const Signal s = synthesize_reflectionless({2.0, 1.0}, c21, grid);
    double max_err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = -half + dt * static_cast<double>(i);
        const double c = std::cosh(x);
        max_err = std::max(max_err, std::fabs(s.samples[i] - 6.0 / (c * c)));
    }
    CHECK(max_err <= 5e-6);
}

TEST_CASE("synthesis round trip is a fixed point of the transform") {
    const double dt = 0.01, half = 20.0;
    const std::size_t m = static_cast<std::size_t>(std::lround(2.0 * half / dt)) + 1;
    Signal grid = make_signal(std::vector<double>(m, 0.0), dt, -half);
    const std::vector<double> kappas = {1.7, 0.9, 0.4};
    const Signal v =
        synthesize_reflectionless(kappas, balanced_norming_constants(kappas), grid);

    const SpectralDecomposition d = negative_spectrum(discretize_operator(v, 1.0));
    REQUIRE(d.count() == 3);
    for (std::size_t n = 0; n < 3; ++n)
        CHECK(d.kappas[n] == doctest::Approx(kappas[n]).epsilon(1e-3));
    CHECK(relative_mse(v, reconstruct(d)) <= 1e-4);
}

TEST_CASE("synthesis input validation") {
    Signal grid = make_signal(std::vector<double>(201, 0.0), 0.05, -5.0);
    CHECK_THROWS_AS(synthesize_reflectionless({1.0, 2.0}, {1.0, 1.0}, grid),
                    std::domain_error); // ascending
    CHECK_THROWS_AS(synthesize_reflectionless({1.0, 1.0}, {1.0, 1.0}, grid),
                    std::domain_error); // tied
    CHECK_THROWS_AS(synthesize_reflectionless({2.0, 1.0}, {1.0, -1.0}, grid),
                    std::domain_error); // nonpositive norming
    CHECK_THROWS_AS(synthesize_reflectionless({2.0, 1.0}, {1.0}, grid), input_error);
    CHECK_THROWS_AS(synthesize_reflectionless({}, {}, grid), std::domain_error);
    CHECK_THROWS_AS(balanced_norming_constants({1.0, 1.0}), std::domain_error);
}
