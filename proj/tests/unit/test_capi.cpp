#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bangbang/bangbang.h"

namespace {

const double kTwoPi = 6.283185307179586;

struct Osc {
    bb_oscillator* p = nullptr;
    explicit Osc(double trap) { REQUIRE(bb_oscillator_create(39.962042283, trap, 729e-9, M_PI / 4, &p) == BB_OK); }
    ~Osc() { bb_oscillator_destroy(p); }
};

}  // namespace

TEST_CASE("version and status strings") {
    CHECK(std::string(bb_version()) == "0.1.0");
    CHECK(std::string(bb_status_name(BB_OK)) == "ok");
    CHECK(bb_exit_code(BB_OK) == 0);
    CHECK(bb_exit_code(BB_ERR_CONFIG) == 1);
    CHECK(bb_exit_code(BB_ERR_DOMAIN) == 1);
    CHECK(bb_exit_code(BB_ERR_NUMERICAL) == 2);
    CHECK(bb_exit_code(BB_ERR_CONVERGENCE) == 2);
}

TEST_CASE("oscillator handle") {
    Osc osc(kTwoPi * 2.3505e6);
    double x0 = 0, eta = 0, a = 0;
    CHECK(bb_oscillator_ground_state_extent(osc.p, &x0) == BB_OK);
    CHECK(bb_oscillator_lamb_dicke(osc.p, &eta) == BB_OK);
    CHECK(bb_displacement_alpha(osc.p, 75e-9, &a) == BB_OK);
    CHECK(x0 == doctest::Approx(7.33e-9).epsilon(1e-3));
    CHECK(eta == doctest::Approx(0.0447).epsilon(1e-3));
    CHECK(a == doctest::Approx(75e-9 / (2 * x0)));
    CHECK(bb_displacement_alpha(osc.p, -1.0, &a) == BB_ERR_DOMAIN);
    CHECK(std::string(bb_last_error()).find("non-negative") != std::string::npos);
    bb_oscillator* bad = reinterpret_cast<bb_oscillator*>(0x1);
    CHECK(bb_oscillator_create(40.0, -1.0, 729e-9, 0.5, &bad) == BB_ERR_DOMAIN);
    CHECK(bad == nullptr);
    CHECK(bb_oscillator_lamb_dicke(nullptr, &eta) == BB_ERR_NULL);
    bb_oscillator_destroy(nullptr);
}

TEST_CASE("scalar functions") {
    double v = 0;
    CHECK(bb_laguerre(1, 0, 0.5, &v) == BB_OK);
    CHECK(v == doctest::Approx(0.5));
    CHECK(bb_bessel_j(0, 0.0, &v) == BB_OK);
    CHECK(v == 1.0);
    CHECK(bb_residual_alpha(5.11, M_PI / 1e7, 1e7, &v) == BB_OK);
    CHECK(v == doctest::Approx(10.22));
    CHECK(bb_rabi_frequency(0, 5, 0.044, kTwoPi * 204.3e3, &v) == BB_OK);
    CHECK(M_PI / v == doctest::Approx(160.0).epsilon(0.03));
    CHECK(bb_rabi_frequency(1, -2, 0.044, 1.0, &v) == BB_ERR_DOMAIN);
    CHECK(bb_parse_quantity("2.3505 MHz", BB_ANGULAR_FREQUENCY, &v) == BB_OK);
    CHECK(v == doctest::Approx(kTwoPi * 2.3505e6));
    CHECK(bb_parse_quantity("2.3505 nm", BB_ANGULAR_FREQUENCY, &v) == BB_ERR_CONFIG);
    CHECK(bb_laguerre(400, 400, 1e6, &v) == BB_ERR_NUMERICAL);
}

TEST_CASE("distribution handle") {
    bb_distribution* d = nullptr;
    REQUIRE(bb_distribution_displaced_thermal(0.2, 5.11, 1e-10, &d) == BB_OK);
    bb_distribution* o = nullptr;
    REQUIRE(bb_distribution_matrix_oracle(0.2, 5.11, 128, &o) == BB_OK);
    int64_t lo = -1, hi = -1;
    CHECK(bb_distribution_range(d, &lo, &hi) == BB_OK);
    size_t count = 0;
    CHECK(bb_distribution_weights(d, nullptr, 0, &count) == BB_ERR_BUFFER);
    CHECK(count == static_cast<size_t>(hi - lo + 1));
    std::vector<double> w(count), wo(128);
    CHECK(bb_distribution_weights(d, w.data(), w.size(), &count) == BB_OK);
    CHECK(bb_distribution_weights(o, wo.data(), wo.size(), nullptr) == BB_OK);
    double worst = 0;
    for (size_t i = 0; i < count; ++i) worst = std::max(worst, std::abs(w[i] - wo[static_cast<size_t>(lo) + i]));
    CHECK(worst < 1e-9);
    double mean = 0, var = 0, mass = 0;
    CHECK(bb_distribution_moments(d, &mean, &var, &mass) == BB_OK);
    CHECK(mean == doctest::Approx(0.2 + 5.11 * 5.11).epsilon(1e-8));
    CHECK(mass >= 1 - 1e-10);
    bb_distribution_destroy(d);
    bb_distribution_destroy(o);
    CHECK(bb_distribution_displaced_thermal(0.2, 1.0, 0.5, &d) == BB_ERR_DOMAIN);
}

TEST_CASE("Stark and mean Rabi through the C API") {
    bb_stark_env env;
    bb_stark_env_default(&env);
    CHECK(env.enabled == 1);
    CHECK(env.sum_cutoff == 20);
    CHECK(env.delta_secondary == doctest::Approx(kTwoPi * 25.74e6));
    double shift = 0;
    CHECK(bb_ac_stark_shift(0, 1, &env, 0.044, kTwoPi * 211e3, kTwoPi * 2.35e6, &shift) == BB_OK);
    CHECK(shift < 0.0);
    env.convention = BB_STARK_AS_PRINTED;
    CHECK(bb_ac_stark_shift(0, 1, &env, 0.044, kTwoPi * 211e3, kTwoPi * 2.35e6, &shift) == BB_OK);
    CHECK(std::abs(shift) < 1e-3 * kTwoPi * 211e3);
    env.sum_cutoff = 2;
    CHECK(bb_ac_stark_shift(0, 1, &env, 0.044, 1.0, 1.0, &shift) == BB_ERR_DOMAIN);
    bb_stark_env_default(&env);
    env.enabled = 0;
    Osc osc(kTwoPi * 2.35e6);
    bb_drive drive{2, kTwoPi * 218e3, 0.0, 0.0};
    double mr = 0, om = 0, eta = 0;
    bb_oscillator_lamb_dicke(osc.p, &eta);
    CHECK(bb_mean_rabi(osc.p, 0.0, 0.0, &drive, &env, &mr) == BB_OK);
    bb_rabi_frequency(0, 2, eta, drive.rabi0, &om);
    CHECK(mr == doctest::Approx(om).epsilon(1e-13));
}

TEST_CASE("trace handle and spectrum peak") {
    Osc osc(kTwoPi * 2.35e6);
    bb_sequence seq{};
    seq.x_d = 200e-9;
    seq.hold_periods = 1;
    seq.trigger_exact_period = 1;
    seq.probe_phase = BB_PROBE_WHILE_DISPLACED;
    seq.nbar_th = 0.21;
    seq.drive = {0, kTwoPi * 205e3, 0.0, 0.0};
    bb_stark_env_default(&seq.env);
    std::vector<double> t;
    for (int i = 0; i < 197; ++i) t.push_back(1.4e-6 + 0.4e-6 * i);
    bb_trace* a = nullptr;
    bb_trace* b = nullptr;
    REQUIRE(bb_trace_simulate(osc.p, &seq, t.data(), t.size(), 1000, 42, &a) == BB_OK);
    REQUIRE(bb_trace_simulate(osc.p, &seq, t.data(), t.size(), 1000, 42, &b) == BB_OK);
    size_t n = 0;
    CHECK(bb_trace_size(a, &n) == BB_OK);
    CHECK(n == t.size());
    std::vector<double> pa(n), pb(n), sa(n);
    CHECK(bb_trace_data(a, nullptr, pa.data(), sa.data(), n) == BB_OK);
    CHECK(bb_trace_data(b, nullptr, pb.data(), nullptr, n) == BB_OK);
    CHECK(pa == pb);
    CHECK(bb_trace_data(a, nullptr, pa.data(), nullptr, n - 1) == BB_ERR_BUFFER);
    double center = 0, sc = 0, width = 0, mr = 0;
    CHECK(bb_trace_spectrum_peak(a, 8, 1, 10, &center, &sc, &width) == BB_OK);
    double alpha = 0;
    bb_displacement_alpha(osc.p, 200e-9, &alpha);
    CHECK(bb_mean_rabi(osc.p, 0.21, alpha, &seq.drive, &seq.env, &mr) == BB_OK);
    CHECK(center == doctest::Approx(mr).epsilon(0.01));
    CHECK(sc > 0);
    bb_trace_destroy(a);
    bb_trace_destroy(b);
    seq.hold_periods = 0;
    CHECK(bb_trace_simulate(osc.p, &seq, t.data(), t.size(), 0, 1, &a) == BB_ERR_DOMAIN);
    CHECK(a == nullptr);
}

TEST_CASE("commands through the C API") {
    const auto dir = std::filesystem::temp_directory_path() / "bangbang_capi_test";
    std::filesystem::create_directories(dir);
    const auto cfg = (dir / "cfg.json").string();
    {
        std::ofstream out(cfg);
        out << R"({"drive": {"sideband": 0, "rabi0": {"value": 205, "unit": "kHz"}},
  "sequence": {"x_d": {"value": 0.5, "unit": "um"}, "probe_phase": "while_displaced", "hold_periods": 1,
               "trigger_exact_period": true, "nbar_th": 0.21},
  "probe_times": {"start": {"value": 0, "unit": "us"}, "stop": {"value": 80, "unit": "us"}, "count": 201},
  "shots": 1000, "seed": 3,
  "fit": {"model": "detuned", "parameters": {"rabi0": {"value": 205, "unit": "kHz"}, "alpha": {"value": 30, "float": true},
          "nbar": {"value": 0.21}, "detune_off": {"value": 0, "unit": "kHz"}}}})";
    }
    const auto data = (dir / "trace.csv").string();
    bb_run_options opt{};
    opt.min_probe_time = 1.4e-6;
    REQUIRE(bb_cmd_simulate(cfg.c_str(), data.c_str(), &opt) == BB_OK);
    CHECK(std::string(bb_last_summary()).find("197 rows") != std::string::npos);
    const auto report = (dir / "report.json").string();
    CHECK(bb_cmd_fit(cfg.c_str(), data.c_str(), report.c_str(), nullptr) == BB_OK);
    CHECK(std::filesystem::exists(report));
    const auto spec = (dir / "spec.csv").string();
    bb_spectrum_options so{8, 1, -1};
    CHECK(bb_cmd_spectrum(nullptr, data.c_str(), spec.c_str(), &so) == BB_OK);
    CHECK(bb_cmd_simulate(cfg.c_str(), nullptr, nullptr) == BB_ERR_CONFIG);
    CHECK(std::string(bb_last_error()).find("output") != std::string::npos);
    CHECK(bb_cmd_reproduce("fig9", dir.string().c_str(), nullptr) == BB_ERR_CONFIG);
    CHECK(bb_cmd_simulate(nullptr, nullptr, nullptr) == BB_ERR_NULL);
    std::filesystem::remove_all(dir);
}
