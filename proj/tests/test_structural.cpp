#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "windsim/structural.hpp"

using namespace windsim;

TEST_CASE("drive train equivalent inertia") {
    SECTION("NREL-5MW arithmetic") {
        const DriveTrain d = DriveTrain::build(534.116, 35444067.0, 97.0, 0.944);
        // independent route: J = J_g + J_r / N^2
        const double expected = 534.116 + 35444067.0 / (97.0 * 97.0);
        CHECK(d.equivalent_inertia == Catch::Approx(expected).epsilon(1e-12));
        CHECK(d.equivalent_inertia == Catch::Approx(4301.15468636412).epsilon(1e-9));
    }
    SECTION("invalid inputs") {
        CHECK_THROWS_AS(DriveTrain::build(-1.0, 1.0, 97.0, 0.9), ConfigError);
        CHECK_THROWS_AS(DriveTrain::build(1.0, 1.0, 0.5, 0.9), ConfigError);
        CHECK_THROWS_AS(DriveTrain::build(1.0, 1.0, 97.0, 1.5), ConfigError);
    }
}

TEST_CASE("step_drivetrain") {
    const DriveTrain d = DriveTrain::build(100.0, 500.0, 10.0, 1.0);  // J = 105
    TurbineState s;
    s.omega_g = 50.0;

    SECTION("equilibrium leaves the speed unchanged") {
        // T_r / N = T_g
        CHECK(step_drivetrain(0.25, s, 10000.0, 1000.0, d) == 50.0);
    }
    SECTION("unit net torque integrates at the expected rate") {
        // T_r = N*T_g + J*N gives net generator-side torque J, so
        // d(omega)/dt = 1 rad/s^2
        const double tr = 10.0 * 1000.0 + d.equivalent_inertia * 10.0;
        CHECK(step_drivetrain(1.0, s, tr, 1000.0, d) == Catch::Approx(51.0).epsilon(1e-12));
    }
    SECTION("clamps at zero") {
        s.omega_g = 0.001;
        CHECK(step_drivetrain(1.0, s, 0.0, 1e6, d) == 0.0);
    }
}

TEST_CASE("build_tower derives stiffness and damping") {
    SECTION("unit natural frequency") {
        const TowerModel t = build_tower(1.0 / kTwoPi, 0.0, 1.0);
        CHECK(t.stiffness == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(t.damping == 0.0);
    }
    SECTION("NREL-5MW values") {
        const double mass = 240000.0 + 56780.0 + 3.0 * 17848.77;
        const TowerModel t = build_tower(0.3240, 0.01, mass);
        CHECK(mass == Catch::Approx(350326.31).epsilon(1e-12));
        CHECK(t.stiffness == Catch::Approx(mass * std::pow(kTwoPi * 0.3240, 2)).epsilon(1e-12));
        CHECK(t.stiffness == Catch::Approx(1451852.5503364904).epsilon(1e-9));
        CHECK(t.damping == Catch::Approx(14263.550001643656).epsilon(1e-9));
    }
    SECTION("critical damping excluded") {
        CHECK_THROWS_AS(build_tower(0.3, 1.0, 1000.0), ConfigError);
        CHECK_THROWS_AS(build_tower(-0.1, 0.01, 1000.0), ConfigError);
    }
}

namespace {

struct Decay {
    std::vector<double> x;
    std::vector<double> t;
};

Decay free_decay(const TowerModel& tower, double x0, double dt, double t_end) {
    TurbineState s;
    s.x_t = x0;
    Decay out;
    for (double t = 0.0; t < t_end; t += dt) {
        out.x.push_back(s.x_t);
        out.t.push_back(t);
        const TowerStep ts = step_tower(dt, s, 0.0, tower);
        s.x_t = ts.x;
        s.v_t = ts.v;
        s.a_t = ts.a;
    }
    return out;
}

// damped frequency from the mean period between upward zero crossings
double measure_frequency(const Decay& d) {
    std::vector<double> crossings;
    for (std::size_t i = 1; i < d.x.size(); ++i)
        if (d.x[i - 1] < 0.0 && d.x[i] >= 0.0) {
            const double f = d.x[i - 1] / (d.x[i - 1] - d.x[i]);
            crossings.push_back(d.t[i - 1] + f * (d.t[i] - d.t[i - 1]));
        }
    REQUIRE(crossings.size() >= 3);
    const double period =
        (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    return 1.0 / period;
}

}  // namespace

TEST_CASE("tower free decay recovers the damped natural frequency") {
    const TowerModel tower = build_tower(0.3240, 0.01, 350326.31);
    const Decay d = free_decay(tower, 0.1, 0.002, 30.0);
    const double f_expected = 0.3240 * std::sqrt(1.0 - 0.01 * 0.01);
    CHECK(measure_frequency(d) == Catch::Approx(f_expected).epsilon(0.01));
}

TEST_CASE("tower free decay amplitude follows the log decrement") {
    const TowerModel tower = build_tower(0.3240, 0.01, 350326.31);
    const Decay d = free_decay(tower, 0.1, 0.002, 40.0);
    // peak amplitudes, one per period
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < d.x.size(); ++i)
        if (d.x[i] > d.x[i - 1] && d.x[i] >= d.x[i + 1]) peaks.push_back(d.x[i]);
    REQUIRE(peaks.size() >= 4);
    const double expected = std::exp(-kTwoPi * 0.01 / std::sqrt(1.0 - 0.0001));
    for (std::size_t i = 1; i < 4; ++i)
        CHECK(peaks[i] / peaks[i - 1] == Catch::Approx(expected).epsilon(0.05));
}

TEST_CASE("tower mechanical energy decays monotonically under damping") {
    const TowerModel tower = build_tower(0.5, 0.02, 1000.0);
    TurbineState s;
    s.x_t = 0.2;
    auto energy = [&](const TurbineState& st) {
        return 0.5 * tower.mass * st.v_t * st.v_t + 0.5 * tower.stiffness * st.x_t * st.x_t;
    };
    double prev = energy(s);
    for (int i = 0; i < 4000; ++i) {
        const TowerStep ts = step_tower(0.002, s, 0.0, tower);
        s.x_t = ts.x;
        s.v_t = ts.v;
        const double e = energy(s);
        CHECK(e <= prev * (1.0 + 1e-12));
        prev = e;
    }
}

TEST_CASE("steady thrust settles at the static deflection") {
    const TowerModel tower = build_tower(0.3240, 0.05, 350326.31);
    TurbineState s;
    const double thrust = 4.0e5;
    for (int i = 0; i < 200000; ++i) {
        const TowerStep ts = step_tower(0.002, s, thrust, tower);
        s.x_t = ts.x;
        s.v_t = ts.v;
    }
    CHECK(s.x_t == Catch::Approx(thrust / tower.stiffness).epsilon(1e-6));
    CHECK(std::abs(s.v_t) < 1e-9);
}

TEST_CASE("tower integrator converges at first order") {
    const TowerModel tower = build_tower(0.3240, 0.01, 350326.31);
    auto endpoint = [&](double dt) {
        TurbineState s;
        s.x_t = 0.1;
        const int n = static_cast<int>(std::round(10.0 / dt));
        for (int i = 0; i < n; ++i) {
            const TowerStep ts = step_tower(dt, s, 0.0, tower);
            s.x_t = ts.x;
            s.v_t = ts.v;
        }
        return s.x_t;
    };
    const double ref = endpoint(0.02 / 64.0);
    const double e1 = std::abs(endpoint(0.02) - ref);
    const double e2 = std::abs(endpoint(0.01) - ref);
    const double order = std::log2(e1 / e2);
    CHECK(order > 0.8);
    CHECK(order < 1.2);
}

TEST_CASE("drive-train energy bookkeeping") {
    const DriveTrain d = DriveTrain::build(534.116, 35444067.0, 97.0, 1.0);

    SECTION("zero-order-hold torque balances to rounding noise") {
        // torque held constant within each step, exactly the coupling regime;
        // the trapezoidal work integral then matches delta-KE identically
        TurbineState s;
        s.omega_g = 80.0;
        const double dt = 0.02, tg = 2.0e4;
        double work = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double tr = 2.2e6 + 4.0e5 * std::sin(0.8 * i * dt);  // ZOH per step
            const double w0 = s.omega_g;
            s.omega_g = step_drivetrain(dt, s, tr, tg, d);
            work += dt * (tr / d.gear_ratio - tg) * 0.5 * (w0 + s.omega_g);
        }
        const double ke0 = 0.5 * d.equivalent_inertia * 80.0 * 80.0;
        const double ke1 = 0.5 * d.equivalent_inertia * s.omega_g * s.omega_g;
        CHECK(ke1 - ke0 == Catch::Approx(work).epsilon(1e-10));
    }

    SECTION("residual against continuous torque shrinks at the nominal order") {
        // sampling a continuously varying torque makes the balance an O(dt)
        // statement, the explicit integrator's global order
        auto residual = [&](double dt) {
            TurbineState s;
            s.omega_g = 80.0;
            const double tg = 2.0e4;
            double work = 0.0;
            const int n = static_cast<int>(std::round(20.0 / dt));
            auto torque = [](double t) { return 2.2e6 + 4.0e5 * std::sin(0.8 * t); };
            for (int i = 0; i < n; ++i) {
                const double w0 = s.omega_g;
                s.omega_g = step_drivetrain(dt, s, torque(i * dt), tg, d);
                // trapezoid over the continuous integrand samples
                work += dt * 0.5 *
                        ((torque(i * dt) / d.gear_ratio - tg) * w0 +
                         (torque((i + 1) * dt) / d.gear_ratio - tg) * s.omega_g);
            }
            const double ke0 = 0.5 * d.equivalent_inertia * 80.0 * 80.0;
            const double ke1 = 0.5 * d.equivalent_inertia * s.omega_g * s.omega_g;
            return std::abs(ke1 - ke0 - work);
        };
        const double order = std::log2(residual(0.02) / residual(0.01));
        CHECK(order > 0.8);
        CHECK(order < 1.4);
    }
}
