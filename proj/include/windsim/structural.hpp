#pragma once

#include <algorithm>
#include <cmath>

#include "windsim/common.hpp"

namespace windsim {

// Single-shaft drive train: rotor and generator lumped through the gearbox,
// J is the equivalent inertia at the generator shaft.
struct DriveTrain {
    double generator_inertia = 0.0;  // J_g (kg m^2)
    double rotor_inertia = 0.0;      // J_r (kg m^2)
    double gear_ratio = 1.0;         // N
    double efficiency = 1.0;         // generator efficiency
    double equivalent_inertia = 0.0; // J = J_g + J_r / N^2

    static DriveTrain build(double j_g, double j_r, double gear_ratio, double efficiency) {
        if (!(j_g > 0.0) || !(j_r > 0.0))
            throw ConfigError("drivetrain: inertias must be positive");
        if (!(gear_ratio >= 1.0)) throw ConfigError("drivetrain: gear ratio must be >= 1");
        if (!(efficiency > 0.0 && efficiency <= 1.0))
            throw ConfigError("drivetrain: efficiency must be in (0, 1]");
        DriveTrain d;
        d.generator_inertia = j_g;
        d.rotor_inertia = j_r;
        d.gear_ratio = gear_ratio;
        d.efficiency = efficiency;
        d.equivalent_inertia = j_g + j_r / (gear_ratio * gear_ratio);
        return d;
    }
};

// Tower first fore-aft bending mode as a mass-damper-spring system.
// K_T and B_T are derived from the natural frequency and damping ratio.
struct TowerModel {
    double mass = 0.0;       // M_T (kg)
    double damping = 0.0;    // B_T (N s/m)
    double stiffness = 0.0;  // K_T (N/m)
    double f1 = 0.0;         // first fore-aft natural frequency (Hz)
    double d1 = 0.0;         // damping ratio
};

inline TowerModel build_tower(double f1, double d1, double mass) {
    if (!(f1 > 0.0)) throw ConfigError("tower: natural frequency must be positive");
    if (!(d1 >= 0.0 && d1 < 1.0)) throw ConfigError("tower: damping ratio must be in [0, 1)");
    if (!(mass > 0.0)) throw ConfigError("tower: mass must be positive");
    TowerModel t;
    t.mass = mass;
    t.f1 = f1;
    t.d1 = d1;
    const double omega_n = kTwoPi * f1;
    t.stiffness = mass * omega_n * omega_n;
    t.damping = 2.0 * d1 * std::sqrt(t.stiffness * mass);
    return t;
}

struct TurbineState {
    double omega_g = 0.0;  // generator speed (rad/s)
    double x_t = 0.0;      // tower-top fore-aft displacement (m)
    double v_t = 0.0;      // tower-top fore-aft velocity (m/s)
    double a_t = 0.0;      // tower-top fore-aft acceleration (m/s^2)
    double t = 0.0;        // simulation time (s)
};

// One explicit Euler step of J * d(omega_g)/dt = T_r/N - T_g.
// omega_g is clamped at zero; the shipped scenarios never stall but a
// pathological config must not drive the shaft backwards.
inline double step_drivetrain(double dt, const TurbineState& state, double rotor_torque,
                              double generator_torque, const DriveTrain& drive) {
    const double accel =
        (rotor_torque / drive.gear_ratio - generator_torque) / drive.equivalent_inertia;
    return std::max(0.0, state.omega_g + dt * accel);
}

// One semi-implicit (symplectic) Euler step of
// M_T x'' + B_T x' + K_T x = thrust. Returns (x, v, a) at the new state.
struct TowerStep {
    double x = 0.0;
    double v = 0.0;
    double a = 0.0;
};

inline TowerStep step_tower(double dt, const TurbineState& state, double thrust,
                            const TowerModel& tower) {
    TowerStep out;
    const double accel = (thrust - tower.damping * state.v_t - tower.stiffness * state.x_t) /
                         tower.mass;
    out.v = state.v_t + dt * accel;
    out.x = state.x_t + dt * out.v;
    out.a = (thrust - tower.damping * out.v - tower.stiffness * out.x) / tower.mass;
    return out;
}

}  // namespace windsim
