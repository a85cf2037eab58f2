#pragma once

#include <algorithm>
#include <string>

#include "windsim/common.hpp"
#include "windsim/structural.hpp"

namespace windsim {

struct ControlCommand {
    double generator_torque = 0.0;  // N m
    double blade_pitch = 0.0;       // radians
};

// Optimal mode gain K = pi * rho * R^5 * Cp / (2 * lambda^3), rotor side.
inline double compute_k(double rho, double tip_radius, double cp_max, double lambda_opt) {
    if (!(rho > 0.0) || !(tip_radius > 0.0) || !(cp_max > 0.0) || !(lambda_opt > 0.0))
        throw ConfigError("compute_k: all inputs must be positive");
    const double r5 = tip_radius * tip_radius * tip_radius * tip_radius * tip_radius;
    return kPi * rho * r5 * cp_max / (2.0 * lambda_opt * lambda_opt * lambda_opt);
}

struct BtcParams {
    double k_rotor = 0.0;      // optimal mode gain, rotor side (N m s^2/rad^2)
    double gear_ratio = 1.0;   // N
    double omega_g_min = 0.0;  // rad/s, cut-in generator speed
    double omega_g_max = 0.0;  // rad/s
    double t_g_max = 0.0;      // N m
    double pitch = 0.0;        // commanded blade pitch beta0 (radians)

    void validate() const {
        if (!(k_rotor > 0.0)) throw ConfigError("btc: k_rotor must be positive");
        if (!(gear_ratio >= 1.0)) throw ConfigError("btc: gear ratio must be >= 1");
        if (!(omega_g_min < omega_g_max))
            throw ConfigError("btc: require omega_g_min < omega_g_max");
        if (!(t_g_max > 0.0)) throw ConfigError("btc: t_g_max must be positive");
    }
};

// Region-2 K*omega^2 torque law: tau_g = K * omega_r^2 / N, zero below the
// cut-in speed, hard-clamped at t_g_max.
inline ControlCommand btc_step(const BtcParams& params, double omega_g) {
    ControlCommand cmd;
    cmd.blade_pitch = params.pitch;
    if (omega_g < params.omega_g_min) return cmd;
    const double omega_r = omega_g / params.gear_ratio;
    const double raw = params.k_rotor * omega_r * omega_r / params.gear_ratio;
    cmd.generator_torque = std::clamp(raw, 0.0, params.t_g_max);
    return cmd;
}

struct Measurements {
    double omega_g = 0.0;       // rad/s
    double thrust = 0.0;        // N
    double wind_estimate = 0.0; // m/s
};

// Pluggable controller surface; implementations must be deterministic
// functions of their inputs.
class Controller {
public:
    virtual ~Controller() = default;
    virtual ControlCommand command(const TurbineState& state, const Measurements& m) const = 0;
    virtual std::string name() const = 0;
};

class BaselineTorqueController final : public Controller {
public:
    explicit BaselineTorqueController(BtcParams params) : params_(params) {
        params_.validate();
    }
    ControlCommand command(const TurbineState&, const Measurements& m) const override {
        return btc_step(params_, m.omega_g);
    }
    std::string name() const override { return "btc"; }
    const BtcParams& params() const { return params_; }

private:
    BtcParams params_;
};

// Fixed-command test controller.
class ConstantTorqueController final : public Controller {
public:
    ConstantTorqueController(double torque, double pitch) : torque_(torque), pitch_(pitch) {
        if (!(torque >= 0.0)) throw ConfigError("constant_torque: torque must be >= 0");
    }
    ControlCommand command(const TurbineState&, const Measurements&) const override {
        return {torque_, pitch_};
    }
    std::string name() const override { return "constant_torque"; }

private:
    double torque_;
    double pitch_;
};

}  // namespace windsim
