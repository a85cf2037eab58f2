#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "windsim/blade.hpp"
#include "windsim/common.hpp"
#include "windsim/flow_field.hpp"

namespace windsim {

// NREL-5MW reference values used as config defaults.
namespace nrel5mw {
inline constexpr double kGeneratorInertia = 534.116;     // kg m^2
inline constexpr double kRotorInertia = 35444067.0;      // kg m^2
inline constexpr double kGearRatio = 97.0;
inline constexpr double kGeneratorEfficiency = 0.9440;
inline constexpr double kOmegaGMin = 41.6470;            // rad/s
inline constexpr double kOmegaGMax = 159.7824;           // rad/s
inline constexpr double kOmegaGRated = 122.9096;         // rad/s
inline constexpr double kTGMax = 4.3094e4;               // N m
inline constexpr double kCpMax = 0.4868;
inline constexpr double kLambdaOpt = 7.6;
inline constexpr double kTowerF1 = 0.3240;               // Hz
inline constexpr double kTowerD1 = 0.01;
// top-mass lumping: nacelle + hub + 3 blades
inline constexpr double kTowerMass = 240000.0 + 56780.0 + 3.0 * 17848.77;  // kg
inline constexpr double kHubHeight = 87.5;               // m
inline constexpr double kRatedWind = 11.4;               // m/s
inline constexpr double kCutInWind = 3.0;                // m/s
inline constexpr double kCutOutWind = 25.0;              // m/s
}  // namespace nrel5mw

struct SimConfig {
    // grid
    int nx = 60, ny = 40, nz = 30;
    double dx = 10.0, dy = 10.0, dz = 10.0;
    Vec3 origin;
    double rho = 1.225;
    double kernel_sigma = 0.0;   // 0 -> max grid spacing
    double kernel_cutoff = 0.0;  // 0 -> 3 * sigma

    // inflow
    std::string inflow_mode = "uniform";
    double inflow_speed = 8.0;
    double shear_v_ref = 8.0;
    double shear_z_ref = nrel5mw::kHubHeight;
    double shear_exponent = 0.14;
    std::string inflow_file;

    // turbine
    std::string blade_file;
    Vec3 hub{150.0, 200.0, 150.0};
    double hub_height = nrel5mw::kHubHeight;  // metadata echoed into outputs
    double rated_wind = nrel5mw::kRatedWind;
    double cut_in_wind = nrel5mw::kCutInWind;
    double cut_out_wind = nrel5mw::kCutOutWind;
    double yaw = 0.0;                         // radians
    int n_radial = 20;
    int n_azimuthal = 36;
    double pitch = 0.0;                       // radians
    double omega_g0 = 93.0;                   // rad/s
    double prescribed_omega_r = 0.0;          // rad/s, run.mode = prescribed

    // structural
    double generator_inertia = nrel5mw::kGeneratorInertia;
    double rotor_inertia = nrel5mw::kRotorInertia;
    double gear_ratio = nrel5mw::kGearRatio;
    double efficiency = nrel5mw::kGeneratorEfficiency;
    double tower_f1 = nrel5mw::kTowerF1;
    double tower_d1 = nrel5mw::kTowerD1;
    double tower_mass = nrel5mw::kTowerMass;
    bool tower_coupling = true;

    // control
    std::string controller = "btc";
    double k_rotor = 0.0;  // 0 -> derive from cp_max / lambda_opt
    double cp_max = nrel5mw::kCpMax;
    double lambda_opt = nrel5mw::kLambdaOpt;
    double omega_g_min = nrel5mw::kOmegaGMin;
    double omega_g_max = nrel5mw::kOmegaGMax;
    double t_g_max = nrel5mw::kTGMax;
    double constant_torque = 0.0;

    // run
    std::string mode = "coupled";  // coupled | prescribed
    double dt = 0.02;
    double t_end = 180.0;
    double spin_up = 0.0;
    double output_cadence = 1.0;
    std::string output_dir = "out";
    long seed = 0;  // reserved for stochastic inflow extensions
    bool write_checkpoint = false;

    // snapshots emitted during the run
    std::vector<double> snapshot_times;
    std::string snapshot_plane = "z:auto";  // axis:index, index "auto" = hub plane
    std::string snapshot_component = "speed";

    double resolved_sigma() const {
        return kernel_sigma > 0.0 ? kernel_sigma : std::max({dx, dy, dz});
    }
    double resolved_cutoff() const {
        return kernel_cutoff > 0.0 ? kernel_cutoff : 3.0 * resolved_sigma();
    }
};

struct ValidationResult {
    SimConfig config;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

namespace detail {

class KeyValueFile {
public:
    explicit KeyValueFile(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path.string());
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string s = strip_line(line);
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                errors.push_back(path.string() + ":" + std::to_string(lineno) +
                                 ": expected 'key = value'");
                continue;
            }
            const std::string key = trim(s.substr(0, eq));
            const std::string val = trim(s.substr(eq + 1));
            if (key.empty() || val.empty()) {
                errors.push_back(path.string() + ":" + std::to_string(lineno) +
                                 ": empty key or value");
                continue;
            }
            if (values_.count(key))
                warnings.push_back("duplicate key '" + key + "' (last value wins)");
            values_[key] = val;
        }
    }

    std::optional<std::string> raw(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        consumed_.insert(key);
        return it->second;
    }

    void get(const std::string& key, double& out) {
        const auto r = raw(key);
        if (!r) return;
        try {
            std::size_t used = 0;
            out = std::stod(*r, &used);
            if (used != r->size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            errors.push_back("key '" + key + "': expected a number, got '" + *r + "'");
        }
    }
    void get(const std::string& key, int& out) {
        double d = out;
        const std::size_t before = errors.size();
        get(key, d);
        if (errors.size() != before) return;
        out = static_cast<int>(d);
        if (static_cast<double>(out) != d)
            errors.push_back("key '" + key + "': expected an integer");
    }
    void get(const std::string& key, long& out) {
        double d = static_cast<double>(out);
        const std::size_t before = errors.size();
        get(key, d);
        if (errors.size() != before) return;
        out = static_cast<long>(d);
    }
    void get(const std::string& key, std::string& out) {
        const auto r = raw(key);
        if (r) out = *r;
    }
    void get(const std::string& key, bool& out) {
        const auto r = raw(key);
        if (!r) return;
        if (*r == "on" || *r == "true" || *r == "1") out = true;
        else if (*r == "off" || *r == "false" || *r == "0") out = false;
        else errors.push_back("key '" + key + "': expected on/off");
    }
    void get_list(const std::string& key, std::vector<double>& out) {
        const auto r = raw(key);
        if (!r) return;
        out.clear();
        std::istringstream iss(*r);
        std::string tok;
        while (std::getline(iss, tok, ',')) {
            try {
                out.push_back(std::stod(trim(tok)));
            } catch (const std::exception&) {
                errors.push_back("key '" + key + "': expected comma-separated numbers");
                return;
            }
        }
    }
    // resolves a path value relative to the config file's directory
    void get_path(const std::string& key, std::string& out) {
        const auto r = raw(key);
        if (!r) return;
        std::filesystem::path p(*r);
        if (p.is_relative()) p = path_.parent_path() / p;
        out = p.string();
    }

    void warn_unconsumed() {
        for (const auto& [key, _] : values_)
            if (!consumed_.count(key)) warnings.push_back("unknown key '" + key + "' ignored");
    }

    std::vector<std::string> errors;
    std::vector<std::string> warnings;

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t");
        return s.substr(b, e - b + 1);
    }
    std::filesystem::path path_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

}  // namespace detail

// Parses and validates a scenario config. Collects every violated
// constraint instead of stopping at the first; unknown keys become
// warnings, never silent ignores.
inline ValidationResult validate_config(const std::filesystem::path& path) {
    ValidationResult res;
    detail::KeyValueFile kv(path);
    SimConfig& c = res.config;

    kv.get("grid.nx", c.nx);
    kv.get("grid.ny", c.ny);
    kv.get("grid.nz", c.nz);
    kv.get("grid.dx", c.dx);
    kv.get("grid.dy", c.dy);
    kv.get("grid.dz", c.dz);
    kv.get("grid.origin_x", c.origin.x);
    kv.get("grid.origin_y", c.origin.y);
    kv.get("grid.origin_z", c.origin.z);
    kv.get("flow.rho", c.rho);
    kv.get("flow.kernel_sigma", c.kernel_sigma);
    kv.get("flow.kernel_cutoff", c.kernel_cutoff);

    kv.get("inflow.mode", c.inflow_mode);
    kv.get("inflow.speed", c.inflow_speed);
    kv.get("inflow.v_ref", c.shear_v_ref);
    kv.get("inflow.z_ref", c.shear_z_ref);
    kv.get("inflow.exponent", c.shear_exponent);
    kv.get_path("inflow.file", c.inflow_file);

    kv.get_path("turbine.blade_file", c.blade_file);
    kv.get("turbine.hub_x", c.hub.x);
    kv.get("turbine.hub_y", c.hub.y);
    kv.get("turbine.hub_z", c.hub.z);
    kv.get("turbine.hub_height", c.hub_height);
    kv.get("turbine.rated_wind", c.rated_wind);
    kv.get("turbine.cut_in_wind", c.cut_in_wind);
    kv.get("turbine.cut_out_wind", c.cut_out_wind);
    double yaw_deg = rad2deg(c.yaw);
    kv.get("turbine.yaw_deg", yaw_deg);
    c.yaw = deg2rad(yaw_deg);
    kv.get("turbine.n_radial", c.n_radial);
    kv.get("turbine.n_azimuthal", c.n_azimuthal);
    double pitch_deg = rad2deg(c.pitch);
    kv.get("turbine.pitch_deg", pitch_deg);
    c.pitch = deg2rad(pitch_deg);
    kv.get("turbine.omega_g0", c.omega_g0);
    kv.get("turbine.prescribed_omega_r", c.prescribed_omega_r);

    kv.get("drivetrain.generator_inertia", c.generator_inertia);
    kv.get("drivetrain.rotor_inertia", c.rotor_inertia);
    kv.get("drivetrain.gear_ratio", c.gear_ratio);
    kv.get("drivetrain.efficiency", c.efficiency);
    kv.get("tower.f1", c.tower_f1);
    kv.get("tower.d1", c.tower_d1);
    kv.get("tower.mass", c.tower_mass);
    kv.get("tower.coupling", c.tower_coupling);

    kv.get("control.name", c.controller);
    kv.get("control.k_rotor", c.k_rotor);
    kv.get("control.cp_max", c.cp_max);
    kv.get("control.lambda_opt", c.lambda_opt);
    kv.get("control.omega_g_min", c.omega_g_min);
    kv.get("control.omega_g_max", c.omega_g_max);
    kv.get("control.t_g_max", c.t_g_max);
    kv.get("control.constant_torque", c.constant_torque);

    kv.get("run.mode", c.mode);
    kv.get("run.dt", c.dt);
    kv.get("run.t_end", c.t_end);
    kv.get("run.spin_up", c.spin_up);
    kv.get("run.output_cadence", c.output_cadence);
    kv.get("run.output_dir", c.output_dir);
    kv.get("run.seed", c.seed);
    kv.get("run.write_checkpoint", c.write_checkpoint);

    kv.get_list("output.snapshot_times", c.snapshot_times);
    kv.get("output.snapshot_plane", c.snapshot_plane);
    kv.get("output.snapshot_component", c.snapshot_component);

    kv.warn_unconsumed();
    res.errors = kv.errors;
    res.warnings = kv.warnings;
    auto err = [&res](const std::string& m) { res.errors.push_back(m); };

    // grid
    if (c.nx < 2 || c.ny < 2 || c.nz < 2) err("grid dims must all be >= 2");
    if (!(c.dx > 0.0) || !(c.dy > 0.0) || !(c.dz > 0.0)) err("grid spacing must be positive");
    if (!(c.rho > 0.0)) err("flow.rho must be positive");
    if (c.kernel_sigma < 0.0) err("flow.kernel_sigma must be >= 0 (0 = auto)");
    if (c.kernel_cutoff < 0.0) err("flow.kernel_cutoff must be >= 0 (0 = auto)");
    if (c.kernel_cutoff > 0.0 && c.kernel_cutoff < 3.0 * c.resolved_sigma())
        err("flow.kernel_cutoff must be >= 3 * kernel sigma");

    // run settings
    if (!(c.dt > 0.0)) err("run.dt must be positive");
    if (c.spin_up < 0.0) err("run.spin_up must be >= 0");
    if (!(c.t_end >= c.spin_up)) err("run.t_end must be >= run.spin_up");
    if (c.output_cadence < c.dt) err("run.output_cadence must be >= run.dt");
    if (c.mode != "coupled" && c.mode != "prescribed")
        err("run.mode must be 'coupled' or 'prescribed'");
    if (c.mode == "prescribed" && !(c.prescribed_omega_r > 0.0))
        err("run.mode=prescribed requires turbine.prescribed_omega_r > 0");
    if (c.dt > 0.0) {
        auto off_grid = [&](double v) {
            return std::abs(v / c.dt - std::round(v / c.dt)) > 1e-9;
        };
        if (off_grid(c.output_cadence))
            res.warnings.push_back("run.output_cadence is not a multiple of run.dt; "
                                   "records use the nearest step");
        if (off_grid(c.t_end) || off_grid(c.spin_up))
            res.warnings.push_back("run.t_end/run.spin_up are not multiples of run.dt; "
                                   "they round to the nearest step");
        for (double ts : c.snapshot_times)
            if (off_grid(ts) || ts <= 0.0 || ts > c.t_end)
                res.warnings.push_back("snapshot time " + std::to_string(ts) +
                                       " is off the step grid or outside (0, t_end]");
    }

    // inflow
    double ref_speed = 0.0;
    if (c.inflow_mode == "uniform") {
        if (!(c.inflow_speed >= 0.0)) err("inflow.speed must be >= 0");
        ref_speed = c.inflow_speed;
    } else if (c.inflow_mode == "power_law_shear") {
        if (!(c.shear_z_ref > 0.0)) err("inflow.z_ref must be positive");
        if (c.shear_exponent < 0.0) err("inflow.exponent must be >= 0");
        ref_speed = c.shear_v_ref;
    } else if (c.inflow_mode == "file_replay") {
        if (c.inflow_file.empty()) {
            err("inflow.mode=file_replay requires inflow.file");
        } else {
            try {
                const InflowSource src = load_inflow_frames(c.inflow_file);
                if (src.plane_ny != c.ny || src.plane_nz != c.nz)
                    err("inflow file plane dims do not match grid (ny, nz)");
                if (src.plane_dy != c.dy || src.plane_dz != c.dz)
                    err("inflow file plane spacing does not match grid (dy, dz)");
                for (const auto& fr : src.frames)
                    for (std::size_t m = 0; m < fr.u.size(); ++m)
                        ref_speed = std::max(ref_speed, std::abs(fr.u[m]));
            } catch (const Error& e) {
                err(e.what());
            }
        }
    } else {
        err("inflow.mode must be uniform, power_law_shear or file_replay");
    }
    if (ref_speed > 0.0 && c.dt > 0.0 && c.dx > 0.0) {
        const double cfl = ref_speed * c.dt / std::min({c.dx, c.dy, c.dz});
        if (cfl > 1.0)
            err("inflow speed violates the CFL condition at run.dt (CFL = " +
                std::to_string(cfl) + ")");
        else if (cfl > 0.8)
            res.warnings.push_back("inflow CFL at run.dt is " + std::to_string(cfl) +
                                   "; leaves little headroom for the wake");
    }

    // structural / control ranges
    if (!(c.generator_inertia > 0.0) || !(c.rotor_inertia > 0.0))
        err("drivetrain inertias must be positive");
    if (!(c.gear_ratio >= 1.0)) err("drivetrain.gear_ratio must be >= 1");
    if (!(c.efficiency > 0.0 && c.efficiency <= 1.0))
        err("drivetrain.efficiency must be in (0, 1]");
    if (!(c.tower_f1 > 0.0)) err("tower.f1 must be positive");
    if (!(c.tower_d1 >= 0.0 && c.tower_d1 < 1.0)) err("tower.d1 must be in [0, 1)");
    if (!(c.tower_mass > 0.0)) err("tower.mass must be positive");
    if (c.controller == "btc") {
        if (c.k_rotor < 0.0) err("control.k_rotor must be >= 0 (0 = derive)");
        if (c.k_rotor == 0.0 && (!(c.cp_max > 0.0) || !(c.lambda_opt > 0.0)))
            err("deriving control.k_rotor requires positive control.cp_max and control.lambda_opt");
        if (!(c.omega_g_min < c.omega_g_max))
            err("control.omega_g_min must be < control.omega_g_max");
        if (!(c.t_g_max > 0.0)) err("control.t_g_max must be positive");
    } else if (c.controller == "constant_torque") {
        if (c.constant_torque < 0.0) err("control.constant_torque must be >= 0");
    } else {
        err("unknown controller '" + c.controller + "' (expected btc or constant_torque)");
    }
    if (!(c.omega_g0 >= 0.0)) err("turbine.omega_g0 must be >= 0");
    if (c.n_radial < 2) err("turbine.n_radial must be >= 2");
    if (c.n_azimuthal < 4) err("turbine.n_azimuthal must be >= 4");
    if (!(c.cut_in_wind < c.rated_wind && c.rated_wind < c.cut_out_wind))
        err("require turbine.cut_in_wind < rated_wind < cut_out_wind");

    // snapshot plan
    if (c.snapshot_component != "u" && c.snapshot_component != "v" &&
        c.snapshot_component != "w" && c.snapshot_component != "speed")
        err("output.snapshot_component must be u, v, w or speed");
    {
        const auto colon = c.snapshot_plane.find(':');
        const std::string axis =
            colon == std::string::npos ? c.snapshot_plane : c.snapshot_plane.substr(0, colon);
        bool good_index = colon != std::string::npos;
        if (good_index) {
            const std::string idx = c.snapshot_plane.substr(colon + 1);
            good_index = idx == "auto" || (!idx.empty() &&
                         idx.find_first_not_of("0123456789") == std::string::npos);
        }
        if ((axis != "x" && axis != "y" && axis != "z") || !good_index)
            err("output.snapshot_plane must be '<x|y|z>:<index|auto>'");
    }

    // blade + disk geometry; skipped if earlier grid errors make them moot
    if (c.blade_file.empty()) {
        err("turbine.blade_file is required");
    } else if (c.nx >= 2 && c.ny >= 2 && c.nz >= 2 && c.dx > 0.0 && c.dy > 0.0 && c.dz > 0.0 &&
               c.n_radial >= 2 && c.n_azimuthal >= 4) {
        try {
            const BladeDefinition blade = load_blade(c.blade_file);
            const double cutoff = c.resolved_cutoff();
            const Vec3 lo = c.origin;
            const Vec3 hi{c.origin.x + (c.nx - 1) * c.dx, c.origin.y + (c.ny - 1) * c.dy,
                          c.origin.z + (c.nz - 1) * c.dz};
            const double margin = cutoff + std::max({c.dx, c.dy, c.dz});
            if (c.hub.x - margin < lo.x || c.hub.x + margin > hi.x || c.hub.y - margin < lo.y ||
                c.hub.y + margin > hi.y || c.hub.z - margin < lo.z || c.hub.z + margin > hi.z)
                err("hub position must be at least cutoff_radius + one cell from every grid boundary");
            const DiskGeometry disk =
                build_disk(blade, c.hub, c.yaw, c.n_radial, c.n_azimuthal);
            for (const DiskPoint& p : disk.points) {
                if (p.position.x - cutoff < lo.x || p.position.x + cutoff > hi.x ||
                    p.position.y - cutoff < lo.y || p.position.y + cutoff > hi.y ||
                    p.position.z - cutoff < lo.z || p.position.z + cutoff > hi.z) {
                    err("actuator disk does not fit in the grid with the kernel cutoff margin");
                    break;
                }
            }
        } catch (const Error& e) {
            err(e.what());
        }
    }

    return res;
}

// Loads a config or throws a ConfigError carrying the full error list.
inline SimConfig load_sim_config(const std::filesystem::path& path) {
    ValidationResult res = validate_config(path);
    if (!res.ok()) {
        std::string msg = "invalid config " + path.string() + ":";
        for (const auto& e : res.errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return res.config;
}

}  // namespace windsim
