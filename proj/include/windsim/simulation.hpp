#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "windsim/actuator_disk.hpp"
#include "windsim/blade.hpp"
#include "windsim/common.hpp"
#include "windsim/config.hpp"
#include "windsim/control.hpp"
#include "windsim/flow_field.hpp"
#include "windsim/structural.hpp"

namespace windsim {

// One row of the emitted time series; the plotted channels.
struct TimeSeriesRecord {
    double t = 0.0;        // s
    double v_hub = 0.0;    // inflow speed at hub height (m/s)
    double p_r = 0.0;      // rotor aerodynamic power (W)
    double p_g = 0.0;      // generator electrical power (W)
    double t_g = 0.0;      // commanded generator torque (N m)
    double omega_g = 0.0;  // rad/s
    double thrust = 0.0;   // N
    double x_t = 0.0;      // m
    double v_fa = 0.0;     // m/s
    double a_fa = 0.0;     // m/s^2
};

inline constexpr const char* kTimeSeriesHeader =
    "t_s,V_hub_mps,P_r_W,P_g_W,T_g_Nm,omega_g_radps,thrust_N,x_T_m,V_fa_mps,A_fa_mps2";

struct StepReport {
    std::int64_t step = 0;
    double t = 0.0;
    double cfl = 0.0;
    double momentum_residual = 0.0;   // |flow_delta + force*dt| / |force*dt|
    double kernel_norm_raw_min = 0.0; // truncated-kernel mass before renormalization
    double kernel_norm_raw_max = 0.0;
    double wall_ms = 0.0;
};

inline constexpr const char* kDiagnosticsHeader =
    "step,t_s,cfl,momentum_residual,kernel_norm_raw_min,kernel_norm_raw_max,wall_ms";

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace detail

// Field snapshot: CSV of one component on one grid plane. The header row
// carries the column coordinates, each data row starts with its own.
inline void write_snapshot(const FlowField& f, char axis, int index,
                           const std::string& component, std::ostream& os) {
    if (component != "u" && component != "v" && component != "w" && component != "speed")
        throw ConfigError("write_snapshot: component must be u, v, w or speed");
    auto value = [&](int i, int j, int k) {
        const std::size_t id = f.idx(i, j, k);
        if (component == "u") return f.u[id];
        if (component == "v") return f.v[id];
        if (component == "w") return f.w[id];
        return std::sqrt(f.u[id] * f.u[id] + f.v[id] * f.v[id] + f.w[id] * f.w[id]);
    };
    int n_col = 0, n_row = 0;
    double d_col = 0.0, d_row = 0.0, o_col = 0.0, o_row = 0.0;
    std::string col_name, row_name;
    if (axis == 'x') {
        if (index < 0 || index >= f.nx) throw ConfigError("write_snapshot: plane index out of range");
        n_col = f.ny; d_col = f.dy; o_col = f.origin.y; col_name = "y_m";
        n_row = f.nz; d_row = f.dz; o_row = f.origin.z; row_name = "z_m";
    } else if (axis == 'y') {
        if (index < 0 || index >= f.ny) throw ConfigError("write_snapshot: plane index out of range");
        n_col = f.nx; d_col = f.dx; o_col = f.origin.x; col_name = "x_m";
        n_row = f.nz; d_row = f.dz; o_row = f.origin.z; row_name = "z_m";
    } else if (axis == 'z') {
        if (index < 0 || index >= f.nz) throw ConfigError("write_snapshot: plane index out of range");
        n_col = f.nx; d_col = f.dx; o_col = f.origin.x; col_name = "x_m";
        n_row = f.ny; d_row = f.dy; o_row = f.origin.y; row_name = "y_m";
    } else {
        throw ConfigError("write_snapshot: axis must be x, y or z");
    }
    os << row_name << '\\' << col_name;
    for (int c = 0; c < n_col; ++c) os << ',' << detail::fmt_double(o_col + c * d_col);
    os << '\n';
    for (int r = 0; r < n_row; ++r) {
        os << detail::fmt_double(o_row + r * d_row);
        for (int c = 0; c < n_col; ++c) {
            double val = 0.0;
            if (axis == 'x') val = value(index, c, r);
            else if (axis == 'y') val = value(c, index, r);
            else val = value(c, r, index);
            os << ',' << detail::fmt_double(val);
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Checkpoint (binary dump of the full dynamic state)
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'W', 'S', 'C', 'H', 'K', '0', '0', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace detail

struct Checkpoint {
    FlowField field;
    TurbineState state;
    double held_torque = 0.0;
    double t = 0.0;
};

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
    detail::put(os, c.field.nx);
    detail::put(os, c.field.ny);
    detail::put(os, c.field.nz);
    detail::put(os, c.field.dx);
    detail::put(os, c.field.dy);
    detail::put(os, c.field.dz);
    detail::put(os, c.field.origin);
    detail::put(os, c.field.rho);
    detail::put(os, c.t);
    detail::put(os, c.state);
    detail::put(os, c.held_torque);
    const std::streamsize n = static_cast<std::streamsize>(c.field.size() * sizeof(double));
    os.write(reinterpret_cast<const char*>(c.field.u.data()), n);
    os.write(reinterpret_cast<const char*>(c.field.v.data()), n);
    os.write(reinterpret_cast<const char*>(c.field.w.data()), n);
    if (!os) throw IoError("checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::string(magic, 8) != std::string(detail::kCheckpointMagic, 8))
        throw IoError("not a windsim checkpoint: " + path);
    Checkpoint c;
    int nx = 0, ny = 0, nz = 0;
    double dx = 0.0, dy = 0.0, dz = 0.0, rho = 0.0;
    Vec3 origin;
    detail::get(is, nx);
    detail::get(is, ny);
    detail::get(is, nz);
    detail::get(is, dx);
    detail::get(is, dy);
    detail::get(is, dz);
    detail::get(is, origin);
    detail::get(is, rho);
    detail::get(is, c.t);
    detail::get(is, c.state);
    detail::get(is, c.held_torque);
    c.field = FlowField::make(nx, ny, nz, dx, dy, dz, origin, rho);
    const std::streamsize n = static_cast<std::streamsize>(c.field.size() * sizeof(double));
    is.read(reinterpret_cast<char*>(c.field.u.data()), n);
    is.read(reinterpret_cast<char*>(c.field.v.data()), n);
    is.read(reinterpret_cast<char*>(c.field.w.data()), n);
    if (!is) throw IoError("truncated checkpoint: " + path);
    return c;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

// Owns the coupled system and advances it with the fixed step order:
// advect -> sample -> relative velocity -> loads/aggregates -> sources ->
// tower -> drive train -> controller. The controller output is held for the
// next step (zero-order hold).
class Simulation {
public:
    explicit Simulation(SimConfig cfg) : cfg_(std::move(cfg)) {
        blade_ = load_blade(cfg_.blade_file);
        field_ = FlowField::make(cfg_.nx, cfg_.ny, cfg_.nz, cfg_.dx, cfg_.dy, cfg_.dz,
                                 cfg_.origin, cfg_.rho);
        disk_ = build_disk(blade_, cfg_.hub, cfg_.yaw, cfg_.n_radial, cfg_.n_azimuthal);
        kernel_.sigma = cfg_.resolved_sigma();
        kernel_.cutoff_radius = cfg_.resolved_cutoff();
        applicator_ = std::make_unique<SourceApplicator>(field_, disk_, kernel_);
        inflow_ = make_inflow();
        drive_ = DriveTrain::build(cfg_.generator_inertia, cfg_.rotor_inertia, cfg_.gear_ratio,
                                   cfg_.efficiency);
        tower_ = build_tower(cfg_.tower_f1, cfg_.tower_d1, cfg_.tower_mass);
        controller_ = make_controller();

        fill_from_inflow(field_, inflow_, 0.0);
        state_.omega_g = cfg_.mode == "prescribed"
                             ? cfg_.prescribed_omega_r * drive_.gear_ratio
                             : cfg_.omega_g0;
        if (cfg_.mode == "coupled")
            held_torque_ = controller_->command(state_, measurements()).generator_torque;
    }

    const SimConfig& config() const { return cfg_; }
    const BladeDefinition& blade() const { return blade_; }
    const DiskGeometry& disk() const { return disk_; }
    const FlowField& field() const { return field_; }
    FlowField& field() { return field_; }
    const TurbineState& state() const { return state_; }
    const RotorAggregates& aggregates() const { return agg_; }
    const PointLoads& loads() const { return loads_; }
    double time() const { return t_; }
    double held_torque() const { return held_torque_; }
    std::int64_t step_count() const { return n_steps_; }
    void set_threads(int n) { threads_ = n > 0 ? n : 1; }

    double omega_r() const {
        return cfg_.mode == "prescribed" ? cfg_.prescribed_omega_r
                                         : state_.omega_g / drive_.gear_ratio;
    }

    // Inflow reference speed at hub height at the current time (upstream
    // probe, unaffected by the disk).
    double hub_wind_speed() const {
        return inflow_sample(inflow_, field_, t_, cfg_.hub.y, cfg_.hub.z).norm();
    }

    // Disk-averaged axial wind from the last evaluated step.
    double mean_axial() const { return mean_axial_wind(disk_, loads_); }

    TimeSeriesRecord record() const {
        TimeSeriesRecord r;
        r.t = t_;
        r.v_hub = hub_wind_speed();
        r.p_r = agg_.power;
        r.t_g = held_torque_;
        r.omega_g = state_.omega_g;
        r.p_g = drive_.efficiency * held_torque_ * state_.omega_g;
        r.thrust = agg_.thrust;
        r.x_t = state_.x_t;
        r.v_fa = state_.v_t;
        r.a_fa = state_.a_t;
        return r;
    }

    StepReport step() {
        const auto wall0 = std::chrono::steady_clock::now();
        const double dt = cfg_.dt;
        const double t_new = static_cast<double>(n_steps_ + 1) * dt;

        // (1) advect with the inflow boundary
        const CflReport cfl = advect(field_, inflow_, t_new, dt, ws_, threads_);

        // (2)-(4) sample wind, relative velocities, loads and aggregates
        const double w_r = omega_r();
        const double tower_vel = cfg_.tower_coupling ? state_.v_t : 0.0;
        compute_loads(
            disk_, blade_, [this](const Vec3& p) { return sample_velocity(field_, p); }, w_r,
            tower_vel, cfg_.pitch, field_.rho, loads_);
        agg_ = aggregate(disk_, loads_, w_r);

        // (5) momentum sources
        const MomentumExchange ex = applicator_->apply(field_, disk_, loads_, dt);

        // (6) tower
        if (cfg_.tower_coupling) {
            const TowerStep ts = step_tower(dt, state_, agg_.thrust, tower_);
            state_.x_t = ts.x;
            state_.v_t = ts.v;
            state_.a_t = ts.a;
        }

        // (7)-(8) drive train with the held torque, then the next command
        if (cfg_.mode == "coupled") {
            state_.omega_g = step_drivetrain(dt, state_, agg_.torque, held_torque_, drive_);
            held_torque_ = controller_->command(state_, measurements()).generator_torque;
        }

        ++n_steps_;
        t_ = static_cast<double>(n_steps_) * dt;
        state_.t = t_;

        StepReport rep;
        rep.step = n_steps_;
        rep.t = t_;
        rep.cfl = cfl.max_cfl();
        const Vec3 expected = ex.force * dt;
        const double scale = std::max(expected.norm(), 1e-30);
        rep.momentum_residual = (ex.flow_delta + expected).norm() / scale;
        rep.kernel_norm_raw_min = ex.raw_norm_min;
        rep.kernel_norm_raw_max = ex.raw_norm_max;
        if (!std::isfinite(agg_.power) || !std::isfinite(agg_.thrust) ||
            !std::isfinite(state_.omega_g) || !std::isfinite(state_.v_t))
            throw NumericError("non-finite state at t = " + std::to_string(t_));
        rep.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - wall0)
                          .count();
        return rep;
    }

    Checkpoint checkpoint() const { return {field_, state_, held_torque_, t_}; }

    void restore(const Checkpoint& c) {
        if (c.field.nx != field_.nx || c.field.ny != field_.ny || c.field.nz != field_.nz ||
            c.field.dx != field_.dx || c.field.dy != field_.dy || c.field.dz != field_.dz)
            throw ConfigError("restore: checkpoint grid does not match config");
        field_ = c.field;
        state_ = c.state;
        held_torque_ = c.held_torque;
        t_ = c.t;
        n_steps_ = static_cast<std::int64_t>(std::llround(c.t / cfg_.dt));
    }

    // Full run with file outputs. Returns the number of emitted records.
    std::int64_t run(bool quiet = true) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(cfg_.output_dir, ec);
        if (ec) throw IoError("cannot create output directory: " + cfg_.output_dir);

        std::ofstream ts_file(fs::path(cfg_.output_dir) / "time_series.csv");
        std::ofstream diag_file(fs::path(cfg_.output_dir) / "diagnostics.csv");
        if (!ts_file || !diag_file) throw IoError("cannot open output files");
        ts_file << kTimeSeriesHeader << '\n';
        diag_file << kDiagnosticsHeader << '\n';
        write_metadata(fs::path(cfg_.output_dir) / "run_metadata.txt");

        const std::int64_t total_steps = std::llround(cfg_.t_end / cfg_.dt);
        const std::int64_t spin_steps = std::llround(cfg_.spin_up / cfg_.dt);
        const std::int64_t cadence_steps =
            std::max<std::int64_t>(1, std::llround(cfg_.output_cadence / cfg_.dt));
        std::vector<std::int64_t> snap_steps;
        for (double ts : cfg_.snapshot_times) snap_steps.push_back(std::llround(ts / cfg_.dt));

        std::int64_t emitted = 0;
        try {
            while (n_steps_ < total_steps) {
                const StepReport rep = step();
                diag_file << rep.step << ',' << detail::fmt_double(rep.t) << ','
                          << detail::fmt_double(rep.cfl) << ','
                          << detail::fmt_double(rep.momentum_residual) << ','
                          << detail::fmt_double(rep.kernel_norm_raw_min) << ','
                          << detail::fmt_double(rep.kernel_norm_raw_max) << ','
                          << detail::fmt_double(rep.wall_ms) << '\n';
                if (n_steps_ > spin_steps && n_steps_ % cadence_steps == 0) {
                    const TimeSeriesRecord r = record();
                    ts_file << detail::fmt_double(r.t) << ',' << detail::fmt_double(r.v_hub)
                            << ',' << detail::fmt_double(r.p_r) << ','
                            << detail::fmt_double(r.p_g) << ',' << detail::fmt_double(r.t_g)
                            << ',' << detail::fmt_double(r.omega_g) << ','
                            << detail::fmt_double(r.thrust) << ',' << detail::fmt_double(r.x_t)
                            << ',' << detail::fmt_double(r.v_fa) << ','
                            << detail::fmt_double(r.a_fa) << '\n';
                    ++emitted;
                    if (!quiet)
                        std::fprintf(stderr, "t=%.2f s  omega_g=%.3f rad/s  P_g=%.3g W\n", r.t,
                                     r.omega_g, r.p_g);
                }
                for (std::size_t si = 0; si < snap_steps.size(); ++si)
                    if (snap_steps[si] == n_steps_) emit_snapshot(cfg_.snapshot_times[si]);
            }
        } catch (const NumericError&) {
            // dump the state for post-mortem before reporting the failure
            save_checkpoint(checkpoint(),
                            (fs::path(cfg_.output_dir) / "abort_state.chk").string());
            throw;
        }
        if (cfg_.write_checkpoint)
            save_checkpoint(checkpoint(), (fs::path(cfg_.output_dir) / "final.chk").string());
        if (!ts_file.good() || !diag_file.good()) throw IoError("output write failed");
        return emitted;
    }

private:
    Measurements measurements() const {
        return {state_.omega_g, agg_.thrust, hub_wind_speed()};
    }

    InflowSource make_inflow() const {
        if (cfg_.inflow_mode == "uniform") return InflowSource::uniform(cfg_.inflow_speed);
        if (cfg_.inflow_mode == "power_law_shear")
            return InflowSource::power_law(cfg_.shear_v_ref, cfg_.shear_z_ref,
                                           cfg_.shear_exponent);
        if (cfg_.inflow_mode == "file_replay") return load_inflow_frames(cfg_.inflow_file);
        throw ConfigError("unknown inflow mode: " + cfg_.inflow_mode);
    }

    std::unique_ptr<Controller> make_controller() const {
        if (cfg_.controller == "btc") {
            BtcParams p;
            p.k_rotor = cfg_.k_rotor > 0.0
                            ? cfg_.k_rotor
                            : compute_k(cfg_.rho, blade_.tip_radius, cfg_.cp_max,
                                        cfg_.lambda_opt);
            p.gear_ratio = cfg_.gear_ratio;
            p.omega_g_min = cfg_.omega_g_min;
            p.omega_g_max = cfg_.omega_g_max;
            p.t_g_max = cfg_.t_g_max;
            p.pitch = cfg_.pitch;
            return std::make_unique<BaselineTorqueController>(p);
        }
        if (cfg_.controller == "constant_torque")
            return std::make_unique<ConstantTorqueController>(cfg_.constant_torque, cfg_.pitch);
        throw ConfigError("unknown controller '" + cfg_.controller + "'");
    }

    // scenario identity echoed next to the outputs; deterministic contents
    void write_metadata(const std::filesystem::path& path) const {
        std::ofstream os(path);
        if (!os) throw IoError("cannot open metadata file: " + path.string());
        os << "grid = " << cfg_.nx << " x " << cfg_.ny << " x " << cfg_.nz << " @ " << cfg_.dx
           << " " << cfg_.dy << " " << cfg_.dz << " m\n";
        os << "rho_kgpm3 = " << cfg_.rho << '\n';
        os << "kernel_sigma_m = " << kernel_.sigma << '\n';
        os << "kernel_cutoff_m = " << kernel_.cutoff_radius << '\n';
        os << "inflow_mode = " << cfg_.inflow_mode << '\n';
        os << "rotor_tip_radius_m = " << blade_.tip_radius << '\n';
        os << "num_blades = " << blade_.num_blades << '\n';
        os << "disk_points = " << disk_.points.size() << '\n';
        os << "hub_position_m = " << cfg_.hub.x << " " << cfg_.hub.y << " " << cfg_.hub.z
           << '\n';
        os << "hub_height_m = " << cfg_.hub_height << '\n';
        os << "rated_wind_mps = " << cfg_.rated_wind << '\n';
        os << "cut_in_wind_mps = " << cfg_.cut_in_wind << '\n';
        os << "cut_out_wind_mps = " << cfg_.cut_out_wind << '\n';
        os << "controller = " << (controller_ ? controller_->name() : cfg_.controller) << '\n';
        os << "mode = " << cfg_.mode << '\n';
        os << "dt_s = " << cfg_.dt << '\n';
        os << "t_end_s = " << cfg_.t_end << '\n';
        os << "spin_up_s = " << cfg_.spin_up << '\n';
        os << "output_cadence_s = " << cfg_.output_cadence << '\n';
    }

    void emit_snapshot(double t_label) const {
        const auto colon = cfg_.snapshot_plane.find(':');
        const char axis = cfg_.snapshot_plane[0];
        const std::string idx_str =
            colon == std::string::npos ? "auto" : cfg_.snapshot_plane.substr(colon + 1);
        int index = 0;
        if (idx_str == "auto") {
            if (axis == 'x')
                index = static_cast<int>(std::lround((cfg_.hub.x - field_.origin.x) / field_.dx));
            else if (axis == 'y')
                index = static_cast<int>(std::lround((cfg_.hub.y - field_.origin.y) / field_.dy));
            else
                index = static_cast<int>(std::lround((cfg_.hub.z - field_.origin.z) / field_.dz));
        } else {
            try {
                index = std::stoi(idx_str);
            } catch (const std::exception&) {
                throw ConfigError("snapshot plane index must be an integer or 'auto'");
            }
        }
        char name[128];
        std::snprintf(name, sizeof(name), "%s_%c%d_t%g.csv", cfg_.snapshot_component.c_str(),
                      axis, index, t_label);
        std::ofstream os(std::filesystem::path(cfg_.output_dir) / name);
        if (!os) throw IoError(std::string("cannot open snapshot file: ") + name);
        write_snapshot(field_, axis, index, cfg_.snapshot_component, os);
        if (!os.good()) throw IoError("snapshot write failed");
    }

    SimConfig cfg_;
    BladeDefinition blade_;
    FlowField field_;
    DiskGeometry disk_;
    SourceKernel kernel_;
    std::unique_ptr<SourceApplicator> applicator_;
    InflowSource inflow_;
    DriveTrain drive_;
    TowerModel tower_;
    std::unique_ptr<Controller> controller_;
    AdvectionWorkspace ws_;
    PointLoads loads_;
    RotorAggregates agg_;
    TurbineState state_;
    double held_torque_ = 0.0;
    double t_ = 0.0;
    std::int64_t n_steps_ = 0;
    int threads_ = 1;
};

}  // namespace windsim
