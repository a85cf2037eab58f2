#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "windsim/blade.hpp"
#include "windsim/common.hpp"

namespace windsim {

// One cell-centered actuator point of the polar disk mesh. Geometry and
// blade properties are frozen at build time; only the flow changes per step.
struct DiskPoint {
    double r = 0.0;      // radius (m)
    double zeta = 0.0;   // azimuthal angle (rad)
    double dr = 0.0;     // radial cell width (m)
    double dzeta = 0.0;  // azimuthal cell width (rad)
    Vec3 position;       // grid coordinates (m)
    Vec3 tangent;        // direction of blade motion at this point
    double weight = 0.0; // span-area weight B * dr * dzeta / (2 pi)  (m)
    StationGeometry station;
};

struct DiskGeometry {
    Vec3 hub_position;
    double yaw = 0.0;  // Phi (rad), disk-normal azimuth
    int n_radial = 0;
    int n_azimuthal = 0;
    Vec3 normal;       // unit disk normal, downwind for yaw = 0
    double root_radius = 0.0;
    double tip_radius = 0.0;
    int num_blades = 0;
    std::vector<DiskPoint> points;

    double swept_area() const {
        return kPi * (tip_radius * tip_radius - root_radius * root_radius);
    }
};

namespace detail {

inline Vec3 disk_normal(double yaw) { return {std::cos(yaw), std::sin(yaw), 0.0}; }

inline Vec3 disk_radial(double yaw, double zeta) {
    return {std::cos(zeta) * std::sin(yaw), -std::cos(zeta) * std::cos(yaw), std::sin(zeta)};
}

inline Vec3 disk_tangent(double yaw, double zeta) {
    return {std::sin(zeta) * std::sin(yaw), -std::sin(zeta) * std::cos(yaw), -std::cos(zeta)};
}

}  // namespace detail

// Polar mesh of actuator points, cell-centered in both r and zeta so the
// area quadrature closes exactly: sum(r dr dzeta) = pi (R^2 - r_root^2).
inline DiskGeometry build_disk(const BladeDefinition& blade, const Vec3& hub_position,
                               double yaw, int n_radial, int n_azimuthal) {
    if (n_radial < 2) throw ConfigError("build_disk: n_radial must be >= 2");
    if (n_azimuthal < 4) throw ConfigError("build_disk: n_azimuthal must be >= 4");

    DiskGeometry disk;
    disk.hub_position = hub_position;
    disk.yaw = yaw;
    disk.n_radial = n_radial;
    disk.n_azimuthal = n_azimuthal;
    disk.normal = detail::disk_normal(yaw);
    disk.root_radius = blade.root_radius;
    disk.tip_radius = blade.tip_radius;
    disk.num_blades = blade.num_blades;

    const double dr = (blade.tip_radius - blade.root_radius) / n_radial;
    const double dzeta = kTwoPi / n_azimuthal;
    disk.points.reserve(static_cast<std::size_t>(n_radial) * n_azimuthal);
    for (int i = 0; i < n_radial; ++i) {
        const double r = blade.root_radius + (i + 0.5) * dr;
        const StationGeometry station = interpolate_station(blade, r);
        for (int j = 0; j < n_azimuthal; ++j) {
            DiskPoint p;
            p.r = r;
            p.zeta = (j + 0.5) * dzeta;
            p.dr = dr;
            p.dzeta = dzeta;
            p.position = hub_position + r * detail::disk_radial(yaw, p.zeta);
            p.tangent = detail::disk_tangent(yaw, p.zeta);
            p.weight = blade.num_blades * dr * dzeta / kTwoPi;
            p.station = station;
            disk.points.push_back(p);
        }
    }
    return disk;
}

struct RelativeVelocity {
    double v_rel = 0.0;  // m/s
    double psi = 0.0;    // advance angle (rad)
};

// Relative wind seen by the blade element: axial part is the disk-normal
// wind minus the tower fore-aft velocity, tangential part is blade speed
// minus the in-plane wind along the direction of blade motion.
inline RelativeVelocity relative_velocity(const DiskPoint& point, const Vec3& disk_normal,
                                          const Vec3& sampled_wind, double omega_r,
                                          double tower_velocity) {
    const double axial = sampled_wind.dot(disk_normal) - tower_velocity;
    const double tangential = omega_r * point.r - sampled_wind.dot(point.tangent);
    return {std::hypot(axial, tangential), std::atan2(axial, tangential)};
}

struct ElementLoads {
    double alpha = 0.0;  // angle of attack (rad)
    double fl = 0.0;     // lift per unit span (N/m)
    double fd = 0.0;     // drag per unit span (N/m)
    double fn = 0.0;     // axial force per unit span (N/m)
    double ft = 0.0;     // tangential force per unit span (N/m)
};

// Blade-element force per unit span: alpha = psi - pitch - twist, then
// lift/drag from the polar tables rotated into axial/tangential components.
inline ElementLoads element_loads(const BladeDefinition& blade, const StationGeometry& station,
                                  double v_rel, double psi, double pitch, double rho) {
    ElementLoads out;
    out.alpha = psi - pitch - station.twist;
    const ClCd c = lookup_cl_cd(blade, station, out.alpha);
    const double q = 0.5 * rho * v_rel * v_rel * station.chord;
    out.fl = q * c.cl;
    out.fd = q * c.cd;
    const double sp = std::sin(psi);
    const double cp = std::cos(psi);
    out.fn = out.fl * cp + out.fd * sp;
    out.ft = out.fl * sp - out.fd * cp;
    return out;
}

// Rotation of the (axial, tangential) force pair into grid coordinates.
inline Vec3 project_loads(double fn, double ft, double yaw, double zeta) {
    const double sz = std::sin(zeta);
    const double cz = std::cos(zeta);
    const double sy = std::sin(yaw);
    const double cy = std::cos(yaw);
    return {fn * cy + ft * sz * sy, fn * sy - ft * sz * cy, -ft * cz};
}

// Per-point load state for one evaluation of the whole disk.
struct PointLoads {
    std::vector<Vec3> wind;      // sampled wind at the point (m/s)
    std::vector<double> v_rel;   // m/s
    std::vector<double> psi;     // rad
    std::vector<double> alpha;   // rad
    std::vector<double> fl, fd;  // N/m
    std::vector<double> fn, ft;  // N/m
    std::vector<Vec3> grid_force;  // (fx, fy, fz) N/m

    void resize(std::size_t n) {
        wind.resize(n);
        v_rel.resize(n);
        psi.resize(n);
        alpha.resize(n);
        fl.resize(n);
        fd.resize(n);
        fn.resize(n);
        ft.resize(n);
        grid_force.resize(n);
    }
    std::size_t size() const { return v_rel.size(); }
};

// Evaluates the full disk for one step. `sampler` maps a position to the
// local wind vector; points are independent and evaluated in a fixed order.
template <typename WindSampler>
inline void compute_loads(const DiskGeometry& disk, const BladeDefinition& blade,
                          WindSampler&& sampler, double omega_r, double tower_velocity,
                          double pitch, double rho, PointLoads& out) {
    const std::size_t n = disk.points.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DiskPoint& p = disk.points[i];
        const Vec3 wind = sampler(p.position);
        const RelativeVelocity rv =
            relative_velocity(p, disk.normal, wind, omega_r, tower_velocity);
        const ElementLoads el = element_loads(blade, p.station, rv.v_rel, rv.psi, pitch, rho);
        out.wind[i] = wind;
        out.v_rel[i] = rv.v_rel;
        out.psi[i] = rv.psi;
        out.alpha[i] = el.alpha;
        out.fl[i] = el.fl;
        out.fd[i] = el.fd;
        out.fn[i] = el.fn;
        out.ft[i] = el.ft;
        out.grid_force[i] = project_loads(el.fn, el.ft, disk.yaw, p.zeta);
    }
}

struct RotorAggregates {
    double power = 0.0;   // P_r (W)
    double torque = 0.0;  // T_r (N m)
    double thrust = 0.0;  // T (N)
};

// Rotor totals. The per-point weight already carries the B-blade azimuthal
// smearing, so thrust reduces to B * Fn * dr per annulus and power to
// sum(Ft * omega_r * r * dr) over B blades. Torque is zero at standstill.
inline RotorAggregates aggregate(const DiskGeometry& disk, const PointLoads& loads,
                                 double omega_r) {
    double torque = 0.0;
    double thrust = 0.0;
    for (std::size_t i = 0; i < disk.points.size(); ++i) {
        const DiskPoint& p = disk.points[i];
        torque += loads.ft[i] * p.r * p.weight;
        thrust += loads.fn[i] * p.weight;
    }
    RotorAggregates out;
    out.thrust = thrust;
    if (omega_r > 0.0) {
        out.torque = torque;
        out.power = torque * omega_r;  // P_r = T_r * omega_r exactly
    }
    return out;
}

// Disk-area-weighted mean axial wind component, used to infer the axial
// induction from a run.
inline double mean_axial_wind(const DiskGeometry& disk, const PointLoads& loads) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < disk.points.size(); ++i) {
        const DiskPoint& p = disk.points[i];
        const double area = p.r * p.dr * p.dzeta;
        num += loads.wind[i].dot(disk.normal) * area;
        den += area;
    }
    return den > 0.0 ? num / den : 0.0;
}

struct MomentumTheory {
    double v1 = 0.0;      // velocity at the disk (m/s)
    double v2 = 0.0;      // far-wake velocity (m/s)
    double thrust = 0.0;  // N
    double power = 0.0;   // W
};

// Classical momentum-theory relations for a disk of radius R with axial
// induction a_n; the independent oracle for the coupled simulation.
inline MomentumTheory momentum_oracle(double v0, double a_n, double rho, double tip_radius) {
    if (!(a_n >= 0.0 && a_n < 0.5))
        throw ConfigError("momentum_oracle: induction factor must be in [0, 0.5)");
    MomentumTheory out;
    out.v1 = v0 * (1.0 - a_n);
    out.v2 = v0 * (1.0 - 2.0 * a_n);
    const double area = kPi * tip_radius * tip_radius;
    const double q = 0.5 * rho * area * v0 * v0;
    out.thrust = q * 4.0 * a_n * (1.0 - a_n);
    out.power = q * v0 * 4.0 * a_n * (1.0 - a_n) * (1.0 - a_n);
    return out;
}

// Debug dump of the disk mesh: one row per point.
inline void write_disk_csv(const DiskGeometry& disk, std::ostream& os) {
    os << "r_m,zeta_rad,x_m,y_m,z_m,dr_m,dzeta_rad,weight_m\n";
    for (const DiskPoint& p : disk.points) {
        os << p.r << ',' << p.zeta << ',' << p.position.x << ',' << p.position.y << ','
           << p.position.z << ',' << p.dr << ',' << p.dzeta << ',' << p.weight << '\n';
    }
}

}  // namespace windsim
