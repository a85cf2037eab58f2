#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "windsim/actuator_disk.hpp"
#include "windsim/common.hpp"

namespace windsim {

// Collocated structured grid of velocity components. Node (i,j,k) sits at
// origin + (i*dx, j*dy, k*dz) and owns a cell volume dx*dy*dz. Storage is
// x-fastest so the inflow face i=0 and streamwise sweeps stay contiguous.
struct FlowField {
    int nx = 0, ny = 0, nz = 0;
    double dx = 0.0, dy = 0.0, dz = 0.0;
    Vec3 origin;
    double rho = 1.225;  // kg/m^3, uniform
    std::vector<double> u, v, w;

    static FlowField make(int nx, int ny, int nz, double dx, double dy, double dz,
                          const Vec3& origin, double rho) {
        if (nx < 2 || ny < 2 || nz < 2)
            throw ConfigError("flow field: all dims must be >= 2");
        if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0))
            throw ConfigError("flow field: spacing must be positive");
        if (!(rho > 0.0)) throw ConfigError("flow field: rho must be positive");
        FlowField f;
        f.nx = nx; f.ny = ny; f.nz = nz;
        f.dx = dx; f.dy = dy; f.dz = dz;
        f.origin = origin;
        f.rho = rho;
        const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
        f.u.assign(n, 0.0);
        f.v.assign(n, 0.0);
        f.w.assign(n, 0.0);
        return f;
    }

    std::size_t idx(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) +
                                               static_cast<std::size_t>(ny) * k);
    }
    std::size_t size() const { return u.size(); }
    double cell_volume() const { return dx * dy * dz; }
    Vec3 node_position(int i, int j, int k) const {
        return {origin.x + i * dx, origin.y + j * dy, origin.z + k * dz};
    }
    Vec3 max_corner() const {
        return {origin.x + (nx - 1) * dx, origin.y + (ny - 1) * dy, origin.z + (nz - 1) * dz};
    }
    bool contains(const Vec3& p) const {
        const Vec3 hi = max_corner();
        return p.x >= origin.x && p.x <= hi.x && p.y >= origin.y && p.y <= hi.y &&
               p.z >= origin.z && p.z <= hi.z;
    }
};

// Trilinear interpolation of (u, v, w); exact for fields linear in position.
inline Vec3 sample_velocity(const FlowField& f, const Vec3& pos) {
    if (!f.contains(pos))
        throw NumericError("sample_velocity: position outside grid bounds");
    const double fx = (pos.x - f.origin.x) / f.dx;
    const double fy = (pos.y - f.origin.y) / f.dy;
    const double fz = (pos.z - f.origin.z) / f.dz;
    int i = std::min(static_cast<int>(fx), f.nx - 2);
    int j = std::min(static_cast<int>(fy), f.ny - 2);
    int k = std::min(static_cast<int>(fz), f.nz - 2);
    const double tx = fx - i, ty = fy - j, tz = fz - k;

    auto lerp3 = [&](const std::vector<double>& q) {
        const double c000 = q[f.idx(i, j, k)],     c100 = q[f.idx(i + 1, j, k)];
        const double c010 = q[f.idx(i, j + 1, k)], c110 = q[f.idx(i + 1, j + 1, k)];
        const double c001 = q[f.idx(i, j, k + 1)],     c101 = q[f.idx(i + 1, j, k + 1)];
        const double c011 = q[f.idx(i, j + 1, k + 1)], c111 = q[f.idx(i + 1, j + 1, k + 1)];
        const double c00 = c000 + tx * (c100 - c000), c10 = c010 + tx * (c110 - c010);
        const double c01 = c001 + tx * (c101 - c001), c11 = c011 + tx * (c111 - c011);
        const double c0 = c00 + ty * (c10 - c00), c1 = c01 + ty * (c11 - c01);
        return c0 + tz * (c1 - c0);
    };
    return {lerp3(f.u), lerp3(f.v), lerp3(f.w)};
}

// ---------------------------------------------------------------------------
// Inflow
// ---------------------------------------------------------------------------

struct InflowFrame {
    double t = 0.0;
    std::vector<double> u, v, w;  // ny*nz values, j (y) outer, k (z) inner
};

struct InflowSource {
    enum class Mode { Uniform, PowerLawShear, FileReplay };
    Mode mode = Mode::Uniform;

    // uniform
    double speed = 0.0;  // m/s along +x

    // power-law shear: u(z) = v_ref * (z / z_ref)^exponent along +x
    double v_ref = 0.0;
    double z_ref = 0.0;
    double exponent = 0.0;

    // file replay
    int plane_ny = 0, plane_nz = 0;
    double plane_dy = 0.0, plane_dz = 0.0;
    std::vector<InflowFrame> frames;

    static InflowSource uniform(double speed) {
        InflowSource s;
        s.mode = Mode::Uniform;
        s.speed = speed;
        return s;
    }
    static InflowSource power_law(double v_ref, double z_ref, double exponent) {
        if (!(z_ref > 0.0)) throw ConfigError("inflow: shear reference height must be positive");
        InflowSource s;
        s.mode = Mode::PowerLawShear;
        s.v_ref = v_ref;
        s.z_ref = z_ref;
        s.exponent = exponent;
        return s;
    }
};

namespace detail {

// Bracketing frame pair and interpolation weight at time t; clamped at the
// ends of the record.
inline void frame_weights(const std::vector<InflowFrame>& frames, double t, std::size_t& lo,
                          std::size_t& hi, double& wt) {
    if (t <= frames.front().t) { lo = hi = 0; wt = 0.0; return; }
    if (t >= frames.back().t) { lo = hi = frames.size() - 1; wt = 0.0; return; }
    hi = 1;
    while (frames[hi].t < t) ++hi;
    lo = hi - 1;
    wt = (t - frames[lo].t) / (frames[hi].t - frames[lo].t);
}

}  // namespace detail

// Inflow velocity at absolute grid coordinates (y, z) and time t. For file
// replay the plane is anchored at the grid's inflow face.
inline Vec3 inflow_sample(const InflowSource& src, const FlowField& f, double t, double y,
                          double z) {
    switch (src.mode) {
        case InflowSource::Mode::Uniform:
            return {src.speed, 0.0, 0.0};
        case InflowSource::Mode::PowerLawShear: {
            const double zz = std::max(z, 0.0);
            return {src.v_ref * std::pow(zz / src.z_ref, src.exponent), 0.0, 0.0};
        }
        case InflowSource::Mode::FileReplay: {
            std::size_t lo, hi;
            double wt;
            detail::frame_weights(src.frames, t, lo, hi, wt);
            const double fy = std::clamp((y - f.origin.y) / src.plane_dy, 0.0,
                                         static_cast<double>(src.plane_ny - 1));
            const double fz = std::clamp((z - f.origin.z) / src.plane_dz, 0.0,
                                         static_cast<double>(src.plane_nz - 1));
            const int j = std::min(static_cast<int>(fy), src.plane_ny - 2);
            const int k = std::min(static_cast<int>(fz), src.plane_nz - 2);
            const double ty = fy - j, tz = fz - k;
            auto plane = [&](const std::vector<double>& q) {
                auto at = [&](int jj, int kk) {
                    return q[static_cast<std::size_t>(jj) * src.plane_nz + kk];
                };
                const double c0 = at(j, k) + ty * (at(j + 1, k) - at(j, k));
                const double c1 = at(j, k + 1) + ty * (at(j + 1, k + 1) - at(j, k + 1));
                return c0 + tz * (c1 - c0);
            };
            auto blend = [&](const std::vector<double>& a, const std::vector<double>& b) {
                const double va = plane(a);
                if (lo == hi) return va;
                return va + wt * (plane(b) - va);
            };
            return {blend(src.frames[lo].u, src.frames[hi].u),
                    blend(src.frames[lo].v, src.frames[hi].v),
                    blend(src.frames[lo].w, src.frames[hi].w)};
        }
    }
    return {};
}

// Imposes the inflow on the upstream (i = 0) face.
inline void apply_inflow(FlowField& f, const InflowSource& src, double t) {
    for (int k = 0; k < f.nz; ++k)
        for (int j = 0; j < f.ny; ++j) {
            const Vec3 vel =
                inflow_sample(src, f, t, f.origin.y + j * f.dy, f.origin.z + k * f.dz);
            const std::size_t id = f.idx(0, j, k);
            f.u[id] = vel.x;
            f.v[id] = vel.y;
            f.w[id] = vel.z;
        }
}

// Fills the whole field from the inflow profile (initial condition).
inline void fill_from_inflow(FlowField& f, const InflowSource& src, double t) {
    for (int k = 0; k < f.nz; ++k)
        for (int j = 0; j < f.ny; ++j) {
            const Vec3 vel =
                inflow_sample(src, f, t, f.origin.y + j * f.dy, f.origin.z + k * f.dz);
            for (int i = 0; i < f.nx; ++i) {
                const std::size_t id = f.idx(i, j, k);
                f.u[id] = vel.x;
                f.v[id] = vel.y;
                f.w[id] = vel.z;
            }
        }
}

// Inflow replay file:
//   WINDSIM_INFLOW 1
//   ny nz dy dz n_frames
// then per frame a line "t <seconds>" followed by ny*nz rows "u v w",
// j (y) outer, k (z) inner. Timestamps must be strictly increasing.
inline InflowSource load_inflow_frames(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open inflow file: " + path);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "WINDSIM_INFLOW" || version != 1)
        throw ConfigError(path + ": malformed header (expected 'WINDSIM_INFLOW 1')");
    InflowSource src;
    src.mode = InflowSource::Mode::FileReplay;
    int n_frames = 0;
    if (!(in >> src.plane_ny >> src.plane_nz >> src.plane_dy >> src.plane_dz >> n_frames))
        throw ConfigError(path + ": malformed header (expected 'ny nz dy dz n_frames')");
    if (src.plane_ny < 2 || src.plane_nz < 2 || !(src.plane_dy > 0.0) || !(src.plane_dz > 0.0) ||
        n_frames < 1)
        throw ConfigError(path + ": invalid plane dimensions");
    const std::size_t n = static_cast<std::size_t>(src.plane_ny) * src.plane_nz;
    for (int fi = 0; fi < n_frames; ++fi) {
        std::string tag;
        InflowFrame frame;
        if (!(in >> tag >> frame.t) || tag != "t")
            throw ConfigError(path + ": frame " + std::to_string(fi) +
                              ": expected 't <seconds>'");
        if (fi > 0 && !(frame.t > src.frames.back().t))
            throw ConfigError(path + ": non-monotone timestamps");
        frame.u.resize(n);
        frame.v.resize(n);
        frame.w.resize(n);
        for (std::size_t m = 0; m < n; ++m)
            if (!(in >> frame.u[m] >> frame.v[m] >> frame.w[m]))
                throw ConfigError(path + ": frame " + std::to_string(fi) +
                                  ": dimension mismatch (expected " + std::to_string(n) +
                                  " rows)");
        src.frames.push_back(std::move(frame));
    }
    return src;
}

// ---------------------------------------------------------------------------
// Advection
// ---------------------------------------------------------------------------

struct CflReport {
    double cfl_x = 0.0, cfl_y = 0.0, cfl_z = 0.0;
    double max_cfl() const { return std::max({cfl_x, cfl_y, cfl_z}); }
};

struct AdvectionWorkspace {
    std::vector<double> u, v, w;
};

namespace detail {

// Static slab decomposition over k; writes are disjoint so the result is
// identical for any thread count.
template <typename Fn>
inline void parallel_slabs(int nz, int threads, Fn&& body) {
    if (threads <= 1 || nz < 2 * threads) {
        body(0, nz);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (nz + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int k0 = t * chunk;
        const int k1 = std::min(nz, k0 + chunk);
        if (k0 >= k1) break;
        pool.emplace_back([&body, k0, k1]() { body(k0, k1); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// One first-order upwind step of u_t + (V . grad) q = 0 for each component.
// The inflow face is reimposed at the new time level; every other boundary
// is zero-gradient. Refuses the step on a per-axis CFL violation.
inline CflReport advect(FlowField& f, const InflowSource& inflow, double t_new, double dt,
                        AdvectionWorkspace& ws, int threads = 1) {
    if (!(dt > 0.0)) throw ConfigError("advect: dt must be positive");
    double mu = 0.0, mv = 0.0, mw = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        mu = std::max(mu, std::abs(f.u[i]));
        mv = std::max(mv, std::abs(f.v[i]));
        mw = std::max(mw, std::abs(f.w[i]));
    }
    CflReport cfl{mu * dt / f.dx, mv * dt / f.dy, mw * dt / f.dz};
    if (cfl.max_cfl() > 1.0) {
        std::ostringstream msg;
        msg << "advect: CFL violation (x " << cfl.cfl_x << ", y " << cfl.cfl_y << ", z "
            << cfl.cfl_z << "), step refused";
        throw NumericError(msg.str());
    }

    ws.u = f.u;
    ws.v = f.v;
    ws.w = f.w;
    const double* su = ws.u.data();
    const double* sv = ws.v.data();
    const double* sw = ws.w.data();
    const double rdx = 1.0 / f.dx, rdy = 1.0 / f.dy, rdz = 1.0 / f.dz;
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(f.nx);
    const std::size_t sz = static_cast<std::size_t>(f.nx) * f.ny;

    detail::parallel_slabs(f.nz, threads, [&](int k0, int k1) {
        for (int k = k0; k < k1; ++k)
            for (int j = 0; j < f.ny; ++j)
                for (int i = 0; i < f.nx; ++i) {
                    const std::size_t id = f.idx(i, j, k);
                    const double uu = su[id], vv = sv[id], www = sw[id];
                    // upwind one-sided derivative; zero-gradient ghost at walls
                    auto deriv = [&](const double* q, double vel, int c, int n,
                                     std::size_t stride, double rd) {
                        if (vel > 0.0) {
                            if (c == 0) return 0.0;
                            return (q[id] - q[id - stride]) * rd;
                        }
                        if (c == n - 1) return 0.0;
                        return (q[id + stride] - q[id]) * rd;
                    };
                    auto transport = [&](const double* q) {
                        return uu * deriv(q, uu, i, f.nx, sx, rdx) +
                               vv * deriv(q, vv, j, f.ny, sy, rdy) +
                               www * deriv(q, www, k, f.nz, sz, rdz);
                    };
                    f.u[id] = su[id] - dt * transport(su);
                    f.v[id] = sv[id] - dt * transport(sv);
                    f.w[id] = sw[id] - dt * transport(sw);
                }
    });
    apply_inflow(f, inflow, t_new);
    return cfl;
}

inline CflReport advect(FlowField& f, const InflowSource& inflow, double t_new, double dt) {
    AdvectionWorkspace ws;
    return advect(f, inflow, t_new, dt, ws);
}

// ---------------------------------------------------------------------------
// Momentum sources
// ---------------------------------------------------------------------------

struct SourceKernel {
    double sigma = 0.0;          // m
    double cutoff_radius = 0.0;  // m

    static SourceKernel from_grid(const FlowField& f) {
        SourceKernel k;
        k.sigma = std::max({f.dx, f.dy, f.dz});
        k.cutoff_radius = 3.0 * k.sigma;
        return k;
    }
    void validate() const {
        if (!(sigma > 0.0)) throw ConfigError("kernel: sigma must be positive");
        if (!(cutoff_radius >= 3.0 * sigma))
            throw ConfigError("kernel: cutoff_radius must be >= 3*sigma");
    }
};

struct MomentumExchange {
    Vec3 force;           // total force applied to the rotor (N)
    Vec3 flow_delta;      // momentum change of the flow this step (kg m/s)
    double raw_norm_min = 0.0;  // pre-renormalization kernel sums (quality)
    double raw_norm_max = 0.0;
};

// Precomputed Gaussian spread weights from each actuator point onto the
// grid cells within the cutoff. Weights are renormalized over the truncated
// support so sum(g * cell_volume) = 1 exactly per point, which makes the
// per-step momentum bookkeeping close by construction.
class SourceApplicator {
public:
    SourceApplicator(const FlowField& f, const DiskGeometry& disk, const SourceKernel& kernel) {
        kernel.validate();
        const double cv = f.cell_volume();
        const double s2 = 2.0 * kernel.sigma * kernel.sigma;
        const double cut2 = kernel.cutoff_radius * kernel.cutoff_radius;
        const Vec3 lo = f.origin;
        const Vec3 hi = f.max_corner();
        raw_norm_min_ = 1e300;
        raw_norm_max_ = 0.0;
        offsets_.reserve(disk.points.size() + 1);
        offsets_.push_back(0);
        for (const DiskPoint& p : disk.points) {
            if (p.position.x - kernel.cutoff_radius < lo.x ||
                p.position.x + kernel.cutoff_radius > hi.x ||
                p.position.y - kernel.cutoff_radius < lo.y ||
                p.position.y + kernel.cutoff_radius > hi.y ||
                p.position.z - kernel.cutoff_radius < lo.z ||
                p.position.z + kernel.cutoff_radius > hi.z)
                throw ConfigError("apply_sources: actuator point too close to grid boundary");
            const int i0 = static_cast<int>(std::ceil((p.position.x - kernel.cutoff_radius - f.origin.x) / f.dx));
            const int i1 = static_cast<int>(std::floor((p.position.x + kernel.cutoff_radius - f.origin.x) / f.dx));
            const int j0 = static_cast<int>(std::ceil((p.position.y - kernel.cutoff_radius - f.origin.y) / f.dy));
            const int j1 = static_cast<int>(std::floor((p.position.y + kernel.cutoff_radius - f.origin.y) / f.dy));
            const int k0 = static_cast<int>(std::ceil((p.position.z - kernel.cutoff_radius - f.origin.z) / f.dz));
            const int k1 = static_cast<int>(std::floor((p.position.z + kernel.cutoff_radius - f.origin.z) / f.dz));
            double norm = 0.0;
            const std::size_t first = cells_.size();
            for (int k = k0; k <= k1; ++k)
                for (int j = j0; j <= j1; ++j)
                    for (int i = i0; i <= i1; ++i) {
                        const Vec3 d = f.node_position(i, j, k) - p.position;
                        const double d2 = d.dot(d);
                        if (d2 > cut2) continue;
                        const double g = std::exp(-d2 / s2);
                        cells_.push_back(f.idx(i, j, k));
                        weights_.push_back(g);
                        norm += g * cv;
                    }
            if (norm <= 0.0)
                throw ConfigError("apply_sources: kernel support contains no grid cells");
            // raw norm (before renormalization) of the analytic 3D Gaussian
            const double analytic = std::pow(kTwoPi, 1.5) * kernel.sigma * kernel.sigma *
                                    kernel.sigma;
            const double raw = norm / analytic;
            raw_norm_min_ = std::min(raw_norm_min_, raw);
            raw_norm_max_ = std::max(raw_norm_max_, raw);
            for (std::size_t c = first; c < cells_.size(); ++c) weights_[c] /= norm;
            offsets_.push_back(cells_.size());
        }
    }

    // Applies the reaction of the blade forces onto the flow:
    // du/dt = -F_grid * w_point * G / rho per cell.
    MomentumExchange apply(FlowField& f, const DiskGeometry& disk, const PointLoads& loads,
                           double dt) const {
        if (!(dt > 0.0)) throw ConfigError("apply_sources: dt must be positive");
        MomentumExchange ex;
        ex.raw_norm_min = raw_norm_min_;
        ex.raw_norm_max = raw_norm_max_;
        const double cv = f.cell_volume();
        Vec3 delta;
        for (std::size_t pi = 0; pi < disk.points.size(); ++pi) {
            const Vec3 force = loads.grid_force[pi] * disk.points[pi].weight;  // N
            ex.force += force;
            const double scale = dt / f.rho;
            const double ax = -scale * force.x;
            const double ay = -scale * force.y;
            const double az = -scale * force.z;
            for (std::size_t c = offsets_[pi]; c < offsets_[pi + 1]; ++c) {
                const std::size_t id = cells_[c];
                const double g = weights_[c];
                const double du = ax * g;
                const double dv = ay * g;
                const double dw = az * g;
                f.u[id] += du;
                f.v[id] += dv;
                f.w[id] += dw;
                delta += Vec3{du, dv, dw};
            }
        }
        ex.flow_delta = delta * (f.rho * cv);
        return ex;
    }

private:
    std::vector<std::size_t> offsets_;  // per-point [first, last) into cells_
    std::vector<std::size_t> cells_;
    std::vector<double> weights_;  // renormalized: sum(g * cell_volume) = 1
    double raw_norm_min_ = 0.0;
    double raw_norm_max_ = 0.0;
};

// One-shot convenience wrapper over SourceApplicator.
inline MomentumExchange apply_sources(FlowField& f, const DiskGeometry& disk,
                                      const PointLoads& loads, const SourceKernel& kernel,
                                      double dt) {
    return SourceApplicator(f, disk, kernel).apply(f, disk, loads, dt);
}

// ---------------------------------------------------------------------------
// Field diagnostics
// ---------------------------------------------------------------------------

inline Vec3 field_momentum(const FlowField& f) {
    double mx = 0.0, my = 0.0, mz = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        mx += f.u[i];
        my += f.v[i];
        mz += f.w[i];
    }
    const double s = f.rho * f.cell_volume();
    return {mx * s, my * s, mz * s};
}

inline double field_kinetic_energy(const FlowField& f) {
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        e += f.u[i] * f.u[i] + f.v[i] * f.v[i] + f.w[i] * f.w[i];
    return 0.5 * f.rho * f.cell_volume() * e;
}

}  // namespace windsim
