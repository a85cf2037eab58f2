// windsim command-line front end: run/validate scenarios, slice checkpoints,
// and print momentum-theory oracle tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "windsim/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int classify(const windsim::Error& e) {
    if (dynamic_cast<const windsim::ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const windsim::NumericError*>(&e)) return kExitNumeric;
    return kExitIo;
}

int cmd_run(const std::string& config_path, const std::string& output_dir, int threads,
            bool quiet) {
    windsim::ValidationResult res = windsim::validate_config(config_path);
    for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (!res.ok()) {
        for (const auto& e : res.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
        return kExitConfig;
    }
    if (!output_dir.empty()) res.config.output_dir = output_dir;
    windsim::Simulation sim(res.config);
    sim.set_threads(threads);
    const auto n = sim.run(quiet);
    if (!quiet)
        std::fprintf(stderr, "done: %lld records -> %s\n", static_cast<long long>(n),
                     res.config.output_dir.c_str());
    return kExitOk;
}

int cmd_validate(const std::string& config_path) {
    windsim::ValidationResult res = windsim::validate_config(config_path);
    for (const auto& w : res.warnings) std::printf("warning: %s\n", w.c_str());
    for (const auto& e : res.errors) std::printf("error: %s\n", e.c_str());
    if (res.ok()) {
        std::printf("config ok\n");
        return kExitOk;
    }
    return kExitConfig;
}

int cmd_snapshot(const std::string& checkpoint_path, const std::string& plane,
                 const std::string& component, const std::string& output_path) {
    const windsim::Checkpoint chk = windsim::load_checkpoint(checkpoint_path);
    const auto colon = plane.find(':');
    if (plane.empty() || colon == std::string::npos)
        throw windsim::ConfigError("--plane must be '<x|y|z>:<index>'");
    const char axis = plane[0];
    const int index = std::stoi(plane.substr(colon + 1));
    std::ofstream os(output_path);
    if (!os) throw windsim::IoError("cannot open output: " + output_path);
    windsim::write_snapshot(chk.field, axis, index, component, os);
    if (!os.good()) throw windsim::IoError("snapshot write failed");
    return kExitOk;
}

int cmd_oracle(double v0, double rho, double radius, double a_start, double a_end,
               double a_step) {
    std::printf("a_n,v1_mps,v2_mps,thrust_N,power_W,cp,ct\n");
    const double area = windsim::kPi * radius * radius;
    for (double a = a_start; a <= a_end + 1e-12; a += a_step) {
        const auto mt = windsim::momentum_oracle(v0, a, rho, radius);
        const double cp = mt.power / (0.5 * rho * area * v0 * v0 * v0);
        const double ct = mt.thrust / (0.5 * rho * area * v0 * v0);
        std::printf("%.6g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", a, mt.v1, mt.v2, mt.thrust,
                    mt.power, cp, ct);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"windsim: actuator-disk wind turbine simulator on an advective flow grid"};
    app.require_subcommand(1);

    std::string config_path, output_dir, checkpoint_path, plane = "z:0";
    std::string component = "speed", output_path = "snapshot.csv";
    int threads = 1;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--output-dir", output_dir, "override run.output_dir");
    run->add_option("--threads", threads, "worker threads for the flow update");
    run->add_flag("--quiet", quiet, "suppress progress output");

    auto* validate = app.add_subcommand("validate", "validate a scenario config");
    validate->add_option("--config", config_path, "scenario config file")->required();

    auto* snapshot = app.add_subcommand("snapshot", "slice a checkpoint into a CSV plane");
    snapshot->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    snapshot->add_option("--plane", plane, "plane selector '<x|y|z>:<index>'");
    snapshot->add_option("--component", component, "u, v, w or speed");
    snapshot->add_option("--output", output_path, "output CSV path");

    double v0 = 8.0, rho = 1.225, radius = 63.0;
    double a_start = 0.0, a_end = 0.45, a_step = 0.05;
    auto* oracle = app.add_subcommand("oracle", "print a momentum-theory table");
    oracle->add_option("--v0", v0, "freestream speed (m/s)");
    oracle->add_option("--rho", rho, "air density (kg/m^3)");
    oracle->add_option("--radius", radius, "rotor radius (m)");
    oracle->add_option("--a-start", a_start, "first induction factor");
    oracle->add_option("--a-end", a_end, "last induction factor");
    oracle->add_option("--a-step", a_step, "induction factor step");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, output_dir, threads, quiet);
        if (validate->parsed()) return cmd_validate(config_path);
        if (snapshot->parsed()) return cmd_snapshot(checkpoint_path, plane, component, output_path);
        if (oracle->parsed()) return cmd_oracle(v0, rho, radius, a_start, a_end, a_step);
    } catch (const windsim::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitOk;
}
