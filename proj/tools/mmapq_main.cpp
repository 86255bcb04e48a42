#include <CLI11.hpp>
#include <iostream>

#include "mmapq/cli.hpp"

namespace {

void add_common(CLI::App* cmd, mmapq::RunRequest& req) {
    cmd->add_option("--model", req.model_path, "model file (JSON)")
        ->required();
    cmd->add_option("--horizon", [&req](const std::vector<std::string>& v) {
        req.horizon = std::stod(v.front());
        return true;
    }, "override numeric.horizon");
    cmd->add_option("--step", [&req](const std::vector<std::string>& v) {
        req.step = std::stod(v.front());
        return true;
    }, "override numeric.step");
    cmd->add_option("--z-points", req.z_points, "PGF marks in [0,1]")
        ->delimiter(',');
    cmd->add_option("--s-points", req.s_points, "resource LST arguments >= 0")
        ->delimiter(',');
    cmd->add_option("--output", req.output_path, "output file (default: stdout)");
    std::map<std::string, mmapq::RunRequest::Format> formats{
        {"csv", mmapq::RunRequest::Format::csv},
        {"json", mmapq::RunRequest::Format::json}};
    cmd->add_option("--format", req.format, "csv | json")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    std::map<std::string, mmapq::Method> methods{
        {"ode", mmapq::Method::ode}, {"closed-form", mmapq::Method::closed_form}};
    cmd->add_option("--method", req.method, "transform solver: ode | closed-form")
        ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
    cmd->add_option("--threads", req.threads, "simulation worker threads (0 = auto)");
}

void add_sim(CLI::App* cmd, mmapq::RunRequest& req) {
    cmd->add_option("--reps", req.reps, "independent replications");
    cmd->add_option("--seed", req.seed, "root RNG seed");
    std::map<std::string, mmapq::PhaseReset> resets{
        {"keep", mmapq::PhaseReset::keep}, {"reset", mmapq::PhaseReset::reset}};
    cmd->add_option("--phase-reset", req.phase_reset,
                    "MMAP phase at a catastrophe: keep | reset")
        ->transform(CLI::CheckedTransformer(resets, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"analytic engine and simulation oracle for infinite-server queues "
                 "with marked MAP arrivals, a semi-Markov environment and "
                 "catastrophes"};
    app.require_subcommand(1);

    mmapq::RunRequest req;
    auto* analyze = app.add_subcommand("analyze", "evaluate analytic measures");
    add_common(analyze, req);
    auto* simulate = app.add_subcommand("simulate", "run the discrete-event oracle");
    add_common(simulate, req);
    add_sim(simulate, req);
    auto* cmp = app.add_subcommand("compare", "analytic vs simulation z-score table");
    add_common(cmp, req);
    add_sim(cmp, req);
    cmp->add_option("--z-threshold", req.z_threshold, "PASS when |z| <= threshold");

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) req.command = mmapq::RunRequest::Command::analyze;
    if (simulate->parsed()) req.command = mmapq::RunRequest::Command::simulate;
    if (cmp->parsed()) req.command = mmapq::RunRequest::Command::compare;

    return mmapq::run(req, std::cout, std::cerr);
}
