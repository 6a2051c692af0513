#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace cfront;
using namespace cfront::cli;

namespace {

struct Args {
    std::vector<std::string> configs;
    std::vector<std::string> sets;
    std::string out;
    int jobs = 1;
    std::vector<std::string> inputs;
    bool quiet = false;
};

std::string help_of(const std::string& command) {
    if (command == "sweep") return "Repeat a command over the values of one config key";
    if (command == "report") return "Aggregate manifests into a per-criterion summary";
    std::string s;
    if (command == "profile") s = "Traveling-wave profiles, limit overlay and profile checks";
    if (command == "expansion") s = "Matched expansion at the transition and its rate";
    if (command == "barriers") s = "Sub/super-solution barriers and congested-zone decay";
    if (command == "simulate") s = "Nonlinear stability run of the perturbed shock";
    if (command == "linearized-check") s = "Linearized energy identity, commutators and nonlinearity bounds";
    s += "\n\nConfig keys:";
    for (const auto& k : command_schema(command))
        s += "\n  " + k.key + " = " + (k.default_value.empty() ? "(required)" : k.default_value) +
             (k.help.empty() ? "" : "    " + k.help);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cfront: partially congested viscous shocks with singular pressure"};
    app.set_version_flag("--version", CFRONT_VERSION);
    app.require_subcommand(1);

    Args a;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name, help_of(name));
        sub->add_option("--config,-c", a.configs, "key = value file (repeatable, later files win)")
            ->check(CLI::ExistingFile);
        sub->add_option("--set,-s", a.sets, "key=value override (repeatable)");
        sub->add_option("--out,-o", a.out, "output directory")->required();
        sub->add_flag("--quiet,-q", a.quiet, "no progress output");
        if (name == "sweep") sub->add_option("--jobs,-j", a.jobs, "parallel runs")->check(CLI::PositiveNumber);
        if (name == "report") sub->add_option("inputs", a.inputs, "run directories or manifests")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitRejected;
    }

    Invocation inv;
    inv.command = app.get_subcommands().front()->get_name();
    inv.out = a.out;
    inv.jobs = a.jobs;
    inv.inputs = a.inputs;
    inv.log = a.quiet ? nullptr : &std::cout;
    try {
        for (const auto& f : a.configs) {
            Config c = Config::load(f);
            for (const auto& [k, v] : c.values()) inv.raw.set(k, v);
        }
        for (const auto& s : a.sets) inv.raw.set(s);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitRejected;
    }
    return run_command(inv);
}
