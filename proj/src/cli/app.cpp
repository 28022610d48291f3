#include "bbmlab/cli/app.hpp"

#include <ostream>

#include <CLI11.hpp>

#include "bbmlab/error.hpp"

namespace bbm::cli {

namespace {

const char* const kVerbs[] = {"solve", "wave", "constants", "predict", "simulate", "condition", "verify", "replay"};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Branching Brownian motion lower deviations: solver, simulator and checks", "bbmlab"};
    app.require_subcommand(1);
    Invocation inv;
    std::string config, out_dir, manifest;
    std::uint64_t seed = 0;
    std::size_t shards = 0;
    std::string probes, suite;

    for (const char* verb : kVerbs) {
        CLI::App* sub = app.add_subcommand(verb);
        sub->add_option("--out-dir", out_dir, "Directory for every artifact of the run")->required();
        if (std::string(verb) == "replay") {
            sub->add_option("manifest", manifest, "Manifest of the run to reproduce")->required();
            continue;
        }
        sub->add_option("--config", config, "Run configuration")->required();
        if (std::string(verb) == "simulate" || std::string(verb) == "condition") {
            sub->add_option("--seed", seed, "Root seed (overrides the config)");
            sub->add_option("--shards", shards, "Worker threads (outputs do not depend on it)");
        }
        if (std::string(verb) == "solve" || std::string(verb) == "simulate")
            sub->add_option("--probes", probes, "Comma-separated z values (overrides the config)");
        if (std::string(verb) == "verify") sub->add_option("--suite", suite, "rate,bounds,ratios,moderate,conditional,critical");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitIntegrity;
    }

    CLI::App* sub = app.get_subcommands().front();
    inv.command = sub->get_name();
    inv.out_dir = out_dir;
    if (!config.empty()) inv.config = config;
    if (!manifest.empty()) inv.manifest = manifest;
    if (sub->get_option_no_throw("--seed") && sub->count("--seed")) inv.seed = seed;
    if (sub->get_option_no_throw("--shards") && sub->count("--shards")) inv.shards = shards;
    if (sub->get_option_no_throw("--probes") && sub->count("--probes")) inv.probes = probes;
    if (sub->get_option_no_throw("--suite") && sub->count("--suite")) inv.suite = suite;

    try {
        return execute(inv, out);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.kind() == ErrorKind::Capped ? kExitPartial : kExitIntegrity;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIntegrity;
    }
}

}  // namespace bbm::cli
