#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace pnshape::cli;

    CLI::App app{"Constellation shaping for AWGN plus residual phase noise"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    Overrides o;
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned workers = 0;

    const std::pair<const char*, const char*> subs[] = {
        {"optimize", "Shape constellations over an (M, SNR, linewidth) grid"},
        {"evaluate", "MI/GMI/SER/BER over a (constellation, SNR, linewidth) grid"},
        {"validate", "Post-CPE GMI on the random-walk channel with pilots"},
        {"fec", "Post-FEC BER waterfall with the (128,120) Hamming code"},
    };
    for (const auto& [name, help] : subs) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Master seed");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--workers", workers, "Worker threads (0 = all)");
        sub->add_flag("--net", o.net, "Also emit GMI net of pilot overhead");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    auto* sub = app.get_subcommands().front();
    if (sub->count("--config"))
        o.config_path = config_path;
    if (sub->count("--seed"))
        o.seed = seed;
    if (sub->count("--out"))
        o.out_dir = out_dir;
    if (sub->count("--workers"))
        o.workers = workers;
    return run_subcommand(sub->get_name(), o, std::cout, std::cerr);
}
