#include "commands.hpp"

#include "havok/errors.hpp"

#include <iostream>

int main(int argc, char** argv) {
    havok::cli::setup_logging();
    CLI::App app{"havok_detect: unsupervised event detection for noisy time series"};
    app.require_subcommand(1);
    auto* detect = app.add_subcommand("detect", "run the detector on a data file");
    auto* synth = app.add_subcommand("synth", "write a synthetic scenario to CSV");
    auto* bench = app.add_subcommand("bench", "sweep a synthetic scenario and tabulate ER/BER");
    const auto run_detect = havok::cli::add_detect(*detect);
    const auto run_synth = havok::cli::add_synth(*synth);
    const auto run_bench = havok::cli::add_bench(*bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (detect->parsed()) return run_detect();
        if (synth->parsed()) return run_synth();
        if (bench->parsed()) return run_bench();
    } catch (const havok::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const havok::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
