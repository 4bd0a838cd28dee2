#include <iostream>

#include "hyporb/cli.hpp"

namespace {

void usage(const char* prog) {
    std::cerr << "usage: " << prog << " <config.json>\n"
              << "\n"
              << "Runs the subcommand named in the config (check-potential |\n"
              << "minimize | continue | analyze | oracle) and writes artifacts\n"
              << "into the configured out_dir.\n"
              << "Exit codes: 0 ok, 1 config, 2 numerical, 3 hypothesis.\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        usage(argv[0]);
        return 1;
    }
    const std::string arg = argv[1];
    if (arg == "-h" || arg == "--help") {
        usage(argv[0]);
        return 0;
    }
    return hyporb::cli::run(arg);
}
