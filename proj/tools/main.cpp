#include "botkit/cli.hpp"

int main(int argc, char** argv) {
    return botkit::cli::run_cli(argc, argv);
}
