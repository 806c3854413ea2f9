#include <vector>

#include "wavebench/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wb::run_command(std::move(args));
}
