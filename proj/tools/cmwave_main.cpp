#include <string>
#include <vector>

#include "cmwave/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cmwave::run_cli(args);
}
