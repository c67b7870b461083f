#include <string>
#include <vector>

#include "ibsolve/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ibsolve::cli::run_command(args);
}
