#pragma once

// Batch driver behind the command-line tool.

#include <filesystem>
#include <iosfwd>
#include <string>

namespace evmenu {

enum class Mode { Welfare, Profit };

struct RunConfig {
    std::filesystem::path scenario;
    Mode mode = Mode::Welfare;
    bool network = false;
    bool solar = false;
    bool audit = false;
    bool equilibrium = false;
    std::filesystem::path out = "out";
    double tol = 1e-7;
    bool energy_rent = false;  // profit rent on the type's own energy column
    bool always_defer = false;  // profit: lowest-VoT deferral column in every slot
};

// Exit codes: 0 success, 1 solver failure, 2 invalid input (nothing written).
int run(const RunConfig& config, std::ostream& log);

// Formats with 12 significant digits, the precision of every emitted number.
std::string format_number(double x);
double round_to_output(double x);

}  // namespace evmenu
