#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace confaudit::cli {

enum ExitCode : int {
    kOk = 0,
    kValidationFailure = 1,
    kUsageError = 2,
};

// args excludes the program name. Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace confaudit::cli
